#include "qrep/instance.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qrep/entropy_cones.hpp"
#include "qrep/problems.hpp"

namespace qrep {
namespace instance {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ParseError(path + ": " + msg); }

void keys(const json& j, const std::string& path, const std::set<std::string>& allowed,
          const std::set<std::string>& required = {}) {
    if (!j.is_object()) fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown field");
    for (const std::string& r : required)
        if (!j.contains(r)) fail(path + "." + r, "missing required field");
}

const json& field(const json& j, const std::string& path, const std::string& k) {
    if (!j.contains(k)) fail(path + "." + k, "missing required field");
    return j.at(k);
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<int>();
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

double num_or(const json& j, const std::string& path, const std::string& k, double d) {
    return j.contains(k) ? num(j.at(k), path + "." + k) : d;
}
int int_or(const json& j, const std::string& path, const std::string& k, int d) {
    return j.contains(k) ? integer(j.at(k), path + "." + k) : d;
}

Complex entry(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    fail(path, "expected a number or an [re, im] pair");
}

CMat cmatrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
    const int rows = static_cast<int>(j.size());
    if (!j[0].is_array() || j[0].empty()) fail(path + "[0]", "expected a nonempty row");
    const int cols = static_cast<int>(j[0].size());
    CMat M(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) fail(rp, "row length differs from the first row");
        for (int c = 0; c < cols; ++c) M(r, c) = entry(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return M;
}

RVec rvec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    RVec v(static_cast<int>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = num(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

RMat rmatrix(const json& j, const std::string& path, int cols_hint = -1) {
    if (!j.is_array()) fail(path, "expected an array of rows");
    const int rows = static_cast<int>(j.size());
    int cols = cols_hint;
    if (rows > 0) {
        if (!j[0].is_array()) fail(path + "[0]", "expected a row");
        cols = static_cast<int>(j[0].size());
    }
    RMat M(rows, std::max(cols, 0));
    for (int r = 0; r < rows; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != cols) fail(rp, "row length differs from the first row");
        for (int c = 0; c < cols; ++c) M(r, c) = num(j[r][c], rp + "[" + std::to_string(c) + "]");
    }
    return M;
}

std::vector<CMat> cmatrices(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of matrices");
    std::vector<CMat> out;
    for (size_t i = 0; i < j.size(); ++i) out.push_back(cmatrix(j[i], path + "[" + std::to_string(i) + "]"));
    for (size_t i = 1; i < out.size(); ++i)
        if (out[i].rows() != out[0].rows() || out[i].cols() != out[0].cols())
            fail(path + "[" + std::to_string(i) + "]", "matrix shape differs from the first");
    return out;
}

std::vector<int> ints(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of integers");
    std::vector<int> v;
    for (size_t i = 0; i < j.size(); ++i) v.push_back(integer(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

// Linear map record: exactly one of the builder keys.
LinearMap linear_map(const json& j, const std::string& path) {
    keys(j, path, {"kraus", "weights", "dense", "identity", "partial_trace", "pinching", "congruence"});
    int count = 0;
    for (const char* k : {"kraus", "dense", "identity", "partial_trace", "pinching", "congruence"}) count += j.contains(k);
    if (count != 1) fail(path, "expected exactly one of kraus, dense, identity, partial_trace, pinching, congruence");
    if (j.contains("weights") && !j.contains("kraus")) fail(path + ".weights", "only valid with kraus");
    if (j.contains("kraus")) {
        const std::vector<CMat> K = cmatrices(j.at("kraus"), path + ".kraus");
        if (!j.contains("weights")) return LinearMap::kraus(K);
        const RVec w = rvec(j.at("weights"), path + ".weights");
        if (w.size() != static_cast<int>(K.size())) fail(path + ".weights", "one weight per Kraus operator expected");
        RMat M = RMat::Zero(K[0].rows() * K[0].rows(), K[0].cols() * K[0].cols());
        for (size_t k = 0; k < K.size(); ++k) M += w(static_cast<int>(k)) * LinearMap::kraus({K[k]}).matrix();
        return LinearMap::dense(M);
    }
    try {
        if (j.contains("dense")) return LinearMap::dense(rmatrix(j.at("dense"), path + ".dense"));
        if (j.contains("identity")) return LinearMap::identity(integer(j.at("identity"), path + ".identity"));
        if (j.contains("pinching")) return LinearMap::pinching(ints(j.at("pinching"), path + ".pinching"));
        if (j.contains("congruence")) return LinearMap::congruence(cmatrix(j.at("congruence"), path + ".congruence"));
        const json& p = j.at("partial_trace");
        const std::string pp = path + ".partial_trace";
        keys(p, pp, {"side", "n", "m"}, {"side", "n", "m"});
        return LinearMap::partial_trace(integer(p.at("side"), pp + ".side"), integer(p.at("n"), pp + ".n"),
                                        integer(p.at("m"), pp + ".m"));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

cones::Strategy strategy_or(const json& j, const std::string& path, cones::Strategy d) {
    if (!j.contains("strategy")) return d;
    try {
        return cones::parse_strategy(str(j.at("strategy"), path + ".strategy"));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(path + ".strategy", e.what());
    }
}

cones::QKDProtocol protocol(const json& j, const std::string& path) {
    const std::string kind = str(field(j, path, "protocol"), path + ".protocol");
    if (kind == "dprbb84") return cones::dprbb84_protocol(int_or(j, path, "c", 1), num_or(j, path, "p", 0.5));
    if (kind == "dmcv") {
        const int Nc = int_or(j, path, "Nc", 3);
        if (j.contains("P")) return cones::dmcv_protocol(Nc, cmatrices(j.at("P"), path + ".P"));
        return cones::dmcv_protocol(Nc, cones::dmcv_placeholder_measurements(Nc));
    }
    if (kind == "generic") {
        cones::QKDProtocol p;
        p.tag = "generic";
        p.kraus = cmatrices(field(j, path, "kraus"), path + ".kraus");
        p.blocks = ints(field(j, path, "blocks"), path + ".blocks");
        return p;
    }
    fail(path + ".protocol", "unknown protocol '" + kind + "'");
}

cones::ConePtr cone(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected a cone record");
    const std::string type = str(field(j, path, "type"), path + ".type");
    auto size = [&](const char* k) {
        const int v = integer(field(j, path, k), path + "." + k);
        if (v < 1) fail(path + "." + k, "must be positive");
        return v;
    };
    try {
        if (type == "nonneg") {
            keys(j, path, {"type", "dim"});
            return std::make_unique<cones::NonnegCone>(size("dim"));
        }
        if (type == "psd") {
            keys(j, path, {"type", "side"});
            return std::make_unique<cones::PSDCone>(size("side"));
        }
        if (type == "qre") {
            keys(j, path, {"type", "side"});
            return std::make_unique<cones::QRECone>(size("side"));
        }
        if (type == "qe") {
            keys(j, path, {"type", "side"});
            return std::make_unique<cones::QECone>(size("side"));
        }
        if (type == "cre") {
            keys(j, path, {"type", "dim"});
            return std::make_unique<cones::CRECone>(size("dim"));
        }
        if (type == "qrd") {
            keys(j, path, {"type", "side"});
            return std::make_unique<cones::QRDCone>(size("side"));
        }
        if (type == "qce") {
            keys(j, path, {"type", "n", "m", "strategy"});
            return std::make_unique<cones::QCECone>(size("n"), size("m"),
                                                    strategy_or(j, path, cones::Strategy::DifferenceOfEntropies));
        }
        if (type == "composed") {
            keys(j, path, {"type", "G", "H", "strategy"}, {"G", "H"});
            return std::make_unique<cones::ComposedQRECone>(linear_map(j.at("G"), path + ".G"),
                                                            linear_map(j.at("H"), path + ".H"),
                                                            strategy_or(j, path, cones::Strategy::Dense));
        }
        if (type == "qkd") {
            keys(j, path, {"type", "protocol", "c", "p", "Nc", "P", "kraus", "blocks", "strategy"});
            const cones::QKDProtocol proto = protocol(j, path);
            if (proto.tag == "dprbb84")
                return cones::QKDCone::dprbb84(int_or(j, path, "c", 1), num_or(j, path, "p", 0.5),
                                               strategy_or(j, path, cones::Strategy::LowRank));
            return cones::QKDCone::generic(proto, strategy_or(j, path, cones::Strategy::BlockDiagonal));
        }
        if (type == "qmi") {
            keys(j, path, {"type", "V", "m", "p"}, {"V", "m", "p"});
            return std::make_unique<cones::QMICone>(cmatrix(j.at("V"), path + ".V"), size("m"), size("p"));
        }
        if (type == "qci") {
            keys(j, path, {"type", "N", "W", "p", "q"}, {"N", "W", "p", "q"});
            return std::make_unique<cones::QCICone>(linear_map(j.at("N"), path + ".N"), cmatrix(j.at("W"), path + ".W"),
                                                    size("p"), size("q"));
        }
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    fail(path + ".type", "unknown cone type '" + type + "'");
}

// ---- application parameters ----

ipm::ConicProblem qkd_app(const json& j, const std::string& path, const std::string& f, std::uint64_t seed) {
    keys(j, path, {"protocol", "c", "p", "Nc", "P", "kraus", "blocks", "constraints", "num_random", "p_pass", "delta_ec"},
         {"protocol"});
    problems::QKDSpec spec;
    const std::string kind = str(j.at("protocol"), path + ".protocol");
    if (kind == "dprbb84")
        spec = problems::QKDSpec::dprbb84(int_or(j, path, "c", 1), num_or(j, path, "p", 0.5), seed);
    else if (kind == "dmcv")
        spec = problems::QKDSpec::dmcv(int_or(j, path, "Nc", 3), seed,
                                       j.contains("P") ? cmatrices(j.at("P"), path + ".P") : std::vector<CMat>{});
    else
        spec = problems::QKDSpec::generic(protocol(j, path), seed);
    spec.num_random = int_or(j, path, "num_random", -1);
    spec.p_pass = num_or(j, path, "p_pass", 0.0);
    spec.delta_ec = num_or(j, path, "delta_ec", 0.0);
    if (j.contains("constraints")) {
        const json& c = j.at("constraints");
        const std::string cp = path + ".constraints";
        keys(c, cp, {"matrices", "values"}, {"matrices", "values"});
        spec.gammas = cmatrices(c.at("matrices"), cp + ".matrices");
        const RVec v = rvec(c.at("values"), cp + ".values");
        if (v.size() != static_cast<int>(spec.gammas.size())) fail(cp + ".values", "one value per matrix expected");
        spec.values.assign(v.data(), v.data() + v.size());
    }
    return problems::build_qkd(spec, f);
}

ipm::ConicProblem qrd_app(const json& j, const std::string& path, const std::string& f, std::uint64_t seed) {
    keys(j, path, {"n", "W", "D", "distortion", "m"});
    CMat W;
    if (j.contains("W"))
        W = cmatrix(j.at("W"), path + ".W");
    else
        W = problems::random_density_matrix(int_or(j, path, "n", 2), seed);
    const double D = num_or(j, path, "D", 0.5);
    if (!j.contains("distortion") || j.at("distortion") == "entanglement-fidelity") {
        if (j.contains("m")) fail(path + ".m", "only valid with an explicit distortion matrix");
        return problems::build_qrd(problems::RateDistortionSpec::entanglement_fidelity(W, D), f);
    }
    const CMat Delta = cmatrix(j.at("distortion"), path + ".distortion");
    const int m = int_or(j, path, "m", static_cast<int>(W.rows()));
    return problems::build_qrd(problems::RateDistortionSpec::explicit_distortion(W, m, Delta, D), f);
}

problems::ChannelSpec eacc_channel(const json& j, const std::string& path, std::uint64_t seed) {
    keys(j, path, {"channel", "n", "V", "no", "ne", "kraus"}, {"channel"});
    const std::string ch = str(j.at("channel"), path + ".channel");
    if (ch == "identity") return problems::ChannelSpec::identity(int_or(j, path, "n", 2));
    if (ch == "random") {
        const int n = int_or(j, path, "n", 2);
        return problems::ChannelSpec::from_isometry(problems::random_stinespring(n, seed), n, n);
    }
    if (ch == "isometry")
        return problems::ChannelSpec::from_isometry(cmatrix(field(j, path, "V"), path + ".V"),
                                                    integer(field(j, path, "no"), path + ".no"),
                                                    integer(field(j, path, "ne"), path + ".ne"));
    if (ch == "kraus") return problems::ChannelSpec::from_kraus(cmatrices(field(j, path, "kraus"), path + ".kraus"));
    fail(path + ".channel", "unknown channel '" + ch + "'");
}

std::vector<double> random_gammas(int qubits, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    std::vector<double> g;
    for (int i = 0; i < qubits; ++i) g.push_back(u(rng));
    return g;
}

problems::ChannelSpec qqcc_channel(const json& j, const std::string& path, std::uint64_t seed) {
    keys(j, path, {"channel", "gamma", "rotate", "n", "V", "no", "ne", "W", "nf"}, {"channel"});
    const std::string ch = str(j.at("channel"), path + ".channel");
    if (ch == "amplitude-damping") {
        std::vector<double> g;
        const json& gj = field(j, path, "gamma");
        if (gj.is_array())
            g.assign(rvec(gj, path + ".gamma").data(), rvec(gj, path + ".gamma").data() + gj.size());
        else
            g.push_back(num(gj, path + ".gamma"));
        bool rotate = false;
        if (j.contains("rotate")) {
            if (!j.at("rotate").is_boolean()) fail(path + ".rotate", "expected a boolean");
            rotate = j.at("rotate").get<bool>();
        }
        return problems::ChannelSpec::amplitude_damping(g, rotate ? std::optional<std::uint64_t>(seed) : std::nullopt);
    }
    if (ch == "random") {
        const int n = int_or(j, path, "n", 2);
        int q = 0;
        while ((1 << q) < n) ++q;
        if ((1 << q) != n) fail(path + ".n", "random degradable channels need a power of two");
        return problems::ChannelSpec::amplitude_damping(random_gammas(q, seed), seed + 1);
    }
    if (ch == "isometry") {
        problems::ChannelSpec s = problems::ChannelSpec::from_isometry(
            cmatrix(field(j, path, "V"), path + ".V"), integer(field(j, path, "no"), path + ".no"),
            integer(field(j, path, "ne"), path + ".ne"));
        s.Wd = cmatrix(field(j, path, "W"), path + ".W");
        s.nf = integer(field(j, path, "nf"), path + ".nf");
        s.validate();
        return s;
    }
    fail(path + ".channel", "unknown channel '" + ch + "'");
}

ipm::ConicProblem gse_app(const json& j, const std::string& path, const std::string& f) {
    keys(j, path, {"l", "delta", "h"});
    problems::HamiltonianSpec s;
    s.l = int_or(j, path, "l", 2);
    s.h = j.contains("h") ? cmatrix(j.at("h"), path + ".h") : problems::xxz_term(num_or(j, path, "delta", -1.0));
    return problems::build_gse(s, f);
}

ipm::ConicProblem application(const std::string& app, const std::string& f, const json& params,
                              const std::string& path, std::uint64_t seed) {
    try {
        if (app == "qkd") return qkd_app(params, path, f, seed);
        if (app == "qrd") return qrd_app(params, path, f, seed);
        if (app == "eacc") return problems::build_eacc(eacc_channel(params, path, seed), f);
        if (app == "qqcc") return problems::build_qqcc(qqcc_channel(params, path, seed), f);
        if (app == "gse") return gse_app(params, path, f);
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    fail("application.name", "unknown application '" + app + "'");
}

ipm::ConicProblem raw_problem(const json& j, const std::string& path) {
    keys(j, path, {"c", "A", "b", "cones", "offset", "sign"}, {"c", "A", "b", "cones"});
    ipm::ConicProblem p;
    p.c = rvec(j.at("c"), path + ".c");
    p.A = rmatrix(j.at("A"), path + ".A", static_cast<int>(p.c.size()));
    p.b = rvec(j.at("b"), path + ".b");
    const json& cs = j.at("cones");
    if (!cs.is_array()) fail(path + ".cones", "expected an array");
    for (size_t i = 0; i < cs.size(); ++i) p.cones.push_back(cone(cs[i], path + ".cones[" + std::to_string(i) + "]"));
    p.offset = num_or(j, path, "offset", 0.0);
    p.sign = num_or(j, path, "sign", 1.0);
    p.name = "problem";
    try {
        p.validate();
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
    return p;
}

int line_of(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
    return line;
}

}  // namespace

Instance parse(const std::string& text, const std::string& source) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(source + ": line " + std::to_string(line_of(text, e.byte)) + ": malformed JSON (" + e.what() + ")");
    }
    keys(j, source, {"version", "id", "seed", "settings", "problem", "application"}, {"version", "seed"});
    if (integer(j.at("version"), source + ".version") != 1) fail(source + ".version", "unsupported schema version");
    const json& sj = j.at("seed");
    if (!sj.is_number_unsigned() && !(sj.is_number_integer() && sj.get<long long>() >= 0))
        fail(source + ".seed", "expected a nonnegative integer");
    Instance inst;
    inst.seed = sj.get<std::uint64_t>();
    inst.id = j.contains("id") ? str(j.at("id"), source + ".id") : source;
    if (j.contains("problem") == j.contains("application")) fail(source, "exactly one of problem, application expected");
    if (j.contains("problem")) {
        inst.payload = j.at("problem").dump();
    } else {
        const json& a = j.at("application");
        const std::string ap = source + ".application";
        keys(a, ap, {"name", "formulation", "params"}, {"name", "formulation"});
        inst.application = str(a.at("name"), ap + ".name");
        inst.formulation = str(a.at("formulation"), ap + ".formulation");
        inst.payload = a.contains("params") ? a.at("params").dump() : "{}";
    }
    if (j.contains("settings")) {
        const json& s = j.at("settings");
        const std::string sp = source + ".settings";
        keys(s, sp, {"gap_tol", "feas_tol", "max_iter", "verbose"});
        inst.settings.gap_tol = num_or(s, sp, "gap_tol", inst.settings.gap_tol);
        inst.settings.feas_tol = num_or(s, sp, "feas_tol", inst.settings.feas_tol);
        inst.settings.max_iter = int_or(s, sp, "max_iter", inst.settings.max_iter);
        if (s.contains("verbose")) {
            if (!s.at("verbose").is_boolean()) fail(sp + ".verbose", "expected a boolean");
            inst.settings.verbose = s.at("verbose").get<bool>();
        }
    }
    return inst;
}

Instance load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void apply(Instance& inst, const Overrides& o) {
    if (o.formulation) {
        if (inst.application.empty()) throw ParseError("--formulation: instance is a raw problem");
        inst.formulation = *o.formulation;
    }
    if (o.gap_tol) inst.settings.gap_tol = *o.gap_tol;
    if (o.feas_tol) inst.settings.feas_tol = *o.feas_tol;
    if (o.max_iter) inst.settings.max_iter = *o.max_iter;
    if (o.seed) inst.seed = *o.seed;
    if (o.verbose) inst.settings.verbose = true;
}

ipm::ConicProblem build(const Instance& inst) {
    const json j = json::parse(inst.payload);
    if (inst.application.empty()) return raw_problem(j, inst.id + ".problem");
    return application(inst.application, inst.formulation, j, inst.id + ".application.params", inst.seed);
}

std::vector<NamedMap> declared_maps(const Instance& inst) {
    std::vector<NamedMap> out;
    if (!inst.application.empty()) return out;
    const json j = json::parse(inst.payload);
    if (!j.contains("cones") || !j.at("cones").is_array()) return out;
    const json& cs = j.at("cones");
    for (size_t i = 0; i < cs.size(); ++i) {
        const std::string p = "cones[" + std::to_string(i) + "]";
        const json& c = cs[i];
        if (!c.is_object()) continue;
        for (const char* k : {"G", "H", "N"})
            if (c.contains(k)) out.push_back({p + "." + k, linear_map(c.at(k), p + "." + k)});
    }
    return out;
}

ipm::ConicProblem build_application(const std::string& app, const std::string& formulation,
                                    const std::string& params_json, std::uint64_t seed) {
    json j;
    try {
        j = json::parse(params_json);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("params: malformed JSON (") + e.what() + ")");
    }
    return application(app, formulation, j, "params", seed);
}

}  // namespace instance
}  // namespace qrep
