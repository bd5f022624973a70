#include "qrep/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace qrep {
namespace problems {

using cones::ConePtr;
using linalg::svec;

// ---- builder ----

int Builder::add(ConePtr cone) {
    const int off = cols_;
    cols_ += cone->dim();
    cones_.push_back(std::move(cone));
    return off;
}

void Builder::add_rows(std::vector<Block> blocks, const RVec& rhs) {
    for (const Block& b : blocks)
        if (b.M.rows() != rhs.size()) throw DimensionError("builder: block rows disagree with rhs");
    rows_ += static_cast<int>(rhs.size());
    groups_.push_back({std::move(blocks), rhs});
}

void Builder::add_row(const std::vector<std::pair<int, double>>& coefs, double rhs) {
    std::vector<Block> blocks;
    for (const auto& [col, v] : coefs) blocks.push_back({col, RMat::Constant(1, 1, v)});
    add_rows(std::move(blocks), RVec::Constant(1, rhs));
}

void Builder::add_cost(int col, const RVec& c) { costs_.push_back({col, c}); }

ipm::ConicProblem Builder::finish(std::string name, double offset, double sign) {
    ipm::ConicProblem p;
    p.A = RMat::Zero(rows_, cols_);
    p.b = RVec::Zero(rows_);
    p.c = RVec::Zero(cols_);
    int r = 0;
    for (const Group& g : groups_) {
        const int k = static_cast<int>(g.rhs.size());
        for (const Block& b : g.blocks) {
            if (b.col < 0 || b.col + b.M.cols() > cols_) throw DimensionError("builder: block outside the columns");
            p.A.block(r, b.col, k, b.M.cols()) += b.M;
        }
        p.b.segment(r, k) = g.rhs;
        r += k;
    }
    for (const auto& [col, c] : costs_) {
        if (col < 0 || col + c.size() > cols_) throw DimensionError("builder: cost outside the columns");
        p.c.segment(col, c.size()) += c;
    }
    p.cones = std::move(cones_);
    p.offset = offset;
    p.sign = sign;
    p.name = std::move(name);
    cones_.clear();
    groups_.clear();
    costs_.clear();
    cols_ = rows_ = 0;
    p.validate();
    return p;
}

// ---- random data ----

CMat random_density_matrix(int n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("random density: n must be positive");
    std::mt19937_64 rng(seed);
    const CMat G = linalg::complex_gaussian(n, n, rng);
    CMat X = G * G.adjoint();
    X /= X.trace().real();
    return linalg::hermitian_part(X);
}

CMat random_stinespring(int ni, int no, int ne, std::uint64_t seed) {
    if (ni < 1 || no < 1 || ne < 1 || no * ne < ni) throw ParameterError("random stinespring: bad dimensions");
    std::mt19937_64 rng(seed);
    const CMat G = linalg::complex_gaussian(no * ne, ni, rng);
    Eigen::HouseholderQR<CMat> qr(G);
    return qr.householderQ() * CMat::Identity(no * ne, ni);
}

CMat random_unitary(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const CMat G = linalg::complex_gaussian(n, n, rng);
    Eigen::HouseholderQR<CMat> qr(G);
    CMat Q = qr.householderQ();
    const CMat R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        const double a = std::abs(R(j, j));
        if (a > 0) Q.col(j) *= R(j, j) / a;
    }
    return Q;
}

namespace {

RMat eye(int k) { return RMat::Identity(k, k); }

// Row form of X -> <M, X> on svec coordinates.
RMat functional(const CMat& M) { return svec(M).transpose(); }

int diag_index(int i) { return i * i + 2 * i; }

// X -> I_n (x) tr_1^{n,m} X
LinearMap marginal_lift(int n, int m) {
    return LinearMap::compose(LinearMap::kron_identity(1, n, m), LinearMap::partial_trace(1, n, m));
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ParameterError(msg);
}

[[noreturn]] void unknown_formulation(const std::string& app, const std::string& f) {
    throw ParameterError(app + ": unknown formulation '" + f + "'");
}

}  // namespace

// ---- key rate ----

QKDSpec QKDSpec::dprbb84(int c, double p, std::uint64_t seed) {
    QKDSpec s;
    s.kind = QKDKind::DprBB84;
    s.c = c;
    s.p = p;
    s.protocol = cones::dprbb84_protocol(c, p);
    s.seed = seed;
    return s;
}

QKDSpec QKDSpec::dmcv(int Nc, std::uint64_t seed, const std::vector<CMat>& P) {
    QKDSpec s;
    s.kind = QKDKind::DMCV;
    s.Nc = Nc;
    s.protocol = cones::dmcv_protocol(Nc, P.empty() ? cones::dmcv_placeholder_measurements(Nc) : P);
    s.seed = seed;
    return s;
}

QKDSpec QKDSpec::generic(cones::QKDProtocol proto, std::uint64_t seed) {
    QKDSpec s;
    s.kind = QKDKind::Generic;
    s.protocol = std::move(proto);
    s.seed = seed;
    return s;
}

void QKDSpec::synthesize_constraints() {
    if (!gammas.empty()) return;
    const int n = protocol.input_side();
    const CMat X0 = random_density_matrix(n, seed);
    std::mt19937_64 rng(seed + 1);
    gammas.push_back(CMat::Identity(n, n));
    const int k = num_random < 0 ? n * n - n : num_random;
    for (int i = 0; i < k; ++i) gammas.push_back(linalg::random_hermitian(n, rng));
    values.clear();
    for (const CMat& g : gammas) values.push_back(linalg::inner(g, X0));
}

ipm::ConicProblem build_qkd(QKDSpec spec, const std::string& formulation) {
    spec.synthesize_constraints();
    const cones::QKDProtocol& proto = spec.protocol;
    const int n = proto.input_side();
    require(spec.gammas.size() == spec.values.size(), "qkd: constraint matrices and values differ in count");
    RMat Acon(static_cast<int>(spec.gammas.size()), n * n);
    for (size_t k = 0; k < spec.gammas.size(); ++k) {
        require(spec.gammas[k].rows() == n && spec.gammas[k].cols() == n, "qkd: constraint matrix has wrong size");
        Acon.row(static_cast<int>(k)) = functional(spec.gammas[k]);
    }
    const RVec bcon = Eigen::Map<const RVec>(spec.values.data(), static_cast<int>(spec.values.size()));
    const double offset = spec.p_pass * spec.delta_ec;

    Builder B;
    if (formulation == "tailored") {
        ConePtr cone;
        if (spec.kind == QKDKind::DprBB84)
            cone = cones::QKDCone::dprbb84(spec.c, spec.p);
        else
            cone = cones::QKDCone::generic(proto);
        const int q = B.add(std::move(cone));
        B.add_rows({{q + 1, Acon}}, bcon);
        B.add_cost(q, 1.0);
        return B.finish("qkd-" + proto.tag + "/tailored", offset);
    }
    if (formulation == "qre-lift") {
        const LinearMap G = proto.G();
        const LinearMap ZG = LinearMap::compose(proto.Z(), G);
        const structure::FacialReduction fz = structure::facial_reduce(ZG);
        if (structure::facial_reduce(G).rank != fz.rank)
            throw DomainError("qkd qre-lift: G(I) and Z(G(I)) differ in rank, the lift has no interior");
        const RMat Mg = fz.reduced(G).matrix(), Mz = fz.reduced(ZG).matrix();
        const int r = fz.rank;
        const int x = B.add(std::make_unique<cones::PSDCone>(n));
        const int q = B.add(std::make_unique<cones::QRECone>(r));
        const RVec zero = RVec::Zero(r * r);
        B.add_rows({{q + 1, eye(r * r)}, {x, -Mg}}, zero);
        B.add_rows({{q + 1 + r * r, eye(r * r)}, {x, -Mz}}, zero);
        B.add_rows({{x, Acon}}, bcon);
        B.add_cost(q, 1.0);
        return B.finish("qkd-" + proto.tag + "/qre-lift", offset);
    }
    unknown_formulation("qkd", formulation);
}

// ---- rate distortion ----

RateDistortionSpec RateDistortionSpec::entanglement_fidelity(const CMat& W, double D) {
    require(W.rows() == W.cols() && W.rows() > 0, "qrd: source must be square");
    const int n = static_cast<int>(W.rows());
    const linalg::Spectral s = linalg::eigh(linalg::hermitian_part(W));
    RateDistortionSpec spec;
    spec.W = CMat::Zero(n, n);
    for (int i = 0; i < n; ++i) spec.W(i, i) = s.lambda(i);
    spec.m = n;
    CVec psi = CVec::Zero(n * n);
    for (int i = 0; i < n; ++i) psi(i * n + i) = std::sqrt(std::max(0.0, s.lambda(i)));
    spec.Delta = CMat::Identity(n * n, n * n) - psi * psi.adjoint();
    spec.D = D;
    spec.kind = DistortionKind::EntanglementFidelity;
    spec.validate();
    return spec;
}

RateDistortionSpec RateDistortionSpec::explicit_distortion(const CMat& W, int m, const CMat& Delta, double D) {
    RateDistortionSpec spec;
    spec.W = W;
    spec.m = m;
    spec.Delta = Delta;
    spec.D = D;
    spec.kind = DistortionKind::Explicit;
    spec.validate();
    return spec;
}

void RateDistortionSpec::validate() const {
    const int n = this->n();
    require(n > 0 && W.cols() == n && m > 0, "qrd: bad source or output dimension");
    require(linalg::is_hermitian(W, 1e-12), "qrd: source not Hermitian");
    require(std::abs(W.trace().real() - 1.0) <= 1e-12, "qrd: source trace must be 1");
    require(linalg::eigh(W).lambda.minCoeff() > 0, "qrd: source must be positive definite");
    require(Delta.rows() == n * m && Delta.cols() == n * m, "qrd: distortion matrix has wrong size");
    require(linalg::is_hermitian(Delta, 1e-12), "qrd: distortion matrix not Hermitian");
    require(linalg::eigh(Delta).lambda.minCoeff() >= -1e-12, "qrd: distortion matrix not PSD");
    require(D >= 0, "qrd: distortion budget must be nonnegative");
}

ipm::ConicProblem build_qrd(const RateDistortionSpec& spec, const std::string& formulation) {
    spec.validate();
    const int n = spec.n(), m = spec.m, N = n * m;
    const double offset = linalg::quantum_entropy(spec.W);
    Builder B;
    const std::string name = "qrd/" + formulation;

    // tr_2 X = W, <Delta, X> + s = D on the full matrix variable at column x.
    auto full_constraints = [&](int x) {
        B.add_rows({{x, LinearMap::partial_trace(2, n, m).matrix()}}, svec(spec.W));
        const int s = B.add(std::make_unique<cones::NonnegCone>(1));
        B.add_rows({{x, functional(spec.Delta)}, {s, RMat::Ones(1, 1)}}, RVec::Constant(1, spec.D));
    };

    if (formulation == "qre-lift") {
        const int q = B.add(std::make_unique<cones::QRECone>(N));
        B.add_rows({{q + 1 + N * N, eye(N * N)}, {q + 1, -marginal_lift(n, m).matrix()}}, RVec::Zero(N * N));
        full_constraints(q + 1);
        B.add_cost(q, 1.0);
        return B.finish(name, offset);
    }
    if (formulation == "qce") {
        const int q = B.add(std::make_unique<cones::QCECone>(n, m));
        full_constraints(q + 1);
        B.add_cost(q, 1.0);
        return B.finish(name, offset);
    }

    if (formulation != "ef-subspace-qrd" && formulation != "ef-subspace-qre" && formulation != "ef-subspace-qce")
        unknown_formulation("qrd", formulation);
    require(spec.kind == DistortionKind::EntanglementFidelity, "qrd: subspace formulations need the entanglement-fidelity distortion");
    RVec w(n), sw(n);
    for (int i = 0; i < n; ++i) {
        w(i) = spec.W(i, i).real();
        sw(i) = std::sqrt(w(i));
    }
    const auto pairs = cones::QRDCone::pairs(n);
    const int ny = static_cast<int>(pairs.size());

    if (formulation == "ef-subspace-qce") {
        const int q = B.add(std::make_unique<cones::QCECone>(n, n));
        const int x = q + 1;
        // Entries outside span{e_ii (x) e_jj} U {e_i e_j^H (x) e_i e_j^H} vanish.
        std::vector<int> zero;
        for (int r = 0; r < N; ++r)
            for (int c = 0; c < r; ++c) {
                const bool rd = r / n == r % n, cd = c / n == c % n;
                if (rd && cd) continue;
                const int k = r * r + 2 * c;
                zero.push_back(k);
                zero.push_back(k + 1);
            }
        if (!zero.empty()) {
            RMat Z = RMat::Zero(static_cast<int>(zero.size()), N * N);
            for (size_t k = 0; k < zero.size(); ++k) Z(static_cast<int>(k), zero[k]) = 1.0;
            B.add_rows({{x, Z}}, RVec::Zero(static_cast<int>(zero.size())));
        }
        full_constraints(x);
        B.add_cost(q, 1.0);
        return B.finish(name, offset);
    }

    // (y, Z) coordinates. Row i of tr_2 G(y, Z): Z_ii + sum_j y_(i,j) = w_i.
    RMat Ty = RMat::Zero(n, ny), Tz = RMat::Zero(n, n * n);
    // Reduced marginal ghat_j = Z_jj + sum_i y_(i,j).
    RMat Gy = RMat::Zero(n, ny), Gz = RMat::Zero(n, n * n);
    for (int k = 0; k < ny; ++k) {
        Ty(pairs[k].first, k) = 1.0;
        Gy(pairs[k].second, k) = 1.0;
    }
    for (int i = 0; i < n; ++i) Tz(i, diag_index(i)) = Gz(i, diag_index(i)) = 1.0;
    CMat DZ = CMat::Identity(n, n) - sw.cast<Complex>() * sw.cast<Complex>().transpose();
    const RMat Dy = RMat::Ones(1, ny), Dz = functional(DZ);

    auto subspace_constraints = [&](int ycol, int zcol) {
        std::vector<Builder::Block> tb{{zcol, Tz}};
        if (ny > 0) tb.push_back({ycol, Ty});
        B.add_rows(tb, w);
        const int s = B.add(std::make_unique<cones::NonnegCone>(1));
        std::vector<Builder::Block> db{{zcol, Dz}, {s, RMat::Ones(1, 1)}};
        if (ny > 0) db.push_back({ycol, Dy});
        B.add_rows(db, RVec::Constant(1, spec.D));
    };

    if (formulation == "ef-subspace-qrd") {
        const int q = B.add(std::make_unique<cones::QRDCone>(n));
        subspace_constraints(q + 1, q + 1 + ny);
        B.add_cost(q, 1.0);
        return B.finish(name, offset);
    }

    // ef-subspace-qre: (t1, y, ghat_j(i)) in CRE, (t2, Z, diag(ghat)) in QRE.
    require(ny > 0, "qrd: subspace qre formulation needs n >= 2");
    const int a = B.add(std::make_unique<cones::CRECone>(ny));
    const int q = B.add(std::make_unique<cones::QRECone>(n));
    const int ycol = a + 1, zcol = q + 1;
    RMat Sel = RMat::Zero(ny, n);  // pair k -> its column j
    for (int k = 0; k < ny; ++k) Sel(k, pairs[k].second) = 1.0;
    B.add_rows({{a + 1 + ny, eye(ny)}, {ycol, -Sel * Gy}, {zcol, -Sel * Gz}}, RVec::Zero(ny));
    RMat Dg = RMat::Zero(n * n, n);  // svec(diag(v)) = Dg v
    for (int i = 0; i < n; ++i) Dg(diag_index(i), i) = 1.0;
    B.add_rows({{q + 1 + n * n, eye(n * n)}, {ycol, -Dg * Gy}, {zcol, -Dg * Gz}}, RVec::Zero(n * n));
    subspace_constraints(ycol, zcol);
    B.add_cost(a, 1.0);
    B.add_cost(q, 1.0);
    return B.finish(name, offset);
}

// ---- channels ----

CMat stinespring_from_kraus(const std::vector<CMat>& K) {
    require(!K.empty(), "stinespring: empty Kraus list");
    const int ne = static_cast<int>(K.size());
    CMat V = CMat::Zero(K[0].rows() * ne, K[0].cols());
    for (int k = 0; k < ne; ++k) {
        CMat e = CMat::Zero(ne, 1);
        e(k, 0) = 1.0;
        V += linalg::kron(K[k], e);
    }
    return V;
}

std::vector<CMat> amplitude_damping_kraus(double gamma) {
    require(gamma >= 0 && gamma <= 1, "amplitude damping: gamma must lie in [0, 1]");
    CMat A0 = CMat::Zero(2, 2), A1 = CMat::Zero(2, 2);
    A0(0, 0) = 1.0;
    A0(1, 1) = std::sqrt(1.0 - gamma);
    A1(0, 1) = std::sqrt(gamma);
    return {A0, A1};
}

namespace {

std::vector<CMat> kraus_product(const std::vector<std::vector<CMat>>& lists) {
    std::vector<CMat> out{CMat::Identity(1, 1)};
    for (const auto& L : lists) {
        std::vector<CMat> next;
        for (const CMat& a : out)
            for (const CMat& b : L) next.push_back(linalg::kron(a, b));
        out = std::move(next);
    }
    return out;
}

}  // namespace

LinearMap ChannelSpec::channel() const {
    return LinearMap::compose(LinearMap::partial_trace(2, no, ne), LinearMap::congruence(V));
}

LinearMap ChannelSpec::complementary() const {
    return LinearMap::compose(LinearMap::partial_trace(1, no, ne), LinearMap::congruence(V));
}

double ChannelSpec::degradability_residual(std::uint64_t seed, int trials) const {
    require(has_degrading(), "channel: no degrading isometry");
    const LinearMap Nm = channel(), Nc = complementary();
    const LinearMap Xi = LinearMap::compose(LinearMap::partial_trace(2, ne, nf), LinearMap::congruence(Wd));
    std::mt19937_64 rng(seed);
    double worst = 0;
    for (int t = 0; t < trials; ++t) {
        const CMat X = linalg::random_density(ni, rng);
        worst = std::max(worst, (Xi.apply(Nm.apply(X)) - Nc.apply(X)).norm());
    }
    return worst;
}

void ChannelSpec::validate() const {
    require(ni > 0 && no > 0 && ne > 0, "channel: dimensions must be positive");
    require(V.rows() == no * ne && V.cols() == ni, "channel: isometry has wrong shape");
    require((V.adjoint() * V - CMat::Identity(ni, ni)).norm() <= 1e-10, "channel: V is not an isometry");
    if (has_degrading()) {
        require(nf > 0 && Wd.rows() == ne * nf && Wd.cols() == no, "channel: degrading isometry has wrong shape");
        require((Wd.adjoint() * Wd - CMat::Identity(no, no)).norm() <= 1e-10, "channel: degrading map is not an isometry");
    }
}

ChannelSpec ChannelSpec::from_isometry(const CMat& V, int no, int ne) {
    ChannelSpec ch;
    ch.V = V;
    ch.ni = static_cast<int>(V.cols());
    ch.no = no;
    ch.ne = ne;
    ch.validate();
    return ch;
}

ChannelSpec ChannelSpec::from_kraus(const std::vector<CMat>& K) {
    return from_isometry(stinespring_from_kraus(K), static_cast<int>(K.at(0).rows()), static_cast<int>(K.size()));
}

ChannelSpec ChannelSpec::identity(int n) { return from_isometry(CMat::Identity(n, n), n, 1); }

ChannelSpec ChannelSpec::amplitude_damping(const std::vector<double>& gammas, std::optional<std::uint64_t> rotate_seed) {
    require(!gammas.empty(), "amplitude damping: need at least one qubit");
    std::vector<std::vector<CMat>> ka, kb;
    for (double g : gammas) {
        require(g >= 0 && g <= 0.5, "amplitude damping: degradable only for gamma <= 1/2");
        ka.push_back(amplitude_damping_kraus(g));
        // AD(x) o AD(g) = AD(1 - g), the complementary channel.
        kb.push_back(amplitude_damping_kraus(g < 1 ? (1.0 - 2.0 * g) / (1.0 - g) : 0.0));
    }
    std::vector<CMat> K = kraus_product(ka);
    if (rotate_seed) {
        const CMat U = random_unitary(static_cast<int>(K[0].cols()), *rotate_seed);
        for (CMat& k : K) k = k * U;
    }
    ChannelSpec ch = from_kraus(K);
    const std::vector<CMat> Kb = kraus_product(kb);
    ch.Wd = stinespring_from_kraus(Kb);
    ch.nf = static_cast<int>(Kb.size());
    ch.validate();
    return ch;
}

ipm::ConicProblem build_eacc(const ChannelSpec& ch, const std::string& formulation) {
    ch.validate();
    const int ni = ch.ni, no = ch.no, ne = ch.ne, N = no * ne;
    const RMat trace_row = functional(CMat::Identity(ni, ni));
    Builder B;
    const std::string name = "eacc/" + formulation;
    if (formulation == "qmi") {
        const int q = B.add(std::make_unique<cones::QMICone>(ch.V, no, ne));
        B.add_rows({{q + 1, trace_row}}, RVec::Ones(1));
        B.add_cost(q, 1.0);
        return B.finish(name, 0, -1);
    }
    if (formulation != "qre+qe" && formulation != "qce+qe") unknown_formulation("eacc", formulation);
    const LinearMap VV = LinearMap::congruence(ch.V);
    const int x = B.add(std::make_unique<cones::PSDCone>(ni));
    int q;
    if (formulation == "qre+qe") {
        q = B.add(std::make_unique<cones::QRECone>(N));
        B.add_rows({{q + 1 + N * N, eye(N * N)}, {x, -LinearMap::compose(marginal_lift(no, ne), VV).matrix()}},
                   RVec::Zero(N * N));
    } else {
        q = B.add(std::make_unique<cones::QCECone>(no, ne));
    }
    B.add_rows({{q + 1, eye(N * N)}, {x, -VV.matrix()}}, RVec::Zero(N * N));
    const int e = B.add(std::make_unique<cones::QECone>(no));
    B.add_rows({{e + 1, eye(no * no)}, {x, -ch.channel().matrix()}}, RVec::Zero(no * no));
    B.add_rows({{e + 1 + no * no, RMat::Ones(1, 1)}, {x, -trace_row}}, RVec::Zero(1));
    B.add_rows({{x, trace_row}}, RVec::Ones(1));
    B.add_cost(q, 1.0);
    B.add_cost(e, 1.0);
    return B.finish(name, 0, -1);
}

ipm::ConicProblem build_qqcc(const ChannelSpec& ch, const std::string& formulation) {
    ch.validate();
    require(ch.has_degrading(), "qqcc: channel has no degrading map");
    const double res = ch.degradability_residual(7);
    if (!(res < 1e-8)) throw ParameterError("qqcc: degradability check failed (residual " + std::to_string(res) + ")");
    const int ni = ch.ni, no = ch.no, ne = ch.ne, nf = ch.nf, N = ne * nf;
    // Reorder the degrading output to F (x) E so that tr_1 leaves E.
    CMat P = CMat::Zero(N, N);
    for (int e = 0; e < ne; ++e)
        for (int f = 0; f < nf; ++f) P(f * ne + e, e * nf + f) = 1.0;
    const CMat Wp = P * ch.Wd;
    const LinearMap Nm = ch.channel();
    const LinearMap WN = LinearMap::compose(LinearMap::congruence(Wp), Nm);
    const RMat trace_row = functional(CMat::Identity(ni, ni));
    Builder B;
    const std::string name = "qqcc/" + formulation;
    (void)no;
    if (formulation == "qci") {
        const int q = B.add(std::make_unique<cones::QCICone>(Nm, Wp, nf, ne));
        B.add_rows({{q + 1, trace_row}}, RVec::Ones(1));
        B.add_cost(q, 1.0);
        return B.finish(name, 0, -1);
    }
    if (formulation != "qre" && formulation != "qce") unknown_formulation("qqcc", formulation);
    const int x = B.add(std::make_unique<cones::PSDCone>(ni));
    int q;
    if (formulation == "qre") {
        q = B.add(std::make_unique<cones::QRECone>(N));
        B.add_rows({{q + 1 + N * N, eye(N * N)}, {x, -LinearMap::compose(marginal_lift(nf, ne), WN).matrix()}},
                   RVec::Zero(N * N));
    } else {
        q = B.add(std::make_unique<cones::QCECone>(nf, ne));
    }
    B.add_rows({{q + 1, eye(N * N)}, {x, -WN.matrix()}}, RVec::Zero(N * N));
    B.add_rows({{x, trace_row}}, RVec::Ones(1));
    B.add_cost(q, 1.0);
    return B.finish(name, 0, -1);
}

// ---- ground state energy ----

CMat xxz_term(double delta) {
    CMat X(2, 2), Y(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    return -linalg::kron(X, X) - linalg::kron(Y, Y) - delta * linalg::kron(Z, Z);
}

HamiltonianSpec HamiltonianSpec::xxz(double delta, int l) {
    HamiltonianSpec s;
    s.h = xxz_term(delta);
    s.l = l;
    s.validate();
    return s;
}

void HamiltonianSpec::validate() const {
    require(l >= 2, "gse: chain parameter l must be at least 2");
    require(h.rows() == 4 && h.cols() == 4, "gse: local term must be 4 x 4");
    require(linalg::is_hermitian(h, 1e-12), "gse: local term not Hermitian");
}

ipm::ConicProblem build_gse(const HamiltonianSpec& spec, const std::string& formulation) {
    spec.validate();
    const int l = spec.l, N = 1 << l, k = N / 2;
    const CMat H = linalg::kron(spec.h, CMat::Identity(N / 4, N / 4).eval());
    Builder B;
    int q;
    if (formulation == "qce") {
        q = B.add(std::make_unique<cones::QCECone>(2, k));
    } else if (formulation == "qre-lift") {
        q = B.add(std::make_unique<cones::QRECone>(N));
        B.add_rows({{q + 1 + N * N, eye(N * N)}, {q + 1, -marginal_lift(2, k).matrix()}}, RVec::Zero(N * N));
    } else {
        unknown_formulation("gse", formulation);
    }
    const int x = q + 1;
    B.add_row({{q, 1.0}}, 0.0);
    const RMat T = LinearMap::partial_trace(1, 2, k).matrix() - LinearMap::partial_trace(2, k, 2).matrix();
    B.add_rows({{x, T}}, RVec::Zero(k * k));
    B.add_rows({{x, functional(CMat::Identity(N, N))}}, RVec::Ones(1));
    B.add_cost(x, svec(H));
    return B.finish("gse/" + formulation);
}

double periodic_chain_energy_density(const CMat& h, int sites) {
    require(sites >= 2 && sites <= 20, "chain: site count out of range");
    CMat Zt = CMat::Zero(4, 4);
    for (int a = 0; a < 4; ++a) Zt(a, a) = ((a >> 1) & 1 ? -1.0 : 1.0) + (a & 1 ? -1.0 : 1.0);
    require((h * Zt - Zt * h).norm() <= 1e-12, "chain: local term does not conserve magnetization");
    const int L = sites;
    auto bit = [L](unsigned s, int site) { return (s >> (L - 1 - site)) & 1u; };
    double best = std::numeric_limits<double>::infinity();
    for (int up = 0; up <= L; ++up) {
        std::vector<unsigned> states;
        std::map<unsigned, int> index;
        for (unsigned s = 0; s < (1u << L); ++s)
            if (__builtin_popcount(s) == up) {
                index[s] = static_cast<int>(states.size());
                states.push_back(s);
            }
        const int d = static_cast<int>(states.size());
        CMat Hs = CMat::Zero(d, d);
        for (int col = 0; col < d; ++col) {
            const unsigned s = states[col];
            for (int i = 0; i < L; ++i) {
                const int j = (i + 1) % L;
                const unsigned in = (bit(s, i) << 1) | bit(s, j);
                for (unsigned out = 0; out < 4; ++out) {
                    const Complex v = h(out, in);
                    if (v == Complex(0)) continue;
                    unsigned t = s;
                    t &= ~((1u << (L - 1 - i)) | (1u << (L - 1 - j)));
                    t |= ((out >> 1) & 1u) << (L - 1 - i);
                    t |= (out & 1u) << (L - 1 - j);
                    Hs(index.at(t), col) += v;
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(Hs, Eigen::EigenvaluesOnly);
        best = std::min(best, es.eigenvalues()(0));
    }
    return best / L;
}

std::vector<std::string> formulations(const std::string& application) {
    if (application == "qkd") return {"tailored", "qre-lift"};
    if (application == "qrd") return {"qre-lift", "qce", "ef-subspace-qrd", "ef-subspace-qre", "ef-subspace-qce"};
    if (application == "eacc") return {"qre+qe", "qce+qe", "qmi"};
    if (application == "qqcc") return {"qre", "qce", "qci"};
    if (application == "gse") return {"qce", "qre-lift"};
    throw ParameterError("unknown application '" + application + "'");
}

}  // namespace problems
}  // namespace qrep
