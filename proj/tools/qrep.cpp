#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qrep/instance.hpp"
#include "qrep/problems.hpp"

using namespace qrep;

namespace {

enum Exit { Ok = 0, ParseFail = 1, Infeasible = 2, NumFail = 3, CheckFail = 4 };

int memory_guard() {
    const char* v = std::getenv("QREP_MEMORY_GUARD_DIM");
    if (!v || !*v) return 4096;
    char* end = nullptr;
    const long d = std::strtol(v, &end, 10);
    if (*end != '\0' || d <= 0) {
        std::cerr << "QREP_MEMORY_GUARD_DIM: expected a positive integer, using 4096\n";
        return 4096;
    }
    return static_cast<int>(d);
}

int peak_dense_dim(const ipm::ConicProblem& p) {
    int d = 0;
    for (const auto& k : p.cones) d = std::max(d, k->dense_dim());
    return d;
}

int exit_for(ipm::Status s) {
    switch (s) {
        case ipm::Status::Optimal: return Ok;
        case ipm::Status::PrimalInfeasible:
        case ipm::Status::DualInfeasible: return Infeasible;
        default: return NumFail;
    }
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---- solve ----

int cmd_solve(const std::string& path, const instance::Overrides& o, const std::string& out) {
    instance::Instance inst;
    ipm::ConicProblem prob;
    try {
        inst = instance::load(path);
        instance::apply(inst, o);
        prob = instance::build(inst);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ParseFail;
    }
    const int guard = memory_guard();
    nlohmann::ordered_json rec;
    rec["id"] = inst.id;
    rec["formulation"] = inst.application.empty() ? std::string("problem") : inst.formulation;
    if (peak_dense_dim(prob) > guard) {
        std::cerr << "skipped: dense Hessian dimension " << peak_dense_dim(prob) << " exceeds the memory guard "
                  << guard << " (QREP_MEMORY_GUARD_DIM)\n";
        rec["status"] = "skipped";
        rec["peak_hessian_dim"] = peak_dense_dim(prob);
    } else {
        if (o.verbose) {
            std::cout << "# " << prob.name << ": " << prob.num_vars() << " variables, " << prob.A.rows()
                      << " equality rows, nu = " << prob.nu() << "\n";
            for (const auto& k : prob.cones) std::cout << "#   cone " << k->name() << " dim " << k->dim() << "\n";
        }
        ipm::Settings s = inst.settings;
        s.verbose = true;
        s.log = &std::cout;
        const ipm::SolveResult r = ipm::solve(prob, s);
        rec["status"] = ipm::status_name(r.status);
        rec["objective"] = r.objective();
        rec["primal_obj"] = r.primal_obj;
        rec["dual_obj"] = r.dual_obj;
        rec["iterations"] = r.iterations;
        rec["solve_time_s"] = r.solve_time_s;
        rec["time_per_iter_s"] = r.iterations > 0 ? r.solve_time_s / r.iterations : 0.0;
        rec["peak_hessian_dim"] = r.peak_hessian_dim;
        rec["rows_removed"] = r.rows_removed;
        if (!r.message.empty()) rec["message"] = r.message;
        const std::string text = rec.dump(2) + "\n";
        if (out.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(out);
            if (!f) {
                std::cerr << "error: cannot write " << out << "\n";
                return ParseFail;
            }
            f << text;
        }
        return exit_for(r.status);
    }
    const std::string text = rec.dump(2) + "\n";
    if (out.empty())
        std::cout << text;
    else
        std::ofstream(out) << text;
    return NumFail;
}

// ---- bench ----

struct Suite {
    std::string application;
    std::vector<int> sizes;
    std::vector<std::string> forms;
    // parameter object for a size, and the matrix dimension reported as m
    std::function<std::string(int)> params;
    std::function<int(int)> m;
};

bool suite(const std::string& name, Suite& s) {
    using nlohmann::json;
    if (name == "qkd-dpr") {
        s = {"qkd", {1, 2}, {"tailored", "qre-lift"},
             [](int c) { return json{{"protocol", "dprbb84"}, {"c", c}, {"p", 0.5}}.dump(); },
             [](int c) { return 48 * c; }};
    } else if (name == "qkd-dmcv") {
        s = {"qkd", {3, 7}, {"tailored", "qre-lift"},
             [](int Nc) { return json{{"protocol", "dmcv"}, {"Nc", Nc}}.dump(); },
             [](int Nc) { return 16 * (Nc + 1); }};
    } else if (name == "qrd") {
        s = {"qrd", {2, 4}, {"qce", "qre-lift"}, [](int n) { return json{{"n", n}, {"D", 0.5}}.dump(); },
             [](int n) { return n * n; }};
    } else if (name == "qrd-ef") {
        s = {"qrd", {2, 4}, {"ef-subspace-qrd", "ef-subspace-qre", "ef-subspace-qce", "qre-lift"},
             [](int n) { return json{{"n", n}, {"D", 0.5}}.dump(); }, [](int n) { return n * n; }};
    } else if (name == "eacc") {
        s = {"eacc", {2, 4}, {"qmi", "qce+qe", "qre+qe"},
             [](int n) { return json{{"channel", "random"}, {"n", n}}.dump(); }, [](int n) { return n * n; }};
    } else if (name == "qqcc") {
        s = {"qqcc", {2, 4}, {"qci", "qce", "qre"},
             [](int n) { return json{{"channel", "random"}, {"n", n}}.dump(); }, [](int n) { return n * n; }};
    } else if (name == "gse") {
        s = {"gse", {2, 3, 4}, {"qce", "qre-lift"},
             [](int l) { return json{{"l", l}, {"delta", -1.0}}.dump(); }, [](int l) { return 1 << l; }};
    } else {
        return false;
    }
    return true;
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_bench(const std::string& name, const std::optional<std::string>& sizes,
              const std::optional<std::string>& forms, const instance::Overrides& o, const std::string& out,
              bool stable) {
    Suite s;
    if (!suite(name, s)) {
        std::cerr << "error: unknown suite '" << name
                  << "' (expected qkd-dpr, qkd-dmcv, qrd, qrd-ef, eacc, qqcc or gse)\n";
        return ParseFail;
    }
    if (sizes) {
        s.sizes.clear();
        for (const std::string& t : split(*sizes)) {
            try {
                s.sizes.push_back(std::stoi(t));
            } catch (const std::exception&) {
                std::cerr << "error: --sizes: '" << t << "' is not an integer\n";
                return ParseFail;
            }
        }
    }
    if (forms) s.forms = split(*forms);
    if (o.formulation) s.forms = {*o.formulation};
    const std::uint64_t seed = o.seed.value_or(1);
    ipm::Settings settings;
    if (o.gap_tol) settings.gap_tol = *o.gap_tol;
    if (o.feas_tol) settings.feas_tol = *o.feas_tol;
    if (o.max_iter) settings.max_iter = *o.max_iter;
    settings.verbose = o.verbose;
    settings.log = &std::cerr;
    const int guard = memory_guard();

    std::ofstream file;
    if (!out.empty()) {
        file.open(out);
        if (!file) {
            std::cerr << "error: cannot write " << out << "\n";
            return ParseFail;
        }
    }
    std::ostream& csv = out.empty() ? std::cout : file;
    csv << "suite,param,m,formulation,iter,solve_time_s,time_per_iter_s,status,objective\n";
    csv.flush();
    for (int size : s.sizes) {
        for (const std::string& f : s.forms) {
            csv << name << "," << size << "," << s.m(size) << "," << f << ",";
            try {
                ipm::ConicProblem p = instance::build_application(s.application, f, s.params(size), seed);
                if (peak_dense_dim(p) > guard) {
                    csv << ",,,skipped,\n";
                    csv.flush();
                    continue;
                }
                const ipm::SolveResult r = ipm::solve(p, settings);
                const double tpi = r.iterations > 0 ? r.solve_time_s / r.iterations : 0.0;
                csv << r.iterations << "," << (stable ? "" : fmt("%.6f", r.solve_time_s)) << ","
                    << (stable ? "" : fmt("%.6g", tpi)) << "," << ipm::status_name(r.status) << ","
                    << fmt("%.10f", r.objective()) << "\n";
            } catch (const std::exception& e) {
                std::cerr << name << " " << size << " " << f << ": " << e.what() << "\n";
                csv << ",,,error,\n";
            }
            csv.flush();
        }
    }
    return Ok;
}

// ---- check ----

int cmd_check(const std::string& path, const instance::Overrides& o) {
    instance::Instance inst;
    try {
        inst = instance::load(path);
        instance::apply(inst, o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ParseFail;
    }
    std::mt19937_64 rng(inst.seed);
    bool ok = true;
    auto report = [&](bool pass, const std::string& what, double v) {
        std::cout << (pass ? "PASS " : "FAIL ") << what << " " << fmt("%.3e", v) << "\n";
        ok = ok && pass;
    };
    try {
        for (const instance::NamedMap& m : instance::declared_maps(inst)) {
            std::mt19937_64 r2(inst.seed);
            const bool pos = is_positive(m.map, r2);
            std::cout << (pos ? "PASS " : "FAIL ") << m.label << " positivity\n";
            ok = ok && pos;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ParseFail;
    }
    if (!ok) return CheckFail;

    ipm::ConicProblem prob;
    try {
        prob = instance::build(inst);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ParseFail;
    }
    for (size_t k = 0; k < prob.cones.size(); ++k) {
        cones::Cone& cone = *prob.cones[k];
        for (int pt = 0; pt < 4; ++pt) {
            const RVec x = pt == 0 ? cone.init_point() : cones::random_interior_point(cone, rng);
            const std::string tag = "cone[" + std::to_string(k) + "] " + cone.name() + " point " + std::to_string(pt);
            const cones::OracleReport r = cones::check_oracles(cone, x, rng);
            report(r.grad_fd < 1e-6, tag + " gradient", r.grad_fd);
            report(r.hess_fd < 1e-5, tag + " hessian", r.hess_fd);
            report(r.inv_hess < 1e-8, tag + " inverse-hessian", r.inv_hess);
            report(r.homogeneity < 1e-8, tag + " log-homogeneity", r.homogeneity);
            report(r.euler_grad < 1e-8, tag + " euler-gradient", r.euler_grad);
            report(r.euler_hess < 1e-8, tag + " euler-hessian", r.euler_hess);
            cone.set_point(x);
            std::normal_distribution<double> nd;
            RVec v(cone.dim());
            for (int i = 0; i < v.size(); ++i) v(i) = nd(rng);
            const RVec a = cone.inv_hess_solve(v), b = cone.inv_hess_dense(v);
            report((a - b).norm() <= 1e-8 * b.norm(), tag + " structured-vs-dense", (a - b).norm() / b.norm());
        }
    }
    return ok ? Ok : CheckFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conic interior-point solver for quantum relative entropy programs"};
    app.require_subcommand(1);
    instance::Overrides o;
    std::string out, path, suite_name;
    std::optional<std::string> sizes, forms;
    bool stable = false;

    auto common = [&](CLI::App* c) {
        c->add_option("--formulation", o.formulation, "Formulation override");
        c->add_option("--gap-tol", o.gap_tol, "Relative gap tolerance");
        c->add_option("--feas-tol", o.feas_tol, "Feasibility tolerance");
        c->add_option("--max-iter", o.max_iter, "Iteration limit");
        c->add_option("--seed", o.seed, "Seed override");
        c->add_flag("--verbose", o.verbose, "Extra output");
    };

    CLI::App* solve = app.add_subcommand("solve", "Solve one instance file");
    solve->add_option("path", path, "Instance file")->required();
    solve->add_option("--out", out, "Write the JSON result here");
    common(solve);

    CLI::App* bench = app.add_subcommand("bench", "Run a benchmark suite and write CSV");
    bench->add_option("suite", suite_name, "qkd-dpr | qkd-dmcv | qrd | qrd-ef | eacc | qqcc | gse")->required();
    bench->add_option("--sizes", sizes, "Comma-separated size list (empty: header only)");
    bench->add_option("--formulations", forms, "Comma-separated formulation list");
    bench->add_option("--out", out, "CSV path (stdout when absent)");
    bench->add_flag("--stable", stable, "Leave the wall-clock columns empty");
    common(bench);

    CLI::App* check = app.add_subcommand("check", "Oracle checks for every cone of an instance");
    check->add_option("path", path, "Instance file")->required();
    common(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ParseFail;
    }
    if (*solve) return cmd_solve(path, o, out);
    if (*bench) return cmd_bench(suite_name, sizes, forms, o, out, stable);
    return cmd_check(path, o);
}
