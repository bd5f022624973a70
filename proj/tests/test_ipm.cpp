#include <doctest.h>

#include <sstream>

#include "support.hpp"

using namespace qrep;
using namespace qrep::ipm;

namespace {

ConicProblem lp(RVec c, RMat A, RVec b, int n) {
    ConicProblem p;
    p.c = std::move(c);
    p.A = std::move(A);
    p.b = std::move(b);
    p.cones.push_back(std::make_unique<cones::NonnegCone>(n));
    return p;
}

Settings quiet() {
    Settings s;
    s.verbose = false;
    return s;
}

}  // namespace

TEST_CASE("one-variable LP") {
    ConicProblem p = lp(RVec::Ones(1), RMat::Ones(1, 1), RVec::Ones(1), 1);
    SolveResult r = solve(p, quiet());
    CHECK(r.status == Status::Optimal);
    CHECK(r.objective() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("diagonal-constrained SDP") {
    ConicProblem p;
    p.c = linalg::svec(CMat::Identity(2, 2));
    p.A = RMat::Zero(2, 4);
    p.A(0, 0) = 1;
    p.A(1, 3) = 1;
    p.b = RVec::Ones(2);
    p.cones.push_back(std::make_unique<cones::PSDCone>(2));
    SolveResult r = solve(p, quiet());
    CHECK(r.status == Status::Optimal);
    CHECK(r.objective() == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(std::abs(r.x(0) - 1) < 1e-7);
    CHECK(std::abs(r.x(3) - 1) < 1e-7);
}

TEST_CASE("qrd formulations agree") {
    // Rate is zero once D >= 1 - lmax(W)^2 (0.079 for this source).
    for (double D : {0.5, 0.05}) {
        auto spec = problems::RateDistortionSpec::entanglement_fidelity(problems::random_density_matrix(2, 3), D);
        std::vector<double> v;
        for (const char* f : {"qre-lift", "qce", "ef-subspace-qrd"}) {
            ConicProblem p = problems::build_qrd(spec, f);
            SolveResult r = solve(p, quiet());
            CHECK_MESSAGE(r.status == Status::Optimal, f);
            v.push_back(r.objective());
        }
        CHECK(std::abs(v[0] - v[1]) < 1e-6);
        CHECK(std::abs(v[0] - v[2]) < 1e-6);
        if (D == 0.05) CHECK(v[0] > 1e-3);
    }
}

TEST_CASE("infeasibility certificates") {
    RMat A(1, 2);
    A << 1, 1;
    ConicProblem p = lp(RVec::Ones(2), A, RVec::Constant(1, -1), 2);
    CHECK(solve(p, quiet()).status == Status::PrimalInfeasible);

    A << 1, -1;
    RVec c(2);
    c << -1, 0;
    ConicProblem q = lp(c, A, RVec::Zero(1), 2);
    CHECK(solve(q, quiet()).status == Status::DualInfeasible);
}

TEST_CASE("iteration limit and validation") {
    ConicProblem p = problems::build_gse(problems::HamiltonianSpec::xxz(-1, 2), "qce");
    Settings s = quiet();
    s.max_iter = 2;
    CHECK(solve(p, s).status == Status::IterationLimit);

    ConicProblem bad = lp(RVec::Ones(2), RMat::Ones(1, 3), RVec::Ones(1), 3);
    CHECK_THROWS_AS(bad.validate(), DimensionError);
}

TEST_CASE("dependent rows") {
    RMat A(3, 3);
    A << 1, 1, 1, 2, 2, 2, 1, 0, 0;
    RVec b(3);
    b << 1, 2, 0.25;
    RowReduction rr = reduce_rows(A, b);
    CHECK(rr.kept.size() == 2u);
    CHECK(rr.consistent);
    b(1) = 3;
    CHECK_FALSE(reduce_rows(A, b).consistent);

    ConicProblem p = lp(RVec::Ones(3), A, (RVec(3) << 1, 2, 0.25).finished(), 3);
    SolveResult r = solve(p, quiet());
    CHECK(r.status == Status::Optimal);
    CHECK(r.rows_removed == 1);
    CHECK(r.objective() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("schur complement") {
    std::vector<cones::ConePtr> ks;
    ks.push_back(std::make_unique<cones::NonnegCone>(1));
    ks[0]->set_point(RVec::Ones(1));
    RMat S = assemble_schur(RMat::Ones(1, 1), ks);
    CHECK(S(0, 0) == doctest::Approx(1.0));

    ks[0] = std::make_unique<cones::NonnegCone>(4);
    ks[0]->set_point(RVec::Ones(4));
    std::mt19937_64 qrng(3);
    RMat G = RMat::NullaryExpr(4, 4, [&]() { return std::normal_distribution<double>()(qrng); });
    RMat Q = Eigen::HouseholderQR<RMat>(G).householderQ();
    S = assemble_schur(Q.topRows(2), ks);
    CHECK((S - RMat::Identity(2, 2)).norm() < 1e-12);

    // PSD cone, A picking the diagonal of X.
    std::mt19937_64 rng(5);
    ks[0] = std::make_unique<cones::PSDCone>(3);
    CMat X = linalg::random_pd(3, rng);
    ks[0]->set_point(linalg::svec(X));
    RMat A = RMat::Zero(3, 9);
    for (int i = 0; i < 3; ++i) A(i, i * i + 2 * i) = 1;
    S = assemble_schur(A, ks);
    RMat H(9, 9);
    for (int j = 0; j < 9; ++j) H.col(j) = ks[0]->hess_apply(RVec::Unit(9, j));
    RMat dense = A * H.lu().solve(A.transpose());
    CHECK((S - dense).norm() < 1e-10 * dense.norm());
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(S(i, j) == doctest::Approx(std::norm(X(i, j))));
    CHECK((S - S.transpose()).norm() < 1e-12 * S.norm());
}

TEST_CASE("newton system residuals") {
    // Scalar case by hand: A = [1], x = 1, mu = tau = kappa = 1.
    {
        std::vector<cones::ConePtr> ks;
        ks.push_back(std::make_unique<cones::NonnegCone>(1));
        ks[0]->set_point(RVec::Ones(1));
        RMat A = RMat::Ones(1, 1);
        RVec b = RVec::Ones(1), c = RVec::Ones(1);
        NewtonSystem ns(A, b, c, ks, 1.0, 1.0, 1.0);
        NewtonRhs rhs;
        rhs.rx = RVec::Zero(1);
        rhs.ry = RVec::Ones(1);
        rhs.rz = RVec::Zero(1);
        Direction d = ns.solve(rhs);
        // dx - dtau = 1, -dy - dz + dtau = 0, dy - dx - dk = 0, dx + dz = 0, dtau + dk = 0
        CHECK(d.dx(0) == doctest::Approx(1.0));
        CHECK(std::abs(d.dtau) < 1e-14);
        CHECK(d.dy(0) == doctest::Approx(1.0));
        CHECK(d.dz(0) == doctest::Approx(-1.0));
        CHECK(std::abs(d.dkappa) < 1e-14);
    }

    std::mt19937_64 rng(7);
    for (int k = 0; k < 5; ++k) {
        std::vector<cones::ConePtr> ks;
        ks.push_back(std::make_unique<cones::PSDCone>(3));
        ks.push_back(std::make_unique<cones::QRECone>(2));
        ks.push_back(std::make_unique<cones::NonnegCone>(2));
        int n = 0;
        for (auto& c : ks) {
            c->set_point(cones::random_interior_point(*c, rng));
            n += c->dim();
        }
        const int m = 6;
        RMat A = RMat::NullaryExpr(m, n, [&]() { return std::normal_distribution<double>()(rng); });
        RVec b = qt::gaussian(m, rng), c = qt::gaussian(n, rng);
        NewtonSystem ns(A, b, c, ks, 0.3, 1.2, 0.7);
        NewtonRhs rhs{qt::gaussian(n, rng), qt::gaussian(m, rng), qt::gaussian(n, rng), 0.4, -0.2};
        Direction d = ns.solve(rhs);
        CHECK(ns.residual(d, rhs) < 1e-8);

        NewtonRhs zero{RVec::Zero(n), RVec::Zero(m), RVec::Zero(n), 0, 0};
        Direction z = ns.solve(zero);
        CHECK(z.dx.norm() + z.dy.norm() + z.dz.norm() + std::abs(z.dtau) + std::abs(z.dkappa) < 1e-8);
    }
}

TEST_CASE("solver trace") {
    ConicProblem p = problems::build_gse(problems::HamiltonianSpec::xxz(-1, 3), "qce");
    std::ostringstream log;
    Settings s = quiet();
    s.verbose = true;
    s.log = &log;
    SolveResult r = solve(p, s);
    REQUIRE(r.status == Status::Optimal);
    CHECK(r.iterations < 200);
    CHECK(log.str().find(iter_header()) != std::string::npos);
    REQUIRE(!r.trace.empty());
    bool mono = true, times = true;
    for (size_t k = 1; k < r.trace.size(); ++k) {
        mono = mono && r.trace[k].mu <= r.trace[k - 1].mu * (1 + 1e-12);
        times = times && r.trace[k].time_ms >= r.trace[k - 1].time_ms;
    }
    CHECK(mono);
    CHECK(times);
    CHECK(std::abs(r.primal_obj - r.dual_obj) < 1e-6);
    CHECK(status_name(Status::Optimal) == "optimal");
}
