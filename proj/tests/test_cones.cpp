#include <doctest.h>

#include "support.hpp"

using namespace qrep;
using namespace qrep::cones;
using linalg::svec;

namespace {

RVec stack(std::initializer_list<RVec> parts) {
    int n = 0;
    for (const RVec& p : parts) n += static_cast<int>(p.size());
    RVec v(n);
    int o = 0;
    for (const RVec& p : parts) v.segment(o, p.size()) = p, o += static_cast<int>(p.size());
    return v;
}
RVec scalar(double t) { return RVec::Constant(1, t); }

}  // namespace

TEST_CASE("set_point examples") {
    QRECone q(1);
    CHECK(q.set_point(RVec::Ones(3)));
    CHECK(q.zeta() == doctest::Approx(1.0));
    CHECK(std::abs(q.barrier()) < 1e-15);

    QCECone c(2, 2);
    const CMat I4 = CMat::Identity(4, 4) / 4.0;
    CHECK(c.set_point(stack({scalar(0), svec(I4)})));
    CHECK(c.phi() == doctest::Approx(-std::log(2.0)));
    CHECK_FALSE(c.set_point(stack({scalar(-1), svec(I4)})));

    PSDCone p(2);
    CMat X(2, 2);
    X << 1, 2, 2, 1;
    CHECK_FALSE(p.set_point(svec(X)));
    CHECK_FALSE(p.feasible());
    CHECK_THROWS(p.barrier());
    CHECK_THROWS_AS(p.set_point(RVec::Ones(3)), DimensionError);
}

TEST_CASE("init points") {
    PSDCone p(2);
    CHECK((p.init_point() - svec(CMat::Identity(2, 2))).norm() == 0.0);
    QRECone q(3);
    RVec x = q.init_point();
    CHECK(x(0) == doctest::Approx(1.0));
    CHECK((x.segment(1, 9) - svec(CMat::Identity(3, 3))).norm() == 0.0);
    CHECK((x.segment(10, 9) - svec(CMat::Identity(3, 3))).norm() == 0.0);

    for (std::uint64_t s = 0; s < 5; ++s) {
        const int n = 2 + static_cast<int>(s % 3);
        std::vector<ConePtr> ks;
        ks.push_back(std::make_unique<NonnegCone>(n + 3));
        ks.push_back(std::make_unique<PSDCone>(n + 1));
        ks.push_back(std::make_unique<CRECone>(n));
        ks.push_back(std::make_unique<QECone>(n + 1));
        ks.push_back(std::make_unique<QRECone>(n));
        std::mt19937_64 rng(s);
        ks.push_back(std::make_unique<ComposedQRECone>(qt::random_kraus_map(n, n + 1, 2, rng),
                                                       qt::random_kraus_map(n, n + 1, 3, rng)));
        ks.push_back(std::make_unique<QCECone>(n, 2));
        ks.push_back(std::make_unique<QRDCone>(n + 1));
        ks.push_back(qt::qmi_cone(n, s));
        ks.push_back(qt::qci_cone(std::vector<double>(1 + s % 2, 0.1 + 0.05 * s), s));
        for (auto& k : ks) CHECK_MESSAGE(k->set_point(k->init_point()), k->name());
    }
    auto k = QKDCone::dprbb84(1, 0.3);
    CHECK(k->set_point(k->init_point()));
}

TEST_CASE("barrier parameters and calculus on every cone") {
    auto zoo = qt::cone_zoo(101);
    std::mt19937_64 rng(202);
    for (auto& z : zoo) {
        CAPTURE(z.label);
        CHECK(z.cone->nu() == doctest::Approx(z.nu));
        for (int k = 0; k < 3; ++k) {
            RVec x = random_interior_point(*z.cone, rng);
            qt::Calculus c = qt::calculus(*z.cone, x, rng);
            CHECK(c.grad < 1e-6);
            CHECK(c.hess < 1e-5);
            CHECK(c.inv < 1e-8);
            CHECK(c.homog < 1e-8);
            CHECK(c.euler_grad < 1e-8);
            CHECK(c.euler_hess < 1e-8);

            // The library's own report agrees with the independent one.
            OracleReport r = check_oracles(*z.cone, x, rng);
            CHECK(r.grad_fd < 1e-6);
            CHECK(r.hess_fd < 1e-5);
            CHECK(r.inv_hess < 1e-8);
        }
    }
}

TEST_CASE("psd inverse hessian is the congruence") {
    std::mt19937_64 rng(5);
    PSDCone p(4);
    CMat X = linalg::random_pd(4, rng);
    REQUIRE(p.set_point(svec(X)));
    CMat R = linalg::random_hermitian(4, rng);
    CHECK((p.inv_hess_solve(svec(R)) - svec(X * R * X)).norm() < 1e-12);
    CHECK(p.barrier() == doctest::Approx(-std::log(X.determinant().real())));
}

TEST_CASE("epigraph functions match direct entropies") {
    std::mt19937_64 rng(9);
    CMat X = linalg::random_pd(3, rng), Y = linalg::random_pd(3, rng);
    QRECone q(3);
    const double s = linalg::quantum_relative_entropy(X, Y);
    REQUIRE(q.set_point(stack({scalar(s + 1), svec(X), svec(Y)})));
    CHECK(q.phi() == doctest::Approx(s).epsilon(1e-12));
    CHECK(q.zeta() == doctest::Approx(1.0));

    QECone e(3);
    const double y = 1.7, tr = X.trace().real();
    const double qe = -linalg::quantum_entropy(X) - tr * std::log(y);
    REQUIRE(e.set_point(stack({scalar(qe + 2), svec(X), scalar(y)})));
    CHECK(e.phi() == doctest::Approx(qe).epsilon(1e-12));

    CRECone c(3);
    RVec a(3), b(3);
    a << 0.3, 1.2, 0.8;
    b << 0.9, 0.4, 1.1;
    double kl = 0;
    for (int i = 0; i < 3; ++i) kl += a(i) * std::log(a(i) / b(i));
    REQUIRE(c.set_point(stack({scalar(kl + 1), a, b})));
    CHECK(c.phi() == doctest::Approx(kl).epsilon(1e-12));
}

TEST_CASE("qce as a composed cone") {
    std::mt19937_64 rng(41);
    QCECone c(2, 3);
    ComposedQRECone g(LinearMap::identity(6),
                      LinearMap::compose(LinearMap::kron_identity(1, 2, 3), LinearMap::partial_trace(1, 2, 3)));
    for (int k = 0; k < 3; ++k) {
        CMat X = linalg::random_density(6, rng);
        const double direct =
            linalg::quantum_relative_entropy(X, linalg::kron_identity(linalg::partial_trace(X, 1, 2, 3), 1, 2, 3));
        CHECK(c.phi_at(X) == doctest::Approx(direct).epsilon(1e-10));
        CHECK(g.phi_at(X) == doctest::Approx(direct).epsilon(1e-10));
        RVec x = stack({scalar(direct + 0.5), svec(X)});
        REQUIRE(c.set_point(x));
        REQUIRE(g.set_point(x));
        CHECK(c.barrier() == doctest::Approx(g.barrier()).epsilon(1e-10));
        CHECK(qt::rel(c.grad(), g.grad()) < 1e-9);
    }
}

TEST_CASE("qrd barrier is the restricted qce barrier") {
    std::mt19937_64 rng(43);
    const int n = 3;
    QRDCone r(n);
    QCECone c(n, n);
    for (int k = 0; k < 5; ++k) {
        RVec x = random_interior_point(r, rng);
        REQUIRE(r.set_point(x));
        const RVec y = x.segment(1, n * n - n);
        const CMat Z = linalg::smat(x.tail(n * n));
        const CMat G = QRDCone::lift(y, Z);
        REQUIRE(c.set_point(stack({scalar(x(0)), svec(G)})));
        CHECK(std::abs(r.barrier() - c.barrier()) < 1e-9);
        CHECK(std::abs(r.phi() - c.phi()) < 1e-10);
    }
}

TEST_CASE("strategies agree with dense assembly") {
    std::mt19937_64 rng(47);
    for (auto [n, m] : std::vector<std::pair<int, int>>{{2, 2}, {2, 4}, {4, 2}, {3, 3}}) {
        for (Strategy s : {Strategy::DifferenceOfEntropies, Strategy::Dense}) {
            QCECone c(n, m, s);
            for (int k = 0; k < 2; ++k) CHECK(qt::dense_inverse_error(c, random_interior_point(c, rng), rng) < 1e-8);
        }
    }
    for (Strategy s : {Strategy::LowRank, Strategy::BlockDiagonal, Strategy::Dense}) {
        auto k = QKDCone::dprbb84(1, 0.5, s);
        CAPTURE(strategy_name(s));
        CHECK(qt::dense_inverse_error(*k, random_interior_point(*k, rng), rng) < 1e-8);
    }
    for (int n = 2; n <= 4; ++n) {
        QRDCone r(n);
        CHECK(qt::dense_inverse_error(r, random_interior_point(r, rng), rng) < 1e-8);
    }
    auto qmi = qt::qmi_cone(2, 3);
    CHECK(qt::dense_inverse_error(*qmi, random_interior_point(*qmi, rng), rng) < 1e-8);
    auto qci = qt::qci_cone({0.3}, 4);
    CHECK(qt::dense_inverse_error(*qci, random_interior_point(*qci, rng), rng) < 1e-8);
}

TEST_CASE("strategy names round trip") {
    for (Strategy s : {Strategy::Dense, Strategy::BlockDiagonal, Strategy::LowRank, Strategy::IdentityPlusLowRank,
                       Strategy::DifferenceOfEntropies})
        CHECK(parse_strategy(strategy_name(s)) == s);
    CHECK_THROWS(parse_strategy("fastest"));
}

TEST_CASE("composed cone rejects incompatible maps") {
    // G(I) has support outside H(I).
    CMat a = CMat::Zero(2, 2), b = CMat::Zero(2, 2);
    a(0, 0) = 1;
    a(1, 1) = 1;
    b(0, 0) = 1;
    CHECK_THROWS(ComposedQRECone(LinearMap::kraus({a}), LinearMap::kraus({b})));
}

TEST_CASE("self-concordance spot checks") {
    NonnegCone r(1);
    std::mt19937_64 rng(53);
    CHECK(qt::sc_ratio(r, RVec::Ones(1), rng, 3) == doctest::Approx(2.0).epsilon(1e-6));
    // -log x is extremal: |F'''| / F''^{3/2} = 2 at every point.
    CHECK(self_concordance_ratio(r, RVec::Ones(1), rng, 3) == doctest::Approx(2.0).epsilon(1e-6));

    PSDCone p(3);
    QRECone q(2);
    for (int k = 0; k < 5; ++k) {
        CHECK(qt::sc_ratio(p, random_interior_point(p, rng), rng, 5) <= 2.05);
        CHECK(qt::sc_ratio(q, random_interior_point(q, rng), rng, 5) <= 2.05);
    }
}
