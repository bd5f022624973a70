#include <doctest.h>

#include "support.hpp"

using namespace qrep;
using namespace qrep::problems;

namespace {

double solve_value(ipm::ConicProblem p, int* iters = nullptr) {
    ipm::SolveResult r = ipm::solve(p);
    REQUIRE_MESSAGE(r.status == ipm::Status::Optimal, p.name);
    if (iters) *iters = r.iterations;
    return r.objective();
}

double spread(const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
}

}  // namespace

TEST_CASE("random densities and isometries") {
    for (int n : {1, 2, 5}) {
        CMat X = random_density_matrix(n, 42);
        CHECK(std::abs(X.trace().real() - 1) < 1e-12);
        CHECK(linalg::is_hermitian(X));
        CHECK(linalg::eigh(X).lambda.minCoeff() >= -1e-12);
    }
    CHECK((random_density_matrix(1, 9) - CMat::Ones(1, 1)).norm() < 1e-15);
    CHECK((random_density_matrix(3, 9) - random_density_matrix(3, 9)).norm() == 0.0);

    double purity = 0;
    const int samples = 10000;
    for (int k = 0; k < samples; ++k) {
        CMat X = random_density_matrix(2, 1000 + k);
        purity += (X * X).trace().real();
    }
    CHECK(std::abs(purity / samples - 0.8) < 0.01);

    CMat V = random_stinespring(3, 2, 4, 5);
    CHECK(V.rows() == 8);
    CHECK((V.adjoint() * V - CMat::Identity(3, 3)).norm() < 1e-10);
    CMat U = random_unitary(4, 6);
    CHECK((U.adjoint() * U - CMat::Identity(4, 4)).norm() < 1e-10);
}

TEST_CASE("builder layout") {
    Builder B;
    CHECK(B.add(std::make_unique<cones::NonnegCone>(2)) == 0);
    CHECK(B.add(std::make_unique<cones::PSDCone>(2)) == 2);
    B.add_row({{0, 1.0}, {1, 1.0}}, 1.0);
    B.add_rows({{2, RMat::Identity(4, 4)}}, linalg::svec(CMat::Identity(2, 2)));
    B.add_cost(0, 1.0);
    CHECK(B.rows() == 5);
    ipm::ConicProblem p = B.finish("toy", 0.5, -1);
    CHECK(p.num_vars() == 6);
    CHECK(p.A.rows() == 5);
    CHECK(p.offset == 0.5);
    CHECK(p.sign == -1);
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("dprBB84 data") {
    for (int c : {1, 2}) {
        cones::QKDProtocol proto = cones::dprbb84_protocol(c, 0.4);
        CHECK(proto.input_side() == 12 * c);
        CHECK(proto.output_side() == 48 * c);
        CMat S = CMat::Zero(12 * c, 12 * c);
        for (const CMat& K : proto.kraus) S += K.adjoint() * K;
        CHECK(linalg::eigh(S).lambda(0) <= 1 + 1e-9);
    }

    // Block form of the objective against pinching entropies on the full matrices.
    cones::QKDProtocol proto = cones::dprbb84_protocol(1, 0.5);
    auto cone = cones::QKDCone::dprbb84(1, 0.5);
    std::mt19937_64 rng(3);
    for (int k = 0; k < 5; ++k) {
        CMat X = linalg::random_density(12, rng);
        CMat G = proto.G().apply(X);
        const double direct = qt::entropy_psd(proto.Z().apply(G)) - qt::entropy_psd(G);
        CHECK(std::abs(cone->phi_at(X) - direct) < 1e-10);
        CHECK(std::abs(cones::qkd_direct_objective(proto, X) - direct) < 1e-10);
    }
}

TEST_CASE("dmcv protocol uses one Kraus operator") {
    cones::QKDProtocol p = cones::dmcv_protocol(3, cones::dmcv_placeholder_measurements(3));
    CHECK(p.kraus.size() == 1u);
    CHECK(p.input_side() == 16);
    CMat S = p.kraus[0].adjoint() * p.kraus[0];
    CHECK(linalg::eigh(S).lambda(0) <= 1 + 1e-9);
}

TEST_CASE("qkd formulations agree") {
    QKDSpec s = QKDSpec::dprbb84(1, 0.5, 1);
    const double a = solve_value(build_qkd(s, "tailored")), b = solve_value(build_qkd(s, "qre-lift"));
    CHECK(std::abs(a - b) < 1e-6);
    CHECK(a > 1e-3);

    // Single pinching block: S(G(X) || G(X)) = 0, only the offset remains.
    std::mt19937_64 rng(8);
    cones::QKDProtocol trivial;
    trivial.tag = "trivial";
    for (int k = 0; k < 2; ++k) trivial.kraus.push_back(linalg::complex_gaussian(4, 3, rng) / 3.0);
    trivial.blocks = {4};
    QKDSpec t = QKDSpec::generic(trivial, 2);
    t.p_pass = 0.25;
    t.delta_ec = 0.2;
    for (const char* f : {"tailored", "qre-lift"}) CHECK(std::abs(solve_value(build_qkd(t, f)) - 0.05) < 1e-7);
    CHECK_THROWS_AS(build_qkd(s, "lifted"), ParameterError);
}

TEST_CASE("rate distortion specs") {
    CMat W = random_density_matrix(3, 4);
    auto ef = RateDistortionSpec::entanglement_fidelity(W, 0.3);
    CHECK(ef.m == 3);
    CHECK(std::abs(ef.W(0, 1)) == 0.0);
    RVec l = linalg::eigh(W).lambda;
    CHECK(std::abs(ef.W.trace().real() - 1) < 1e-12);
    CVec psi = CVec::Zero(9);
    for (int i = 0; i < 3; ++i) psi(4 * i) = std::sqrt(ef.W(i, i).real());
    CHECK((ef.Delta - (CMat::Identity(9, 9) - psi * psi.adjoint())).norm() < 1e-12);
    for (int i = 0; i < 3; ++i) CHECK(ef.W(i, i).real() == doctest::Approx(l(i)));

    CMat pure = CMat::Zero(2, 2);
    pure(0, 0) = 1;
    CHECK_THROWS_AS(RateDistortionSpec::entanglement_fidelity(pure, 0.5), ParameterError);
    CMat bad = W;
    bad(0, 0) += 0.1;
    CHECK_THROWS_AS(RateDistortionSpec::entanglement_fidelity(bad, 0.5), ParameterError);
    CHECK_THROWS_AS(RateDistortionSpec::explicit_distortion(W, 2, CMat::Identity(5, 5), 0.1), ParameterError);
}

TEST_CASE("qrd values") {
    // Nearly pure source with a loose budget: rate is zero.
    CMat W = CMat::Zero(2, 2);
    W(0, 0) = 1 - 1e-6;
    W(1, 1) = 1e-6;
    auto loose = RateDistortionSpec::entanglement_fidelity(W, 1.0);
    for (const auto& f : formulations("qrd")) CHECK(std::abs(solve_value(build_qrd(loose, f))) < 1e-6);

    // Below the zero-rate threshold 1 - lmax^2 = 0.195 of this source.
    auto spec = RateDistortionSpec::entanglement_fidelity(random_density_matrix(2, 5), 0.1);
    std::vector<double> v;
    for (const auto& f : formulations("qrd")) v.push_back(solve_value(build_qrd(spec, f)));
    CHECK(spread(v) < 1e-6);
    CHECK(v[0] > 1e-3);

    // The same distortion given explicitly, full formulations only.
    auto ex = RateDistortionSpec::explicit_distortion(spec.W, 2, spec.Delta, 0.1);
    CHECK(std::abs(solve_value(build_qrd(ex, "qce")) - v[0]) < 1e-6);
    CHECK(std::abs(solve_value(build_qrd(ex, "qre-lift")) - v[0]) < 1e-6);
    CHECK_THROWS_AS(build_qrd(ex, "ef-subspace-qrd"), ParameterError);
}

TEST_CASE("fixed-point subspace relative entropy splits") {
    std::mt19937_64 rng(12);
    for (int n : {2, 3, 4}) {
        cones::QRDCone cone(n);
        for (int k = 0; k < 3; ++k) {
            RVec x = cones::random_interior_point(cone, rng);
            const int ny = n * n - n;
            const RVec y = x.segment(1, ny);
            const CMat Z = linalg::smat(x.tail(n * n));
            const CMat G = cones::QRDCone::lift(y, Z);
            const double lhs =
                linalg::quantum_relative_entropy(G, linalg::kron_identity(linalg::partial_trace(G, 1, n, n), 1, n, n));
            // Marginal g_j = Z_jj + sum_{i != j} y_(i,j), pairs row-major.
            RVec g = Z.diagonal().real();
            int p = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) g(j) += y(p++);
            double rhs = 0;
            p = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (i != j) rhs += y(p) * std::log(y(p) / g(j)), ++p;
            rhs += linalg::quantum_relative_entropy(Z, g.cast<Complex>().asDiagonal());
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
    }
}

TEST_CASE("channels") {
    ChannelSpec ad = ChannelSpec::amplitude_damping({0.3});
    CHECK(ad.degradability_residual(1) < 1e-8);
    ChannelSpec ad2 = ChannelSpec::amplitude_damping({0.1, 0.4}, 7);
    CHECK(ad2.ni == 4);
    CHECK(ad2.degradability_residual(2) < 1e-8);
    CHECK_THROWS_AS(ChannelSpec::amplitude_damping({0.6}), ParameterError);

    auto K = amplitude_damping_kraus(0.3);
    CHECK(K[0](1, 1).real() == doctest::Approx(std::sqrt(0.7)));
    CHECK(K[1](0, 1).real() == doctest::Approx(std::sqrt(0.3)));
    CMat V = stinespring_from_kraus(K);
    CHECK((V.adjoint() * V - CMat::Identity(2, 2)).norm() < 1e-12);

    // Wrong degrading map is caught before building.
    ChannelSpec broken = ad;
    broken.Wd = random_stinespring(2, 2, 2, 3);
    broken.nf = 2;
    CHECK(broken.degradability_residual(1) > 1e-3);
    CHECK_THROWS_AS(build_qqcc(broken, "qci"), ParameterError);

    ChannelSpec id = ChannelSpec::identity(2);
    std::mt19937_64 rng(4);
    CMat X = linalg::random_density(2, rng);
    CHECK((id.channel().apply(X) - X).norm() < 1e-12);
    CHECK(std::abs(id.complementary().apply(X).trace().real() - 1) < 1e-12);
}

TEST_CASE("capacities") {
    for (std::uint64_t seed : {1u, 2u}) {
        ChannelSpec ch = ChannelSpec::from_isometry(random_stinespring(2, seed), 2, 2);
        std::vector<double> v;
        for (const auto& f : formulations("eacc")) v.push_back(solve_value(build_eacc(ch, f)));
        CHECK(spread(v) < 1e-6);

        ChannelSpec ad = ChannelSpec::amplitude_damping({0.15 + 0.1 * seed}, seed);
        v.clear();
        for (const auto& f : formulations("qqcc")) v.push_back(solve_value(build_qqcc(ad, f)));
        CHECK(spread(v) < 1e-6);
    }
    CHECK(std::abs(solve_value(build_eacc(ChannelSpec::identity(2), "qmi")) - 2 * std::log(2.0)) < 1e-6);
    CHECK(std::abs(solve_value(build_qqcc(ChannelSpec::amplitude_damping({0.0}), "qci")) - std::log(2.0)) < 1e-6);
}

TEST_CASE("ground state energy") {
    CMat X(2, 2), Y(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, Complex(0, -1), Complex(0, 1), 0;
    Z << 1, 0, 0, -1;
    const double d = 0.7;
    CHECK((xxz_term(d) - (-linalg::kron(X, X) - linalg::kron(Y, Y) - d * linalg::kron(Z, Z))).norm() < 1e-14);

    HamiltonianSpec zero{CMat::Zero(4, 4), 3};
    for (const auto& f : formulations("gse")) CHECK(std::abs(solve_value(build_gse(zero, f))) < 1e-7);

    const double e2 = solve_value(build_gse(HamiltonianSpec::xxz(-1, 2), "qce"));
    const double e3 = solve_value(build_gse(HamiltonianSpec::xxz(-1, 3), "qce"));
    const double e3l = solve_value(build_gse(HamiltonianSpec::xxz(-1, 3), "qre-lift"));
    CHECK(std::abs(e3 - e3l) < 1e-6);
    CHECK(e3 >= e2 - 1e-8);

    const double ring8 = qt::ring_energy_density(xxz_term(-1), 8);
    CHECK(std::abs(periodic_chain_energy_density(xxz_term(-1), 8) - ring8) < 1e-9);
    CHECK(e3 <= ring8 + 1e-8);
    CHECK_THROWS_AS(HamiltonianSpec::xxz(-1, 1).validate(), ParameterError);
}

TEST_CASE("formulation lists") {
    CHECK(formulations("gse").size() == 2u);
    CHECK(formulations("qrd").size() == 5u);
    CHECK_THROWS_AS(formulations("chess"), ParameterError);
}
