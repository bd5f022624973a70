#include <doctest.h>

#include "qrep/structure.hpp"
#include "support.hpp"

using namespace qrep;
using namespace qrep::structure;
using linalg::svec;

namespace {

double face_leak(const FacialReduction& fr, const LinearMap& G, std::mt19937_64& rng) {
    const int m = G.out_side();
    const CMat P = CMat::Identity(m, m) - fr.U * fr.U.adjoint();
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
        CMat Y = G.apply(linalg::random_density(G.in_side(), rng));
        worst = std::max(worst, (P * Y * P).norm() / Y.norm());
    }
    return worst;
}

RMat gaussian_matrix(int r, int c, std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    return RMat::NullaryExpr(r, c, [&]() { return N(rng); });
}

}  // namespace

TEST_CASE("facial reduction") {
    std::mt19937_64 rng(61);
    FacialReduction fr = facial_reduce(LinearMap::identity(2));
    CHECK(fr.rank == 2);
    CHECK((fr.U * fr.U.adjoint() - CMat::Identity(2, 2)).norm() < 1e-12);

    CMat K = CMat::Zero(4, 2);
    K.topRows(2) = CMat::Identity(2, 2);
    LinearMap E = LinearMap::kraus({K});
    fr = facial_reduce(E);
    CHECK(fr.rank == 2);
    CHECK(fr.U.bottomRows(2).norm() < 1e-12);
    CMat X = linalg::random_hermitian(2, rng);
    CHECK((fr.reduced(E).apply(X) - fr.U.adjoint() * K * X * K.adjoint() * fr.U).norm() < 1e-12);

    for (int c : {1, 2}) {
        LinearMap G = cones::dprbb84_protocol(c, 0.5).G();
        fr = facial_reduce(G);
        CHECK(G.out_side() == 48 * c);
        CHECK(fr.rank == 8 * c);
        CHECK((fr.U.adjoint() * fr.U - CMat::Identity(fr.rank, fr.rank)).norm() < 1e-10);
        CHECK(face_leak(fr, G, rng) < 1e-9);
    }
    CHECK_THROWS_AS(facial_reduce(LinearMap::dense(RMat::Zero(4, 4))), DomainError);
}

TEST_CASE("block decomposition") {
    std::mt19937_64 rng(67);
    LinearMap P = LinearMap::pinching({2, 2});
    BlockStructure bs = decompose_blocks(P, std::vector<int>{2, 2}, rng);
    CHECK(bs.sizes == std::vector<int>{2, 2});
    CHECK(bs.extractors.size() == 2u);
    for (int k = 0; k < 5; ++k) CHECK(reassembly_residual(P, bs, linalg::random_hermitian(4, rng)) < 1e-12);

    // A full map does not have the declared structure.
    LinearMap G = qt::random_kraus_map(3, 4, 3, rng);
    CHECK_THROWS_AS(decompose_blocks(G, std::vector<int>{2, 2}, rng), DeclarationError);
    CHECK_THROWS_AS(decompose_blocks(P, std::vector<int>{3, 2}, rng), DeclarationError);

    // Non-contiguous blocks.
    BlockStructure nc = decompose_blocks(LinearMap::pinching({1, 1, 1, 1}), std::vector<std::vector<int>>{{0, 2}, {1, 3}},
                                         rng);
    CHECK(nc.permutation == std::vector<int>{0, 2, 1, 3});
}

TEST_CASE("same-block relative entropy splits over blocks") {
    std::mt19937_64 rng(71);
    LinearMap Z = LinearMap::pinching({2, 3});
    LinearMap G = LinearMap::compose(Z, qt::random_kraus_map(3, 5, 2, rng));
    LinearMap H = LinearMap::compose(Z, qt::random_kraus_map(3, 5, 4, rng));
    BlockStructure gb = decompose_blocks(G, std::vector<int>{2, 3}, rng);
    BlockStructure hb = decompose_blocks(H, std::vector<int>{2, 3}, rng);
    cones::ComposedQRECone blk(cones::ComposedQRECone::block_model(gb, hb), cones::Strategy::BlockDiagonal);
    for (int k = 0; k < 5; ++k) {
        CMat X = linalg::random_density(3, rng);
        const double direct = linalg::quantum_relative_entropy(G.apply(X), H.apply(X));
        double sum = 0;
        for (int i = 0; i < 2; ++i)
            sum += linalg::quantum_relative_entropy(gb.extractors[i].apply(X), hb.extractors[i].apply(X));
        CHECK(std::abs(direct - sum) < 1e-10);
        CHECK(std::abs(blk.phi_at(X) - direct) < 1e-10);
    }
}

TEST_CASE("fully diagonal blocks reduce to classical relative entropy") {
    std::mt19937_64 rng(73);
    LinearMap Z = LinearMap::pinching({1, 1, 1, 1});
    LinearMap G = LinearMap::compose(Z, qt::random_kraus_map(3, 4, 2, rng));
    LinearMap H = LinearMap::compose(Z, qt::random_kraus_map(3, 4, 3, rng));
    BlockStructure gb = decompose_blocks(G, std::vector<int>{1, 1, 1, 1}, rng);
    BlockStructure hb = decompose_blocks(H, std::vector<int>{1, 1, 1, 1}, rng);
    cones::ComposedQRECone blk(cones::ComposedQRECone::block_model(gb, hb), cones::Strategy::BlockDiagonal);
    cones::CRECone cre(4);
    for (int k = 0; k < 5; ++k) {
        CMat X = linalg::random_density(3, rng);
        RVec g = G.apply(X).diagonal().real(), h = H.apply(X).diagonal().real();
        const double kl = (g.array() * (g.array() / h.array()).log()).sum();
        RVec pt(9);
        pt << kl + 1.0, g, h;
        REQUIRE(cre.set_point(pt));
        CHECK(std::abs(blk.phi_at(X) - cre.phi()) < 1e-10);
    }
}

TEST_CASE("schur pipelines against dense assembly") {
    std::mt19937_64 rng(79);
    const int n = 4;
    CMat X = linalg::random_pd(n, rng);
    const linalg::Spectral sx = linalg::eigh(X);
    const int N = n * n;
    const RMat I = RMat::Identity(N, N);

    for (BaseOperator base : {BaseOperator::logdet(sx), BaseOperator::entropy_logdet(sx, 0.7)}) {
        const RMat A = base.apply(I);
        CHECK((base.apply_inverse(A) - I).norm() < 1e-9);
        const RVec rhs = qt::gaussian(N, rng);

        // No factors: the base solve.
        SchurPipeline none = SchurPipeline::nonsym(base, {}, RMat(0, 0));
        CHECK(qt::rel(schur_solve(none, rhs), A.lu().solve(rhs)) < 1e-12);

        std::vector<LinearMap> f{LinearMap::partial_trace(1, 2, 2), LinearMap::partial_trace(2, 2, 2)};
        const RMat U = SchurPipeline::stacked_adjoint(f);
        const int R = static_cast<int>(U.cols());
        CHECK(R == 8);

        RMat B = 0.05 * gaussian_matrix(R, R, rng);
        RMat M = A - U * B * U.transpose();
        CHECK(qt::rel(SchurPipeline::nonsym(base, f, B).solve(rhs), M.lu().solve(rhs)) < 1e-8);

        // Sym mode needs B^-1 - U^T A^-1 U positive definite.
        const RMat gram = U.transpose() * A.lu().solve(U);
        RMat Bs = 0.5 / Eigen::SelfAdjointEigenSolver<RMat>(gram).eigenvalues().maxCoeff() * RMat::Identity(R, R);
        M = A - U * Bs * U.transpose();
        CHECK(qt::rel(SchurPipeline::sym(base, f, Bs.inverse()).solve(rhs), M.lu().solve(rhs)) < 1e-8);

        RMat Bc = 0.05 * gaussian_matrix(N, R, rng);
        RMat C = -RMat::Identity(R, R);
        M = A + U * Bc.transpose() + Bc * U.transpose() - U * C * U.transpose();
        CHECK(qt::rel(SchurPipeline::block(base, f, Bc, C).solve(rhs), M.lu().solve(rhs)) < 1e-8);
    }
}

TEST_CASE("kraus gram matches the explicit congruence") {
    std::mt19937_64 rng(83);
    const int n = 5;
    CMat X = linalg::random_pd(n, rng);
    std::vector<LinearMap> f;
    for (auto idx : std::vector<std::vector<int>>{{0, 1}, {2, 3, 4}}) {
        CMat S = CMat::Zero(idx.size(), n);
        for (size_t i = 0; i < idx.size(); ++i) S(i, idx[i]) = 1;
        f.push_back(LinearMap::kraus({S}));
    }
    const RMat U = SchurPipeline::stacked_adjoint(f);
    RMat XX(n * n, U.cols());
    for (int j = 0; j < U.cols(); ++j) {
        CMat H = linalg::smat(RVec(U.col(j)));
        XX.col(j) = svec(X * H * X);
    }
    RMat G = U.transpose() * XX;
    CHECK((SchurPipeline::kraus_gram(f, X) - G).norm() < 1e-10 * G.norm());
}
