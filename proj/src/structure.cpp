#include "qrep/structure.hpp"

#include <algorithm>
#include <memory>
#include <set>

namespace qrep {
namespace structure {

using linalg::smat;
using linalg::svec;

LinearMap FacialReduction::reduced(const LinearMap& G) const {
    return LinearMap::compose(LinearMap::congruence(U.adjoint()), G);
}

FacialReduction facial_reduce(const LinearMap& G, double cutoff) {
    const CMat Y = linalg::hermitian_part(G.apply(CMat::Identity(G.in_side(), G.in_side())));
    linalg::Spectral s = linalg::eigh(Y);
    const double top = s.lambda.size() ? s.lambda(0) : 0.0;
    if (!(top > 0)) throw DomainError("facial_reduce: map sends I to a matrix with no positive eigenvalue");
    int r = 0;
    while (r < s.lambda.size() && s.lambda(r) > cutoff * top) ++r;
    FacialReduction fr;
    fr.U = s.U.leftCols(r);
    fr.rank = r;
    fr.source = G.describe();
    return fr;
}

BlockStructure decompose_blocks(const LinearMap& G, const std::vector<std::vector<int>>& blocks,
                                std::mt19937_64& rng) {
    const int m = G.out_side();
    std::set<int> seen;
    BlockStructure bs;
    for (const auto& b : blocks) {
        if (b.empty()) throw DeclarationError("decompose_blocks: empty block");
        CMat S = CMat::Zero(static_cast<Eigen::Index>(b.size()), m);
        for (size_t k = 0; k < b.size(); ++k) {
            const int idx = b[k];
            if (idx < 0 || idx >= m) throw DeclarationError("decompose_blocks: index outside the map output");
            if (!seen.insert(idx).second) throw DeclarationError("decompose_blocks: blocks overlap");
            S(static_cast<Eigen::Index>(k), idx) = 1.0;
            bs.permutation.push_back(idx);
        }
        if (G.has_kraus()) {
            // Restricted Kraus operators keep block evaluation at block size.
            std::vector<CMat> ops;
            for (const CMat& K : G.kraus_ops()) {
                CMat SK = S * K;
                if (SK.norm() > 0) ops.push_back(SK);
            }
            if (ops.empty()) ops.push_back(CMat::Zero(S.rows(), G.in_side()));
            bs.extractors.push_back(LinearMap::kraus(ops));
        } else {
            bs.extractors.push_back(LinearMap::compose(LinearMap::congruence(S), G));
        }
        bs.sizes.push_back(static_cast<int>(b.size()));
    }
    for (int t = 0; t < 3; ++t) {
        CMat A = linalg::complex_gaussian(G.in_side(), G.in_side(), rng);
        CMat X = A * A.adjoint();
        const double res = reassembly_residual(G, bs, X);
        if (res > 1e-10 * std::max(1.0, G.apply(X).norm()))
            throw DeclarationError("decompose_blocks: declared blocks do not reassemble the map output (residual " +
                                   std::to_string(res) + ")");
    }
    return bs;
}

BlockStructure decompose_blocks(const LinearMap& G, const std::vector<int>& sizes, std::mt19937_64& rng) {
    std::vector<std::vector<int>> blocks;
    int off = 0;
    for (int s : sizes) {
        std::vector<int> b(s);
        for (int k = 0; k < s; ++k) b[k] = off + k;
        off += s;
        blocks.push_back(b);
    }
    if (off != G.out_side()) throw DeclarationError("decompose_blocks: block sizes do not sum to the output side");
    return decompose_blocks(G, blocks, rng);
}

double reassembly_residual(const LinearMap& G, const BlockStructure& bs, const CMat& X) {
    CMat R = G.apply(X);
    int off = 0;
    for (size_t i = 0; i < bs.extractors.size(); ++i) {
        const CMat B = bs.extractors[i].apply(X);
        for (int a = 0; a < bs.sizes[i]; ++a)
            for (int b = 0; b < bs.sizes[i]; ++b) R(bs.permutation[off + a], bs.permutation[off + b]) -= B(a, b);
        off += bs.sizes[i];
    }
    return R.norm();
}

// ---- base operators ----

BaseOperator BaseOperator::logdet(const linalg::Spectral& sx) {
    BaseOperator b;
    b.kind_ = BaseKind::Logdet;
    b.sx_ = sx;
    const Eigen::Index n = sx.lambda.size();
    b.D_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) b.D_(i, j) = 1.0 / (sx.lambda(i) * sx.lambda(j));
    return b;
}

BaseOperator BaseOperator::entropy_logdet(const linalg::Spectral& sx, double scale) {
    BaseOperator b = logdet(sx);
    b.kind_ = BaseKind::EntropyPlusLogdet;
    b.D_ += scale * linalg::divided_differences_1(linalg::Fn::Log, sx.lambda);
    return b;
}

RMat BaseOperator::apply(const RMat& R) const {
    const int n = side();
    RMat out(R.rows(), R.cols());
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        RVec c = R.col(j);
        out.col(j) = svec(linalg::eig_scale(sx_, D_, smat(c.data(), n)));
    }
    return out;
}

RMat BaseOperator::apply_inverse(const RMat& R) const {
    const int n = side();
    RMat out(R.rows(), R.cols());
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        RVec c = R.col(j);
        out.col(j) = svec(linalg::eig_unscale(sx_, D_, smat(c.data(), n)));
    }
    return out;
}

CMat BaseOperator::apply_inverse(const CMat& H) const { return linalg::eig_unscale(sx_, D_, H); }

// ---- Schur pipelines ----

RMat SchurPipeline::stacked_adjoint(const std::vector<LinearMap>& factors) {
    if (factors.empty()) return RMat();
    const int n = factors[0].in_side();
    int R = 0;
    for (const LinearMap& P : factors) R += P.out_side() * P.out_side();
    RMat U(n * n, R);
    int off = 0;
    for (const LinearMap& P : factors) {
        const int k = P.out_side() * P.out_side();
        U.middleCols(off, k) = P.matrix().transpose();
        off += k;
    }
    return U;
}

RMat SchurPipeline::kraus_gram(const std::vector<LinearMap>& factors, const CMat& X) {
    std::vector<std::vector<CMat>> ops;
    std::vector<int> off;
    int R = 0;
    for (const LinearMap& P : factors) {
        ops.push_back(P.kraus_ops());
        off.push_back(R);
        R += P.out_side() * P.out_side();
    }
    RMat G(R, R);
    for (size_t a = 0; a < factors.size(); ++a) {
        const int ka = factors[a].out_side();
        for (size_t b = 0; b < factors.size(); ++b) {
            const int kb = factors[b].out_side();
            std::vector<CMat> C;
            for (const CMat& Kb : ops[b])
                for (const CMat& Ka : ops[a]) C.push_back(Kb * X * Ka.adjoint());
            RVec e = RVec::Zero(ka * ka);
            for (int j = 0; j < ka * ka; ++j) {
                e(j) = 1.0;
                const CMat E = smat(e.data(), ka);
                CMat Y = CMat::Zero(kb, kb);
                for (const CMat& Cji : C) Y.noalias() += Cji * E * Cji.adjoint();
                G.block(off[b], off[a] + j, kb * kb, 1) = svec(Y);
                e(j) = 0.0;
            }
        }
    }
    return G;
}

namespace {

int total_factor_dim(const std::vector<LinearMap>& factors) {
    int R = 0;
    for (const LinearMap& P : factors) R += P.out_side() * P.out_side();
    return R;
}

}  // namespace

SchurPipeline SchurPipeline::nonsym(BaseOperator base, std::vector<LinearMap> factors, const RMat& B) {
    SchurPipeline p;
    p.base_ = std::move(base);
    p.factors_ = std::move(factors);
    p.factor_dim_ = total_factor_dim(p.factors_);
    auto bp = std::make_shared<const BaseOperator>(p.base_);
    linalg::BlockSolve Ainv = [bp](const RMat& R) { return bp->apply_inverse(R); };
    bool kraus = p.base_.kind() == BaseKind::Logdet && !p.factors_.empty();
    for (const LinearMap& P : p.factors_) kraus = kraus && P.has_kraus();
    if (!kraus) {
        p.solver_ = linalg::LowRankSolver::nonsym(Ainv, stacked_adjoint(p.factors_), B);
        return p;
    }
    p.kraus_gram_ = true;
    const linalg::Spectral& s = p.base_.spectral();
    const CMat X = linalg::reconstruct(s);
    const RMat gram = kraus_gram(p.factors_, X);
    auto fp = std::make_shared<const std::vector<LinearMap>>(p.factors_);
    const int n = p.base_.side();
    linalg::BlockSolve Uop = [fp, n](const RMat& V) {
        RMat out = RMat::Zero(n * n, V.cols());
        for (Eigen::Index c = 0; c < V.cols(); ++c) {
            CMat acc = CMat::Zero(n, n);
            int off = 0;
            for (const LinearMap& P : *fp) {
                const int k = P.out_side();
                acc += P.adjoint(smat(V.col(c).data() + off, k));
                off += k * k;
            }
            out.col(c) = svec(acc);
        }
        return out;
    };
    const int R = p.factor_dim_;
    linalg::BlockSolve Utop = [fp, n, R](const RMat& Xs) {
        RMat out(R, Xs.cols());
        for (Eigen::Index c = 0; c < Xs.cols(); ++c) {
            const CMat H = smat(Xs.col(c).data(), n);
            int off = 0;
            for (const LinearMap& P : *fp) {
                const int k = P.out_side();
                out.block(off, c, k * k, 1) = svec(P.apply(H));
                off += k * k;
            }
        }
        return out;
    };
    p.solver_ = linalg::LowRankSolver::nonsym_gram(Ainv, Uop, Utop, gram, B);
    return p;
}

SchurPipeline SchurPipeline::sym(BaseOperator base, std::vector<LinearMap> factors, const RMat& Binv) {
    SchurPipeline p;
    p.base_ = std::move(base);
    p.factors_ = std::move(factors);
    p.factor_dim_ = total_factor_dim(p.factors_);
    auto bp = std::make_shared<const BaseOperator>(p.base_);
    linalg::BlockSolve Ainv = [bp](const RMat& R) { return bp->apply_inverse(R); };
    const int n = p.base_.side();
    RMat U = p.factors_.empty() ? RMat(n * n, 0) : stacked_adjoint(p.factors_);
    p.solver_ = linalg::LowRankSolver::sym(Ainv, U, Binv);
    return p;
}

SchurPipeline SchurPipeline::block(BaseOperator base, std::vector<LinearMap> factors, const RMat& Bc, const RMat& C) {
    SchurPipeline p;
    p.base_ = std::move(base);
    p.factors_ = std::move(factors);
    p.factor_dim_ = total_factor_dim(p.factors_);
    auto bp = std::make_shared<const BaseOperator>(p.base_);
    linalg::BlockSolve Ainv = [bp](const RMat& R) { return bp->apply_inverse(R); };
    const int n = p.base_.side();
    RMat U = p.factors_.empty() ? RMat(n * n, 0) : stacked_adjoint(p.factors_);
    p.solver_ = linalg::LowRankSolver::block(Ainv, U, Bc, C);
    return p;
}

RMat SchurPipeline::solve(const RMat& rhs) const { return solver_.solve(rhs); }

RVec SchurPipeline::solve(const RVec& rhs) const { return solver_.solve(rhs); }

RVec schur_solve(const SchurPipeline& pipeline, const RVec& rhs) { return pipeline.solve(rhs); }

}  // namespace structure
}  // namespace qrep
