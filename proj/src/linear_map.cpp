#include "qrep/linear_map.hpp"

#include <numeric>
#include <sstream>

namespace qrep {

using linalg::smat;
using linalg::svec;

LinearMap LinearMap::identity(int n) { return congruence(CMat::Identity(n, n)); }

LinearMap LinearMap::dense(const RMat& M) {
    LinearMap G;
    G.kind_ = Kind::Dense;
    G.in_ = linalg::side_from_vec_dim(M.cols());
    G.out_ = linalg::side_from_vec_dim(M.rows());
    G.dense_ = M;
    return G;
}

LinearMap LinearMap::kraus(std::vector<CMat> ops) {
    if (ops.empty()) throw DimensionError("kraus: empty operator list");
    LinearMap G;
    G.kind_ = Kind::Kraus;
    G.in_ = static_cast<int>(ops[0].cols());
    G.out_ = static_cast<int>(ops[0].rows());
    for (const CMat& K : ops)
        if (K.rows() != G.out_ || K.cols() != G.in_) throw DimensionError("kraus: inconsistent operator shapes");
    G.ops_ = std::move(ops);
    return G;
}

LinearMap LinearMap::partial_trace(int side, int n, int m) {
    LinearMap G;
    G.kind_ = Kind::PartialTrace;
    G.side_ = side;
    G.n_ = n;
    G.m_ = m;
    G.in_ = n * m;
    G.out_ = side == 1 ? m : n;
    return G;
}

LinearMap LinearMap::kron_identity(int side, int n, int m) {
    LinearMap G;
    G.kind_ = Kind::KronIdentity;
    G.side_ = side;
    G.n_ = n;
    G.m_ = m;
    G.in_ = side == 1 ? m : n;
    G.out_ = n * m;
    return G;
}

LinearMap LinearMap::pinching(std::vector<int> blocks) {
    LinearMap G;
    G.kind_ = Kind::Pinching;
    G.in_ = G.out_ = std::accumulate(blocks.begin(), blocks.end(), 0);
    G.blocks_ = std::move(blocks);
    return G;
}

LinearMap LinearMap::direct_sum(std::vector<LinearMap> parts) {
    if (parts.empty()) throw DimensionError("direct_sum: no parts");
    LinearMap G;
    G.kind_ = Kind::DirectSum;
    G.in_ = parts[0].in_side();
    G.out_ = 0;
    for (const LinearMap& P : parts) {
        if (P.in_side() != G.in_) throw DimensionError("direct_sum: input sides differ");
        G.out_ += P.out_side();
    }
    G.parts_ = std::move(parts);
    return G;
}

LinearMap LinearMap::congruence(const CMat& V) {
    LinearMap G;
    G.kind_ = Kind::Congruence;
    G.in_ = static_cast<int>(V.cols());
    G.out_ = static_cast<int>(V.rows());
    G.ops_ = {V};
    return G;
}

LinearMap LinearMap::compose(const LinearMap& outer, const LinearMap& inner) {
    if (outer.in_side() != inner.out_side()) throw DimensionError("compose: sides do not match");
    LinearMap G;
    G.kind_ = Kind::Compose;
    G.in_ = inner.in_side();
    G.out_ = outer.out_side();
    G.parts_ = {inner, outer};
    return G;
}

CMat LinearMap::apply(const CMat& X) const {
    if (X.rows() != in_ || X.cols() != in_) throw DimensionError("LinearMap::apply: input side mismatch");
    switch (kind_) {
        case Kind::Dense: {
            RVec y = dense_ * svec(X);
            return smat(y);
        }
        case Kind::Kraus:
        case Kind::Congruence: {
            CMat Y = CMat::Zero(out_, out_);
            for (const CMat& K : ops_) Y.noalias() += K * X * K.adjoint();
            return Y;
        }
        case Kind::PartialTrace: return linalg::partial_trace(X, side_, n_, m_);
        case Kind::KronIdentity: return linalg::kron_identity(X, side_, n_, m_);
        case Kind::Pinching: {
            CMat Y = CMat::Zero(out_, out_);
            int off = 0;
            for (int b : blocks_) {
                Y.block(off, off, b, b) = X.block(off, off, b, b);
                off += b;
            }
            return Y;
        }
        case Kind::DirectSum: {
            CMat Y = CMat::Zero(out_, out_);
            int off = 0;
            for (const LinearMap& P : parts_) {
                Y.block(off, off, P.out_side(), P.out_side()) = P.apply(X);
                off += P.out_side();
            }
            return Y;
        }
        case Kind::Compose: return parts_[1].apply(parts_[0].apply(X));
    }
    return CMat();
}

CMat LinearMap::adjoint(const CMat& Y) const {
    if (Y.rows() != out_ || Y.cols() != out_) throw DimensionError("LinearMap::adjoint: input side mismatch");
    switch (kind_) {
        case Kind::Dense: {
            RVec x = dense_.transpose() * svec(Y);
            return smat(x);
        }
        case Kind::Kraus:
        case Kind::Congruence: {
            CMat X = CMat::Zero(in_, in_);
            for (const CMat& K : ops_) X.noalias() += K.adjoint() * Y * K;
            return X;
        }
        case Kind::PartialTrace: return linalg::kron_identity(Y, side_, n_, m_);
        case Kind::KronIdentity: return linalg::partial_trace(Y, side_, n_, m_);
        case Kind::Pinching: return apply(Y);
        case Kind::DirectSum: {
            CMat X = CMat::Zero(in_, in_);
            int off = 0;
            for (const LinearMap& P : parts_) {
                X += P.adjoint(Y.block(off, off, P.out_side(), P.out_side()));
                off += P.out_side();
            }
            return X;
        }
        case Kind::Compose: return parts_[0].adjoint(parts_[1].adjoint(Y));
    }
    return CMat();
}

RVec LinearMap::apply_vec(const RVec& x) const {
    if (kind_ == Kind::Dense) return dense_ * x;
    return svec(apply(smat(x)));
}

RVec LinearMap::adjoint_vec(const RVec& y) const {
    if (kind_ == Kind::Dense) return dense_.transpose() * y;
    return svec(adjoint(smat(y)));
}

RMat LinearMap::matrix() const {
    if (kind_ == Kind::Dense) return dense_;
    const int din = in_ * in_;
    RMat M(out_ * out_, din);
    RVec e = RVec::Zero(din);
    for (int j = 0; j < din; ++j) {
        e(j) = 1.0;
        M.col(j) = svec(apply(smat(e.data(), in_)));
        e(j) = 0.0;
    }
    return M;
}

bool LinearMap::has_kraus() const {
    switch (kind_) {
        case Kind::Kraus:
        case Kind::Congruence:
        case Kind::PartialTrace:
        case Kind::KronIdentity:
        case Kind::Pinching: return true;
        case Kind::DirectSum: return false;
        case Kind::Compose: return parts_[0].has_kraus() && parts_[1].has_kraus();
        case Kind::Dense: return false;
    }
    return false;
}

std::vector<CMat> LinearMap::kraus_ops() const {
    switch (kind_) {
        case Kind::Kraus:
        case Kind::Congruence: return ops_;
        case Kind::PartialTrace: {
            // tr_1: K_a = e_a^T (x) I_m ; tr_2: K_b = I_n (x) e_b^T
            std::vector<CMat> ops;
            const int k = side_ == 1 ? n_ : m_;
            for (int a = 0; a < k; ++a) {
                CMat K = CMat::Zero(out_, in_);
                for (int i = 0; i < out_; ++i) {
                    const int col = side_ == 1 ? a * m_ + i : i * m_ + a;
                    K(i, col) = 1.0;
                }
                ops.push_back(K);
            }
            return ops;
        }
        case Kind::KronIdentity: {
            // I (x) Y = sum_a (e_a (x) I) Y (e_a (x) I)^T, Y (x) I likewise.
            std::vector<CMat> ops;
            const int k = side_ == 1 ? n_ : m_;
            for (int a = 0; a < k; ++a) {
                CMat K = CMat::Zero(out_, in_);
                for (int i = 0; i < in_; ++i) {
                    const int row = side_ == 1 ? a * m_ + i : i * m_ + a;
                    K(row, i) = 1.0;
                }
                ops.push_back(K);
            }
            return ops;
        }
        case Kind::Pinching: {
            std::vector<CMat> ops;
            int off = 0;
            for (int b : blocks_) {
                CMat P = CMat::Zero(out_, in_);
                P.block(off, off, b, b).setIdentity();
                ops.push_back(P);
                off += b;
            }
            return ops;
        }
        case Kind::Compose: {
            std::vector<CMat> inner = parts_[0].kraus_ops(), outer = parts_[1].kraus_ops(), ops;
            for (const CMat& A : outer)
                for (const CMat& B : inner) ops.push_back(A * B);
            return ops;
        }
        default: throw std::logic_error("kraus_ops: map has no Kraus form");
    }
}

std::string LinearMap::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Dense: os << "dense"; break;
        case Kind::Kraus: os << "kraus[" << ops_.size() << "]"; break;
        case Kind::PartialTrace: os << "partial_trace(" << side_ << "," << n_ << "," << m_ << ")"; break;
        case Kind::KronIdentity: os << "kron_identity(" << side_ << "," << n_ << "," << m_ << ")"; break;
        case Kind::Pinching: os << "pinching[" << blocks_.size() << "]"; break;
        case Kind::DirectSum: os << "direct_sum[" << parts_.size() << "]"; break;
        case Kind::Congruence: os << "congruence"; break;
        case Kind::Compose: os << parts_[1].describe() << " o " << parts_[0].describe(); break;
    }
    os << " H^" << in_ << " -> H^" << out_;
    return os.str();
}

bool is_positive(const LinearMap& G, std::mt19937_64& rng, int trials, double tol) {
    for (int t = 0; t < trials; ++t) {
        CMat A = linalg::complex_gaussian(G.in_side(), std::max(1, G.in_side() / 2), rng);
        CMat X = A * A.adjoint();
        CMat Y = linalg::hermitian_part(G.apply(X));
        Eigen::SelfAdjointEigenSolver<CMat> es(Y, Eigen::EigenvaluesOnly);
        const double scale = std::max(1.0, X.norm());
        if (es.eigenvalues()(0) < -tol * scale) return false;
    }
    return true;
}

double adjoint_mismatch(const LinearMap& G, std::mt19937_64& rng, int trials) {
    double worst = 0;
    for (int t = 0; t < trials; ++t) {
        CMat X = linalg::random_hermitian(G.in_side(), rng);
        CMat Y = linalg::random_hermitian(G.out_side(), rng);
        worst = std::max(worst, std::abs(linalg::inner(G.apply(X), Y) - linalg::inner(X, G.adjoint(Y))));
    }
    return worst;
}

}  // namespace qrep
