#include "qrep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qrep {
namespace linalg {

namespace {
const double SQRT2 = std::sqrt(2.0);
const double INV_SQRT2 = 1.0 / std::sqrt(2.0);

double tie_tol(double a, double b) { return 1e-8 * std::max(1.0, std::abs(a) + std::abs(b)); }
}  // namespace

int side_from_vec_dim(Eigen::Index len) {
    int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(len))));
    if (n <= 0 || static_cast<Eigen::Index>(n) * n != len)
        throw DimensionError("vector length " + std::to_string(len) + " is not a square");
    return n;
}

void svec_into(const CMat& X, double* out) {
    const Eigen::Index n = X.rows();
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            out[k++] = SQRT2 * X(i, j).real();
            out[k++] = SQRT2 * X(i, j).imag();
        }
        out[k++] = X(i, i).real();
    }
}

RVec svec(const CMat& X) {
    if (X.rows() != X.cols()) throw DimensionError("svec: matrix not square");
    RVec v(X.rows() * X.rows());
    svec_into(X, v.data());
    return v;
}

CMat smat(const double* v, int n) {
    CMat X(n, n);
    Eigen::Index k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            Complex z(v[k] * INV_SQRT2, v[k + 1] * INV_SQRT2);
            k += 2;
            X(i, j) = z;
            X(j, i) = std::conj(z);
        }
        X(i, i) = Complex(v[k++], 0.0);
    }
    return X;
}

CMat smat(const RVec& v) { return smat(v.data(), side_from_vec_dim(v.size())); }

double inner(const CMat& A, const CMat& B) { return (A.conjugate().cwiseProduct(B)).sum().real(); }

CMat hermitian_part(const CMat& X) { return 0.5 * (X + X.adjoint()); }

bool is_hermitian(const CMat& X, double tol) {
    return X.rows() == X.cols() && (X - X.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Spectral eigh(const CMat& X) {
    if (!X.allFinite()) throw NumericError("eigh: non-finite entries");
    Eigen::SelfAdjointEigenSolver<CMat> es(X);
    if (es.info() != Eigen::Success) throw NumericError("eigh: decomposition failed");
    Spectral s;
    s.lambda = es.eigenvalues().reverse();
    s.U = es.eigenvectors().rowwise().reverse();
    return s;
}

CMat reconstruct(const Spectral& s) { return s.U * s.lambda.asDiagonal() * s.U.adjoint(); }

double fn_value(Fn f, double x, int order) {
    switch (f) {
        case Fn::Log:
            if (!(x > 0)) throw DomainError("log: nonpositive argument");
            switch (order) {
                case 0: return std::log(x);
                case 1: return 1.0 / x;
                case 2: return -1.0 / (x * x);
                default: return 2.0 / (x * x * x);
            }
        case Fn::Inv:
            if (!(x > 0)) throw DomainError("inv: nonpositive argument");
            switch (order) {
                case 0: return 1.0 / x;
                case 1: return -1.0 / (x * x);
                case 2: return 2.0 / (x * x * x);
                default: return -6.0 / (x * x * x * x);
            }
        case Fn::XLogX:
            if (order == 0 && x == 0.0) return 0.0;
            if (!(x > 0)) throw DomainError("x log x: nonpositive argument");
            switch (order) {
                case 0: return x * std::log(x);
                case 1: return std::log(x) + 1.0;
                case 2: return 1.0 / x;
                default: return -1.0 / (x * x);
            }
        case Fn::Exp:
            return std::exp(x);
    }
    return 0.0;
}

double divided_difference_1(Fn f, double a, double b) {
    const double d = a - b;
    if (std::abs(d) < tie_tol(a, b)) return fn_value(f, 0.5 * (a + b), 1);
    switch (f) {
        case Fn::Log:
            if (!(a > 0 && b > 0)) throw DomainError("log: nonpositive argument");
            return std::log1p(d / b) / d;
        case Fn::Inv:
            if (!(a > 0 && b > 0)) throw DomainError("inv: nonpositive argument");
            return -1.0 / (a * b);
        case Fn::XLogX:
            if (!(a > 0 && b > 0)) throw DomainError("x log x: nonpositive argument");
            return a * std::log1p(d / b) / d + std::log(b);
        case Fn::Exp:
            return std::exp(b) * std::expm1(d) / d;
    }
    return 0.0;
}

double divided_difference_2(Fn f, double a, double b, double c) {
    if (f == Fn::Inv) {
        if (!(a > 0 && b > 0 && c > 0)) throw DomainError("inv: nonpositive argument");
        return 1.0 / (a * b * c);
    }
    double v[3] = {a, b, c};
    std::sort(v, v + 3, std::greater<double>());
    const double span = v[0] - v[2];
    if (span < tie_tol(v[0], v[2])) return 0.5 * fn_value(f, v[1], 2);
    return (divided_difference_1(f, v[0], v[1]) - divided_difference_1(f, v[1], v[2])) / span;
}

RMat divided_differences_1(Fn f, const RVec& lambda) {
    const Eigen::Index n = lambda.size();
    RMat D(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        D(i, i) = fn_value(f, lambda(i), 1);
        for (Eigen::Index j = 0; j < i; ++j) D(i, j) = D(j, i) = divided_difference_1(f, lambda(i), lambda(j));
    }
    return D;
}

std::vector<RMat> divided_differences_2(Fn f, const RVec& lambda) {
    const Eigen::Index n = lambda.size();
    std::vector<RMat> out(n, RMat(n, n));
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                out[k](i, j) = out[k](j, i) = divided_difference_2(f, lambda(i), lambda(j), lambda(k));
    return out;
}

DividedDifferenceTable divided_differences(Fn f, const RVec& lambda, int order) {
    DividedDifferenceTable t;
    t.order = order;
    if (order != 1 && order != 2) throw std::invalid_argument("divided_differences: order must be 1 or 2");
    t.first = divided_differences_1(f, lambda);
    if (order == 2) t.second = divided_differences_2(f, lambda);
    return t;
}

CMat spectral_apply(const Spectral& s, Fn f) {
    RVec fl(s.lambda.size());
    for (Eigen::Index i = 0; i < fl.size(); ++i) fl(i) = fn_value(f, s.lambda(i), 0);
    return s.U * fl.asDiagonal() * s.U.adjoint();
}

CMat spectral_function(const CMat& X, Fn f) {
    Spectral s = eigh(X);
    if (f != Fn::Exp) {
        const double tol = f == Fn::XLogX ? -1e-12 * std::max(1.0, std::abs(s.lambda(0))) : 0.0;
        if (s.lambda(s.lambda.size() - 1) <= tol)
            throw DomainError("spectral_function: eigenvalue outside the domain");
        if (f == Fn::XLogX) s.lambda = s.lambda.cwiseMax(0.0);
    }
    return spectral_apply(s, f);
}

CMat eig_scale(const Spectral& s, const RMat& D, const CMat& H) {
    CMat Hh = s.U.adjoint() * H * s.U;
    Hh = Hh.cwiseProduct(D.cast<Complex>());
    return s.U * Hh * s.U.adjoint();
}

CMat eig_unscale(const Spectral& s, const RMat& D, const CMat& H) {
    CMat Hh = s.U.adjoint() * H * s.U;
    Hh = Hh.cwiseQuotient(D.cast<Complex>());
    return s.U * Hh * s.U.adjoint();
}

CMat weighted_hess_eig(const Spectral& s, const std::vector<RMat>& d2, const CMat& Chat, const CMat& H) {
    const Eigen::Index n = s.lambda.size();
    CMat Hh = s.U.adjoint() * H * s.U;
    CMat M = CMat::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        CMat outer = Chat.col(k) * Hh.row(k) + Hh.col(k) * Chat.row(k);
        M += outer.cwiseProduct(d2[k].cast<Complex>());
    }
    return s.U * M * s.U.adjoint();
}

double classical_entropy(const RVec& x) {
    double s = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < 0) throw DomainError("classical_entropy: negative entry");
        if (x(i) > 0) s -= x(i) * std::log(x(i));
    }
    return s;
}

double quantum_entropy(const CMat& X) {
    Spectral s = eigh(X);
    const double scale = std::max(1.0, std::abs(s.lambda.sum()));
    double v = 0;
    for (Eigen::Index i = 0; i < s.lambda.size(); ++i) {
        const double l = s.lambda(i);
        if (l < -1e-12 * scale) throw DomainError("quantum_entropy: matrix not PSD");
        if (l > 1e-12 * scale) v -= l * std::log(l);
    }
    return v;
}

double quantum_relative_entropy(const CMat& X, const CMat& Y) {
    Spectral sx = eigh(X), sy = eigh(Y);
    const double cut = 1e-12 * (1.0 + std::abs(sx.lambda.sum()));
    const double cuty = 1e-12 * (1.0 + std::abs(sy.lambda.sum()));
    double v = 0;
    for (Eigen::Index i = 0; i < sx.lambda.size(); ++i) {
        const double l = sx.lambda(i);
        if (l < -cut) throw DomainError("quantum_relative_entropy: first argument not PSD");
        if (l > cut) v += l * std::log(l);
    }
    // -tr[X log Y] over the support of Y; X must vanish on ker(Y).
    CMat Xh = sy.U.adjoint() * X * sy.U;
    for (Eigen::Index j = 0; j < sy.lambda.size(); ++j) {
        const double mu = sy.lambda(j);
        const double w = Xh(j, j).real();
        if (mu <= cuty) {
            if (w > cut) {
                std::ostringstream os;
                os << "quantum_relative_entropy: kernel inclusion violated at eigenpair " << j << " (eigenvalue "
                   << mu << ", weight " << w << ")";
                throw DomainError(os.str());
            }
            continue;
        }
        v -= w * std::log(mu);
    }
    return v;
}

TraceDerivatives trace_spectral_derivatives(const CMat& X, Fn f, const CMat& H) {
    Spectral s = eigh(X);
    RVec d(s.lambda.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = fn_value(f, s.lambda(i), 1);
    // (f')^[1]; for the kernels we support f' is again a supported kernel up to
    // an additive constant, which divided differences ignore.
    Fn fp = f;
    switch (f) {
        case Fn::Log: fp = Fn::Inv; break;
        case Fn::XLogX: fp = Fn::Log; break;
        case Fn::Exp: fp = Fn::Exp; break;
        case Fn::Inv: throw std::invalid_argument("trace_spectral_derivatives: unsupported kernel");
    }
    RMat D = divided_differences_1(fp, s.lambda);
    if ((D.array() == 0.0).any()) throw SingularError("trace_spectral_derivatives: zero divided difference");
    TraceDerivatives out;
    out.grad = s.U * d.asDiagonal() * s.U.adjoint();
    out.hess = eig_scale(s, D, H);
    out.inv_hess = eig_unscale(s, D, H);
    return out;
}

WeightedDerivatives weighted_trace_spectral_derivatives(const CMat& X, const CMat& C, Fn f, const CMat& H) {
    Spectral s = eigh(X);
    RMat D1 = divided_differences_1(f, s.lambda);
    std::vector<RMat> D2 = divided_differences_2(f, s.lambda);
    CMat Chat = s.U.adjoint() * C * s.U;
    WeightedDerivatives out;
    out.grad = s.U * Chat.cwiseProduct(D1.cast<Complex>()) * s.U.adjoint();
    out.hess = weighted_hess_eig(s, D2, Chat, H);
    return out;
}

CMat logdet_hessian_apply(const CMat& Xinv, const CMat& H) { return -(Xinv * H * Xinv); }

CMat logdet_hessian_solve(const CMat& X, const CMat& H) {
    Eigen::LLT<CMat> llt(X);
    if (llt.info() != Eigen::Success) throw DomainError("logdet_hessian_solve: matrix not positive definite");
    return -(X * H * X);
}

CMat partial_trace(const CMat& X, int side, int n, int m) {
    if (X.rows() != static_cast<Eigen::Index>(n) * m || X.cols() != X.rows())
        throw DimensionError("partial_trace: dimension mismatch");
    if (side == 1) {
        CMat Y = CMat::Zero(m, m);
        for (int a = 0; a < n; ++a) Y += X.block(a * m, a * m, m, m);
        return Y;
    }
    if (side == 2) {
        CMat Y(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) Y(i, j) = X.block(i * m, j * m, m, m).trace();
        return Y;
    }
    throw std::invalid_argument("partial_trace: side must be 1 or 2");
}

CMat kron_identity(const CMat& Y, int side, int n, int m) {
    if (side == 1) {
        if (Y.rows() != m) throw DimensionError("kron_identity: dimension mismatch");
        CMat X = CMat::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
        for (int a = 0; a < n; ++a) X.block(a * m, a * m, m, m) = Y;
        return X;
    }
    if (side == 2) {
        if (Y.rows() != n) throw DimensionError("kron_identity: dimension mismatch");
        CMat X = CMat::Zero(static_cast<Eigen::Index>(n) * m, static_cast<Eigen::Index>(n) * m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                X.block(i * m, j * m, m, m).diagonal().setConstant(Y(i, j));
        return X;
    }
    throw std::invalid_argument("kron_identity: side must be 1 or 2");
}

RMat build_hessian_matrix(const std::function<RVec(const RVec&)>& apply, int dim) {
    RMat M(dim, dim);
    RVec e = RVec::Zero(dim);
    for (int j = 0; j < dim; ++j) {
        e(j) = 1.0;
        M.col(j) = apply(e);
        e(j) = 0.0;
    }
    return 0.5 * (M + M.transpose());
}

CMat complex_gaussian(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    CMat G(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) {
            const double re = nd(rng);
            const double im = nd(rng);
            G(i, j) = Complex(re, im);
        }
    return G;
}

CMat random_hermitian(int n, std::mt19937_64& rng) {
    CMat G = complex_gaussian(n, n, rng);
    return 0.5 * (G + G.adjoint());
}

CMat random_pd(int n, std::mt19937_64& rng, double shift) {
    CMat G = complex_gaussian(n, n, rng);
    CMat X = G * G.adjoint() / static_cast<double>(n);
    X.diagonal().array() += shift;
    return hermitian_part(X);
}

CMat random_density(int n, std::mt19937_64& rng) {
    CMat G = complex_gaussian(n, n, rng);
    CMat X = G * G.adjoint();
    X /= X.trace().real();
    return hermitian_part(X);
}

}  // namespace linalg
}  // namespace qrep
