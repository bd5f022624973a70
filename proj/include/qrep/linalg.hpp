#pragma once

#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrep {

typedef std::complex<double> Complex;
typedef Eigen::VectorXd RVec;
typedef Eigen::MatrixXd RMat;
typedef Eigen::VectorXcd CVec;
typedef Eigen::MatrixXcd CMat;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A small system that should be nonsingular at interior points is not.
struct SingularError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace linalg {

// Hermitian matrices are coordinatized by an isometric real vector of length
// n*n: lower triangle in row-major order, diagonal as-is, each strictly lower
// entry as (sqrt2*re, sqrt2*im).
int side_from_vec_dim(Eigen::Index len);

RVec svec(const CMat& X);
void svec_into(const CMat& X, double* out);
CMat smat(const double* v, int n);
CMat smat(const RVec& v);

// Re tr[A^H B]
double inner(const CMat& A, const CMat& B);
CMat hermitian_part(const CMat& X);
bool is_hermitian(const CMat& X, double tol = 1e-12);

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kron(const Eigen::MatrixBase<Derived>& A, const Eigen::MatrixBase<Derived>& B) {
    typedef typename Derived::Scalar S;
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> K(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return K;
}

struct Spectral {
    RVec lambda;  // descending
    CMat U;
};

Spectral eigh(const CMat& X);
CMat reconstruct(const Spectral& s);

enum class Fn { Log, Inv, XLogX, Exp };

double fn_value(Fn f, double x, int order);  // order 0..3

// f^[1](lambda_i, lambda_j)
RMat divided_differences_1(Fn f, const RVec& lambda);
double divided_difference_1(Fn f, double a, double b);
// f^[2](lambda_i, lambda_j, lambda_k); result[k](i, j)
std::vector<RMat> divided_differences_2(Fn f, const RVec& lambda);
double divided_difference_2(Fn f, double a, double b, double c);

struct DividedDifferenceTable {
    int order = 1;
    RMat first;
    std::vector<RMat> second;  // filled when order == 2
};
DividedDifferenceTable divided_differences(Fn f, const RVec& lambda, int order);

CMat spectral_apply(const Spectral& s, Fn f);
CMat spectral_function(const CMat& X, Fn f);

// Congruence helpers in an eigenbasis: U (D o (U^H H U)) U^H and the
// Hadamard-division inverse.
CMat eig_scale(const Spectral& s, const RMat& D, const CMat& H);
CMat eig_unscale(const Spectral& s, const RMat& D, const CMat& H);

// Second derivative of X -> tr[C f(X)], with Chat = U^H C U and d2 the
// second divided differences of f.
CMat weighted_hess_eig(const Spectral& s, const std::vector<RMat>& d2, const CMat& Chat,
                       const CMat& H);

double quantum_entropy(const CMat& X);
double quantum_relative_entropy(const CMat& X, const CMat& Y);
double classical_entropy(const RVec& x);

// g(X) = tr f(X): gradient f'(X), Hessian product and inverse Hessian product.
struct TraceDerivatives {
    CMat grad, hess, inv_hess;
};
TraceDerivatives trace_spectral_derivatives(const CMat& X, Fn f, const CMat& H);

// h(X) = tr[C f(X)]
struct WeightedDerivatives {
    CMat grad, hess;
};
WeightedDerivatives weighted_trace_spectral_derivatives(const CMat& X, const CMat& C, Fn f,
                                                        const CMat& H);

// d^2 logdet(X)[H] = -X^-1 H X^-1 and its inverse -X H X.
CMat logdet_hessian_apply(const CMat& Xinv, const CMat& H);
CMat logdet_hessian_solve(const CMat& X, const CMat& H);

// X on C^n (x) C^m; side 1 traces out the first factor (result m x m),
// side 2 the second (result n x n).
CMat partial_trace(const CMat& X, int side, int n, int m);
// Adjoint of partial_trace: I_n (x) Y for side 1, Y (x) I_m for side 2.
CMat kron_identity(const CMat& Y, int side, int n, int m);

RMat build_hessian_matrix(const std::function<RVec(const RVec&)>& apply, int dim);

// Random test data.
CMat random_hermitian(int n, std::mt19937_64& rng);
CMat random_pd(int n, std::mt19937_64& rng, double shift = 0.5);
CMat random_density(int n, std::mt19937_64& rng);
CMat complex_gaussian(int rows, int cols, std::mt19937_64& rng);

}  // namespace linalg
}  // namespace qrep
