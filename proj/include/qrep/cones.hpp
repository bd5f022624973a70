#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qrep/linalg.hpp"

namespace qrep {
namespace cones {

// Barrier oracle for one cone. set_point caches everything the value,
// gradient and Hessian need; factorizations for inverse-Hessian solves are
// built lazily on first use (prepare_inverse() forces it, after which all
// const methods are read-only and may be called concurrently).
class Cone {
public:
    virtual ~Cone() = default;
    virtual std::string name() const = 0;
    int dim() const { return dim_; }
    double nu() const { return nu_; }

    virtual bool set_point(const RVec& x) = 0;
    bool feasible() const { return feas_; }
    const RVec& point() const { return x_; }

    virtual double barrier() const = 0;
    virtual RVec grad() const = 0;
    virtual RVec hess_apply(const RVec& h) const = 0;
    RVec inv_hess_solve(const RVec& r) const;
    virtual RMat inv_hess_solve(const RMat& R) const = 0;
    virtual void prepare_inverse() const {}
    virtual RVec init_point() const = 0;

    // Dense oracles: Hessian assembled by applying hess_apply to the basis, and
    // a solve with its Cholesky (LU if indefinite) factorization.
    RMat hess_matrix() const;
    RVec inv_hess_dense(const RVec& r) const;
    // Largest Hessian dimension this cone factors densely (memory guard input).
    virtual int dense_dim() const { return dim_; }

protected:
    void require_feasible(const char* what) const;
    double interior_tol(const RVec& x) const;

    int dim_ = 0;
    double nu_ = 0;
    RVec x_;
    bool feas_ = false;
};

typedef std::unique_ptr<Cone> ConePtr;

class NonnegCone : public Cone {
public:
    explicit NonnegCone(int n);
    std::string name() const override { return "nonneg"; }
    bool set_point(const RVec& x) override;
    double barrier() const override;
    RVec grad() const override;
    RVec hess_apply(const RVec& h) const override;
    using Cone::inv_hess_solve;
    RMat inv_hess_solve(const RMat& R) const override;
    RVec init_point() const override;
    int dense_dim() const override { return 1; }
};

class PSDCone : public Cone {
public:
    explicit PSDCone(int n);
    std::string name() const override { return "psd"; }
    int side() const { return n_; }
    bool set_point(const RVec& x) override;
    double barrier() const override;
    RVec grad() const override;
    RVec hess_apply(const RVec& h) const override;
    using Cone::inv_hess_solve;
    RMat inv_hess_solve(const RMat& R) const override;
    RVec init_point() const override;
    int dense_dim() const override { return n_; }

private:
    int n_;
    CMat X_, Xinv_;
    double logdet_ = 0;
};

// Barrier -log(t - phi(u)) + L(u) for the epigraph of a degree-one
// homogeneous convex phi; L is a sum of -logdet / -log terms on the blocks
// of u. Derived classes supply phi and L and may replace the solve with
// M = zeta^-1 d2phi + d2L.
class EpigraphCone : public Cone {
public:
    bool set_point(const RVec& x) override;
    double barrier() const override;
    RVec grad() const override;
    RVec hess_apply(const RVec& h) const override;
    using Cone::inv_hess_solve;
    RMat inv_hess_solve(const RMat& R) const override;
    void prepare_inverse() const override;

    double zeta() const { return zeta_; }
    double phi() const { return phi_; }
    const RVec& grad_phi() const { return gphi_; }
    virtual RVec hess_phi(const RVec& h) const = 0;
    // M h
    RVec inner_hess_apply(const RVec& h) const;
    virtual RMat inner_hess_matrix() const;

protected:
    // Sets caches for u; returns false outside the domain of phi and L.
    virtual bool set_inner(const RVec& u) = 0;
    virtual double logbar() const = 0;
    virtual RVec grad_logbar() const = 0;
    virtual RVec hess_logbar(const RVec& h) const = 0;
    virtual void factor_inner() const;
    virtual RMat solve_inner(const RMat& R) const;
    void invalidate() const { factored_ = false; }

    double zeta_ = 0, phi_ = 0;
    RVec gphi_;
    mutable bool factored_ = false;
    mutable Eigen::LLT<RMat> llt_;
};

// Classical relative entropy: (t, x, y) with t >= sum x log(x/y).
class CRECone : public EpigraphCone {
public:
    explicit CRECone(int n);
    std::string name() const override { return "cre"; }
    RVec init_point() const override;
    RVec hess_phi(const RVec& h) const override;

protected:
    bool set_inner(const RVec& u) override;
    double logbar() const override;
    RVec grad_logbar() const override;
    RVec hess_logbar(const RVec& h) const override;
    void factor_inner() const override {}
    RMat solve_inner(const RMat& R) const override;

private:
    int n_;
    RVec xv_, yv_;
};

// Homogenized quantum entropy: (t, X, y) with t >= tr[X log X] - tr[X] log y.
class QECone : public EpigraphCone {
public:
    explicit QECone(int n);
    std::string name() const override { return "qe"; }
    RVec init_point() const override;
    RVec hess_phi(const RVec& h) const override;

protected:
    bool set_inner(const RVec& u) override;
    double logbar() const override;
    RVec grad_logbar() const override;
    RVec hess_logbar(const RVec& h) const override;
    void factor_inner() const override;
    RMat solve_inner(const RMat& R) const override;

private:
    int n_;
    CMat X_;
    double y_ = 1, trX_ = 0;
    linalg::Spectral sx_;
    RMat dlog_;  // log^[1] at eig(X)
    mutable RMat dinv_;
    mutable RVec w_;  // A^-1 applied to the coupling column
    mutable double schur_ = 0;
};

// Quantum relative entropy: (t, X, Y) with t >= tr[X (log X - log Y)].
class QRECone : public EpigraphCone {
public:
    explicit QRECone(int n);
    std::string name() const override { return "qre"; }
    int side() const { return n_; }
    RVec init_point() const override;
    RVec hess_phi(const RVec& h) const override;
    int dense_dim() const override { return 2 * n_ * n_ + 1; }

protected:
    bool set_inner(const RVec& u) override;
    double logbar() const override;
    RVec grad_logbar() const override;
    RVec hess_logbar(const RVec& h) const override;

private:
    int n_;
    CMat X_, Y_, Xinv_, Yinv_;
    linalg::Spectral sx_, sy_;
    RMat dlx_, dly_;
    std::vector<RMat> d2y_;
    CMat Xhat_y_;  // U_Y^H X U_Y
};

// Entanglement-fidelity rate-distortion cone: (t, y in R^{n^2-n}, Z in H^n),
// the restriction of the conditional entropy cone to the fixed-point
// subspace. Off-diagonal pairs (i, j), i != j, are ordered row-major.
class QRDCone : public EpigraphCone {
public:
    explicit QRDCone(int n);
    std::string name() const override { return "qrd"; }
    int side() const { return n_; }
    RVec init_point() const override;
    RVec hess_phi(const RVec& h) const override;
    int dense_dim() const override { return n_ + 1; }
    // Column index j of the reduced marginal that y_(i,j) feeds.
    static std::vector<std::pair<int, int>> pairs(int n);
    // The linear map (y, Z) -> G(y, Z) in H^{n*n} and its reduced marginal.
    static CMat lift(const RVec& y, const CMat& Z);
    RVec marginal() const { return ghat_; }

protected:
    bool set_inner(const RVec& u) override;
    double logbar() const override;
    RVec grad_logbar() const override;
    RVec hess_logbar(const RVec& h) const override;
    void factor_inner() const override;
    RMat solve_inner(const RMat& R) const override;

private:
    int n_, ny_;
    std::vector<std::pair<int, int>> pairs_;
    RVec y_, ghat_;
    CMat Z_;
    linalg::Spectral sz_;
    RMat dlz_;
    mutable RMat dinv_z_;
    mutable RVec ainv_y_;
    mutable RMat ainv_u_;  // A^-1 U, dim-1 x n
    mutable Eigen::LLT<RMat> small_;
};

// Log-homogeneity, Euler identities and derivative checks, used by tests and
// the CLI `check` command.
struct OracleReport {
    double grad_fd = 0;        // relative error of grad vs central differences
    double hess_fd = 0;        // relative error of hess vs differences of grad
    double inv_hess = 0;       // |inv(hess(h)) - h| / |h|
    double homogeneity = 0;    // |F(tau x) - F(x) + nu log tau|
    double euler_grad = 0;     // |<grad, x> + nu| / nu
    double euler_hess = 0;     // |hess(x) + grad| / |grad|
};
OracleReport check_oracles(Cone& cone, const RVec& x, std::mt19937_64& rng);

// Max over random directions of |D^3F[h,h,h]| / (D^2F[h,h])^{3/2}.
double self_concordance_ratio(Cone& cone, const RVec& x, std::mt19937_64& rng, int trials);

// Random interior point near the central ray.
RVec random_interior_point(Cone& cone, std::mt19937_64& rng, double spread = 0.3);

}  // namespace cones
}  // namespace qrep
