#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qrep/cones.hpp"

namespace qrep {
namespace ipm {

// min c'x + offset  s.t.  A x = b,  x in K_1 x ... x K_k  (cones in order).
struct ConicProblem {
    RVec c;
    RMat A;
    RVec b;
    std::vector<cones::ConePtr> cones;
    double offset = 0;
    // Reported objective = sign * (c'x + offset); -1 for negated maximizations.
    double sign = 1;
    std::string name;

    int num_vars() const { return static_cast<int>(c.size()); }
    double nu() const;
    // Throws DimensionError when c, A, b and the cone dims disagree.
    void validate() const;
};

struct Settings {
    double gap_tol = 1.5e-8;
    double feas_tol = 1.5e-8;
    double infeas_tol = 1e-9;
    int max_iter = 500;
    bool verbose = false;
    std::ostream* log = nullptr;  // verbose output; stdout when null
    double step_fraction = 0.99;  // beta
    double eta = 0.5;             // neighborhood radius
    double backtrack = 0.8;
    int correctors = 1;
    double min_step = 1e-10;
};

enum class Status { Optimal, PrimalInfeasible, DualInfeasible, IterationLimit, NumericalFailure };
std::string status_name(Status s);

struct IterRecord {
    int iter = 0;
    double mu = 0, gap = 0, pres = 0, dres = 0, step = 0, time_ms = 0;
};

// One line in the fixed order `iter mu gap pres dres step time_ms`.
std::string format_iter(const IterRecord& r);
std::string iter_header();

struct SolveResult {
    Status status = Status::NumericalFailure;
    double primal_obj = 0, dual_obj = 0;  // already multiplied by sign
    RVec x, y, z;
    double tau = 0, kappa = 0;
    int iterations = 0;
    double solve_time_s = 0;
    int peak_hessian_dim = 0;
    int rows_removed = 0;
    std::vector<IterRecord> trace;
    std::string message;
    double objective() const { return primal_obj; }
};

// Drops linearly dependent rows of A (rank-revealing QR, tolerance
// 1e-10 |A|). consistent=false when a dropped row's b entry disagrees with
// the combination of kept rows by more than 1e-9 (1 + |b|).
struct RowReduction {
    std::vector<int> kept;
    bool consistent = true;
};
RowReduction reduce_rows(const RMat& A, const RVec& b);

SolveResult solve(ConicProblem& problem, const Settings& settings = Settings());

// Newton system of the embedding at (x, y, z, tau, kappa) with the cone
// oracles already set at x:
//   A dx - b dtau              = ry
//   -A'dy - dz + c dtau        = rx
//   b'dy - c'dx - dkappa       = rt
//   mu H dx + dz               = rz
//   kappa dtau + tau dkappa    = rk
struct Direction {
    RVec dx, dy, dz;
    double dtau = 0, dkappa = 0;
};
struct NewtonRhs {
    RVec rx, ry, rz;
    double rt = 0, rk = 0;
};

// A blockdiag(H_k^-1) A'. Cones must be feasible at their points.
RMat assemble_schur(const RMat& A, const std::vector<cones::ConePtr>& cones);

class NewtonSystem {
public:
    // Factors the Schur complement; throws NumericError when it stays
    // indefinite after one 1e-12 I regularization.
    NewtonSystem(const RMat& A, const RVec& b, const RVec& c, const std::vector<cones::ConePtr>& cones, double mu,
                 double tau, double kappa);
    Direction solve(const NewtonRhs& rhs, int refine = 3) const;
    // Relative residual of the five block equations.
    double residual(const Direction& d, const NewtonRhs& rhs) const;
    bool regularized() const { return regularized_; }

private:
    RVec hinv(const RVec& v) const;
    RVec schur_solve(const RVec& v) const;
    RVec hess(const RVec& v) const;
    Direction solve_once(const NewtonRhs& rhs) const;

    RMat hinv_block(const RMat& V) const;

    const RMat& A_;
    const RVec& b_;
    const RVec& c_;
    const std::vector<cones::ConePtr>& cones_;
    double mu_, tau_, kappa_;
    RMat HinvAt_;
    Eigen::LLT<RMat> llt_;
    Eigen::PartialPivLU<RMat> lu_;
    bool use_lu_ = false;
    RVec dx1_, dy1_;
    double den_ = 0;
    bool regularized_ = false;
};

}  // namespace ipm
}  // namespace qrep
