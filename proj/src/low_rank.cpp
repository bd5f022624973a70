#include "qrep/low_rank.hpp"

namespace qrep {
namespace linalg {

namespace {
const double RCOND_MIN = 1e-15;
}

LowRankSolver LowRankSolver::nonsym(BlockSolve Ainv, const RMat& U, const RMat& B) {
    LowRankSolver s;
    s.mode_ = LowRankMode::Nonsym;
    s.Ainv_ = std::move(Ainv);
    s.U_ = U;
    s.B_ = B;
    s.rank_ = U.cols();
    if (U.cols() == 0) return s;
    s.AinvU_ = s.Ainv_(U);
    RMat small = RMat::Identity(U.cols(), U.cols()) - B * (U.transpose() * s.AinvU_);
    s.lu_.compute(small);
    s.rcond_ = s.lu_.rcond();
    if (!(s.rcond_ > RCOND_MIN)) throw SingularError("low-rank solve: singular Schur system");
    return s;
}

LowRankSolver LowRankSolver::sym(BlockSolve Ainv, const RMat& U, const RMat& Binv) {
    LowRankSolver s;
    s.mode_ = LowRankMode::Sym;
    s.Ainv_ = std::move(Ainv);
    s.U_ = U;
    s.rank_ = U.cols();
    if (U.cols() == 0) return s;
    s.AinvU_ = s.Ainv_(U);
    RMat small = Binv - U.transpose() * s.AinvU_;
    small = 0.5 * (small + small.transpose());
    s.llt_.compute(small);
    if (s.llt_.info() != Eigen::Success) throw SingularError("low-rank solve: Schur system not positive definite");
    const RVec d = s.llt_.matrixLLT().diagonal();
    s.rcond_ = (d.minCoeff() / d.maxCoeff()) * (d.minCoeff() / d.maxCoeff());
    if (!(s.rcond_ > RCOND_MIN)) throw SingularError("low-rank solve: ill-conditioned Schur system");
    return s;
}

LowRankSolver LowRankSolver::block(BlockSolve Ainv, const RMat& U, const RMat& B, const RMat& C) {
    LowRankSolver s;
    s.mode_ = LowRankMode::Block;
    s.Ainv_ = std::move(Ainv);
    const Eigen::Index r = U.cols();
    if (B.cols() != r || C.rows() != r) throw DimensionError("low-rank solve: block factor shapes differ");
    s.U_.resize(U.rows(), 2 * r);
    s.U_ << B, U;
    s.rank_ = 2 * r;
    if (r == 0) return s;
    s.AinvU_ = s.Ainv_(s.U_);
    RMat S = s.U_.transpose() * s.AinvU_;
    S.topLeftCorner(r, r) += C;
    S.topRightCorner(r, r) += RMat::Identity(r, r);
    S.bottomLeftCorner(r, r) += RMat::Identity(r, r);
    s.lu_.compute(S);
    s.rcond_ = s.lu_.rcond();
    if (!(s.rcond_ > RCOND_MIN)) throw SingularError("low-rank solve: singular block Schur system");
    return s;
}

LowRankSolver LowRankSolver::nonsym_gram(BlockSolve Ainv, BlockSolve U, BlockSolve Ut, const RMat& gram,
                                         const RMat& B) {
    LowRankSolver s;
    s.mode_ = LowRankMode::Nonsym;
    s.Ainv_ = std::move(Ainv);
    s.Uop_ = std::move(U);
    s.Utop_ = std::move(Ut);
    s.B_ = B;
    s.rank_ = gram.rows();
    if (s.rank_ == 0) return s;
    RMat small = RMat::Identity(s.rank_, s.rank_) - B * gram;
    s.lu_.compute(small);
    s.rcond_ = s.lu_.rcond();
    if (!(s.rcond_ > RCOND_MIN)) throw SingularError("low-rank solve: singular Schur system");
    return s;
}

RMat LowRankSolver::solve(const RMat& rhs) const {
    RMat x = Ainv_(rhs);
    if (rank_ == 0) return x;
    switch (mode_) {
        case LowRankMode::Nonsym:
            if (Uop_) {
                x += Ainv_(Uop_(lu_.solve(B_ * Utop_(x))));
            } else {
                x += AinvU_ * lu_.solve(B_ * (U_.transpose() * x));
            }
            break;
        case LowRankMode::Sym:
            x += AinvU_ * llt_.solve(U_.transpose() * x);
            break;
        case LowRankMode::Block:
            x -= AinvU_ * lu_.solve(U_.transpose() * x);
            break;
    }
    return x;
}

RVec LowRankSolver::solve(const RVec& rhs) const {
    RMat r = rhs;
    return solve(r).col(0);
}

RVec low_rank_solve(LowRankMode mode, const BlockSolve& Ainv, const RMat& U, const RMat& B, const RMat& C,
                    const RVec& rhs) {
    switch (mode) {
        case LowRankMode::Nonsym: return LowRankSolver::nonsym(Ainv, U, B).solve(rhs);
        case LowRankMode::Sym: {
            Eigen::FullPivLU<RMat> lu(B);
            if (!lu.isInvertible()) throw SingularError("low-rank solve: B is singular");
            return LowRankSolver::sym(Ainv, U, lu.inverse()).solve(rhs);
        }
        case LowRankMode::Block: return LowRankSolver::block(Ainv, U, B, C).solve(rhs);
    }
    return RVec();
}

}  // namespace linalg
}  // namespace qrep
