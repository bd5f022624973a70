#pragma once

#include <functional>

#include "qrep/linalg.hpp"

namespace qrep {
namespace linalg {

// Applies A^-1 to every column.
typedef std::function<RMat(const RMat&)> BlockSolve;

enum class LowRankMode { Nonsym, Sym, Block };

// Solves with a low-rank modification of an operator A whose inverse is
// cheap, through a small Schur system factored once.
//   Nonsym: (A - U B U^T)^-1, LU of I - B U^T A^-1 U.
//   Sym:    (A - U B U^T)^-1, Cholesky of B^-1 - U^T A^-1 U (B^-1 supplied).
//   Block:  (A + U B^T + B U^T - U C U^T)^-1, LU of the 2r x 2r system
//           S = [C I; I 0] + [B U]^T A^-1 [B U].
class LowRankSolver {
public:
    LowRankSolver() = default;
    static LowRankSolver nonsym(BlockSolve Ainv, const RMat& U, const RMat& B);
    static LowRankSolver sym(BlockSolve Ainv, const RMat& U, const RMat& Binv);
    static LowRankSolver block(BlockSolve Ainv, const RMat& U, const RMat& B, const RMat& C);
    // Nonsym with U given as an operator and U^T A^-1 U supplied by the caller;
    // A^-1 U is never stored.
    static LowRankSolver nonsym_gram(BlockSolve Ainv, BlockSolve U, BlockSolve Ut, const RMat& gram, const RMat& B);

    RMat solve(const RMat& rhs) const;
    RVec solve(const RVec& rhs) const;
    LowRankMode mode() const { return mode_; }
    Eigen::Index rank() const { return rank_; }
    // Reciprocal condition estimate of the small system.
    double rcond() const { return rcond_; }

private:
    LowRankMode mode_ = LowRankMode::Nonsym;
    BlockSolve Ainv_;
    RMat U_;      // n x r (Block: [B U], n x 2r)
    RMat AinvU_;  // A^-1 U
    RMat B_;
    BlockSolve Uop_, Utop_;
    Eigen::Index rank_ = 0;
    Eigen::PartialPivLU<RMat> lu_;
    Eigen::LLT<RMat> llt_;
    double rcond_ = 1.0;
};

// One-shot form. In Sym mode B itself is passed and inverted here; C is only
// read in Block mode.
RVec low_rank_solve(LowRankMode mode, const BlockSolve& Ainv, const RMat& U, const RMat& B, const RMat& C,
                    const RVec& rhs);

}  // namespace linalg
}  // namespace qrep
