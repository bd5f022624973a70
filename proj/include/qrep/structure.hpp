#pragma once

#include <string>
#include <vector>

#include "qrep/linalg.hpp"
#include "qrep/linear_map.hpp"
#include "qrep/low_rank.hpp"

namespace qrep {

struct DeclarationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace structure {

// Range of G(I): the face of the PSD cone that contains every G(X), X >= 0.
struct FacialReduction {
    CMat U;  // m x r, orthonormal columns
    int rank = 0;
    std::string source;
    // X -> U^H G(X) U
    LinearMap reduced(const LinearMap& G) const;
};

FacialReduction facial_reduce(const LinearMap& G, double cutoff = 1e-10);

// Declared block-diagonal structure of a map's output. Block i collects the
// output indices blocks[i]; the extractor is X -> S_i G(X) S_i^T.
struct BlockStructure {
    std::vector<LinearMap> extractors;
    std::vector<int> sizes;
    std::vector<int> permutation;  // concatenated block indices
};

BlockStructure decompose_blocks(const LinearMap& G, const std::vector<std::vector<int>>& blocks,
                                std::mt19937_64& rng);
// Contiguous blocks of the given sizes.
BlockStructure decompose_blocks(const LinearMap& G, const std::vector<int>& sizes, std::mt19937_64& rng);
// |G(X) - sum_i S_i^T G_i(X) S_i|_F
double reassembly_residual(const LinearMap& G, const BlockStructure& bs, const CMat& X);

// Operators on svec(H^n) that are Hadamard scalings in the eigenbasis of X:
//   Logdet:            A = X^-1 . X^-1
//   EntropyPlusLogdet: A = s * Dlog(X) + X^-1 . X^-1
enum class BaseKind { Logdet, EntropyPlusLogdet };

class BaseOperator {
public:
    BaseOperator() = default;
    static BaseOperator logdet(const linalg::Spectral& sx);
    static BaseOperator entropy_logdet(const linalg::Spectral& sx, double scale);

    BaseKind kind() const { return kind_; }
    int side() const { return static_cast<int>(sx_.lambda.size()); }
    const linalg::Spectral& spectral() const { return sx_; }
    RMat apply(const RMat& R) const;
    RMat apply_inverse(const RMat& R) const;
    CMat apply_inverse(const CMat& H) const;

private:
    BaseKind kind_ = BaseKind::Logdet;
    linalg::Spectral sx_;
    RMat D_;
};

// Solves (A + low-rank) x = r for A a BaseOperator and the low-rank part
// expressed through factor maps P_a: H^n -> H^{k_a}, U = [P_1^T ... P_k^T].
//   nonsym: A - U B U^T
//   sym:    A - U B U^T, B^-1 supplied
//   block:  A + U Bc^T + Bc U^T - U C U^T  (Bc is n^2 x R)
class SchurPipeline {
public:
    SchurPipeline() = default;
    static SchurPipeline nonsym(BaseOperator base, std::vector<LinearMap> factors, const RMat& B);
    static SchurPipeline sym(BaseOperator base, std::vector<LinearMap> factors, const RMat& Binv);
    static SchurPipeline block(BaseOperator base, std::vector<LinearMap> factors, const RMat& Bc, const RMat& C);

    RMat solve(const RMat& rhs) const;
    RVec solve(const RVec& rhs) const;
    int small_dim() const { return static_cast<int>(solver_.rank()); }
    int factor_dim() const { return factor_dim_; }
    // True when U^T A^-1 U came from Kraus-form congruences instead of
    // explicit A^-1 U columns.
    bool used_kraus_gram() const { return kraus_gram_; }
    const BaseOperator& base() const { return base_; }

    // U = [P_a^T] on svec coordinates, n^2 x R.
    static RMat stacked_adjoint(const std::vector<LinearMap>& factors);
    // U^T X . X U for Kraus-form factors (principal-submatrix extractors and
    // other short Kraus lists), without full-dimension intermediates.
    static RMat kraus_gram(const std::vector<LinearMap>& factors, const CMat& X);

private:
    BaseOperator base_;
    std::vector<LinearMap> factors_;
    int factor_dim_ = 0;
    bool kraus_gram_ = false;
    linalg::LowRankSolver solver_;
};

RVec schur_solve(const SchurPipeline& pipeline, const RVec& rhs);

}  // namespace structure
}  // namespace qrep
