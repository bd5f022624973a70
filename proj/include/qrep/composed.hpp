#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrep/cones.hpp"
#include "qrep/linear_map.hpp"
#include "qrep/structure.hpp"

namespace qrep {
namespace cones {

// phi(X) is written as a sum of terms acting on factor images Y_a = P_a(X):
//   entropy term:  w * tr[Z log Z],   Z = Q(Y_a)          (Q absent: Z = Y_a)
//   cross term:    -tr[G log H],      G = Qg(Y_a), H = Qh(Y_b)
// Factor maps and Q maps are expected to be facially reduced so that every
// entropy argument and every H is positive definite whenever X is.
struct EntropyTerm {
    int factor = 0;
    double weight = 1.0;
    std::optional<LinearMap> map;
};

struct CrossTerm {
    int factor_g = 0;
    std::optional<LinearMap> map_g;
    int factor_h = 0;
    std::optional<LinearMap> map_h;
};

struct TermModel {
    int n = 0;
    std::vector<LinearMap> factors;
    std::vector<EntropyTerm> entropies;
    std::vector<CrossTerm> crosses;
};

enum class Strategy { Dense, BlockDiagonal, LowRank, IdentityPlusLowRank, DifferenceOfEntropies };

std::string strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

// (t, X) with t >= S(G(X) || H(X)), barrier -log(t - phi(X)) - logdet X.
class ComposedQRECone : public EpigraphCone {
public:
    // Direct slice for positive maps G, H; both are facially reduced from
    // G(I), H(I) and G(I) << H(I) is verified.
    ComposedQRECone(const LinearMap& G, const LinearMap& H, Strategy s = Strategy::Dense);
    ComposedQRECone(TermModel model, Strategy s, std::string name = "composed-qre");

    std::string name() const override { return name_; }
    int side() const { return n_; }
    Strategy strategy() const { return strategy_; }
    const TermModel& model() const { return model_; }
    RVec init_point() const override;
    RVec hess_phi(const RVec& h) const override;
    int dense_dim() const override;
    // Structured solve actually in use after prepare_inverse() (the
    // difference-of-entropies tag falls back to assembly when the model is
    // not of the symmetric form).
    std::string solve_path() const;

    // phi from the model without touching caches.
    double phi_at(const CMat& X) const;

    // Term-model builders for the declared structures.
    static TermModel dense_model(const LinearMap& G, const LinearMap& H);
    // Same block structure on both arguments: S(G||H) = sum_i S(G_i||H_i).
    static TermModel block_model(const structure::BlockStructure& gb, const structure::BlockStructure& hb);
    // G = G2 o G1, H = H2 o H1 with small G1, H1 outputs.
    static TermModel low_rank_model(const LinearMap& G1, const LinearMap& G2, const LinearMap& H1,
                                    const LinearMap& H2);
    // G = identity, H = H2 o H1.
    static TermModel identity_low_rank_model(const LinearMap& H1, const LinearMap& H2);

protected:
    bool set_inner(const RVec& u) override;
    double logbar() const override;
    RVec grad_logbar() const override;
    RVec hess_logbar(const RVec& h) const override;
    void factor_inner() const override;
    RMat solve_inner(const RMat& R) const override;

private:
    struct EntropyCache {
        CMat Z;
        linalg::Spectral s;
        RMat d1;
    };
    struct CrossCache {
        CMat G, Ghat;
        linalg::Spectral sh;
        RMat d1;
        std::vector<RMat> d2;
    };

    void validate() const;
    // Hessian of phi in stacked factor coordinates, restricted to the factors
    // flagged in `active` for the input (nullptr: all).
    RVec factor_hess(const RVec& dy) const;
    RMat factor_hess_matrix() const;
    RVec stack(const CMat& H) const;
    CMat unstack_adjoint(const RVec& v) const;
    bool sym_eligible() const;
    bool block_eligible() const;

    TermModel model_;
    Strategy strategy_;
    std::string name_;
    int n_;
    std::vector<int> off_;  // svec offsets of the factors
    int R_ = 0;

    CMat X_;
    linalg::Spectral sx_;
    std::vector<CMat> Y_;
    std::vector<EntropyCache> ec_;
    std::vector<CrossCache> cc_;

    mutable int path_ = 0;  // 0 dense, 1 low-rank, 2 block, 3 sym
    mutable structure::SchurPipeline pipe_;
};

}  // namespace cones
}  // namespace qrep
