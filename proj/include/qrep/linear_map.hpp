#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qrep/linalg.hpp"

namespace qrep {

// A linear map H^n -> H^m. Positivity is a property of the data, checked by
// is_positive(); nothing here assumes it.
class LinearMap {
public:
    enum class Kind { Dense, Kraus, PartialTrace, KronIdentity, Pinching, DirectSum, Congruence, Compose };

    static LinearMap identity(int n);
    // M acts on svec coordinates: svec(G(X)) = M svec(X).
    static LinearMap dense(const RMat& M);
    static LinearMap kraus(std::vector<CMat> ops);
    static LinearMap partial_trace(int side, int n, int m);
    static LinearMap kron_identity(int side, int n, int m);
    static LinearMap pinching(std::vector<int> blocks);
    // X -> G_1(X) (+) ... (+) G_k(X), block diagonal output.
    static LinearMap direct_sum(std::vector<LinearMap> parts);
    // X -> V X V^H
    static LinearMap congruence(const CMat& V);
    // outer o inner
    static LinearMap compose(const LinearMap& outer, const LinearMap& inner);

    Kind kind() const { return kind_; }
    int in_side() const { return in_; }
    int out_side() const { return out_; }

    CMat apply(const CMat& X) const;
    CMat adjoint(const CMat& Y) const;
    RVec apply_vec(const RVec& x) const;
    RVec adjoint_vec(const RVec& y) const;
    // out_side^2 x in_side^2 matrix on svec coordinates.
    RMat matrix() const;
    // Kraus operators when the map is (or composes to) a congruence sum.
    bool has_kraus() const;
    std::vector<CMat> kraus_ops() const;
    std::string describe() const;

private:
    Kind kind_ = Kind::Dense;
    int in_ = 0, out_ = 0;
    RMat dense_;
    std::vector<CMat> ops_;
    int side_ = 1, n_ = 0, m_ = 0;
    std::vector<int> blocks_;
    std::vector<LinearMap> parts_;
};

// Image of 20 random PSD inputs stays PSD (min eigenvalue >= -tol).
bool is_positive(const LinearMap& G, std::mt19937_64& rng, int trials = 20, double tol = 1e-10);
// max |<G(X), Y> - <X, G^H(Y)>| over random Hermitian pairs.
double adjoint_mismatch(const LinearMap& G, std::mt19937_64& rng, int trials = 5);

}  // namespace qrep
