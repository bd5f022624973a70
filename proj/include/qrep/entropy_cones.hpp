#pragma once

#include <memory>
#include <string>
#include <vector>

#include "qrep/composed.hpp"

namespace qrep {
namespace cones {

// (t, X), X in H^{nm}: t >= S(X || I_n (x) tr_1 X) = -S(X) + S(tr_1 X).
class QCECone : public ComposedQRECone {
public:
    QCECone(int n, int m, Strategy s = Strategy::DifferenceOfEntropies);
    std::string name() const override { return "qce"; }
    int n_first() const { return n1_; }
    int n_second() const { return n2_; }
    static TermModel model(int n, int m);

private:
    int n1_, n2_;
};

// Key-rate protocol data: G(X) = sum K_i X K_i^H and a pinching of G's output
// into contiguous diagonal blocks.
struct QKDProtocol {
    std::string tag;
    std::vector<CMat> kraus;
    std::vector<int> blocks;
    int input_side() const { return static_cast<int>(kraus.at(0).cols()); }
    int output_side() const { return static_cast<int>(kraus.at(0).rows()); }
    LinearMap G() const { return LinearMap::kraus(kraus); }
    LinearMap Z() const { return LinearMap::pinching(blocks); }
};

QKDProtocol dprbb84_protocol(int c, double p);
// Four measurement operators on the (Nc+1)-dimensional Fock space. Projectors
// onto the indices k with k mod 4 == i; stand-ins until real data is loaded.
std::vector<CMat> dmcv_placeholder_measurements(int Nc);
QKDProtocol dmcv_protocol(int Nc, const std::vector<CMat>& P);

// (t, X) with t >= S(G(X) || Z(G(X))).
class QKDCone : public ComposedQRECone {
public:
    // Facially reduced difference of entropies over the pinching blocks.
    static std::unique_ptr<QKDCone> generic(const QKDProtocol& proto, Strategy s = Strategy::BlockDiagonal);
    // Principal-submatrix factorization of the dprBB84 maps (rank 32c^2
    // perturbation of the logdet Hessian under LowRank).
    static std::unique_ptr<QKDCone> dprbb84(int c, double p, Strategy s = Strategy::LowRank);
    static TermModel dprbb84_model(int c, double p);
    static TermModel generic_model(const QKDProtocol& proto);

    std::string name() const override { return "qkd"; }
    const std::string& protocol() const { return tag_; }

private:
    QKDCone(TermModel m, Strategy s, std::string tag);
    std::string tag_;
};

// (t, X) with t >= -S(X) + S(tr_1 VXV^H) - S(tr_2 VXV^H) + S(tr X), V in C^{mp x n}.
class QMICone : public ComposedQRECone {
public:
    QMICone(const CMat& V, int m, int p);
    std::string name() const override { return "qmi"; }
    static TermModel model(const CMat& V, int m, int p);
};

// (t, X) with t >= -S(W N(X) W^H) + S(tr_1^{p,q} W N(X) W^H), W in C^{pq x m}.
class QCICone : public ComposedQRECone {
public:
    QCICone(const LinearMap& N, const CMat& W, int p, int q);
    std::string name() const override { return "qci"; }
    static TermModel model(const LinearMap& N, const CMat& W, int p, int q);
};

// -tr[y log y] style helper shared by QKD tests: S(G(X) || Z(G(X))) evaluated
// directly on the full matrices.
double qkd_direct_objective(const QKDProtocol& proto, const CMat& X);

}  // namespace cones
}  // namespace qrep
