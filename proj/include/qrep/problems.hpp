#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrep/entropy_cones.hpp"
#include "qrep/ipm.hpp"

namespace qrep {
namespace problems {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Accumulates cones (columns) and blocks of equality rows, then emits a
// dense ConicProblem.
class Builder {
public:
    struct Block {
        int col;
        RMat M;  // rows x width, acting on x[col, col + width)
    };

    int add(cones::ConePtr cone);
    int cols() const { return cols_; }
    int rows() const { return rows_; }
    // sum_k M_k x[col_k ...] = rhs
    void add_rows(std::vector<Block> blocks, const RVec& rhs);
    // Single row: sum_k coef_k x[col_k] = rhs.
    void add_row(const std::vector<std::pair<int, double>>& coefs, double rhs);
    void add_cost(int col, const RVec& c);
    void add_cost(int col, double c) { add_cost(col, RVec::Constant(1, c)); }
    ipm::ConicProblem finish(std::string name, double offset = 0, double sign = 1);

private:
    struct Group {
        std::vector<Block> blocks;
        RVec rhs;
    };
    std::vector<cones::ConePtr> cones_;
    std::vector<Group> groups_;
    std::vector<std::pair<int, RVec>> costs_;
    int cols_ = 0, rows_ = 0;
};

// Hilbert-Schmidt random density matrix G G^H / tr[G G^H].
CMat random_density_matrix(int n, std::uint64_t seed);
// Isometry V in C^{(no ne) x ni} from the QR of a complex Gaussian block.
CMat random_stinespring(int ni, int no, int ne, std::uint64_t seed);
inline CMat random_stinespring(int n, std::uint64_t seed) { return random_stinespring(n, n, n, seed); }
// Random unitary (Haar, phase-corrected QR).
CMat random_unitary(int n, std::uint64_t seed);

// ---- key rate ----

enum class QKDKind { DprBB84, DMCV, Generic };

struct QKDSpec {
    QKDKind kind = QKDKind::DprBB84;
    int c = 1;          // dprBB84 phases
    double p = 0.5;     // dprBB84 basis probability
    int Nc = 3;         // DMCV photon cutoff
    cones::QKDProtocol protocol;
    // Constraints <Gamma_k, X> = gamma_k. Empty: synthesized from a seeded
    // random state as the trace row plus `num_random` random Hermitian rows.
    std::vector<CMat> gammas;
    std::vector<double> values;
    int num_random = -1;  // -1: n^2 - n, leaving an n-dimensional feasible slice
    std::uint64_t seed = 1;
    double p_pass = 0, delta_ec = 0;

    static QKDSpec dprbb84(int c, double p, std::uint64_t seed);
    static QKDSpec dmcv(int Nc, std::uint64_t seed, const std::vector<CMat>& P = {});
    static QKDSpec generic(cones::QKDProtocol proto, std::uint64_t seed);
    // Fills gammas/values when empty.
    void synthesize_constraints();
};

ipm::ConicProblem build_qkd(QKDSpec spec, const std::string& formulation);

// ---- rate distortion ----

enum class DistortionKind { EntanglementFidelity, Explicit };

struct RateDistortionSpec {
    CMat W;      // n x n source
    int m = 0;   // output dimension
    CMat Delta;  // (n m) x (n m)
    double D = 0;
    DistortionKind kind = DistortionKind::EntanglementFidelity;

    int n() const { return static_cast<int>(W.rows()); }
    // W diagonalized, Delta = I - psi psi^H with psi = sum sqrt(w_i) e_i (x) e_i.
    static RateDistortionSpec entanglement_fidelity(const CMat& W, double D);
    static RateDistortionSpec explicit_distortion(const CMat& W, int m, const CMat& Delta, double D);
    void validate() const;
};

ipm::ConicProblem build_qrd(const RateDistortionSpec& spec, const std::string& formulation);

// ---- channel capacities ----

// N(X) = tr_2 V X V^H with V in C^{(no ne) x ni}. For degradable channels
// Wd in C^{(ne nf) x no} with tr_2 Wd N(X) Wd^H = N_c(X) = tr_1 V X V^H.
struct ChannelSpec {
    CMat V;
    int ni = 0, no = 0, ne = 0;
    CMat Wd;
    int nf = 0;

    LinearMap channel() const;
    LinearMap complementary() const;
    bool has_degrading() const { return Wd.size() > 0; }
    // max |tr_2 Wd N(X) Wd^H - N_c(X)| over seeded random densities.
    double degradability_residual(std::uint64_t seed, int trials = 5) const;
    void validate() const;

    static ChannelSpec from_isometry(const CMat& V, int no, int ne);
    static ChannelSpec from_kraus(const std::vector<CMat>& K);
    static ChannelSpec identity(int n);
    // Tensor product of amplitude-damping qubit channels with the given
    // gammas (each <= 1/2), optionally preceded by a random input unitary.
    static ChannelSpec amplitude_damping(const std::vector<double>& gammas, std::optional<std::uint64_t> rotate_seed = {});
};

// Stinespring isometry sum_k K_k (x) e_k.
CMat stinespring_from_kraus(const std::vector<CMat>& K);
std::vector<CMat> amplitude_damping_kraus(double gamma);

// Entanglement-assisted capacity, reported as a maximum.
ipm::ConicProblem build_eacc(const ChannelSpec& ch, const std::string& formulation);
// Quantum capacity of a degradable channel, reported as a maximum.
ipm::ConicProblem build_qqcc(const ChannelSpec& ch, const std::string& formulation);

// ---- ground state energy ----

struct HamiltonianSpec {
    CMat h;  // 4 x 4 nearest-neighbour term
    int l = 2;
    static HamiltonianSpec xxz(double delta, int l);
    void validate() const;
};

CMat xxz_term(double delta);
ipm::ConicProblem build_gse(const HamiltonianSpec& spec, const std::string& formulation);
// Ground energy per site of the periodic chain of `sites` qubits, by dense
// diagonalization inside each magnetization sector (h must conserve total Z).
double periodic_chain_energy_density(const CMat& h, int sites);

// Formulation names accepted by each builder, in canonical order.
std::vector<std::string> formulations(const std::string& application);

}  // namespace problems
}  // namespace qrep
