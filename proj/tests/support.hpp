#pragma once

// Test-side oracles. These only use the public barrier/grad/hess interface
// and plain Eigen, so they do not share code paths with the library checks.

#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "qrep/entropy_cones.hpp"
#include "qrep/problems.hpp"

namespace qt {

using namespace qrep;

inline RVec gaussian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> N(0.0, 1.0);
    RVec v(n);
    for (int i = 0; i < n; ++i) v(i) = N(rng);
    return v;
}

inline double rel(const RVec& a, const RVec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

// Five-point stencil for d/de f(x + e d) at e = 0.
inline double stencil(const std::function<double(double)>& f, double e) {
    return (-f(2 * e) + 8 * f(e) - 8 * f(-e) + f(-2 * e)) / (12 * e);
}
inline RVec stencil_vec(const std::function<RVec(double)>& f, double e) {
    return (-f(2 * e) + 8 * f(e) - 8 * f(-e) + f(-2 * e)) / (12 * e);
}

// Largest step along d (halving from e0) that keeps x +- 2e d interior.
inline double safe_step(cones::Cone& K, const RVec& x, const RVec& d, double e0) {
    double e = e0;
    for (int k = 0; k < 40; ++k, e *= 0.5)
        if (K.set_point(x + 2 * e * d) && K.set_point(x - 2 * e * d)) break;
    K.set_point(x);
    return e;
}

// Steps are a fixed fraction of the local norm sqrt(d' H d), so truncation
// error does not blow up next to the boundary.
inline double local_step(cones::Cone& K, const RVec& x, const RVec& d, double eps = 1e-3) {
    K.set_point(x);
    return eps / std::sqrt(d.dot(K.hess_apply(d)));
}

struct Calculus {
    double grad = 0, hess = 0, inv = 0, homog = 0, euler_grad = 0, euler_hess = 0;
};

// Gradient by coordinate differences, Hessian by differences of the gradient
// along random directions, and the algebraic identities.
inline Calculus calculus(cones::Cone& K, const RVec& x, std::mt19937_64& rng, int dirs = 3) {
    Calculus c;
    if (!K.set_point(x)) throw std::runtime_error("calculus: point not interior");
    const int n = K.dim();
    const RVec g = K.grad();
    const double F0 = K.barrier();

    RVec gfd(n);
    for (int i = 0; i < n; ++i) {
        RVec e = RVec::Zero(n);
        e(i) = 1.0;
        const double h = safe_step(K, x, e, local_step(K, x, e));
        gfd(i) = stencil([&](double s) { K.set_point(x + s * e); return K.barrier(); }, h);
    }
    c.grad = rel(gfd, g);

    for (int k = 0; k < dirs; ++k) {
        RVec d = gaussian(n, rng);
        d *= x.norm() / d.norm();
        const double h = safe_step(K, x, d, local_step(K, x, d));
        const RVec fd = stencil_vec([&](double s) { K.set_point(x + s * d); return RVec(K.grad()); }, h);
        K.set_point(x);
        c.hess = std::max(c.hess, rel(fd, K.hess_apply(d)));
        c.inv = std::max(c.inv, rel(K.inv_hess_solve(K.hess_apply(d)), d));
    }

    const double nu = K.nu();
    for (double tau : {0.5, 2.0}) {
        K.set_point(tau * x);
        c.homog = std::max(c.homog, std::abs(K.barrier() - F0 + nu * std::log(tau)));
    }
    K.set_point(x);
    c.euler_grad = std::abs(g.dot(x) + nu) / nu;
    c.euler_hess = rel(K.hess_apply(x), -g);
    return c;
}

// Structured inverse Hessian against a Hessian assembled column by column
// from hess_apply and solved with full-pivot LU.
inline double dense_inverse_error(cones::Cone& K, const RVec& x, std::mt19937_64& rng, int rhs = 3) {
    K.set_point(x);
    const int n = K.dim();
    RMat H(n, n);
    for (int j = 0; j < n; ++j) H.col(j) = K.hess_apply(RVec::Unit(n, j));
    Eigen::FullPivLU<RMat> lu(H);
    RMat R(n, rhs);
    for (int j = 0; j < rhs; ++j) R.col(j) = gaussian(n, rng);
    const RMat S = K.inv_hess_solve(R);
    const RMat D = lu.solve(R);
    double err = 0;
    for (int j = 0; j < rhs; ++j) err = std::max(err, rel(S.col(j), D.col(j)));
    return err;
}

// |D3F[h,h,h]| / D2F[h,h]^{3/2}, third derivative by differencing the
// Hessian quadratic form along h normalized to unit local norm.
inline double sc_ratio(cones::Cone& K, const RVec& x, std::mt19937_64& rng, int trials) {
    double worst = 0;
    for (int k = 0; k < trials; ++k) {
        K.set_point(x);
        RVec h = gaussian(K.dim(), rng);
        h /= std::sqrt(h.dot(K.hess_apply(h)));
        const double e = safe_step(K, x, h, 1e-3);
        const double d3 = stencil([&](double s) { K.set_point(x + s * h); return h.dot(K.hess_apply(h)); }, e);
        worst = std::max(worst, std::abs(d3));
    }
    K.set_point(x);
    return worst;
}

inline LinearMap random_kraus_map(int in, int out, int ops, std::mt19937_64& rng) {
    std::vector<CMat> K;
    for (int i = 0; i < ops; ++i) K.push_back(linalg::complex_gaussian(out, in, rng) / std::sqrt(double(in)));
    return LinearMap::kraus(K);
}

inline cones::ConePtr qci_cone(const std::vector<double>& gammas, std::uint64_t rotate) {
    auto p = problems::build_qqcc(problems::ChannelSpec::amplitude_damping(gammas, rotate), "qci");
    return std::move(p.cones[0]);
}

inline cones::ConePtr qmi_cone(int n, std::uint64_t seed) {
    return std::make_unique<cones::QMICone>(problems::random_stinespring(n, seed), n, n);
}

// Ground energy per site of sum_i h_{i,i+1} on a periodic ring, by dense
// diagonalization of each fixed-popcount sector (h must preserve popcount).
inline double ring_energy_density(const CMat& h, int N) {
    double best = 1e300;
    for (int k = 0; k <= N; ++k) {
        std::vector<int> states, index(1 << N, -1);
        for (int s = 0; s < (1 << N); ++s)
            if (__builtin_popcount(s) == k) index[s] = static_cast<int>(states.size()), states.push_back(s);
        CMat H = CMat::Zero(states.size(), states.size());
        for (size_t col = 0; col < states.size(); ++col) {
            const int s = states[col];
            for (int i = 0; i < N; ++i) {
                const int j = (i + 1) % N;
                const int a = (s >> (N - 1 - i)) & 1, b = (s >> (N - 1 - j)) & 1;
                for (int r = 0; r < 4; ++r) {
                    const Complex v = h(r, 2 * a + b);
                    if (v == Complex(0)) continue;
                    int t = s & ~(1 << (N - 1 - i)) & ~(1 << (N - 1 - j));
                    t |= ((r >> 1) << (N - 1 - i)) | ((r & 1) << (N - 1 - j));
                    if (index[t] < 0) throw std::invalid_argument("ring_energy_density: h changes popcount");
                    H(index[t], col) += v;
                }
            }
        }
        best = std::min(best, Eigen::SelfAdjointEigenSolver<CMat>(H, Eigen::EigenvaluesOnly).eigenvalues()(0));
    }
    return best / N;
}

// S(X) with 0 log 0 = 0 on numerically zero eigenvalues.
inline double entropy_psd(const CMat& X) {
    RVec l = Eigen::SelfAdjointEigenSolver<CMat>(X, Eigen::EigenvaluesOnly).eigenvalues();
    double s = 0;
    for (int i = 0; i < l.size(); ++i)
        if (l(i) > 1e-14) s -= l(i) * std::log(l(i));
    return s;
}

struct Labeled {
    std::string label;
    cones::ConePtr cone;
    double nu;
};

// One instance of every cone type, with the expected barrier parameter.
inline std::vector<Labeled> cone_zoo(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Labeled> z;
    z.push_back({"nonneg", std::make_unique<cones::NonnegCone>(4), 4});
    z.push_back({"psd", std::make_unique<cones::PSDCone>(3), 3});
    z.push_back({"cre", std::make_unique<cones::CRECone>(3), 7});
    z.push_back({"qe", std::make_unique<cones::QECone>(3), 5});
    z.push_back({"qre", std::make_unique<cones::QRECone>(3), 7});
    z.push_back({"composed", std::make_unique<cones::ComposedQRECone>(random_kraus_map(3, 4, 2, rng),
                                                                      random_kraus_map(3, 4, 4, rng)),
                 4});
    z.push_back({"qce", std::make_unique<cones::QCECone>(2, 3), 7});
    z.push_back({"qkd", cones::QKDCone::dprbb84(1, 0.5), 13});
    z.push_back({"qrd", std::make_unique<cones::QRDCone>(3), 10});
    z.push_back({"qmi", qmi_cone(2, seed + 1), 3});
    z.push_back({"qci", qci_cone({0.2, 0.35}, seed + 2), 5});
    return z;
}

}  // namespace qt
