#include "qrep/entropy_cones.hpp"

#include <cmath>

namespace qrep {
namespace cones {

namespace {

LinearMap reduce(const LinearMap& G) { return structure::facial_reduce(G).reduced(G); }

CMat column(int k, int i) {
    CMat e = CMat::Zero(k, 1);
    e(i, 0) = 1.0;
    return e;
}

// (+)_c M
CMat direct_sum_copies(const CMat& M, int c) {
    CMat out = CMat::Zero(M.rows() * c, M.cols() * c);
    for (int b = 0; b < c; ++b) out.block(b * M.rows(), b * M.cols(), M.rows(), M.cols()) = M;
    return out;
}

}  // namespace

// ---- conditional entropy ----

TermModel QCECone::model(int n, int m) {
    if (n < 1 || m < 1) throw DimensionError("qce cone: factor dimensions must be positive");
    TermModel t;
    t.n = n * m;
    t.factors = {LinearMap::identity(n * m), LinearMap::partial_trace(1, n, m)};
    t.entropies.push_back({0, 1.0, std::nullopt});
    t.entropies.push_back({1, -1.0, std::nullopt});
    return t;
}

QCECone::QCECone(int n, int m, Strategy s) : ComposedQRECone(model(n, m), s, "qce"), n1_(n), n2_(m) {}

// ---- key rate ----

QKDProtocol dprbb84_protocol(int c, double p) {
    if (c < 1) throw DimensionError("dprbb84: number of phases must be positive");
    if (!(p > 0 && p < 1)) throw std::invalid_argument("dprbb84: basis probability must lie in (0, 1)");
    auto Pi = [](int i) {
        CMat P = CMat::Zero(4, 4);
        P(i, i) = 1.0;
        return P;
    };
    CMat D3 = CMat::Zero(3, 3);
    D3(0, 0) = D3(1, 1) = 1.0;
    const CMat up = column(2, 0), down = column(2, 1);
    auto kraus = [&](int a, int b, const CMat& last, double w) {
        const CMat A = direct_sum_copies(Pi(a), c), B = direct_sum_copies(Pi(b), c);
        const CMat key = linalg::kron(up, A) + linalg::kron(down, B);
        return CMat(std::sqrt(w) * linalg::kron(linalg::kron(key, D3), last));
    };
    QKDProtocol proto;
    proto.tag = "dprbb84";
    proto.kraus = {kraus(0, 1, up, p), kraus(2, 3, down, 1.0 - p)};
    proto.blocks = {24 * c, 24 * c};
    return proto;
}

std::vector<CMat> dmcv_placeholder_measurements(int Nc) {
    if (Nc < 0) throw DimensionError("dmcv: photon cutoff must be nonnegative");
    std::vector<CMat> P(4, CMat::Zero(Nc + 1, Nc + 1));
    for (int k = 0; k <= Nc; ++k) P[k % 4](k, k) = 1.0;
    return P;
}

QKDProtocol dmcv_protocol(int Nc, const std::vector<CMat>& P) {
    if (P.size() != 4) throw DimensionError("dmcv: need four measurement operators");
    const int d = Nc + 1;
    CMat K = CMat::Zero(16 * d, 4 * d);
    const CMat I4 = CMat::Identity(4, 4);
    for (int i = 0; i < 4; ++i) {
        if (P[i].rows() != d || P[i].cols() != d) throw DimensionError("dmcv: measurement operator has wrong size");
        K += linalg::kron(linalg::kron(column(4, i), I4), P[i]);
    }
    QKDProtocol proto;
    proto.tag = "dmcv";
    proto.kraus = {K};
    proto.blocks = {4 * d, 4 * d, 4 * d, 4 * d};
    return proto;
}

TermModel QKDCone::generic_model(const QKDProtocol& proto) {
    const LinearMap G = proto.G();
    int total = 0;
    for (int b : proto.blocks) total += b;
    if (total != G.out_side()) throw DeclarationError("qkd: pinching blocks do not cover the output");
    TermModel t;
    t.n = G.in_side();
    t.factors = {LinearMap::identity(t.n)};
    t.entropies.push_back({0, 1.0, reduce(G)});
    std::mt19937_64 rng(20240101);
    const structure::BlockStructure bs =
        structure::decompose_blocks(LinearMap::compose(proto.Z(), G), proto.blocks, rng);
    const CMat I = CMat::Identity(t.n, t.n);
    for (const LinearMap& Gi : bs.extractors) {
        if (Gi.apply(I).norm() == 0) continue;
        t.entropies.push_back({0, -1.0, reduce(Gi)});
    }
    return t;
}

TermModel QKDCone::dprbb84_model(int c, double p) {
    if (c < 1) throw DimensionError("dprbb84: number of phases must be positive");
    if (!(p > 0 && p < 1)) throw std::invalid_argument("dprbb84: basis probability must lie in (0, 1)");
    CMat S1(2, 4), S2(2, 4);
    S1 << 1, 0, 0, 0, 0, 1, 0, 0;
    S2 << 0, 0, 1, 0, 0, 0, 0, 1;
    CMat T(2, 3);
    T << 1, 0, 0, 0, 1, 0;
    const CMat K1 = std::sqrt(p) * linalg::kron(direct_sum_copies(S1, c), T);
    const CMat K2 = std::sqrt(1.0 - p) * linalg::kron(direct_sum_copies(S2, c), T);
    CMat r1(1, 2), r2(1, 2);
    r1 << 1, 0;
    r2 << 0, 1;
    const CMat I2 = CMat::Identity(2, 2);
    const LinearMap Z1 = LinearMap::kraus({linalg::kron(direct_sum_copies(r1, c), I2)});
    const LinearMap Z2 = LinearMap::kraus({linalg::kron(direct_sum_copies(r2, c), I2)});
    TermModel t;
    t.n = 12 * c;
    t.factors = {LinearMap::kraus({K1}), LinearMap::kraus({K2})};
    for (int a = 0; a < 2; ++a) {
        t.entropies.push_back({a, 1.0, std::nullopt});
        t.entropies.push_back({a, -1.0, Z1});
        t.entropies.push_back({a, -1.0, Z2});
    }
    return t;
}

QKDCone::QKDCone(TermModel m, Strategy s, std::string tag) : ComposedQRECone(std::move(m), s, "qkd"), tag_(std::move(tag)) {}

std::unique_ptr<QKDCone> QKDCone::generic(const QKDProtocol& proto, Strategy s) {
    return std::unique_ptr<QKDCone>(new QKDCone(generic_model(proto), s, proto.tag));
}

std::unique_ptr<QKDCone> QKDCone::dprbb84(int c, double p, Strategy s) {
    return std::unique_ptr<QKDCone>(new QKDCone(dprbb84_model(c, p), s, "dprbb84"));
}

double qkd_direct_objective(const QKDProtocol& proto, const CMat& X) {
    const CMat GX = linalg::hermitian_part(proto.G().apply(X));
    return linalg::quantum_relative_entropy(GX, proto.Z().apply(GX));
}

// ---- mutual information ----

TermModel QMICone::model(const CMat& V, int m, int p) {
    if (V.rows() != m * p) throw DimensionError("qmi cone: isometry rows must equal m*p");
    const int n = static_cast<int>(V.cols());
    const LinearMap VV = LinearMap::congruence(V);
    TermModel t;
    t.n = n;
    t.factors = {LinearMap::identity(n)};
    t.entropies.push_back({0, 1.0, std::nullopt});
    t.entropies.push_back({0, -1.0, reduce(LinearMap::compose(LinearMap::partial_trace(1, m, p), VV))});
    t.entropies.push_back({0, 1.0, reduce(LinearMap::compose(LinearMap::partial_trace(2, m, p), VV))});
    t.entropies.push_back({0, -1.0, LinearMap::partial_trace(2, 1, n)});
    return t;
}

QMICone::QMICone(const CMat& V, int m, int p) : ComposedQRECone(model(V, m, p), Strategy::Dense, "qmi") {}

// ---- coherent information ----

TermModel QCICone::model(const LinearMap& N, const CMat& W, int p, int q) {
    if (W.rows() != p * q || W.cols() != N.out_side())
        throw DimensionError("qci cone: degrading isometry has wrong shape");
    TermModel t;
    t.n = N.in_side();
    t.factors = {LinearMap::identity(t.n)};
    t.entropies.push_back({0, 1.0, reduce(N)});
    const LinearMap T =
        LinearMap::compose(LinearMap::partial_trace(1, p, q), LinearMap::compose(LinearMap::congruence(W), N));
    t.entropies.push_back({0, -1.0, reduce(T)});
    return t;
}

QCICone::QCICone(const LinearMap& N, const CMat& W, int p, int q)
    : ComposedQRECone(model(N, W, p, q), Strategy::Dense, "qci") {}

}  // namespace cones
}  // namespace qrep
