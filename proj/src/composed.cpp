#include "qrep/composed.hpp"

#include <cmath>
#include <stdexcept>

namespace qrep {
namespace cones {

using linalg::smat;
using linalg::svec;
using linalg::Fn;

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Dense: return "dense";
        case Strategy::BlockDiagonal: return "block-diagonal";
        case Strategy::LowRank: return "low-rank";
        case Strategy::IdentityPlusLowRank: return "identity-plus-low-rank";
        case Strategy::DifferenceOfEntropies: return "difference-of-entropies";
    }
    return "dense";
}

Strategy parse_strategy(const std::string& s) {
    for (Strategy k : {Strategy::Dense, Strategy::BlockDiagonal, Strategy::LowRank, Strategy::IdentityPlusLowRank,
                       Strategy::DifferenceOfEntropies})
        if (strategy_name(k) == s) return k;
    throw std::invalid_argument("unknown strategy: " + s);
}

namespace {

CMat apply_opt(const std::optional<LinearMap>& Q, const CMat& Y) { return Q ? Q->apply(Y) : Y; }
CMat adjoint_opt(const std::optional<LinearMap>& Q, const CMat& Y) { return Q ? Q->adjoint(Y) : Y; }
int out_side_opt(const std::optional<LinearMap>& Q, int k) { return Q ? Q->out_side() : k; }

// Fixed non-diagonal probe; identity factors are recognised by their action.
bool acts_as_identity(const LinearMap& P, int n) {
    if (P.in_side() != n || P.out_side() != n) return false;
    CMat T(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = Complex(1.0 + i + 2.0 * j, i > j ? 0.5 * (i - j) : -0.5 * (j - i));
    T = linalg::hermitian_part(T);
    return (P.apply(T) - T).norm() <= 1e-12 * T.norm();
}

double entropy_sum(const RVec& lambda) {
    double s = 0;
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        if (lambda(i) > 0) s += lambda(i) * std::log(lambda(i));
    return s;
}

void check_dominated(const LinearMap& G, const structure::FacialReduction& fh) {
    const int n = G.in_side();
    const CMat GI = G.apply(CMat::Identity(n, n));
    const CMat W = fh.U;
    const CMat off = GI - W * (W.adjoint() * GI);
    if (off.norm() > 1e-9 * std::max(1.0, GI.norm()))
        throw DomainError("composed qre: range of G(I) is not contained in the range of H(I)");
}

}  // namespace

ComposedQRECone::ComposedQRECone(const LinearMap& G, const LinearMap& H, Strategy s)
    : ComposedQRECone(dense_model(G, H), s) {}

ComposedQRECone::ComposedQRECone(TermModel model, Strategy s, std::string name)
    : model_(std::move(model)), strategy_(s), name_(std::move(name)), n_(model_.n) {
    validate();
    dim_ = n_ * n_ + 1;
    nu_ = n_ + 1;
    int off = 0;
    for (const LinearMap& P : model_.factors) {
        off_.push_back(off);
        off += P.out_side() * P.out_side();
    }
    R_ = off;
    if (strategy_ == Strategy::IdentityPlusLowRank && !block_eligible())
        throw DeclarationError(
            "identity-plus-low-rank needs factor 0 = identity carrying one positive entropy term and no other "
            "term on the 0-0 block");
}

void ComposedQRECone::validate() const {
    if (n_ < 1) throw DimensionError("composed qre: side must be positive");
    if (model_.factors.empty()) throw DeclarationError("composed qre: no factors");
    const int F = static_cast<int>(model_.factors.size());
    for (const LinearMap& P : model_.factors)
        if (P.in_side() != n_) throw DimensionError("composed qre: factor input side differs from n");
    auto check_map = [&](int a, const std::optional<LinearMap>& Q) {
        if (a < 0 || a >= F) throw DeclarationError("composed qre: term refers to a missing factor");
        if (Q && Q->in_side() != model_.factors[a].out_side())
            throw DimensionError("composed qre: term map input does not match its factor");
    };
    for (const EntropyTerm& e : model_.entropies) check_map(e.factor, e.map);
    for (const CrossTerm& c : model_.crosses) {
        check_map(c.factor_g, c.map_g);
        check_map(c.factor_h, c.map_h);
        const int kg = out_side_opt(c.map_g, model_.factors[c.factor_g].out_side());
        const int kh = out_side_opt(c.map_h, model_.factors[c.factor_h].out_side());
        if (kg != kh) throw DimensionError("composed qre: cross term arguments differ in size");
    }
}

bool ComposedQRECone::block_eligible() const {
    if (!acts_as_identity(model_.factors[0], n_)) return false;
    int base = 0;
    for (const EntropyTerm& e : model_.entropies)
        if (e.factor == 0) {
            if (e.map || !(e.weight > 0)) return false;
            ++base;
        }
    if (base != 1) return false;
    for (const CrossTerm& c : model_.crosses)
        if (c.factor_g == 0 && c.factor_h == 0) return false;
    return model_.factors.size() > 1;
}

bool ComposedQRECone::sym_eligible() const {
    if (!model_.crosses.empty()) return false;
    if (!acts_as_identity(model_.factors[0], n_)) return false;
    std::vector<int> count(model_.factors.size(), 0);
    for (const EntropyTerm& e : model_.entropies) {
        if (e.map) return false;
        if (e.factor == 0 && !(e.weight > 0)) return false;
        if (e.factor != 0 && !(e.weight < 0)) return false;
        ++count[e.factor];
    }
    for (int c : count)
        if (c != 1) return false;
    return model_.factors.size() > 1;
}

RVec ComposedQRECone::init_point() const {
    RVec x(dim_);
    const CMat I = CMat::Identity(n_, n_);
    x(0) = phi_at(I) + 1.0;
    x.tail(dim_ - 1) = svec(I);
    return x;
}

double ComposedQRECone::phi_at(const CMat& X) const {
    double phi = 0;
    std::vector<CMat> Y;
    for (const LinearMap& P : model_.factors) Y.push_back(P.apply(X));
    for (const EntropyTerm& e : model_.entropies) {
        const CMat Z = linalg::hermitian_part(apply_opt(e.map, Y[e.factor]));
        phi += e.weight * entropy_sum(linalg::eigh(Z).lambda);
    }
    for (const CrossTerm& c : model_.crosses) {
        const CMat G = linalg::hermitian_part(apply_opt(c.map_g, Y[c.factor_g]));
        const linalg::Spectral sh = linalg::eigh(linalg::hermitian_part(apply_opt(c.map_h, Y[c.factor_h])));
        if (sh.lambda.size() && !(sh.lambda.minCoeff() > 0)) throw DomainError("composed qre: H(X) is singular");
        phi -= linalg::inner(G, linalg::spectral_apply(sh, Fn::Log));
    }
    return phi;
}

bool ComposedQRECone::set_inner(const RVec& u) {
    X_ = smat(u.data(), n_);
    sx_ = linalg::eigh(X_);
    if (!(sx_.lambda(n_ - 1) > interior_tol(point()))) return false;
    Y_.clear();
    for (const LinearMap& P : model_.factors) Y_.push_back(P.apply(X_));
    std::vector<CMat> gY;
    for (const CMat& Y : Y_) gY.push_back(CMat::Zero(Y.rows(), Y.cols()));
    phi_ = 0;
    ec_.clear();
    for (const EntropyTerm& e : model_.entropies) {
        EntropyCache c;
        c.Z = linalg::hermitian_part(apply_opt(e.map, Y_[e.factor]));
        c.s = linalg::eigh(c.Z);
        if (!(c.s.lambda.minCoeff() > 0)) return false;
        c.d1 = linalg::divided_differences_1(Fn::Log, c.s.lambda);
        phi_ += e.weight * entropy_sum(c.s.lambda);
        const int k = static_cast<int>(c.Z.rows());
        gY[e.factor] += e.weight * adjoint_opt(e.map, linalg::spectral_apply(c.s, Fn::Log) + CMat::Identity(k, k));
        ec_.push_back(std::move(c));
    }
    cc_.clear();
    for (const CrossTerm& t : model_.crosses) {
        CrossCache c;
        c.G = linalg::hermitian_part(apply_opt(t.map_g, Y_[t.factor_g]));
        c.sh = linalg::eigh(linalg::hermitian_part(apply_opt(t.map_h, Y_[t.factor_h])));
        if (!(c.sh.lambda.minCoeff() > 0)) return false;
        c.Ghat = c.sh.U.adjoint() * c.G * c.sh.U;
        c.d1 = linalg::divided_differences_1(Fn::Log, c.sh.lambda);
        c.d2 = linalg::divided_differences_2(Fn::Log, c.sh.lambda);
        const CMat logH = linalg::spectral_apply(c.sh, Fn::Log);
        phi_ -= linalg::inner(c.G, logH);
        gY[t.factor_g] -= adjoint_opt(t.map_g, logH);
        gY[t.factor_h] -= adjoint_opt(t.map_h, c.sh.U * c.Ghat.cwiseProduct(c.d1.cast<Complex>()) * c.sh.U.adjoint());
        cc_.push_back(std::move(c));
    }
    CMat g = CMat::Zero(n_, n_);
    for (size_t a = 0; a < model_.factors.size(); ++a) g += model_.factors[a].adjoint(gY[a]);
    gphi_ = svec(linalg::hermitian_part(g));
    return true;
}

RVec ComposedQRECone::stack(const CMat& H) const {
    RVec v(R_);
    for (size_t a = 0; a < model_.factors.size(); ++a) {
        const int k = model_.factors[a].out_side();
        v.segment(off_[a], k * k) = svec(model_.factors[a].apply(H));
    }
    return v;
}

CMat ComposedQRECone::unstack_adjoint(const RVec& v) const {
    CMat out = CMat::Zero(n_, n_);
    for (size_t a = 0; a < model_.factors.size(); ++a) {
        const int k = model_.factors[a].out_side();
        const RVec seg = v.segment(off_[a], k * k);
        if (seg.isZero(0)) continue;
        out += model_.factors[a].adjoint(smat(seg.data(), k));
    }
    return out;
}

RVec ComposedQRECone::factor_hess(const RVec& dy) const {
    const size_t F = model_.factors.size();
    std::vector<CMat> in(F), out(F);
    std::vector<bool> active(F);
    for (size_t a = 0; a < F; ++a) {
        const int k = model_.factors[a].out_side();
        const RVec seg = dy.segment(off_[a], k * k);
        active[a] = !seg.isZero(0);
        in[a] = smat(seg.data(), k);
        out[a] = CMat::Zero(k, k);
    }
    for (size_t i = 0; i < model_.entropies.size(); ++i) {
        const EntropyTerm& e = model_.entropies[i];
        if (!active[e.factor]) continue;
        const EntropyCache& c = ec_[i];
        out[e.factor] += e.weight * adjoint_opt(e.map, linalg::eig_scale(c.s, c.d1, apply_opt(e.map, in[e.factor])));
    }
    for (size_t i = 0; i < model_.crosses.size(); ++i) {
        const CrossTerm& t = model_.crosses[i];
        const bool ag = active[t.factor_g], ah = active[t.factor_h];
        if (!ag && !ah) continue;
        const CrossCache& c = cc_[i];
        const int k = static_cast<int>(c.G.rows());
        const CMat dG = ag ? apply_opt(t.map_g, in[t.factor_g]) : CMat::Zero(k, k);
        const CMat dH = ah ? apply_opt(t.map_h, in[t.factor_h]) : CMat::Zero(k, k);
        if (ah) out[t.factor_g] -= adjoint_opt(t.map_g, linalg::eig_scale(c.sh, c.d1, dH));
        CMat oh = CMat::Zero(k, k);
        if (ag) oh += linalg::eig_scale(c.sh, c.d1, dG);
        if (ah) oh += linalg::weighted_hess_eig(c.sh, c.d2, c.Ghat, dH);
        out[t.factor_h] -= adjoint_opt(t.map_h, oh);
    }
    RVec o(R_);
    for (size_t a = 0; a < F; ++a) {
        const int k = model_.factors[a].out_side();
        o.segment(off_[a], k * k) = svec(linalg::hermitian_part(out[a]));
    }
    return o;
}

RMat ComposedQRECone::factor_hess_matrix() const {
    RMat K(R_, R_);
    RVec e = RVec::Zero(R_);
    for (int j = 0; j < R_; ++j) {
        e(j) = 1.0;
        K.col(j) = factor_hess(e);
        e(j) = 0.0;
    }
    return 0.5 * (K + K.transpose());
}

RVec ComposedQRECone::hess_phi(const RVec& h) const {
    return svec(linalg::hermitian_part(unstack_adjoint(factor_hess(stack(smat(h.data(), n_))))));
}

double ComposedQRECone::logbar() const { return -sx_.lambda.array().log().sum(); }

RVec ComposedQRECone::grad_logbar() const {
    return -svec(sx_.U * sx_.lambda.cwiseInverse().asDiagonal() * sx_.U.adjoint());
}

RVec ComposedQRECone::hess_logbar(const RVec& h) const {
    const CMat Xinv = sx_.U * sx_.lambda.cwiseInverse().asDiagonal() * sx_.U.adjoint();
    return svec(linalg::hermitian_part(Xinv * smat(h.data(), n_) * Xinv));
}

void ComposedQRECone::factor_inner() const {
    const double iz = 1.0 / zeta_;
    auto dense = [&]() {
        path_ = 0;
        const RMat K = factor_hess_matrix();
        const structure::BaseOperator L = structure::BaseOperator::logdet(sx_);
        RMat M = L.apply(RMat::Identity(n_ * n_, n_ * n_));
        if (model_.factors.size() == 1 && acts_as_identity(model_.factors[0], n_)) {
            M += iz * K;
        } else {
            const RMat U = structure::SchurPipeline::stacked_adjoint(model_.factors);
            M += iz * (U * K * U.transpose());
        }
        M = 0.5 * (M + M.transpose());
        llt_.compute(M);
        if (llt_.info() != Eigen::Success) throw SingularError(name_ + ": Hessian not positive definite");
    };
    switch (strategy_) {
        case Strategy::Dense:
        case Strategy::BlockDiagonal:
            dense();
            return;
        case Strategy::LowRank: {
            path_ = 1;
            pipe_ = structure::SchurPipeline::nonsym(structure::BaseOperator::logdet(sx_), model_.factors,
                                                     -iz * factor_hess_matrix());
            return;
        }
        case Strategy::IdentityPlusLowRank: {
            path_ = 2;
            double w0 = 0;
            for (const EntropyTerm& e : model_.entropies)
                if (e.factor == 0) w0 = e.weight;
            const int N = n_ * n_;
            const int Rr = R_ - N;
            RMat K0r(N, Rr), Krr(Rr, Rr);
            RVec e = RVec::Zero(R_);
            for (int j = 0; j < Rr; ++j) {
                e(N + j) = 1.0;
                const RVec col = factor_hess(e);
                K0r.col(j) = col.head(N);
                Krr.col(j) = col.tail(Rr);
                e(N + j) = 0.0;
            }
            Krr = 0.5 * (Krr + Krr.transpose());
            std::vector<LinearMap> rest(model_.factors.begin() + 1, model_.factors.end());
            pipe_ = structure::SchurPipeline::block(structure::BaseOperator::entropy_logdet(sx_, w0 * iz), rest,
                                                    iz * K0r, -iz * Krr);
            return;
        }
        case Strategy::DifferenceOfEntropies: {
            if (!sym_eligible()) {
                dense();
                return;
            }
            path_ = 3;
            double w0 = 0;
            const int Rr = R_ - n_ * n_;
            RMat Binv = RMat::Zero(Rr, Rr);
            for (size_t i = 0; i < model_.entropies.size(); ++i) {
                const EntropyTerm& e = model_.entropies[i];
                if (e.factor == 0) {
                    w0 = e.weight;
                    continue;
                }
                const EntropyCache& c = ec_[i];
                const int k = static_cast<int>(c.Z.rows());
                const int o = off_[e.factor] - n_ * n_;
                const double sc = zeta_ / std::abs(e.weight);
                RVec b = RVec::Zero(k * k);
                for (int j = 0; j < k * k; ++j) {
                    b(j) = 1.0;
                    Binv.block(o, o + j, k * k, 1) = sc * svec(linalg::eig_unscale(c.s, c.d1, smat(b.data(), k)));
                    b(j) = 0.0;
                }
            }
            Binv = 0.5 * (Binv + Binv.transpose());
            std::vector<LinearMap> rest(model_.factors.begin() + 1, model_.factors.end());
            pipe_ = structure::SchurPipeline::sym(structure::BaseOperator::entropy_logdet(sx_, w0 * iz), rest, Binv);
            return;
        }
    }
}

RMat ComposedQRECone::solve_inner(const RMat& R) const {
    if (path_ == 0) return llt_.solve(R);
    return pipe_.solve(R);
}

int ComposedQRECone::dense_dim() const {
    switch (strategy_) {
        case Strategy::LowRank: return R_;
        case Strategy::IdentityPlusLowRank:
        case Strategy::DifferenceOfEntropies:
            return sym_eligible() || strategy_ == Strategy::IdentityPlusLowRank ? R_ - n_ * n_ : n_ * n_;
        default: return n_ * n_;
    }
}

std::string ComposedQRECone::solve_path() const {
    static const char* names[] = {"dense-assembly", "low-rank", "identity-plus-low-rank", "difference-of-entropies"};
    return names[path_];
}

// ---- model builders ----

TermModel ComposedQRECone::dense_model(const LinearMap& G, const LinearMap& H) {
    if (G.in_side() != H.in_side() || G.out_side() != H.out_side())
        throw DimensionError("composed qre: G and H must share input and output sides");
    const structure::FacialReduction fg = structure::facial_reduce(G);
    const structure::FacialReduction fh = structure::facial_reduce(H);
    check_dominated(G, fh);
    TermModel m;
    m.n = G.in_side();
    m.factors.push_back(LinearMap::identity(m.n));
    m.entropies.push_back({0, 1.0, fg.reduced(G)});
    m.crosses.push_back({0, fh.reduced(G), 0, fh.reduced(H)});
    return m;
}

TermModel ComposedQRECone::block_model(const structure::BlockStructure& gb, const structure::BlockStructure& hb) {
    if (gb.extractors.size() != hb.extractors.size() || gb.sizes != hb.sizes)
        throw DeclarationError("block model: G and H blocks differ");
    if (gb.extractors.empty()) throw DeclarationError("block model: no blocks");
    TermModel m;
    m.n = gb.extractors[0].in_side();
    m.factors.push_back(LinearMap::identity(m.n));
    for (size_t i = 0; i < gb.extractors.size(); ++i) {
        const LinearMap& Gi = gb.extractors[i];
        const LinearMap& Hi = hb.extractors[i];
        // Blocks where G vanishes contribute nothing.
        const CMat GI = Gi.apply(CMat::Identity(m.n, m.n));
        if (GI.norm() == 0) continue;
        const structure::FacialReduction fg = structure::facial_reduce(Gi);
        const structure::FacialReduction fh = structure::facial_reduce(Hi);
        check_dominated(Gi, fh);
        m.entropies.push_back({0, 1.0, fg.reduced(Gi)});
        m.crosses.push_back({0, fh.reduced(Gi), 0, fh.reduced(Hi)});
    }
    return m;
}

TermModel ComposedQRECone::low_rank_model(const LinearMap& G1, const LinearMap& G2, const LinearMap& H1,
                                          const LinearMap& H2) {
    const LinearMap G = LinearMap::compose(G2, G1);
    const LinearMap H = LinearMap::compose(H2, H1);
    if (G.in_side() != H.in_side() || G.out_side() != H.out_side())
        throw DimensionError("low-rank model: G and H must share input and output sides");
    const structure::FacialReduction fg = structure::facial_reduce(G);
    const structure::FacialReduction fh = structure::facial_reduce(H);
    check_dominated(G, fh);
    TermModel m;
    m.n = G.in_side();
    m.factors = {G1, H1};
    m.entropies.push_back({0, 1.0, fg.reduced(G2)});
    m.crosses.push_back({0, fh.reduced(G2), 1, fh.reduced(H2)});
    return m;
}

TermModel ComposedQRECone::identity_low_rank_model(const LinearMap& H1, const LinearMap& H2) {
    const LinearMap H = LinearMap::compose(H2, H1);
    const int n = H1.in_side();
    if (H.out_side() != n) throw DimensionError("identity-plus-low-rank model: H must map H^n to H^n");
    const structure::FacialReduction fh = structure::facial_reduce(H);
    if (fh.rank != n) throw DomainError("identity-plus-low-rank model: H(I) must be positive definite");
    TermModel m;
    m.n = n;
    m.factors = {LinearMap::identity(n), H1};
    m.entropies.push_back({0, 1.0, std::nullopt});
    m.crosses.push_back({0, std::nullopt, 1, H2});
    return m;
}

}  // namespace cones
}  // namespace qrep
