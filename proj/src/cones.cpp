#include "qrep/cones.hpp"

#include <cmath>

namespace qrep {
namespace cones {

using linalg::eigh;
using linalg::smat;
using linalg::svec;

namespace {

int diag_index(int i) { return i * i + 2 * i; }

bool min_eig_ok(const linalg::Spectral& s, double tol) { return s.lambda.size() == 0 || s.lambda(s.lambda.size() - 1) > tol; }

RMat inverse_scale(const RVec& lambda) {
    const Eigen::Index n = lambda.size();
    RMat D(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) D(i, j) = 1.0 / (lambda(i) * lambda(j));
    return D;
}

CMat spectral_inverse(const linalg::Spectral& s) { return s.U * s.lambda.cwiseInverse().asDiagonal() * s.U.adjoint(); }

double sum_log(const RVec& lambda) { return lambda.array().log().sum(); }

}  // namespace

// ---- Cone ----

RVec Cone::inv_hess_solve(const RVec& r) const {
    RMat R = r;
    return inv_hess_solve(R).col(0);
}

RMat Cone::hess_matrix() const {
    require_feasible("hess_matrix");
    return linalg::build_hessian_matrix([this](const RVec& h) { return hess_apply(h); }, dim_);
}

RVec Cone::inv_hess_dense(const RVec& r) const {
    RMat H = hess_matrix();
    Eigen::LLT<RMat> llt(H);
    if (llt.info() == Eigen::Success) return llt.solve(r);
    return H.fullPivLu().solve(r);
}

void Cone::require_feasible(const char* what) const {
    if (!feas_) throw std::logic_error(name() + ": " + what + " called at an infeasible or unset point");
}

double Cone::interior_tol(const RVec& x) const { return 1e-12 * (1.0 + x.norm()); }

// ---- nonnegative orthant ----

NonnegCone::NonnegCone(int n) {
    if (n < 1) throw DimensionError("nonneg cone: dimension must be positive");
    dim_ = n;
    nu_ = n;
}

bool NonnegCone::set_point(const RVec& x) {
    if (x.size() != dim_) throw DimensionError("nonneg cone: point has wrong length");
    x_ = x;
    feas_ = x.minCoeff() > interior_tol(x);
    return feas_;
}

double NonnegCone::barrier() const {
    require_feasible("barrier");
    return -x_.array().log().sum();
}

RVec NonnegCone::grad() const {
    require_feasible("grad");
    return -x_.cwiseInverse();
}

RVec NonnegCone::hess_apply(const RVec& h) const {
    require_feasible("hess_apply");
    return h.cwiseQuotient(x_.cwiseProduct(x_));
}

RMat NonnegCone::inv_hess_solve(const RMat& R) const {
    require_feasible("inv_hess_solve");
    return x_.cwiseProduct(x_).asDiagonal() * R;
}

RVec NonnegCone::init_point() const { return RVec::Ones(dim_); }

// ---- PSD ----

PSDCone::PSDCone(int n) : n_(n) {
    if (n < 1) throw DimensionError("psd cone: side must be positive");
    dim_ = n * n;
    nu_ = n;
}

bool PSDCone::set_point(const RVec& x) {
    if (x.size() != dim_) throw DimensionError("psd cone: point has wrong length");
    x_ = x;
    X_ = smat(x.data(), n_);
    linalg::Spectral s = eigh(X_);
    feas_ = min_eig_ok(s, interior_tol(x));
    if (!feas_) return false;
    Xinv_ = spectral_inverse(s);
    logdet_ = sum_log(s.lambda);
    return true;
}

double PSDCone::barrier() const {
    require_feasible("barrier");
    return -logdet_;
}

RVec PSDCone::grad() const {
    require_feasible("grad");
    return -svec(Xinv_);
}

RVec PSDCone::hess_apply(const RVec& h) const {
    require_feasible("hess_apply");
    return svec(Xinv_ * smat(h.data(), n_) * Xinv_);
}

RMat PSDCone::inv_hess_solve(const RMat& R) const {
    require_feasible("inv_hess_solve");
    RMat out(R.rows(), R.cols());
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        RVec c = R.col(j);
        out.col(j) = svec(X_ * smat(c.data(), n_) * X_);
    }
    return out;
}

RVec PSDCone::init_point() const { return svec(CMat::Identity(n_, n_)); }

// ---- epigraph base ----

bool EpigraphCone::set_point(const RVec& x) {
    if (x.size() != dim_) throw DimensionError(name() + ": point has wrong length");
    x_ = x;
    feas_ = false;
    invalidate();
    if (!x.allFinite()) return false;
    if (!set_inner(x.tail(dim_ - 1))) return false;
    zeta_ = x(0) - phi_;
    if (!(zeta_ > interior_tol(x))) return false;
    feas_ = true;
    return true;
}

double EpigraphCone::barrier() const {
    require_feasible("barrier");
    return -std::log(zeta_) + logbar();
}

RVec EpigraphCone::grad() const {
    require_feasible("grad");
    RVec g(dim_);
    g(0) = -1.0 / zeta_;
    g.tail(dim_ - 1) = gphi_ / zeta_ + grad_logbar();
    return g;
}

RVec EpigraphCone::hess_apply(const RVec& h) const {
    require_feasible("hess_apply");
    const RVec H = h.tail(dim_ - 1);
    const double a = (h(0) - gphi_.dot(H)) / (zeta_ * zeta_);
    RVec out(dim_);
    out(0) = a;
    out.tail(dim_ - 1) = -a * gphi_ + hess_phi(H) / zeta_ + hess_logbar(H);
    return out;
}

RVec EpigraphCone::inner_hess_apply(const RVec& h) const { return hess_phi(h) / zeta_ + hess_logbar(h); }

RMat EpigraphCone::inner_hess_matrix() const {
    require_feasible("inner_hess_matrix");
    return linalg::build_hessian_matrix([this](const RVec& h) { return inner_hess_apply(h); }, dim_ - 1);
}

void EpigraphCone::prepare_inverse() const {
    require_feasible("prepare_inverse");
    if (factored_) return;
    factor_inner();
    factored_ = true;
}

void EpigraphCone::factor_inner() const {
    llt_.compute(inner_hess_matrix());
    if (llt_.info() != Eigen::Success) throw SingularError(name() + ": Hessian not positive definite");
}

RMat EpigraphCone::solve_inner(const RMat& R) const { return llt_.solve(R); }

RMat EpigraphCone::inv_hess_solve(const RMat& R) const {
    prepare_inverse();
    const Eigen::Index k = R.cols();
    RMat W = R.bottomRows(dim_ - 1) + gphi_ * R.row(0);
    RMat Hs = solve_inner(W);
    RMat out(dim_, k);
    out.row(0) = zeta_ * zeta_ * R.row(0) + gphi_.transpose() * Hs;
    out.bottomRows(dim_ - 1) = Hs;
    return out;
}

// ---- classical relative entropy ----

CRECone::CRECone(int n) : n_(n) {
    if (n < 1) throw DimensionError("cre cone: dimension must be positive");
    dim_ = 2 * n + 1;
    nu_ = 2 * n + 1;
}

RVec CRECone::init_point() const {
    RVec x = RVec::Ones(dim_);
    return x;
}

bool CRECone::set_inner(const RVec& u) {
    xv_ = u.head(n_);
    yv_ = u.tail(n_);
    const double tol = interior_tol(point());
    if (!(xv_.minCoeff() > tol && yv_.minCoeff() > tol)) return false;
    RVec lr = (xv_.array().log() - yv_.array().log()).matrix();
    phi_ = xv_.dot(lr);
    gphi_.resize(2 * n_);
    gphi_.head(n_) = lr.array() + 1.0;
    gphi_.tail(n_) = -xv_.cwiseQuotient(yv_);
    return true;
}

RVec CRECone::hess_phi(const RVec& h) const {
    RVec out(2 * n_);
    for (int i = 0; i < n_; ++i) {
        const double hx = h(i), hy = h(n_ + i), x = xv_(i), y = yv_(i);
        out(i) = hx / x - hy / y;
        out(n_ + i) = -hx / y + x * hy / (y * y);
    }
    return out;
}

double CRECone::logbar() const { return -sum_log(xv_) - sum_log(yv_); }

RVec CRECone::grad_logbar() const {
    RVec g(2 * n_);
    g.head(n_) = -xv_.cwiseInverse();
    g.tail(n_) = -yv_.cwiseInverse();
    return g;
}

RVec CRECone::hess_logbar(const RVec& h) const {
    RVec out(2 * n_);
    out.head(n_) = h.head(n_).cwiseQuotient(xv_.cwiseProduct(xv_));
    out.tail(n_) = h.tail(n_).cwiseQuotient(yv_.cwiseProduct(yv_));
    return out;
}

RMat CRECone::solve_inner(const RMat& R) const {
    RMat out(R.rows(), R.cols());
    const double iz = 1.0 / zeta_;
    for (int i = 0; i < n_; ++i) {
        const double x = xv_(i), y = yv_(i);
        const double a = iz / x + 1.0 / (x * x), b = -iz / y, d = iz * x / (y * y) + 1.0 / (y * y);
        const double det = a * d - b * b;
        for (Eigen::Index j = 0; j < R.cols(); ++j) {
            const double r1 = R(i, j), r2 = R(n_ + i, j);
            out(i, j) = (d * r1 - b * r2) / det;
            out(n_ + i, j) = (a * r2 - b * r1) / det;
        }
    }
    return out;
}

// ---- quantum entropy ----

QECone::QECone(int n) : n_(n) {
    if (n < 1) throw DimensionError("qe cone: side must be positive");
    dim_ = n * n + 2;
    nu_ = n + 2;
}

RVec QECone::init_point() const {
    RVec x(dim_);
    x(0) = 1.0;
    x.segment(1, n_ * n_) = svec(CMat::Identity(n_, n_));
    x(dim_ - 1) = 1.0;
    return x;
}

bool QECone::set_inner(const RVec& u) {
    X_ = smat(u.data(), n_);
    y_ = u(n_ * n_);
    const double tol = interior_tol(point());
    if (!(y_ > tol)) return false;
    sx_ = eigh(X_);
    if (!min_eig_ok(sx_, tol)) return false;
    trX_ = sx_.lambda.sum();
    const double ly = std::log(y_);
    phi_ = 0;
    for (int i = 0; i < n_; ++i) phi_ += sx_.lambda(i) * std::log(sx_.lambda(i));
    phi_ -= trX_ * ly;
    RVec d = (sx_.lambda.array().log() + 1.0 - ly).matrix();
    gphi_.resize(n_ * n_ + 1);
    gphi_.head(n_ * n_) = svec(sx_.U * d.asDiagonal() * sx_.U.adjoint());
    gphi_(n_ * n_) = -trX_ / y_;
    dlog_ = linalg::divided_differences_1(linalg::Fn::Log, sx_.lambda);
    return true;
}

RVec QECone::hess_phi(const RVec& h) const {
    const CMat H = smat(h.data(), n_);
    const double hy = h(n_ * n_);
    CMat out = linalg::eig_scale(sx_, dlog_, H);
    out.diagonal().array() -= hy / y_;
    RVec o(n_ * n_ + 1);
    o.head(n_ * n_) = svec(out);
    o(n_ * n_) = -H.trace().real() / y_ + trX_ * hy / (y_ * y_);
    return o;
}

double QECone::logbar() const { return -sum_log(sx_.lambda) - std::log(y_); }

RVec QECone::grad_logbar() const {
    RVec g(n_ * n_ + 1);
    g.head(n_ * n_) = -svec(spectral_inverse(sx_));
    g(n_ * n_) = -1.0 / y_;
    return g;
}

RVec QECone::hess_logbar(const RVec& h) const {
    const CMat H = smat(h.data(), n_);
    RVec o(n_ * n_ + 1);
    o.head(n_ * n_) = svec(linalg::eig_scale(sx_, inverse_scale(sx_.lambda), H));
    o(n_ * n_) = h(n_ * n_) / (y_ * y_);
    return o;
}

void QECone::factor_inner() const {
    // X block is an eigenbasis Hadamard scaling; y couples through I only.
    dinv_ = dlog_ / zeta_ + inverse_scale(sx_.lambda);
    const double c = -1.0 / (zeta_ * y_);
    RVec diag(n_);
    for (int i = 0; i < n_; ++i) diag(i) = c / dinv_(i, i);
    w_ = svec(sx_.U * diag.asDiagonal() * sx_.U.adjoint());
    const double d = trX_ / (zeta_ * y_ * y_) + 1.0 / (y_ * y_);
    schur_ = d - c * w_.dot(svec(CMat::Identity(n_, n_)));
    if (!(schur_ > 0)) throw SingularError("qe cone: Schur complement not positive");
}

RMat QECone::solve_inner(const RMat& R) const {
    const int N = n_ * n_;
    const double c = -1.0 / (zeta_ * y_);
    RMat out(R.rows(), R.cols());
    for (Eigen::Index j = 0; j < R.cols(); ++j) {
        RVec rx = R.col(j).head(N);
        RVec ax = svec(linalg::eig_unscale(sx_, dinv_, smat(rx.data(), n_)));
        // c^T A^-1 r_X = c tr(A^-1 r_X)
        double trace = 0;
        for (int i = 0; i < n_; ++i) trace += ax(diag_index(i));
        const double hy = (R(N, j) - c * trace) / schur_;
        out.col(j).head(N) = ax - w_ * hy;
        out(N, j) = hy;
    }
    return out;
}

// ---- quantum relative entropy ----

QRECone::QRECone(int n) : n_(n) {
    if (n < 1) throw DimensionError("qre cone: side must be positive");
    dim_ = 2 * n * n + 1;
    nu_ = 2 * n + 1;
}

RVec QRECone::init_point() const {
    RVec x(dim_);
    x(0) = 1.0;
    const RVec I = svec(CMat::Identity(n_, n_));
    x.segment(1, n_ * n_) = I;
    x.tail(n_ * n_) = I;
    return x;
}

bool QRECone::set_inner(const RVec& u) {
    const int N = n_ * n_;
    X_ = smat(u.data(), n_);
    Y_ = smat(u.data() + N, n_);
    const double tol = interior_tol(point());
    sx_ = eigh(X_);
    if (!min_eig_ok(sx_, tol)) return false;
    sy_ = eigh(Y_);
    if (!min_eig_ok(sy_, tol)) return false;
    const CMat logX = linalg::spectral_apply(sx_, linalg::Fn::Log);
    const CMat logY = linalg::spectral_apply(sy_, linalg::Fn::Log);
    phi_ = linalg::inner(X_, logX - logY);
    dlx_ = linalg::divided_differences_1(linalg::Fn::Log, sx_.lambda);
    dly_ = linalg::divided_differences_1(linalg::Fn::Log, sy_.lambda);
    d2y_ = linalg::divided_differences_2(linalg::Fn::Log, sy_.lambda);
    Xhat_y_ = sy_.U.adjoint() * X_ * sy_.U;
    CMat gx = logX - logY + CMat::Identity(n_, n_);
    CMat gy = -(sy_.U * Xhat_y_.cwiseProduct(dly_.cast<Complex>()) * sy_.U.adjoint());
    gphi_.resize(2 * N);
    gphi_.head(N) = svec(gx);
    gphi_.tail(N) = svec(gy);
    Xinv_ = spectral_inverse(sx_);
    Yinv_ = spectral_inverse(sy_);
    return true;
}

RVec QRECone::hess_phi(const RVec& h) const {
    const int N = n_ * n_;
    const CMat HX = smat(h.data(), n_);
    const CMat HY = smat(h.data() + N, n_);
    RVec o(2 * N);
    o.head(N) = svec(linalg::eig_scale(sx_, dlx_, HX) - linalg::eig_scale(sy_, dly_, HY));
    o.tail(N) = svec(-linalg::eig_scale(sy_, dly_, HX) - linalg::weighted_hess_eig(sy_, d2y_, Xhat_y_, HY));
    return o;
}

double QRECone::logbar() const { return -sum_log(sx_.lambda) - sum_log(sy_.lambda); }

RVec QRECone::grad_logbar() const {
    const int N = n_ * n_;
    RVec g(2 * N);
    g.head(N) = -svec(Xinv_);
    g.tail(N) = -svec(Yinv_);
    return g;
}

RVec QRECone::hess_logbar(const RVec& h) const {
    const int N = n_ * n_;
    RVec o(2 * N);
    o.head(N) = svec(Xinv_ * smat(h.data(), n_) * Xinv_);
    o.tail(N) = svec(Yinv_ * smat(h.data() + N, n_) * Yinv_);
    return o;
}

// ---- QRD (fixed-point subspace of the conditional entropy cone) ----

std::vector<std::pair<int, int>> QRDCone::pairs(int n) {
    std::vector<std::pair<int, int>> p;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) p.emplace_back(i, j);
    return p;
}

CMat QRDCone::lift(const RVec& y, const CMat& Z) {
    const int n = static_cast<int>(Z.rows());
    if (y.size() != n * n - n) throw DimensionError("qrd lift: y has wrong length");
    CMat G = CMat::Zero(n * n, n * n);
    const auto p = pairs(n);
    for (size_t k = 0; k < p.size(); ++k) {
        const int idx = p[k].first * n + p[k].second;
        G(idx, idx) = y(k);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i * n + i, j * n + j) = Z(i, j);
    return G;
}

QRDCone::QRDCone(int n) : n_(n), ny_(n * n - n), pairs_(pairs(n)) {
    if (n < 1) throw DimensionError("qrd cone: side must be positive");
    dim_ = 1 + ny_ + n * n;
    nu_ = n * n + 1;
}

RVec QRDCone::init_point() const {
    RVec x(dim_);
    x.segment(1, ny_).setOnes();
    x.tail(n_ * n_) = svec(CMat::Identity(n_, n_));
    const double g = n_;
    x(0) = -n_ * g * std::log(g) + 1.0;
    return x;
}

bool QRDCone::set_inner(const RVec& u) {
    y_ = u.head(ny_);
    Z_ = smat(u.data() + ny_, n_);
    const double tol = interior_tol(point());
    if (ny_ > 0 && !(y_.minCoeff() > tol)) return false;
    sz_ = eigh(Z_);
    if (!min_eig_ok(sz_, tol)) return false;
    ghat_.resize(n_);
    for (int j = 0; j < n_; ++j) ghat_(j) = Z_(j, j).real();
    for (int k = 0; k < ny_; ++k) ghat_(pairs_[k].second) += y_(k);
    if (!(ghat_.minCoeff() > 0)) return false;
    const RVec logy = y_.array().log().matrix();
    const RVec logg = ghat_.array().log().matrix();
    phi_ = y_.dot(logy) - ghat_.dot(logg);
    for (int i = 0; i < n_; ++i) phi_ += sz_.lambda(i) * std::log(sz_.lambda(i));
    gphi_.resize(ny_ + n_ * n_);
    for (int k = 0; k < ny_; ++k) gphi_(k) = logy(k) - logg(pairs_[k].second);
    CMat gz = linalg::spectral_apply(sz_, linalg::Fn::Log);
    for (int j = 0; j < n_; ++j) gz(j, j) -= logg(j);
    gphi_.tail(n_ * n_) = svec(gz);
    dlz_ = linalg::divided_differences_1(linalg::Fn::Log, sz_.lambda);
    return true;
}

RVec QRDCone::hess_phi(const RVec& h) const {
    const CMat HZ = smat(h.data() + ny_, n_);
    RVec dg(n_);
    for (int j = 0; j < n_; ++j) dg(j) = HZ(j, j).real();
    for (int k = 0; k < ny_; ++k) dg(pairs_[k].second) += h(k);
    dg = dg.cwiseQuotient(ghat_);
    RVec o(ny_ + n_ * n_);
    for (int k = 0; k < ny_; ++k) o(k) = h(k) / y_(k) - dg(pairs_[k].second);
    CMat oz = linalg::eig_scale(sz_, dlz_, HZ);
    for (int j = 0; j < n_; ++j) oz(j, j) -= dg(j);
    o.tail(n_ * n_) = svec(oz);
    return o;
}

double QRDCone::logbar() const { return -sum_log(y_) - sum_log(sz_.lambda); }

RVec QRDCone::grad_logbar() const {
    RVec g(ny_ + n_ * n_);
    g.head(ny_) = -y_.cwiseInverse();
    g.tail(n_ * n_) = -svec(spectral_inverse(sz_));
    return g;
}

RVec QRDCone::hess_logbar(const RVec& h) const {
    RVec o(ny_ + n_ * n_);
    o.head(ny_) = h.head(ny_).cwiseQuotient(y_.cwiseProduct(y_));
    o.tail(n_ * n_) = svec(linalg::eig_scale(sz_, inverse_scale(sz_.lambda), smat(h.data() + ny_, n_)));
    return o;
}

void QRDCone::factor_inner() const {
    // M = A - U B U^T with A block diagonal (y diagonal, Z Hadamard in the
    // eigenbasis of Z), U^T the reduced-marginal map and B = diag(1/(zeta g)).
    ainv_y_ = (y_.cwiseInverse() / zeta_ + y_.cwiseProduct(y_).cwiseInverse()).cwiseInverse();
    dinv_z_ = dlz_ / zeta_ + inverse_scale(sz_.lambda);
    ainv_u_ = RMat::Zero(ny_ + n_ * n_, n_);
    for (int k = 0; k < ny_; ++k) ainv_u_(k, pairs_[k].second) = ainv_y_(k);
    for (int j = 0; j < n_; ++j) {
        CMat E = CMat::Zero(n_, n_);
        E(j, j) = 1.0;
        ainv_u_.col(j).tail(n_ * n_) = svec(linalg::eig_unscale(sz_, dinv_z_, E));
    }
    RMat small = (zeta_ * ghat_).asDiagonal();
    for (int j = 0; j < n_; ++j) {
        RVec col = ainv_u_.col(j);
        for (int k = 0; k < ny_; ++k) small(pairs_[k].second, j) -= col(k);
        for (int i = 0; i < n_; ++i) small(i, j) -= col(ny_ + diag_index(i));
    }
    small = 0.5 * (small + small.transpose());
    small_.compute(small);
    if (small_.info() != Eigen::Success) throw SingularError("qrd cone: Schur complement not positive definite");
}

RMat QRDCone::solve_inner(const RMat& R) const {
    RMat out(R.rows(), R.cols());
    RMat Ut(n_, R.cols());
    for (Eigen::Index c = 0; c < R.cols(); ++c) {
        RVec x(ny_ + n_ * n_);
        x.head(ny_) = R.col(c).head(ny_).cwiseProduct(ainv_y_);
        RVec rz = R.col(c).tail(n_ * n_);
        x.tail(n_ * n_) = svec(linalg::eig_unscale(sz_, dinv_z_, smat(rz.data(), n_)));
        RVec u = RVec::Zero(n_);
        for (int k = 0; k < ny_; ++k) u(pairs_[k].second) += x(k);
        for (int i = 0; i < n_; ++i) u(i) += x(ny_ + diag_index(i));
        out.col(c) = x;
        Ut.col(c) = u;
    }
    out += ainv_u_ * small_.solve(Ut);
    return out;
}

// ---- oracle checks ----

namespace {

RVec random_direction(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    RVec h(dim);
    for (int i = 0; i < dim; ++i) h(i) = nd(rng);
    return h;
}

// Scale h to unit local norm at the cone's current point.
RVec local_unit(const Cone& cone, RVec h) {
    const double q = h.dot(cone.hess_apply(h));
    return h / std::sqrt(std::max(q, 1e-300));
}

}  // namespace

RVec random_interior_point(Cone& cone, std::mt19937_64& rng, double spread) {
    RVec x = cone.init_point();
    if (!cone.set_point(x)) throw std::logic_error(cone.name() + ": init point infeasible");
    std::uniform_real_distribution<double> ud(0.5, 2.0);
    for (int step = 0; step < 4; ++step) {
        RVec h = local_unit(cone, random_direction(cone.dim(), rng));
        RVec trial = x + spread * h;
        if (cone.set_point(trial)) {
            x = trial;
        } else {
            cone.set_point(x);
        }
    }
    x *= ud(rng);
    cone.set_point(x);
    return x;
}

OracleReport check_oracles(Cone& cone, const RVec& x, std::mt19937_64& rng) {
    OracleReport rep;
    if (!cone.set_point(x)) throw std::invalid_argument(cone.name() + ": check point infeasible");
    const double F0 = cone.barrier();
    const RVec g = cone.grad();
    const double nu = cone.nu();
    const double eps = 1e-5;
    for (int trial = 0; trial < 3; ++trial) {
        RVec h = local_unit(cone, random_direction(cone.dim(), rng));
        const RVec Hh = cone.hess_apply(h);
        cone.set_point(x + eps * h);
        const double Fp = cone.barrier();
        const RVec gp = cone.grad();
        cone.set_point(x - eps * h);
        const double Fm = cone.barrier();
        const RVec gm = cone.grad();
        cone.set_point(x);
        const double dfd = (Fp - Fm) / (2 * eps);
        const double dg = g.dot(h);
        rep.grad_fd = std::max(rep.grad_fd, std::abs(dfd - dg) / std::max(1.0, std::abs(dg)));
        const RVec hfd = (gp - gm) / (2 * eps);
        rep.hess_fd = std::max(rep.hess_fd, (hfd - Hh).norm() / std::max(Hh.norm(), 1e-300));
        const RVec back = cone.inv_hess_solve(Hh);
        rep.inv_hess = std::max(rep.inv_hess, (back - h).norm() / h.norm());
    }
    for (double tau : {0.5, 2.0}) {
        cone.set_point(tau * x);
        const double Ft = cone.barrier();
        rep.homogeneity = std::max(rep.homogeneity, std::abs(Ft - F0 + nu * std::log(tau)));
    }
    cone.set_point(x);
    rep.euler_grad = std::abs(g.dot(x) + nu) / nu;
    rep.euler_hess = (cone.hess_apply(x) + g).norm() / g.norm();
    return rep;
}

double self_concordance_ratio(Cone& cone, const RVec& x, std::mt19937_64& rng, int trials) {
    if (!cone.set_point(x)) throw std::invalid_argument(cone.name() + ": check point infeasible");
    double worst = 0;
    const double eps = 1e-4;
    for (int t = 0; t < trials; ++t) {
        cone.set_point(x);
        RVec h = local_unit(cone, random_direction(cone.dim(), rng));
        cone.set_point(x + eps * h);
        const double qp = h.dot(cone.hess_apply(h));
        cone.set_point(x - eps * h);
        const double qm = h.dot(cone.hess_apply(h));
        const double d3 = (qp - qm) / (2 * eps);
        worst = std::max(worst, std::abs(d3));
    }
    cone.set_point(x);
    return worst;
}

}  // namespace cones
}  // namespace qrep
