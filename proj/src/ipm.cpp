#include "qrep/ipm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>

namespace qrep {
namespace ipm {

using cones::ConePtr;

double ConicProblem::nu() const {
    double v = 0;
    for (const ConePtr& k : cones) v += k->nu();
    return v;
}

void ConicProblem::validate() const {
    int d = 0;
    for (const ConePtr& k : cones) d += k->dim();
    if (d != c.size()) throw DimensionError("conic problem: cone dimensions sum to " + std::to_string(d) +
                                            " but c has " + std::to_string(c.size()) + " entries");
    if (A.cols() != c.size()) throw DimensionError("conic problem: A has the wrong number of columns");
    if (A.rows() != b.size()) throw DimensionError("conic problem: A and b disagree in rows");
    if (!c.allFinite() || !A.allFinite() || !b.allFinite()) throw NumericError("conic problem: non-finite data");
}

std::string status_name(Status s) {
    switch (s) {
        case Status::Optimal: return "optimal";
        case Status::PrimalInfeasible: return "primal-infeasible";
        case Status::DualInfeasible: return "dual-infeasible";
        case Status::IterationLimit: return "iteration-limit";
        case Status::NumericalFailure: return "numerical-failure";
    }
    return "numerical-failure";
}

std::string iter_header() { return "iter mu gap pres dres step time_ms"; }

std::string format_iter(const IterRecord& r) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "%d %.3e %.3e %.3e %.3e %.3e %.3f", r.iter, r.mu, r.gap, r.pres, r.dres, r.step,
                  r.time_ms);
    return buf;
}

RowReduction reduce_rows(const RMat& A, const RVec& b) {
    RowReduction out;
    const Eigen::Index p = A.rows();
    if (p == 0) return out;
    const double scale = A.norm();
    if (scale == 0) {
        out.consistent = b.norm() <= 1e-9 * (1.0 + b.norm());
        return out;
    }
    Eigen::ColPivHouseholderQR<RMat> qr(A.transpose());
    qr.setThreshold(1e-10 * scale / std::max(1.0, qr.maxPivot()));
    const Eigen::Index r = qr.rank();
    std::vector<int> kept, dropped;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index i = 0; i < p; ++i) (i < r ? kept : dropped).push_back(perm(i));
    std::sort(kept.begin(), kept.end());
    out.kept = kept;
    if (dropped.empty()) return out;
    RMat K(r, A.cols());
    RVec bk(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        K.row(i) = A.row(kept[i]);
        bk(i) = b(kept[i]);
    }
    Eigen::ColPivHouseholderQR<RMat> kq(K.transpose());
    for (int j : dropped) {
        const RVec lam = kq.solve(RVec(A.row(j).transpose()));
        if (std::abs(lam.dot(bk) - b(j)) > 1e-9 * (1.0 + b.norm())) out.consistent = false;
    }
    return out;
}

RMat assemble_schur(const RMat& A, const std::vector<ConePtr>& cones) {
    const Eigen::Index p = A.rows();
    RMat S = RMat::Zero(p, p);
    if (p == 0) return S;
    Eigen::Index off = 0;
    for (const ConePtr& k : cones) {
        const int d = k->dim();
        const RMat Ak = A.middleCols(off, d);
        if (!Ak.isZero(0)) S.noalias() += Ak * k->inv_hess_solve(RMat(Ak.transpose()));
        off += d;
    }
    return 0.5 * (S + S.transpose());
}

// ---- Newton system ----

NewtonSystem::NewtonSystem(const RMat& A, const RVec& b, const RVec& c, const std::vector<ConePtr>& cones,
                           double mu, double tau, double kappa)
    : A_(A), b_(b), c_(c), cones_(cones), mu_(mu), tau_(tau), kappa_(kappa) {
    const Eigen::Index p = A.rows();
    HinvAt_ = hinv_block(A.transpose());
    if (p > 0) {
        const RMat G = A * HinvAt_;
        RMat Gs = 0.5 * (G + G.transpose());
        llt_.compute(Gs);
        if (llt_.info() != Eigen::Success) {
            regularized_ = true;
            Gs.diagonal().array() += 1e-12 * std::max(1.0, Gs.diagonal().maxCoeff());
            llt_.compute(Gs);
            if (llt_.info() != Eigen::Success) throw NumericError("Schur complement is not positive definite");
        }
        // Structured inverse Hessians are symmetric only up to rounding; near
        // the boundary the gap matters, and factoring the symmetric part would
        // leave A dx - b dtau off by exactly that amount.
        if (!regularized_ && (G - G.transpose()).norm() > 1e-12 * G.norm()) {
            lu_.compute(G);
            use_lu_ = true;
        }
    }
    // Direction component along dtau.
    const RVec Hc = hinv(c);
    dy1_ = p > 0 ? schur_solve(mu * b + A * Hc) : RVec(RVec::Zero(0));
    dx1_ = (HinvAt_ * dy1_ - Hc) / mu;
    den_ = b.dot(dy1_) - c.dot(dx1_) + kappa / tau;
}

RMat NewtonSystem::hinv_block(const RMat& V) const {
    RMat out(V.rows(), V.cols());
    Eigen::Index off = 0;
    for (const ConePtr& k : cones_) {
        const int d = k->dim();
        out.middleRows(off, d) = k->inv_hess_solve(RMat(V.middleRows(off, d)));
        off += d;
    }
    return out;
}

RVec NewtonSystem::schur_solve(const RVec& v) const { return use_lu_ ? RVec(lu_.solve(v)) : RVec(llt_.solve(v)); }

RVec NewtonSystem::hinv(const RVec& v) const { return hinv_block(v); }

RVec NewtonSystem::hess(const RVec& v) const {
    RVec out(v.size());
    Eigen::Index off = 0;
    for (const ConePtr& k : cones_) {
        const int d = k->dim();
        out.segment(off, d) = k->hess_apply(v.segment(off, d));
        off += d;
    }
    return out;
}

Direction NewtonSystem::solve_once(const NewtonRhs& r) const {
    const Eigen::Index p = A_.rows();
    const RVec h = hinv(r.rx + r.rz);
    RVec dy0 = RVec::Zero(p);
    if (p > 0) dy0 = schur_solve(mu_ * r.ry - A_ * h);
    const RVec dx0 = (h + HinvAt_ * dy0) / mu_;
    Direction d;
    d.dtau = (r.rt - b_.dot(dy0) + c_.dot(dx0) + r.rk / tau_) / den_;
    d.dx = dx0 + d.dtau * dx1_;
    d.dy = dy0 + d.dtau * dy1_;
    d.dz = -A_.transpose() * d.dy + c_ * d.dtau - r.rx;
    d.dkappa = (r.rk - kappa_ * d.dtau) / tau_;
    return d;
}

double NewtonSystem::residual(const Direction& d, const NewtonRhs& r) const {
    const RVec e1 = A_ * d.dx - b_ * d.dtau - r.ry;
    const RVec e2 = -A_.transpose() * d.dy - d.dz + c_ * d.dtau - r.rx;
    const double e3 = b_.dot(d.dy) - c_.dot(d.dx) - d.dkappa - r.rt;
    const RVec e4 = mu_ * hess(d.dx) + d.dz - r.rz;
    const double e5 = kappa_ * d.dtau + tau_ * d.dkappa - r.rk;
    const double num = std::sqrt(e1.squaredNorm() + e2.squaredNorm() + e3 * e3 + e4.squaredNorm() + e5 * e5);
    const double den = std::sqrt(r.rx.squaredNorm() + r.ry.squaredNorm() + r.rz.squaredNorm() + r.rt * r.rt +
                                 r.rk * r.rk);
    return num / (1.0 + den);
}

Direction NewtonSystem::solve(const NewtonRhs& rhs, int refine) const {
    Direction d = solve_once(rhs);
    // The primal block rhs gets tiny near convergence, so keep refining while
    // the full residual still drops instead of stopping at a relative level.
    double res = residual(d, rhs);
    for (int k = 0; k < refine && res > 1e-15; ++k) {
        NewtonRhs e;
        e.ry = rhs.ry - (A_ * d.dx - b_ * d.dtau);
        e.rx = rhs.rx - (-A_.transpose() * d.dy - d.dz + c_ * d.dtau);
        e.rt = rhs.rt - (b_.dot(d.dy) - c_.dot(d.dx) - d.dkappa);
        e.rz = rhs.rz - (mu_ * hess(d.dx) + d.dz);
        e.rk = rhs.rk - (kappa_ * d.dtau + tau_ * d.dkappa);
        const Direction c = solve_once(e);
        Direction t = d;
        t.dx += c.dx;
        t.dy += c.dy;
        t.dz += c.dz;
        t.dtau += c.dtau;
        t.dkappa += c.dkappa;
        const double r2 = residual(t, rhs);
        if (!(r2 < res)) break;
        d = std::move(t);
        res = r2;
    }
    return d;
}

// ---- path following ----

namespace {

struct Iterate {
    RVec x, y, z;
    double tau = 1, kappa = 1;
};

class Solver {
public:
    Solver(const RMat& A, const RVec& b, const RVec& c, std::vector<ConePtr>& cones, const Settings& s)
        : A_(A), b_(b), c_(c), cones_(cones), s_(s) {
        nu_ = 0;
        for (const ConePtr& k : cones_) nu_ += k->nu();
    }

    double mu(const Iterate& it) const { return (it.x.dot(it.z) + it.tau * it.kappa) / (nu_ + 1.0); }

    bool set_cones(const RVec& x) const {
        Eigen::Index off = 0;
        bool ok = true;
        for (const ConePtr& k : cones_) {
            const int d = k->dim();
            if (ok) ok = k->set_point(x.segment(off, d));
            off += d;
        }
        return ok;
    }

    RVec grad() const {
        RVec g(c_.size());
        Eigen::Index off = 0;
        for (const ConePtr& k : cones_) {
            g.segment(off, k->dim()) = k->grad();
            off += k->dim();
        }
        return g;
    }

    // sqrt(sum_k |z_k/mu + g_k|^2_{H_k^-1} + (tau kappa/mu - 1)^2); cones set at x.
    double proximity(const Iterate& it, double m) const {
        double s = 0;
        Eigen::Index off = 0;
        for (const ConePtr& k : cones_) {
            const int d = k->dim();
            const RVec v = it.z.segment(off, d) / m + k->grad();
            const double q = v.dot(k->inv_hess_solve(v));
            if (!(q >= -1e-12 * (1.0 + v.squaredNorm()))) return std::numeric_limits<double>::infinity();
            s += std::max(q, 0.0);
            off += d;
        }
        const double t = it.tau * it.kappa / m - 1.0;
        return std::sqrt(s + t * t);
    }

    Iterate step(const Iterate& it, const Direction& d, double a) const {
        Iterate n;
        n.x = it.x + a * d.dx;
        n.y = it.y + a * d.dy;
        n.z = it.z + a * d.dz;
        n.tau = it.tau + a * d.dtau;
        n.kappa = it.kappa + a * d.dkappa;
        return n;
    }

    // Sets cones at the trial; returns its proximity (inf when infeasible).
    double try_point(const Iterate& t, double* mu_out) const {
        if (!(t.tau > 0) || !(t.kappa > 0)) return std::numeric_limits<double>::infinity();
        if (!set_cones(t.x)) return std::numeric_limits<double>::infinity();
        const double m = mu(t);
        *mu_out = m;
        if (!(m > 0)) return std::numeric_limits<double>::infinity();
        try {
            return proximity(t, m);
        } catch (const SingularError&) {
            return std::numeric_limits<double>::infinity();
        } catch (const NumericError&) {
            return std::numeric_limits<double>::infinity();
        }
    }

    // First trial step: full, or beta times the distance to tau = 0 / kappa = 0.
    double first_step(const Iterate& it, const Direction& d) const {
        double a = 1.0;
        if (d.dtau < 0) a = std::min(a, -it.tau / d.dtau);
        if (d.dkappa < 0) a = std::min(a, -it.kappa / d.dkappa);
        return a < 1.0 ? s_.step_fraction * a : 1.0;
    }

    // Backtracking search; on success the cones are left at the accepted
    // point. Returns 0 when nothing above min_step is acceptable.
    double search(Iterate& it, const Direction& d, double bound, double start) const {
        double a = start;
        while (a >= s_.min_step) {
            const Iterate t = step(it, d, a);
            double m = 0;
            const double prox = try_point(t, &m);
            if (prox <= bound) {
                it = t;
                return a;
            }
            a *= s_.backtrack;
        }
        set_cones(it.x);
        return 0.0;
    }

    const RMat& A_;
    const RVec& b_;
    const RVec& c_;
    std::vector<ConePtr>& cones_;
    const Settings& s_;
    double nu_;
};

}  // namespace

SolveResult solve(ConicProblem& prob, const Settings& s) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    prob.validate();
    SolveResult res;
    for (const ConePtr& k : prob.cones) res.peak_hessian_dim = std::max(res.peak_hessian_dim, k->dense_dim());
    std::ostream& log = s.log ? *s.log : std::cout;

    const RowReduction rr = reduce_rows(prob.A, prob.b);
    RMat A(static_cast<Eigen::Index>(rr.kept.size()), prob.A.cols());
    RVec b(static_cast<Eigen::Index>(rr.kept.size()));
    for (size_t i = 0; i < rr.kept.size(); ++i) {
        A.row(i) = prob.A.row(rr.kept[i]);
        b(i) = prob.b(rr.kept[i]);
    }
    res.rows_removed = static_cast<int>(prob.A.rows() - A.rows());
    const RVec& c = prob.c;
    auto finish = [&](Status st, std::string msg) {
        res.status = st;
        res.message = std::move(msg);
        res.solve_time_s = std::chrono::duration<double>(clock::now() - t0).count();
        return res;
    };
    if (!rr.consistent) return finish(Status::PrimalInfeasible, "equality constraints are inconsistent");

    Solver sv(A, b, c, prob.cones, s);
    Iterate it;
    it.x.resize(c.size());
    {
        Eigen::Index off = 0;
        for (const ConePtr& k : prob.cones) {
            it.x.segment(off, k->dim()) = k->init_point();
            off += k->dim();
        }
    }
    if (!sv.set_cones(it.x)) return finish(Status::NumericalFailure, "initial point is not interior");
    it.z = -sv.grad();
    it.y = RVec::Zero(b.size());
    it.tau = it.kappa = 1.0;

    if (s.verbose) log << iter_header() << "\n";
    const double nb = b.norm(), nc = c.norm();
    int small_steps = 0;
    double last_step = 0;
    for (int iter = 0;; ++iter) {
        const double m = sv.mu(it);
        const RVec xs = it.x / it.tau, ys = it.y / it.tau, zs = it.z / it.tau;
        const double pobj = c.dot(xs) + prob.offset;
        const double dobj = b.dot(ys) + prob.offset;
        const double pres = (A * xs - b).norm() / (1.0 + nb);
        const double dres = (A.transpose() * ys + zs - c).norm() / (1.0 + nc);
        const double gap = std::min(xs.dot(zs), std::abs(pobj - dobj));
        const double rel_gap = gap / std::max(1.0, std::min(std::abs(pobj), std::abs(dobj)));

        IterRecord rec;
        rec.iter = iter;
        rec.mu = m;
        rec.gap = rel_gap;
        rec.pres = pres;
        rec.dres = dres;
        rec.step = last_step;
        rec.time_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        res.trace.push_back(rec);
        if (s.verbose) log << format_iter(rec) << "\n";

        res.iterations = iter;
        res.x = xs;
        res.y = ys;
        res.z = zs;
        res.tau = it.tau;
        res.kappa = it.kappa;
        res.primal_obj = prob.sign * pobj;
        res.dual_obj = prob.sign * dobj;

        if (rel_gap <= s.gap_tol && pres <= s.feas_tol && dres <= s.feas_tol) return finish(Status::Optimal, "");
        if (it.tau <= 1e-2 * it.kappa) {
            const double by = b.dot(it.y);
            if (by > 0 && (A.transpose() * it.y + it.z).norm() <= s.infeas_tol * by * std::max(1.0, nc)) {
                res.y = it.y / by;
                res.z = it.z / by;
                return finish(Status::PrimalInfeasible, "dual ray found");
            }
            const double cx = c.dot(it.x);
            if (cx < 0 && (A * it.x).norm() <= s.infeas_tol * (-cx) * std::max(1.0, nb)) {
                res.x = it.x / (-cx);
                return finish(Status::DualInfeasible, "primal ray found");
            }
        }
        if (iter >= s.max_iter) return finish(Status::IterationLimit, "iteration limit reached");

        try {
            // Predictor.
            NewtonRhs r;
            r.ry = -(A * it.x - b * it.tau);
            r.rx = -(-A.transpose() * it.y - it.z + c * it.tau);
            r.rt = -(b.dot(it.y) - c.dot(it.x) - it.kappa);
            r.rz = -it.z;
            r.rk = -it.tau * it.kappa;
            Direction d;
            {
                NewtonSystem ns(A, b, c, prob.cones, m, it.tau, it.kappa);
                d = ns.solve(r);
            }
            const double a = sv.search(it, d, s.eta, sv.first_step(it, d));
            last_step = a;
            if (a < s.min_step) {
                if (++small_steps >= 3) return finish(Status::NumericalFailure, "step length below minimum");
            } else {
                small_steps = 0;
            }
            // Centering.
            for (int k = 0; k < s.correctors; ++k) {
                const double mc = sv.mu(it);
                NewtonRhs cr;
                cr.ry = RVec::Zero(b.size());
                cr.rx = RVec::Zero(c.size());
                cr.rt = 0;
                cr.rz = -it.z - mc * sv.grad();
                cr.rk = mc - it.tau * it.kappa;
                NewtonSystem ns(A, b, c, prob.cones, mc, it.tau, it.kappa);
                const Direction dc = ns.solve(cr);
                const double p0 = sv.proximity(it, mc);
                sv.search(it, dc, p0, sv.first_step(it, dc));
            }
        } catch (const NumericError& e) {
            return finish(Status::NumericalFailure, e.what());
        } catch (const SingularError& e) {
            return finish(Status::NumericalFailure, e.what());
        }
    }
}

}  // namespace ipm
}  // namespace qrep
