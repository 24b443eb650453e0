#include "mrpc/envelope.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "mrpc/csv.hpp"
#include "mrpc/errors.hpp"
#include "mrpc/linalg.hpp"

namespace mrpc {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_symmetric(const MatrixXd& a, double tol) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// phi(w) = log(w'Aw) + log(w'Cw) on the unit sphere, C = B^-1.
struct SphereProblem {
    const MatrixXd& a;
    const MatrixXd& c;

    double value(const VectorXd& w) const {
        const double wa = w.dot(a * w);
        const double wc = w.dot(c * w);
        if (!(wa > 0.0) || !(wc > 0.0)) return kInf;
        return std::log(wa) + std::log(wc);
    }
};

struct SolveOutcome {
    bool ok = false;
    VectorXd w;
    double value = kInf;
    std::vector<double> trace;
    std::string reason;
};

/// Iterate state with the products the line search and Hessian reuse.
struct SphereState {
    VectorXd w, aw, cw;
    double wa = 0.0, wc = 0.0;
};

/// Projected descent on the unit sphere. The search direction is the
/// Newton step of the tangent-space Hessian when that Hessian is positive
/// definite, else the Riemannian gradient; steps are Armijo backtracked.
class SphereSolver {
public:
    SphereSolver(const SphereProblem& prob, Index r)
        : prob_(prob), h_(r, r), llt_(r), grad_(r), dir_(r), ad_(r), cd_(r), hw_(r) {}

    SolveOutcome solve(VectorXd w0, const MinimizeOptions& opt) {
        SolveOutcome out;
        SphereState st;
        st.w = w0.normalized();
        st.aw = prob_.a * st.w;
        st.cw = prob_.c * st.w;
        st.wa = st.w.dot(st.aw);
        st.wc = st.w.dot(st.cw);
        if (!(st.wa > 0.0) || !(st.wc > 0.0)) {
            out.reason = "non-finite objective at initial point";
            return out;
        }
        double f = std::log(st.wa) + std::log(st.wc);
        out.trace.push_back(f);
        for (int it = 0; it < opt.max_iterations; ++it) {
            const bool newton = direction(st);
            const double gn = grad_.norm();
            if (gn < 1e-14) break;
            const double slope = grad_.dot(dir_);
            ad_.noalias() = prob_.a * dir_;
            cd_.noalias() = prob_.c * dir_;
            const double w_ad = st.w.dot(ad_), d_ad = dir_.dot(ad_);
            const double w_cd = st.w.dot(cd_), d_cd = dir_.dot(cd_);
            const double w_d = st.w.dot(dir_), d_d = dir_.squaredNorm();
            double t = newton ? 1.0 : std::min(1.0, 0.5 / gn);
            bool accepted = false;
            double fn = kInf, qa = 0.0, qc = 0.0, nrm2 = 1.0;
            for (int ls = 0; ls < 80; ++ls) {
                nrm2 = 1.0 - 2.0 * t * w_d + t * t * d_d;
                qa = (st.wa - 2.0 * t * w_ad + t * t * d_ad) / nrm2;
                qc = (st.wc - 2.0 * t * w_cd + t * t * d_cd) / nrm2;
                fn = qa > 0.0 && qc > 0.0 ? std::log(qa) + std::log(qc) : kInf;
                if (fn <= f - opt.armijo * t * slope) {
                    accepted = true;
                    break;
                }
                t *= opt.shrink;
            }
            if (!accepted) {
                if (gn < 1e-6) break;  // stationary up to rounding
                out.reason = "line search failed with gradient norm " + std::to_string(gn);
                return out;
            }
            const double inv = 1.0 / std::sqrt(nrm2);
            st.w = (st.w - t * dir_) * inv;
            st.aw = (st.aw - t * ad_) * inv;
            st.cw = (st.cw - t * cd_) * inv;
            // Refresh from the products every few steps to stop drift.
            if (it % 16 == 15) {
                st.w.normalize();
                st.aw.noalias() = prob_.a * st.w;
                st.cw.noalias() = prob_.c * st.w;
            }
            st.wa = st.w.dot(st.aw);
            st.wc = st.w.dot(st.cw);
            fn = std::log(st.wa) + std::log(st.wc);
            const double delta = f - fn;
            f = fn;
            out.trace.push_back(f);
            if (delta < opt.tolerance) break;
        }
        out.ok = true;
        out.w = std::move(st.w);
        out.value = f;
        return out;
    }

private:
    /// Fills grad_ and dir_; true when dir_ is a Newton step.
    bool direction(const SphereState& st) {
        const Index r = st.w.size();
        const VectorXd eg = (2.0 / st.wa) * st.aw + (2.0 / st.wc) * st.cw;
        const double weg = st.w.dot(eg);
        grad_ = eg - weg * st.w;
        dir_ = grad_;
        if (r < 2) return false;
        h_.noalias() = (2.0 / st.wa) * prob_.a + (2.0 / st.wc) * prob_.c;
        h_.noalias() -= (4.0 / (st.wa * st.wa)) * st.aw * st.aw.transpose();
        h_.noalias() -= (4.0 / (st.wc * st.wc)) * st.cw * st.cw.transpose();
        h_.diagonal().array() -= weg;
        // (I - ww') H (I - ww') + ww'
        hw_.noalias() = h_ * st.w;
        const double whw = st.w.dot(hw_);
        h_.noalias() -= st.w * hw_.transpose();
        h_.noalias() -= hw_ * st.w.transpose();
        h_.noalias() += (whw + 1.0) * st.w * st.w.transpose();
        llt_.compute(h_);
        if (llt_.info() != Eigen::Success) return false;
        VectorXd d = llt_.solve(grad_);
        d -= st.w.dot(d) * st.w;
        const double slope = grad_.dot(d);
        if (!d.allFinite() || !(slope > 1e-12 * grad_.norm() * d.norm())) return false;
        dir_ = std::move(d);
        return true;
    }

    const SphereProblem& prob_;
    MatrixXd h_;
    Eigen::LLT<MatrixXd> llt_;
    VectorXd grad_, dir_, ad_, cd_, hw_;
};

}  // namespace

void EnvelopeObjective::validate() const {
    if (m_mat.rows() != m_mat.cols() || n_mat.rows() != n_mat.cols() ||
        m_mat.rows() != n_mat.rows()) {
        throw ParameterError("envelope objective matrices must be square and of equal size");
    }
    if (dim < 0 || dim > m_mat.rows()) {
        throw ParameterError("envelope dimension " + std::to_string(dim) + " outside 0.." +
                             std::to_string(m_mat.rows()));
    }
    if (m_mat.size() > 0 && (!is_symmetric(m_mat, 1e-10) || !is_symmetric(n_mat, 1e-10))) {
        throw ParameterError("envelope objective matrices must be symmetric");
    }
    if (n_mat.size() > 0) {
        Eigen::LLT<MatrixXd> llt(n_mat);
        if (llt.info() != Eigen::Success) {
            throw ParameterError("marginal envelope matrix must be positive definite");
        }
    }
}

double objective_value(const EnvelopeObjective& obj, const MatrixXd& g) {
    if (g.rows() != obj.ambient()) return kInf;
    if (g.cols() == 0) return 0.0;
    const double first = linalg::log_det_spd(linalg::symmetrize(g.transpose() * obj.m_mat * g));
    if (!std::isfinite(first)) return kInf;
    Eigen::LLT<MatrixXd> llt(obj.n_mat);
    if (llt.info() != Eigen::Success) return kInf;
    const MatrixXd ninv_g = llt.solve(g);
    const double second = linalg::log_det_spd(linalg::symmetrize(g.transpose() * ninv_g));
    return first + second;
}

EnvelopeSolution minimize_envelope(const EnvelopeObjective& obj, const MinimizeOptions& options) {
    obj.validate();
    const Index d = obj.ambient();
    const int u = obj.dim;
    EnvelopeSolution sol;
    sol.basis = MatrixXd(d, u);
    if (u == 0) return sol;

    MatrixXd complement = MatrixXd::Identity(d, d);
    MatrixXd a = obj.m_mat;
    MatrixXd b = obj.n_mat;
    for (int k = 0; k < u; ++k) {
        const Index r = d - k;
        VectorXd w_best;
        double f_best = kInf;
        int restart_best = -1;
        std::vector<double> trace_best;
        if (r == 1) {
            w_best = VectorXd::Ones(1);
            f_best = std::log(a(0, 0)) + std::log(1.0 / b(0, 0));
            restart_best = 0;
            trace_best.push_back(f_best);
        } else {
            const MatrixXd c = linalg::spd_inverse(b);
            const SphereProblem prob{a, c};
            SphereSolver solver(prob, r);
            Eigen::SelfAdjointEigenSolver<MatrixXd> ea(a);
            Eigen::SelfAdjointEigenSolver<MatrixXd> eb(b);
            std::string reasons;
            for (Index s = 0; s < 2 * r; ++s) {
                const VectorXd start = s < r ? VectorXd(ea.eigenvectors().col(s))
                                             : VectorXd(eb.eigenvectors().col(s - r));
                auto res = solver.solve(start, options);
                if (!res.ok) {
                    if (reasons.size() < 400) reasons += " [restart " + std::to_string(s) + ": " + res.reason + "]";
                    continue;
                }
                if (restart_best < 0 ||
                    res.value < f_best - 1e-12 * std::max(1.0, std::abs(f_best))) {
                    f_best = res.value;
                    w_best = std::move(res.w);
                    restart_best = static_cast<int>(s);
                    trace_best = std::move(res.trace);
                }
            }
            if (restart_best < 0) {
                throw ConvergenceError("envelope direction " + std::to_string(k + 1) + " of " +
                                       std::to_string(u) + ": all " + std::to_string(2 * r) +
                                       " restarts failed" + reasons);
            }
        }
        sol.basis.col(k) = complement * w_best;
        sol.direction_objectives.push_back(f_best);
        sol.winning_restart.push_back(restart_best);
        for (std::size_t i = 0; i < trace_best.size(); ++i) {
            sol.trace.push_back({k, static_cast<int>(i), trace_best[i]});
        }
        if (k + 1 < u) {
            // Householder reflector whose first column is w; the remaining
            // columns span the complement of w inside the current complement.
            const MatrixXd w_mat = w_best;
            Eigen::HouseholderQR<MatrixXd> qr(w_mat);
            const MatrixXd h = qr.householderQ();
            const MatrixXd rest = h.rightCols(r - 1);
            complement = complement * rest;
            a = linalg::symmetrize(rest.transpose() * a * rest);
            b = linalg::symmetrize(rest.transpose() * b * rest);
        }
    }
    return sol;
}

MatrixXd minimize(const EnvelopeObjective& obj, const MinimizeOptions& options) {
    return minimize_envelope(obj, options).basis;
}

void write_trace_csv(std::ostream& os, const std::vector<OptimizerTracePoint>& trace) {
    os << "direction,iteration,objective\n";
    for (const auto& t : trace) {
        os << t.direction + 1 << ',' << t.iteration << ',' << csv::format_double(t.objective) << '\n';
    }
}

}  // namespace mrpc
