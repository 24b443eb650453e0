#include "mrpc/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>

#include "mrpc/csv.hpp"
#include "mrpc/envelope.hpp"
#include "mrpc/errors.hpp"
#include "mrpc/linalg.hpp"

namespace mrpc {

using Eigen::Index;

std::string_view method_name(Method m) {
    switch (m) {
        case Method::PCR: return "PCR";
        case Method::PLS1: return "PLS1";
        case Method::PLS2: return "PLS2";
        case Method::Xenv: return "Xenv";
        case Method::Senv: return "Senv";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string lower;
    for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (Method m : all_methods()) {
        std::string cand;
        for (char c : method_name(m)) cand += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (cand == lower) return m;
    }
    throw ParameterError("unknown method '" + std::string(name) + "' (expected PCR, PLS1, PLS2, Xenv, Senv)");
}

const std::vector<Method>& all_methods() {
    static const std::vector<Method> methods{Method::PCR, Method::PLS1, Method::PLS2, Method::Xenv,
                                             Method::Senv};
    return methods;
}

int method_index(Method m) {
    return static_cast<int>(m);
}

MatrixXd FittedModel::predict(const MatrixXd& x) const {
    MatrixXd out = x * beta_hat;
    out.rowwise() += intercept.transpose();
    return out;
}

namespace {

struct CenteredData {
    MatrixXd xc;
    MatrixXd yc;
    RowVectorXd x_mean;
    RowVectorXd y_mean;
    Index n() const { return xc.rows(); }
    Index p() const { return xc.cols(); }
    Index m() const { return yc.cols(); }
};

CenteredData center_data(const MatrixXd& x, const MatrixXd& y) {
    if (x.rows() != y.rows()) {
        throw ParameterError("x and y have different row counts (" + std::to_string(x.rows()) +
                             " vs " + std::to_string(y.rows()) + ")");
    }
    if (x.rows() < 2) throw ParameterError("at least two observations are required");
    if (!x.allFinite() || !y.allFinite()) throw ParameterError("x and y must be finite");
    CenteredData cd;
    cd.x_mean = linalg::column_means(x);
    cd.y_mean = linalg::column_means(y);
    cd.xc = linalg::center(x, cd.x_mean);
    cd.yc = linalg::center(y, cd.y_mean);
    return cd;
}

FittedModel make_model(Method method, int ncomp, MatrixXd beta, const CenteredData& cd) {
    FittedModel fm;
    fm.method = method;
    fm.ncomp = ncomp;
    fm.intercept = (cd.y_mean - cd.x_mean * beta).transpose();
    fm.beta_hat = std::move(beta);
    return fm;
}

FittedModel null_model(Method method, const CenteredData& cd) {
    return make_model(method, 0, MatrixXd::Zero(cd.p(), cd.m()), cd);
}

void check_ncomp(int ncomp) {
    if (ncomp < 0) throw ParameterError("ncomp must be >= 0");
}

Index centered_rank(const MatrixXd& xc) {
    Eigen::BDCSVD<MatrixXd> svd(xc);
    return linalg::numerical_rank(svd.singularValues(), xc.rows(), xc.cols());
}

[[noreturn]] void throw_rank(int ncomp, Index rank) {
    throw ParameterError("ncomp " + std::to_string(ncomp) + " exceeds the rank " +
                         std::to_string(rank) + " of the centered predictors");
}

// --- PCR -----------------------------------------------------------------

struct PcrDecomposition {
    MatrixXd v;
    VectorXd s;
    MatrixXd uty;  // U' yc, rank x m
    Index rank = 0;

    explicit PcrDecomposition(const CenteredData& cd) {
        Eigen::BDCSVD<MatrixXd> svd(cd.xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
        rank = linalg::numerical_rank(svd.singularValues(), cd.n(), cd.p());
        v = svd.matrixV().leftCols(rank);
        s = svd.singularValues().head(rank);
        uty = svd.matrixU().leftCols(rank).transpose() * cd.yc;
    }

    MatrixXd coefficients(Index a) const {
        return v.leftCols(a) * (s.head(a).cwiseInverse().asDiagonal() * uty.topRows(a));
    }
};

// --- SIMPLS --------------------------------------------------------------

void check_signal(const MatrixXd& xc, const MatrixXd& yc) {
    const MatrixXd s = xc.transpose() * yc;
    const double scale = xc.norm() * yc.norm();
    if (!(s.norm() > 1e-13 * scale)) {
        throw NumericalError("no predictive signal: x'y is zero");
    }
}

}  // namespace

SimplsResult simpls(const MatrixXd& xc, const MatrixXd& yc, int ncomp) {
    check_ncomp(ncomp);
    const Index p = xc.cols();
    const Index m = yc.cols();
    SimplsResult res;
    res.weights = MatrixXd(p, ncomp);
    res.y_loadings = MatrixXd(m, ncomp);
    if (ncomp == 0) return res;
    check_signal(xc, yc);

    MatrixXd s = xc.transpose() * yc;
    const double s0 = s.norm();
    MatrixXd v_basis(p, ncomp);
    int a = 0;
    for (; a < ncomp; ++a) {
        if (s.norm() <= 1e-12 * s0) break;
        VectorXd r;
        if (m == 1) {
            r = s.col(0);
        } else {
            Eigen::SelfAdjointEigenSolver<MatrixXd> es(s.transpose() * s);
            r = s * es.eigenvectors().col(m - 1);
        }
        VectorXd t = xc * r;
        const double tn = t.norm();
        if (!(tn > 0.0)) break;
        t /= tn;
        r /= tn;
        const VectorXd pl = xc.transpose() * t;
        VectorXd v = pl;
        for (int pass = 0; pass < 2 && a > 0; ++pass) {
            v -= v_basis.leftCols(a) * (v_basis.leftCols(a).transpose() * v);
        }
        const double vn = v.norm();
        if (!(vn > 0.0)) break;
        v /= vn;
        s -= v * (v.transpose() * s);
        if (a > 0) s -= v_basis.leftCols(a) * (v_basis.leftCols(a).transpose() * s);
        v_basis.col(a) = v;
        res.weights.col(a) = r;
        res.y_loadings.col(a) = yc.transpose() * t;
    }
    res.ncomp = a;
    res.weights.conservativeResize(p, a);
    res.y_loadings.conservativeResize(m, a);
    return res;
}

MatrixXd SimplsResult::coefficients(int a) const {
    const int use = std::min(a, ncomp);
    return weights.leftCols(use) * y_loadings.leftCols(use).transpose();
}

namespace {

// --- envelopes -----------------------------------------------------------

struct Moments {
    MatrixXd sx;
    MatrixXd sy;
    MatrixXd sxy;
};

Moments moments_of(const MatrixXd& xd, const MatrixXd& yc) {
    Moments mo;
    mo.sx = linalg::symmetrize(linalg::cross_covariance(xd, xd));
    mo.sy = linalg::symmetrize(linalg::cross_covariance(yc, yc));
    mo.sxy = linalg::cross_covariance(xd, yc);
    return mo;
}

/// Predictor space the envelope methods work in: raw centered x, or
/// pre-reduction scores when p >= n.
struct PredictorSpace {
    MatrixXd xd;
    std::optional<PreReduction> pre;
    Index dim() const { return xd.cols(); }
};

PredictorSpace predictor_space(const MatrixXd& x, const CenteredData& cd, double threshold) {
    PredictorSpace ps;
    if (cd.p() >= cd.n()) {
        auto red = pca_prereduce(x, threshold);
        ps.xd = std::move(red.scores);
        ps.pre = std::move(red.reduction);
    } else {
        ps.xd = cd.xc;
    }
    return ps;
}

/// S_a - S_ab S_b^-1 S_ba, regularized for use inside the objective.
MatrixXd conditional(const MatrixXd& s_aa, const MatrixXd& s_ab, const MatrixXd& s_bb) {
    return linalg::regularize(linalg::symmetrize(s_aa - s_ab * linalg::spd_solve(s_bb, s_ab.transpose())));
}

MatrixXd envelope_coefficients(const MatrixXd& g, const Moments& mo) {
    const MatrixXd gsg = linalg::symmetrize(g.transpose() * mo.sx * g);
    return g * linalg::spd_solve(gsg, g.transpose() * mo.sxy);
}

FittedModel finish_envelope(Method method, int ncomp, const MatrixXd& alpha, const PredictorSpace& ps,
                            const CenteredData& cd) {
    MatrixXd beta = ps.pre ? backtransform(*ps.pre, alpha) : alpha;
    FittedModel fm = make_model(method, ncomp, std::move(beta), cd);
    if (ps.pre) {
        fm.prereduced = true;
        fm.reduced_k = ps.pre->k;
    }
    return fm;
}

void check_envelope_dim(int ncomp, const PredictorSpace& ps) {
    if (ncomp > ps.dim()) {
        throw ParameterError("ncomp " + std::to_string(ncomp) + " exceeds the " +
                             (ps.pre ? "pre-reduced" : "predictor") + " dimension " +
                             std::to_string(ps.dim()));
    }
}

EnvelopeSolution xenv_directions(const Moments& mo, int u) {
    EnvelopeObjective obj{conditional(mo.sx, mo.sxy, mo.sy), linalg::regularize(mo.sx), u};
    return minimize_envelope(obj);
}

constexpr int kSenvMaxOuter = 50;
constexpr double kSenvTolerance = 1e-6;

MatrixXd senv_initial_f(const Moments& mo, int r) {
    const Index m = mo.sy.rows();
    if (r == m) return MatrixXd::Identity(m, m);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(mo.sy);
    return es.eigenvectors().rowwise().reverse().leftCols(r);
}

/// Predictor step with F fixed: envelope of S_{x|F'y} against S_x.
MatrixXd senv_predictor_step(const Moments& mo, const MatrixXd& f, int u) {
    const MatrixXd syf = linalg::symmetrize(f.transpose() * mo.sy * f);
    return minimize(EnvelopeObjective{conditional(mo.sx, mo.sxy * f, syf), linalg::regularize(mo.sx), u});
}

/// log|cov(G'x, F'y)| + log|G' S_x^-1 G| + log|F' S_y^-1 F|; both
/// alternating steps minimize this function in their own block.
double senv_joint_objective(const Moments& mo, const MatrixXd& g, const MatrixXd& f) {
    const Index u = g.cols();
    const Index r = f.cols();
    MatrixXd c(u + r, u + r);
    c.topLeftCorner(u, u) = g.transpose() * mo.sx * g;
    c.topRightCorner(u, r) = g.transpose() * mo.sxy * f;
    c.bottomLeftCorner(r, u) = c.topRightCorner(u, r).transpose();
    c.bottomRightCorner(r, r) = f.transpose() * mo.sy * f;
    const MatrixXd sxi_g = linalg::spd_solve(linalg::regularize(mo.sx), g);
    const MatrixXd syi_f = linalg::spd_solve(linalg::regularize(mo.sy), f);
    return linalg::log_det_spd(linalg::symmetrize(c)) +
           linalg::log_det_spd(linalg::symmetrize(g.transpose() * sxi_g)) +
           linalg::log_det_spd(linalg::symmetrize(f.transpose() * syi_f));
}

/// Orthonormal basis of span(cur + t (cur - prev O)), O aligning prev to cur.
MatrixXd extrapolate_basis(const MatrixXd& prev, const MatrixXd& cur, double t) {
    Eigen::JacobiSVD<MatrixXd> svd(prev.transpose() * cur, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const MatrixXd aligned = prev * (svd.matrixU() * svd.matrixV().transpose());
    const MatrixXd moved = cur + t * (cur - aligned);
    Eigen::HouseholderQR<MatrixXd> qr(moved);
    return qr.householderQ() * MatrixXd::Identity(cur.rows(), cur.cols());
}

/// Alternates predictor and response steps; a step that would raise the
/// joint objective is rejected, which ends the iteration. `g_start` is the
/// predictor step for the initial F when already known.
MatrixXd senv_alpha(const Moments& mo, int u, int r, const MatrixXd* g_start = nullptr) {
    const Index m = mo.sy.rows();
    MatrixXd f = senv_initial_f(mo, r);
    MatrixXd g = g_start ? *g_start : senv_predictor_step(mo, f, u);
    if (r == m) {
        return envelope_coefficients(g, mo);  // the response envelope is the whole space
    }
    const MatrixXd ny = linalg::regularize(mo.sy);
    double current = senv_joint_objective(mo, g, f);
    double delta = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int outer = 0; outer < kSenvMaxOuter; ++outer) {
        const double start = current;
        const MatrixXd g_prev = g;
        const MatrixXd f_prev = f;
        const MatrixXd sxg = linalg::symmetrize(g.transpose() * mo.sx * g);
        const MatrixXd f_new = minimize(EnvelopeObjective{conditional(mo.sy, mo.sxy.transpose() * g, sxg), ny, r});
        const double after_f = senv_joint_objective(mo, g, f_new);
        if (after_f < current) {
            f = f_new;
            current = after_f;
        }
        const MatrixXd g_new = senv_predictor_step(mo, f, u);
        const double after_g = senv_joint_objective(mo, g_new, f);
        if (after_g < current) {
            g = g_new;
            current = after_g;
        }
        // Extrapolate along the sweep's own move while that keeps helping.
        if (current < start) {
            const MatrixXd g_base = g;
            const MatrixXd f_base = f;
            for (double t = 1.0; t <= 64.0; t *= 2.0) {
                const MatrixXd g_ext = extrapolate_basis(g_prev, g_base, t);
                const MatrixXd f_ext = extrapolate_basis(f_prev, f_base, t);
                const double value = senv_joint_objective(mo, g_ext, f_ext);
                if (!(value < current)) break;
                g = g_ext;
                f = f_ext;
                current = value;
            }
        }
        delta = start - current;
        if (delta < kSenvTolerance) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("simultaneous envelope did not converge in " + std::to_string(kSenvMaxOuter) +
                               " outer iterations (final objective change " + std::to_string(delta) + ")");
    }
    return envelope_coefficients(g, mo) * f * f.transpose();
}

}  // namespace

FittedModel fit_pcr(const MatrixXd& x, const MatrixXd& y, int ncomp) {
    check_ncomp(ncomp);
    const auto cd = center_data(x, y);
    if (ncomp == 0) return null_model(Method::PCR, cd);
    const PcrDecomposition dec(cd);
    if (ncomp > dec.rank) throw_rank(ncomp, dec.rank);
    return make_model(Method::PCR, ncomp, dec.coefficients(ncomp), cd);
}

FittedModel fit_pls2(const MatrixXd& x, const MatrixXd& y, int ncomp) {
    check_ncomp(ncomp);
    const auto cd = center_data(x, y);
    if (ncomp == 0) return null_model(Method::PLS2, cd);
    const Index rank = centered_rank(cd.xc);
    if (ncomp > rank) throw_rank(ncomp, rank);
    const auto res = simpls(cd.xc, cd.yc, ncomp);
    return make_model(Method::PLS2, ncomp, res.coefficients(ncomp), cd);
}

FittedModel fit_pls1(const MatrixXd& x, const MatrixXd& y, int ncomp) {
    check_ncomp(ncomp);
    const auto cd = center_data(x, y);
    if (ncomp == 0) return null_model(Method::PLS1, cd);
    const Index rank = centered_rank(cd.xc);
    if (ncomp > rank) throw_rank(ncomp, rank);
    MatrixXd beta(cd.p(), cd.m());
    for (Index j = 0; j < cd.m(); ++j) {
        beta.col(j) = simpls(cd.xc, cd.yc.col(j), ncomp).coefficients(ncomp);
    }
    return make_model(Method::PLS1, ncomp, std::move(beta), cd);
}

PreReducedData pca_prereduce(const MatrixXd& x, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw ParameterError("pre-reduction threshold must lie in (0, 1]");
    }
    if (x.rows() < 2) throw ParameterError("pre-reduction needs at least two observations");
    PreReducedData out;
    out.reduction.x_mean = linalg::column_means(x);
    const MatrixXd xc = linalg::center(x, out.reduction.x_mean);
    Eigen::BDCSVD<MatrixXd> svd(xc, Eigen::ComputeThinV);
    const VectorXd ev = svd.singularValues().array().square();
    const double total = ev.sum();
    const Index rank = linalg::numerical_rank(svd.singularValues(), xc.rows(), xc.cols());
    if (!(total > 0.0) || rank == 0) {
        throw NumericalError("predictors have zero variance; nothing to reduce");
    }
    Index k = 0;
    double cum = 0.0;
    while (k < rank) {
        cum += ev(k);
        ++k;
        if (cum / total >= threshold - 1e-12) break;
    }
    out.reduction.k = static_cast<int>(k);
    out.reduction.explained = cum / total;
    out.reduction.e_k = svd.matrixV().leftCols(k);
    out.scores = xc * out.reduction.e_k;
    return out;
}

MatrixXd backtransform(const PreReduction& pre, const MatrixXd& alpha_hat) {
    if (alpha_hat.rows() != pre.e_k.cols()) {
        throw ParameterError("backtransform: alpha has " + std::to_string(alpha_hat.rows()) +
                             " rows but the reduction keeps " + std::to_string(pre.e_k.cols()));
    }
    return pre.e_k * alpha_hat;
}

FittedModel fit_xenv(const MatrixXd& x, const MatrixXd& y, int ncomp, double threshold) {
    check_ncomp(ncomp);
    const auto cd = center_data(x, y);
    if (ncomp == 0) return null_model(Method::Xenv, cd);
    const auto ps = predictor_space(x, cd, threshold);
    check_envelope_dim(ncomp, ps);
    const Moments mo = moments_of(ps.xd, cd.yc);
    const MatrixXd g = xenv_directions(mo, ncomp).basis;
    return finish_envelope(Method::Xenv, ncomp, envelope_coefficients(g, mo), ps, cd);
}

FittedModel fit_senv(const MatrixXd& x, const MatrixXd& y, int ncomp, int resp_dim, double threshold) {
    check_ncomp(ncomp);
    if (resp_dim < 1 || resp_dim > y.cols()) {
        throw ParameterError("response envelope dimension " + std::to_string(resp_dim) +
                             " outside 1.." + std::to_string(y.cols()));
    }
    const auto cd = center_data(x, y);
    if (ncomp == 0) return null_model(Method::Senv, cd);
    const auto ps = predictor_space(x, cd, threshold);
    check_envelope_dim(ncomp, ps);
    const Moments mo = moments_of(ps.xd, cd.yc);
    return finish_envelope(Method::Senv, ncomp, senv_alpha(mo, ncomp, resp_dim), ps, cd);
}

FittedModel fit(Method method, const MatrixXd& x, const MatrixXd& y, int ncomp,
                const EstimatorOptions& options) {
    switch (method) {
        case Method::PCR: return fit_pcr(x, y, ncomp);
        case Method::PLS1: return fit_pls1(x, y, ncomp);
        case Method::PLS2: return fit_pls2(x, y, ncomp);
        case Method::Xenv: return fit_xenv(x, y, ncomp, options.prereduce_threshold);
        case Method::Senv:
            return fit_senv(x, y, ncomp, options.senv_resp_dim, options.prereduce_threshold);
    }
    throw ParameterError("unknown method");
}

int max_components(Method method, const MatrixXd& x, const MatrixXd& y, const EstimatorOptions& options) {
    const auto cd = center_data(x, y);
    if (method == Method::Xenv || method == Method::Senv) {
        return static_cast<int>(predictor_space(x, cd, options.prereduce_threshold).dim());
    }
    return static_cast<int>(centered_rank(cd.xc));
}

std::vector<PathEntry> fit_path(Method method, const MatrixXd& x, const MatrixXd& y, int lmax,
                                const EstimatorOptions& options) {
    if (lmax < 0) throw ParameterError("lmax must be >= 0");
    const auto cd = center_data(x, y);
    std::vector<PathEntry> path(static_cast<std::size_t>(lmax) + 1);
    path[0].model = null_model(method, cd);
    if (lmax == 0) return path;

    auto fill_all_errors = [&](const std::string& what) {
        for (int l = 1; l <= lmax; ++l) path[static_cast<std::size_t>(l)].error = what;
    };
    // Copies the largest feasible fit into counts above `limit`.
    auto saturate = [&](int limit) {
        for (int l = limit + 1; l <= lmax; ++l) {
            auto& src = path[static_cast<std::size_t>(limit)];
            auto& dst = path[static_cast<std::size_t>(l)];
            dst = src;
            if (dst.model) dst.model->saturated = true;
        }
    };

    try {
        switch (method) {
            case Method::PCR: {
                const PcrDecomposition dec(cd);
                const int top = std::min<int>(lmax, static_cast<int>(dec.rank));
                for (int l = 1; l <= top; ++l) {
                    path[static_cast<std::size_t>(l)].model = make_model(method, l, dec.coefficients(l), cd);
                }
                saturate(top);
                break;
            }
            case Method::PLS1:
            case Method::PLS2: {
                const int top = std::min<int>(lmax, static_cast<int>(centered_rank(cd.xc)));
                std::vector<SimplsResult> fits;
                if (method == Method::PLS2) {
                    fits.push_back(simpls(cd.xc, cd.yc, top));
                } else {
                    for (Index j = 0; j < cd.m(); ++j) fits.push_back(simpls(cd.xc, cd.yc.col(j), top));
                }
                for (int l = 1; l <= top; ++l) {
                    MatrixXd beta(cd.p(), cd.m());
                    if (method == Method::PLS2) {
                        beta = fits[0].coefficients(l);
                    } else {
                        for (Index j = 0; j < cd.m(); ++j) beta.col(j) = fits[static_cast<std::size_t>(j)].coefficients(l);
                    }
                    path[static_cast<std::size_t>(l)].model = make_model(method, l, std::move(beta), cd);
                }
                saturate(top);
                break;
            }
            case Method::Xenv: {
                const auto ps = predictor_space(x, cd, options.prereduce_threshold);
                const Moments mo = moments_of(ps.xd, cd.yc);
                const int top = std::min<int>(lmax, static_cast<int>(ps.dim()));
                const MatrixXd g = xenv_directions(mo, top).basis;
                for (int l = 1; l <= top; ++l) {
                    path[static_cast<std::size_t>(l)].model =
                        finish_envelope(method, l, envelope_coefficients(g.leftCols(l), mo), ps, cd);
                }
                saturate(top);
                break;
            }
            case Method::Senv: {
                const int r = options.senv_resp_dim;
                if (r < 1 || r > cd.m()) {
                    throw ParameterError("response envelope dimension " + std::to_string(r) +
                                         " outside 1.." + std::to_string(cd.m()));
                }
                const auto ps = predictor_space(x, cd, options.prereduce_threshold);
                const Moments mo = moments_of(ps.xd, cd.yc);
                const int top = std::min<int>(lmax, static_cast<int>(ps.dim()));
                // First predictor steps are nested in l, so solve once at the top.
                const MatrixXd g_first = top > 0 ? senv_predictor_step(mo, senv_initial_f(mo, r), top) : MatrixXd();
                for (int l = 1; l <= top; ++l) {
                    try {
                        const MatrixXd g0 = g_first.leftCols(l);
                        path[static_cast<std::size_t>(l)].model =
                            finish_envelope(method, l, senv_alpha(mo, l, r, &g0), ps, cd);
                    } catch (const std::exception& e) {
                        path[static_cast<std::size_t>(l)].error = e.what();
                    }
                }
                saturate(top);
                break;
            }
        }
    } catch (const std::exception& e) {
        fill_all_errors(e.what());
    }
    return path;
}

void write_fitted_model_csv(std::ostream& os, const FittedModel& model) {
    os << "# method=" << method_name(model.method) << ",ncomp=" << model.ncomp;
    if (model.prereduced) os << ",prereduced_k=" << model.reduced_k;
    if (model.saturated) os << ",saturated=1";
    os << '\n' << "term";
    for (Index j = 0; j < model.beta_hat.cols(); ++j) os << ",y" << j + 1;
    os << "\nintercept";
    for (Index j = 0; j < model.intercept.size(); ++j) os << ',' << csv::format_double(model.intercept(j));
    os << '\n';
    for (Index i = 0; i < model.beta_hat.rows(); ++i) {
        os << 'x' << i + 1;
        for (Index j = 0; j < model.beta_hat.cols(); ++j) os << ',' << csv::format_double(model.beta_hat(i, j));
        os << '\n';
    }
}

}  // namespace mrpc
