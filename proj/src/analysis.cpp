#include "mrpc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mrpc/errors.hpp"
#include "mrpc/linalg.hpp"

namespace mrpc {

using Eigen::Index;

int FactorTable::factor_position(const std::string& name) const {
    for (std::size_t i = 0; i < factor_names.size(); ++i) {
        if (factor_names[i] == name) return static_cast<int>(i);
    }
    throw ParameterError("unknown factor '" + name + "'");
}

void FactorTable::add_factor(const std::string& name, const std::vector<std::string>& values,
                             const std::vector<std::string>& order) {
    std::vector<std::string> lv = order;
    std::vector<int> codes_out;
    codes_out.reserve(values.size());
    for (const auto& v : values) {
        auto it = std::find(lv.begin(), lv.end(), v);
        if (it == lv.end()) {
            if (!order.empty()) throw ParameterError("factor '" + name + "': unexpected level '" + v + "'");
            lv.push_back(v);
            it = lv.end() - 1;
        }
        codes_out.push_back(static_cast<int>(it - lv.begin()));
    }
    factor_names.push_back(name);
    levels.push_back(std::move(lv));
    codes.push_back(std::move(codes_out));
}

PcaResult pca_scores(const MatrixXd& data) {
    const Index n = data.rows();
    const Index m = data.cols();
    if (n < 2 || m < 1) throw ParameterError("PCA needs at least two rows and one column");
    if (!data.allFinite()) throw ParameterError("PCA input must be finite");
    PcaResult res;
    res.mean = data.colwise().mean();
    const MatrixXd xc = data.rowwise() - res.mean;
    const MatrixXd cov = linalg::symmetrize(xc.transpose() * xc / static_cast<double>(n - 1));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov);
    const VectorXd ev = es.eigenvalues().reverse();
    const MatrixXd vecs = es.eigenvectors().rowwise().reverse();
    const double top = std::max(ev(0), 0.0);
    int rank = 0;
    for (Index i = 0; i < m; ++i) {
        if (ev(i) > 1e-12 * top && ev(i) > 0.0) ++rank;
    }
    if (rank < m) {
        res.warnings.push_back("input has rank " + std::to_string(rank) + " < " + std::to_string(m) +
                               "; dropped " + std::to_string(m - rank) + " zero-variance components");
    }
    res.rank = rank;
    res.loadings = vecs.leftCols(rank);
    for (int k = 0; k < rank; ++k) {
        Index arg = 0;
        res.loadings.col(k).cwiseAbs().maxCoeff(&arg);
        if (res.loadings(arg, k) < 0.0) res.loadings.col(k) = -res.loadings.col(k);
    }
    res.explained_variance = ev.head(rank);
    const double total = ev.head(rank).sum();
    res.explained_fraction = total > 0.0 ? VectorXd(ev.head(rank) / total) : VectorXd(ev.head(rank));
    res.scores = xc * res.loadings;
    return res;
}

double pillai(const MatrixXd& h, const MatrixXd& e) {
    if (h.rows() != h.cols() || e.rows() != e.cols() || h.rows() != e.rows()) {
        throw ParameterError("pillai: H and E must be square and of equal size");
    }
    const MatrixXd eh = e + h;
    Eigen::FullPivLU<MatrixXd> lu(eh);
    if (!lu.isInvertible()) throw NumericalError("pillai: E + H is singular");
    return lu.solve(h).trace();
}

double pillai_from_eigenvalues(const MatrixXd& h, const MatrixXd& e) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> ges(linalg::symmetrize(h), linalg::symmetrize(e));
    if (ges.info() != Eigen::Success) throw NumericalError("pillai: E is not positive definite");
    double out = 0.0;
    for (Index i = 0; i < ges.eigenvalues().size(); ++i) {
        const double v = ges.eigenvalues()(i);
        out += v / (1.0 + v);
    }
    return out;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-12;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 10000; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                             b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_upper_tail(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    if (!(f > 0.0)) return 1.0;
    if (std::isinf(f)) return 0.0;
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * f));
}

PillaiF pillai_f_approx(double v, int df_h, int m, int df_e) {
    PillaiF out;
    const double s = std::min(df_h, m);
    const double mm = (std::abs(df_h - m) - 1.0) / 2.0;
    const double nn = (df_e - m - 1.0) / 2.0;
    out.df1 = s * (2.0 * mm + s + 1.0);
    out.df2 = s * (2.0 * nn + s + 1.0);
    if (s <= 0.0) {
        out.f = std::numeric_limits<double>::quiet_NaN();
        out.p_value = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double ratio = v / s;
    out.f = ratio >= 1.0 ? std::numeric_limits<double>::infinity()
                         : ((2.0 * nn + s + 1.0) / (2.0 * mm + s + 1.0)) * ratio / (1.0 - ratio);
    out.p_value = f_upper_tail(out.f, out.df1, out.df2);
    return out;
}

namespace {

/// Sum-to-zero contrast columns of one factor: level j < L-1 -> e_j,
/// last level -> -1 in every column.
MatrixXd contrasts(const std::vector<int>& codes, int n_levels) {
    const Index n = static_cast<Index>(codes.size());
    MatrixXd out = MatrixXd::Zero(n, n_levels - 1);
    for (Index i = 0; i < n; ++i) {
        const int c = codes[static_cast<std::size_t>(i)];
        if (c == n_levels - 1) {
            out.row(i).setConstant(-1.0);
        } else {
            out(i, c) = 1.0;
        }
    }
    return out;
}

MatrixXd interaction_columns(const std::vector<MatrixXd>& blocks) {
    MatrixXd cur = blocks.front();
    for (std::size_t b = 1; b < blocks.size(); ++b) {
        const MatrixXd& nxt = blocks[b];
        MatrixXd prod(cur.rows(), cur.cols() * nxt.cols());
        for (Index i = 0; i < cur.cols(); ++i) {
            for (Index j = 0; j < nxt.cols(); ++j) {
                prod.col(i * nxt.cols() + j) = cur.col(i).cwiseProduct(nxt.col(j));
            }
        }
        cur = std::move(prod);
    }
    return cur;
}

void combinations(int n, int k, int start, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        combinations(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

void check_balanced(const FactorTable& data) {
    if (data.factor_names.empty()) throw ParameterError("MANOVA needs at least one factor");
    std::map<std::vector<int>, std::size_t> counts;
    std::size_t cells = 1;
    for (const auto& lv : data.levels) {
        if (lv.size() < 2) throw ParameterError("every MANOVA factor needs at least two levels");
        cells *= lv.size();
    }
    for (std::size_t i = 0; i < data.rows(); ++i) {
        std::vector<int> key;
        for (const auto& c : data.codes) key.push_back(c[i]);
        ++counts[key];
    }
    if (counts.size() != cells) {
        throw ParameterError("unbalanced design: " + std::to_string(counts.size()) + " of " +
                             std::to_string(cells) + " factor cells are populated");
    }
    const std::size_t first = counts.begin()->second;
    for (const auto& [key, c] : counts) {
        if (c != first) {
            throw ParameterError("unbalanced design: cell counts differ (" + std::to_string(first) + " vs " +
                                 std::to_string(c) + ")");
        }
    }
}

}  // namespace

ManovaResult manova(const FactorTable& data, int max_order) {
    const Index n = static_cast<Index>(data.rows());
    const Index m = data.responses.cols();
    if (max_order < 1) throw ParameterError("max_order must be >= 1");
    if (!data.responses.allFinite()) throw ParameterError("MANOVA responses must be finite");
    for (const auto& c : data.codes) {
        if (static_cast<Index>(c.size()) != n) throw ParameterError("factor codes and responses differ in length");
    }
    check_balanced(data);

    const int nf = static_cast<int>(data.factor_names.size());
    std::vector<MatrixXd> main_blocks;
    for (int f = 0; f < nf; ++f) {
        main_blocks.push_back(contrasts(data.codes[static_cast<std::size_t>(f)],
                                        static_cast<int>(data.levels[static_cast<std::size_t>(f)].size())));
    }
    const MatrixXd yc = data.responses.rowwise() - data.responses.colwise().mean();

    ManovaResult res;
    res.total_ssp = linalg::symmetrize(yc.transpose() * yc);
    MatrixXd basis(n, 0);
    std::vector<std::vector<int>> term_sets;
    for (int k = 1; k <= std::min(max_order, nf); ++k) {
        std::vector<int> cur;
        combinations(nf, k, 0, cur, term_sets);
    }
    for (const auto& set : term_sets) {
        std::vector<MatrixXd> blocks;
        std::string name;
        for (int f : set) {
            blocks.push_back(main_blocks[static_cast<std::size_t>(f)]);
            if (!name.empty()) name += ':';
            name += data.factor_names[static_cast<std::size_t>(f)];
        }
        MatrixXd xt = interaction_columns(blocks);
        // Sequential sums of squares: remove what earlier terms explain.
        for (int pass = 0; pass < 2 && basis.cols() > 0; ++pass) {
            xt -= basis * (basis.transpose() * xt);
        }
        Eigen::ColPivHouseholderQR<MatrixXd> qr(xt);
        qr.setThreshold(1e-10);
        const Index rank = qr.rank();
        MatrixXd qt = qr.householderQ() * MatrixXd::Identity(xt.rows(), rank);
        const MatrixXd proj = qt.transpose() * yc;
        ManovaTerm term;
        term.name = name;
        term.factors = set;
        term.df = static_cast<int>(rank);
        term.h = linalg::symmetrize(proj.transpose() * proj);
        res.terms.push_back(std::move(term));
        MatrixXd grown(n, basis.cols() + rank);
        grown << basis, qt;
        basis = std::move(grown);
    }
    const MatrixXd resid = yc - basis * (basis.transpose() * yc);
    res.e = linalg::symmetrize(resid.transpose() * resid);
    res.residual_df = static_cast<int>(n - 1 - basis.cols());
    if (res.residual_df <= 0) throw ParameterError("no residual degrees of freedom left");
    for (auto& term : res.terms) {
        term.pillai = pillai(term.h, res.e);
        const auto fa = pillai_f_approx(term.pillai, term.df, static_cast<int>(m), res.residual_df);
        term.f_approx = fa.f;
        term.df1 = fa.df1;
        term.df2 = fa.df2;
        term.p_value = fa.p_value;
    }
    return res;
}

std::vector<EffectCell> effect_means(const FactorTable& data, const std::vector<std::string>& factors) {
    std::vector<int> pos;
    for (const auto& f : factors) pos.push_back(data.factor_position(f));
    const Index m = data.responses.cols();
    struct Acc {
        std::size_t count = 0;
        VectorXd sum;
        VectorXd sumsq;
    };
    std::map<std::vector<int>, Acc> cells;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        std::vector<int> key;
        for (int p : pos) key.push_back(data.codes[static_cast<std::size_t>(p)][i]);
        auto& acc = cells[key];
        if (acc.count == 0) {
            acc.sum = VectorXd::Zero(m);
            acc.sumsq = VectorXd::Zero(m);
        }
        ++acc.count;
        const VectorXd row = data.responses.row(static_cast<Index>(i)).transpose();
        acc.sum += row;
        acc.sumsq += row.cwiseProduct(row);
    }
    // Full cross product of levels so empty cells are detected.
    std::vector<std::vector<int>> keys{{}};
    for (int p : pos) {
        std::vector<std::vector<int>> next;
        for (const auto& k : keys) {
            for (int l = 0; l < static_cast<int>(data.levels[static_cast<std::size_t>(p)].size()); ++l) {
                auto nk = k;
                nk.push_back(l);
                next.push_back(std::move(nk));
            }
        }
        keys = std::move(next);
    }
    std::vector<EffectCell> out;
    for (const auto& key : keys) {
        auto it = cells.find(key);
        if (it == cells.end()) {
            std::string desc;
            for (std::size_t i = 0; i < key.size(); ++i) {
                desc += (i ? ", " : "") + factors[i] + "=" +
                        data.levels[static_cast<std::size_t>(pos[i])][static_cast<std::size_t>(key[i])];
            }
            throw ParameterError("effect means: empty cell (" + desc + ")");
        }
        const auto& acc = it->second;
        EffectCell cell;
        for (std::size_t i = 0; i < key.size(); ++i) {
            cell.levels.push_back(data.levels[static_cast<std::size_t>(pos[i])][static_cast<std::size_t>(key[i])]);
        }
        cell.count = acc.count;
        const double c = static_cast<double>(acc.count);
        cell.mean = acc.sum / c;
        cell.se = VectorXd(m);
        for (Index j = 0; j < m; ++j) {
            if (acc.count < 2) {
                cell.se(j) = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double var = std::max(0.0, (acc.sumsq(j) - c * cell.mean(j) * cell.mean(j)) / (c - 1.0));
            cell.se(j) = std::sqrt(var / c);
        }
        out.push_back(std::move(cell));
    }
    return out;
}

}  // namespace mrpc
