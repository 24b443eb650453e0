#include "mrpc/simrel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "mrpc/csv.hpp"
#include "mrpc/errors.hpp"
#include "mrpc/linalg.hpp"

namespace mrpc {

using Eigen::Index;

void SimulationParams::validate() const {
    auto fail = [](const std::string& msg) { throw ParameterError(msg); };
    if (n < 1) fail("n must be >= 1");
    if (p < 1) fail("p must be >= 1");
    if (m < 1) fail("m must be >= 1");
    if (relpos.empty()) fail("relpos must not be empty");
    if (q < static_cast<int>(relpos.size()) || q > p) {
        fail("q must satisfy |relpos| <= q <= p (q = " + std::to_string(q) + ")");
    }
    std::set<int> seen;
    for (int r : relpos) {
        if (r < 1 || r > p) {
            fail("relpos entry " + std::to_string(r) + " outside 1.." + std::to_string(p));
        }
        if (!seen.insert(r).second) fail("relpos entry " + std::to_string(r) + " repeated");
    }
    std::vector<int> cover(static_cast<std::size_t>(m), 0);
    for (const auto& group : ypos) {
        if (group.empty()) fail("ypos contains an empty group");
        for (int j : group) {
            if (j < 1 || j > m) {
                fail("ypos entry " + std::to_string(j) + " outside 1.." + std::to_string(m));
            }
            ++cover[static_cast<std::size_t>(j - 1)];
        }
    }
    for (int j = 0; j < m; ++j) {
        if (cover[static_cast<std::size_t>(j)] != 1) {
            fail("ypos must cover every response component exactly once (component " +
                 std::to_string(j + 1) + ")");
        }
    }
    if (!(r2 > 0.0 && r2 < 1.0)) fail("r2 must lie in (0, 1)");
    if (!(gamma > 0.0)) fail("gamma must be > 0");
    if (!(eta >= 0.0)) fail("eta must be >= 0");
}

VectorXd eigenvalues_gamma(int p, double gamma) {
    if (p < 1) throw ParameterError("p must be >= 1");
    if (!(gamma > 0.0)) throw ParameterError("gamma must be > 0");
    VectorXd out(p);
    for (int i = 0; i < p; ++i) {
        out(i) = std::exp(-gamma * static_cast<double>(i));
    }
    return out;
}

VectorXd eigenvalues_eta(int m, double eta) {
    if (m < 1) throw ParameterError("m must be >= 1");
    if (!(eta >= 0.0)) throw ParameterError("eta must be >= 0");
    VectorXd out(m);
    for (int j = 0; j < m; ++j) {
        out(j) = std::exp(-eta * static_cast<double>(j));
    }
    return out;
}

MatrixXd PopulationModel::latent_alpha() const {
    return lambda.cwiseInverse().asDiagonal() * sigma_zw;
}

MatrixXd PopulationModel::latent_joint_covariance() const {
    const Index mm = m();
    const Index pp = p();
    MatrixXd out = MatrixXd::Zero(mm + pp, mm + pp);
    out.topLeftCorner(mm, mm) = kappa.asDiagonal();
    out.bottomRightCorner(pp, pp) = lambda.asDiagonal();
    out.topRightCorner(mm, pp) = sigma_zw.transpose();
    out.bottomLeftCorner(pp, mm) = sigma_zw;
    return out;
}

MatrixXd PopulationModel::joint_covariance() const {
    const Index mm = m();
    const Index pp = p();
    MatrixXd out(mm + pp, mm + pp);
    out.topLeftCorner(mm, mm) = sigma_yy;
    out.bottomRightCorner(pp, pp) = sigma_xx;
    out.topRightCorner(mm, pp) = sigma_xy.transpose();
    out.bottomLeftCorner(pp, mm) = sigma_xy;
    return out;
}

double PopulationModel::latent_r2(int component) const {
    const auto col = sigma_zw.col(component);
    return (col.array().square() / lambda.array()).sum() / kappa(component);
}

PopulationModel assemble_population(VectorXd lambda, VectorXd kappa, MatrixXd sigma_zw,
                                    MatrixXd rot_R, MatrixXd rot_Q) {
    const Index p = lambda.size();
    const Index m = kappa.size();
    if (sigma_zw.rows() != p || sigma_zw.cols() != m || rot_R.rows() != p || rot_R.cols() != p ||
        rot_Q.rows() != m || rot_Q.cols() != m) {
        throw ParameterError("population blocks have inconsistent dimensions");
    }
    PopulationModel pop;
    pop.lambda = std::move(lambda);
    pop.kappa = std::move(kappa);
    pop.sigma_zw = std::move(sigma_zw);
    pop.rot_R = std::move(rot_R);
    pop.rot_Q = std::move(rot_Q);

    const MatrixXd& R = pop.rot_R;
    const MatrixXd& Q = pop.rot_Q;
    pop.sigma_xx = linalg::symmetrize(R.transpose() * pop.lambda.asDiagonal() * R);
    pop.sigma_yy = linalg::symmetrize(Q.transpose() * pop.kappa.asDiagonal() * Q);
    pop.sigma_xy = R.transpose() * pop.sigma_zw * Q;
    pop.beta = R.transpose() * pop.latent_alpha() * Q;

    MatrixXd latent_cond = pop.kappa.asDiagonal();
    latent_cond -= pop.sigma_zw.transpose() * pop.latent_alpha();
    pop.sigma_y_given_x = linalg::symmetrize(Q.transpose() * latent_cond * Q);
    pop.sigma2_cond = pop.sigma_y_given_x.diagonal();
    pop.mu_x = VectorXd::Zero(p);
    pop.mu_y = VectorXd::Zero(m);

    Eigen::LLT<MatrixXd> llt(pop.latent_joint_covariance());
    if (llt.info() != Eigen::Success) {
        throw NumericalError("joint covariance is not positive definite");
    }
    if ((pop.sigma2_cond.array() <= 0.0).any()) {
        throw NumericalError("conditional response variance is not positive");
    }
    return pop;
}

PopulationModel build_population(const SimulationParams& params, Rng& rng,
                                 const PopulationOptions& options) {
    params.validate();
    const int p = params.p;
    const int m = params.m;
    VectorXd lambda = eigenvalues_gamma(p, params.gamma);
    VectorXd kappa = eigenvalues_eta(m, params.eta);

    // Only the first response component is informative. Random covariances
    // are rescaled so the latent R^2 of that component is exactly r2.
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> t(params.relpos.size());
    double t_ss = 0.0;
    do {
        t_ss = 0.0;
        for (auto& v : t) {
            v = unif(rng);
            t_ss += v * v;
        }
    } while (std::abs(t_ss) < 1e-12);

    MatrixXd sigma_zw = MatrixXd::Zero(p, m);
    for (std::size_t k = 0; k < params.relpos.size(); ++k) {
        const int i = params.relpos[k] - 1;
        const double mag = std::sqrt(params.r2 * kappa(0) * lambda(i) * t[k] * t[k] / t_ss);
        sigma_zw(i, 0) = t[k] < 0.0 ? -mag : mag;
    }

    MatrixXd rot_R = MatrixXd::Identity(p, p);
    MatrixXd rot_Q = MatrixXd::Identity(m, m);
    if (!options.identity_rotations) {
        // The relevant space is relpos plus q - |relpos| further positions
        // drawn at random; rotation never mixes it with its complement.
        std::vector<int> relevant;
        std::vector<int> others;
        std::vector<bool> is_rel(static_cast<std::size_t>(p), false);
        for (int r : params.relpos) is_rel[static_cast<std::size_t>(r - 1)] = true;
        for (int i = 0; i < p; ++i) {
            (is_rel[static_cast<std::size_t>(i)] ? relevant : others).push_back(i);
        }
        std::shuffle(others.begin(), others.end(), rng);
        const std::size_t extra = static_cast<std::size_t>(params.q) - relevant.size();
        relevant.insert(relevant.end(), others.begin(), others.begin() + static_cast<long>(extra));
        others.erase(others.begin(), others.begin() + static_cast<long>(extra));
        std::sort(relevant.begin(), relevant.end());
        std::sort(others.begin(), others.end());

        auto place_block = [&rng](MatrixXd& target, const std::vector<int>& idx) {
            const MatrixXd block = linalg::random_orthogonal(static_cast<Index>(idx.size()), rng);
            for (std::size_t a = 0; a < idx.size(); ++a) {
                for (std::size_t b = 0; b < idx.size(); ++b) {
                    target(idx[a], idx[b]) = block(static_cast<Index>(a), static_cast<Index>(b));
                }
            }
        };
        place_block(rot_R, relevant);
        if (!others.empty()) place_block(rot_R, others);
        for (const auto& group : params.ypos) {
            std::vector<int> idx;
            for (int j : group) idx.push_back(j - 1);
            std::sort(idx.begin(), idx.end());
            place_block(rot_Q, idx);
        }
    }
    return assemble_population(std::move(lambda), std::move(kappa), std::move(sigma_zw),
                               std::move(rot_R), std::move(rot_Q));
}

Dataset sample_dataset(const PopulationModel& pop, int n, Rng& rng) {
    if (n < 1) throw ParameterError("sample size must be >= 1");
    const Index m = pop.m();
    const Index p = pop.p();
    Eigen::LLT<MatrixXd> llt(pop.latent_joint_covariance());
    if (llt.info() != Eigen::Success) {
        throw NumericalError("Cholesky factorization of the joint covariance failed");
    }
    const MatrixXd L = llt.matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd e(n, m + p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m + p; ++j) {
            e(i, j) = normal(rng);
        }
    }
    const MatrixXd latent = e * L.transpose();
    Dataset out;
    out.y = latent.leftCols(m) * pop.rot_Q;
    out.x = latent.rightCols(p) * pop.rot_R;
    return out;
}

namespace {

MatrixXd scaled_abs(const MatrixXd& a) {
    MatrixXd out = a.cwiseAbs();
    const double mx = out.size() > 0 ? out.maxCoeff() : 0.0;
    if (mx > 0.0) out /= mx;
    return out;
}

}  // namespace

CovarianceDiagnostics covariance_diagnostics(const PopulationModel& pop, const Dataset* sample) {
    CovarianceDiagnostics d;
    d.pop_components = scaled_abs(pop.sigma_zw);
    d.pop_component_response = scaled_abs(pop.sigma_zw * pop.rot_Q);
    d.pop_eigenvalues = pop.lambda;
    if (sample != nullptr && sample->x.rows() >= 2) {
        d.has_sample = true;
        const MatrixXd xc = linalg::center(sample->x, linalg::column_means(sample->x));
        const MatrixXd yc = linalg::center(sample->y, linalg::column_means(sample->y));
        const MatrixXd sx = linalg::cross_covariance(xc, xc);
        const MatrixXd sxy = linalg::cross_covariance(xc, yc);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(sx);
        const MatrixXd vecs = es.eigenvectors().rowwise().reverse();
        d.sample_eigenvalues = es.eigenvalues().reverse();
        d.sample_component_response = scaled_abs(vecs.transpose() * sxy);
        d.sample_variable_response = scaled_abs(sxy);
    }
    return d;
}

void write_population(std::ostream& os, const PopulationModel& pop,
                      const std::vector<std::pair<std::string, std::string>>& meta) {
    os << "# mrpc population model\n";
    for (const auto& [k, v] : meta) {
        os << "#meta " << k << '=' << v << '\n';
    }
    auto block = [&os](const std::string& name, const MatrixXd& a) {
        os << "#block " << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
        csv::write_matrix_rows(os, a);
    };
    block("lambda", pop.lambda);
    block("kappa", pop.kappa);
    block("sigma_zw", pop.sigma_zw);
    block("rot_R", pop.rot_R);
    block("rot_Q", pop.rot_Q);
    block("sigma_xx", pop.sigma_xx);
    block("sigma_yy", pop.sigma_yy);
    block("sigma_xy", pop.sigma_xy);
    block("beta", pop.beta);
    block("sigma_y_given_x", pop.sigma_y_given_x);
    block("sigma2_cond", pop.sigma2_cond);
    block("mu_x", pop.mu_x);
    block("mu_y", pop.mu_y);
}

PopulationModel read_population(std::istream& is) {
    std::map<std::string, MatrixXd> blocks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.rfind("#block ", 0) != 0) {
            if (!line.empty() && line[0] != '#') {
                throw InputError("population dump line " + std::to_string(line_no) +
                                 ": data outside a block");
            }
            continue;
        }
        std::istringstream hdr(line.substr(7));
        std::string name;
        Index rows = 0;
        Index cols = 0;
        if (!(hdr >> name >> rows >> cols) || rows < 0 || cols < 0) {
            throw InputError("population dump line " + std::to_string(line_no) +
                             ": malformed block header");
        }
        MatrixXd a(rows, cols);
        for (Index i = 0; i < rows; ++i) {
            if (!std::getline(is, line)) {
                throw InputError("population dump: block '" + name + "' truncated");
            }
            ++line_no;
            const auto fields = csv::split(line);
            if (static_cast<Index>(fields.size()) != cols) {
                throw InputError("population dump line " + std::to_string(line_no) +
                                 ": wrong field count in block '" + name + "'");
            }
            for (Index j = 0; j < cols; ++j) {
                a(i, j) = csv::parse_double(fields[static_cast<std::size_t>(j)]);
            }
        }
        blocks[name] = std::move(a);
    }
    for (const char* required : {"lambda", "kappa", "sigma_zw", "rot_R", "rot_Q"}) {
        if (!blocks.count(required)) {
            throw InputError(std::string("population dump lacks block '") + required + "'");
        }
    }
    return assemble_population(blocks["lambda"].col(0), blocks["kappa"].col(0),
                               blocks["sigma_zw"], blocks["rot_R"], blocks["rot_Q"]);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    for (Index j = 0; j < data.y.cols(); ++j) os << (j ? "," : "") << 'y' << j + 1;
    for (Index j = 0; j < data.x.cols(); ++j) os << ",x" << j + 1;
    os << '\n';
    MatrixXd both(data.x.rows(), data.y.cols() + data.x.cols());
    both << data.y, data.x;
    csv::write_matrix_rows(os, both);
}

}  // namespace mrpc
