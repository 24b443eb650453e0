#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "mrpc/errors.hpp"
#include "mrpc/estimators.hpp"
#include "mrpc/rng.hpp"
#include "mrpc/simrel.hpp"
#include "support.hpp"

using namespace mrpc;
using namespace mrpc::testing;

namespace {

/// n x k matrix with centered, mutually orthogonal columns of unit norm.
MatrixXd centered_orthonormal(int n, int k, Rng& rng) {
    const MatrixXd a = center_columns(standard_normal(n, k, rng));
    Eigen::HouseholderQR<MatrixXd> qr(a);
    return qr.householderQ() * MatrixXd::Identity(n, k);
}

double max_abs(const MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

/// Regression with a planted 2-dimensional predictor envelope.
Instance planted_envelope(int n, int p, int m, double noise_sd, Rng& rng) {
    const MatrixXd v = random_basis(p, p, rng);
    const MatrixXd gamma = v.leftCols(2);
    VectorXd lam(p);
    for (int i = 0; i < p; ++i) lam(i) = 0.5 + 0.4 * i;
    const MatrixXd sigma = v * lam.asDiagonal() * v.transpose();
    const Eigen::LLT<MatrixXd> llt(sigma);
    Instance inst;
    inst.x = standard_normal(n, p, rng) * MatrixXd(llt.matrixU());
    inst.beta = gamma * standard_normal(2, m, rng);
    inst.y = inst.x * inst.beta + noise_sd * standard_normal(n, m, rng);
    return inst;
}

}  // namespace

TEST_SUITE("methods") {
    TEST_CASE("names round trip") {
        for (Method m : all_methods()) CHECK(parse_method(method_name(m)) == m);
        CHECK(parse_method("senv") == Method::Senv);
        CHECK_THROWS_AS(parse_method("ridge"), ParameterError);
    }

    TEST_CASE("null model for every method") {
        const auto inst = random_instance(40, 6, 4, 1);
        const RowVectorXd ybar = inst.y.colwise().mean();
        for (Method m : all_methods()) {
            CAPTURE(method_name(m));
            const auto fm = fit(m, inst.x, inst.y, 0);
            CHECK(fm.ncomp == 0);
            CHECK(max_abs(fm.beta_hat) == 0.0);
            CHECK(max_abs(fm.intercept.transpose() - ybar) < 1e-12);
        }
    }

    TEST_CASE("full rank fit equals least squares") {
        const auto inst = random_instance(50, 5, 4, 2);
        const MatrixXd beta_ols = ols(center_columns(inst.x), center_columns(inst.y));
        CHECK(max_abs(fit_pcr(inst.x, inst.y, 5).beta_hat - beta_ols) < 1e-8);
        CHECK(max_abs(fit_pls1(inst.x, inst.y, 5).beta_hat - beta_ols) < 1e-8);
        CHECK(max_abs(fit_pls2(inst.x, inst.y, 5).beta_hat - beta_ols) < 1e-8);
        CHECK(max_abs(fit_xenv(inst.x, inst.y, 5).beta_hat - beta_ols) < 1e-6);
        const auto fm = fit_pcr(inst.x, inst.y, 5);
        const VectorXd icpt = inst.y.colwise().mean().transpose() -
                              fm.beta_hat.transpose() * inst.x.colwise().mean().transpose();
        CHECK(max_abs(fm.intercept - icpt) < 1e-10);
    }

    TEST_CASE("rank violation names the rank") {
        Rng rng(3);
        const MatrixXd base = standard_normal(30, 3, rng);
        MatrixXd x(30, 5);
        x << base, base.col(0) + base.col(1), base.col(2) - base.col(1);
        const MatrixXd y = standard_normal(30, 2, rng);
        for (auto f : {fit_pcr, fit_pls1, fit_pls2}) {
            try {
                f(x, y, 4);
                FAIL("expected a rank error");
            } catch (const ParameterError& e) {
                CHECK(std::string(e.what()).find("rank 3") != std::string::npos);
            }
        }
        CHECK_THROWS_AS(fit_pcr(x, y, -1), ParameterError);
        CHECK_THROWS_AS(fit_pcr(x, MatrixXd::Zero(29, 2), 1), ParameterError);
    }
}

TEST_SUITE("pcr") {
    TEST_CASE("first component recovers the largest variance coefficient") {
        Rng rng(4);
        const int n = 60;
        const MatrixXd u = centered_orthonormal(n, 4, rng);
        const Eigen::Vector4d s(9.0, 5.0, 3.0, 1.0);
        const MatrixXd x = u * s.asDiagonal();
        const MatrixXd b = standard_normal(4, 2, rng);
        const MatrixXd y = x * b + 0.1 * standard_normal(n, 2, rng);
        const auto fm = fit_pcr(x, y, 1);
        const MatrixXd yc = center_columns(y);
        const RowVectorXd expected = x.col(0).transpose() * yc / x.col(0).squaredNorm();
        CHECK(max_abs(fm.beta_hat.row(0) - expected) < 1e-10);
        CHECK(max_abs(fm.beta_hat.bottomRows(3)) < 1e-10);
    }
}

TEST_SUITE("pls") {
    TEST_CASE("single response PLS2 equals PLS1") {
        const auto inst = random_instance(45, 8, 1, 5);
        for (int a = 1; a <= 6; ++a) {
            CHECK(max_abs(fit_pls2(inst.x, inst.y, a).beta_hat - fit_pls1(inst.x, inst.y, a).beta_hat) < 1e-10);
        }
    }

    TEST_CASE("first weight follows the leading singular vector of x'y") {
        const auto inst = random_instance(70, 9, 4, 6);
        const MatrixXd xc = center_columns(inst.x);
        const MatrixXd yc = center_columns(inst.y);
        const auto res = simpls(xc, yc, 1);
        Eigen::JacobiSVD<MatrixXd> svd(xc.transpose() * yc, Eigen::ComputeThinU);
        const VectorXd w = res.weights.col(0).normalized();
        CHECK(std::abs(std::abs(w.dot(svd.matrixU().col(0))) - 1.0) < 1e-10);
    }

    TEST_CASE("no predictive signal") {
        Rng rng(7);
        const MatrixXd q = centered_orthonormal(30, 5, rng);
        const MatrixXd x = q.rightCols(4);
        const MatrixXd y = q.leftCols(1);
        try {
            fit_pls2(x, y, 1);
            FAIL("expected an error");
        } catch (const NumericalError& e) {
            CHECK(std::string(e.what()).find("no predictive signal") != std::string::npos);
        }
        CHECK_THROWS_AS(fit_pls1(x, y, 1), NumericalError);
    }

    TEST_CASE("identical response columns give identical coefficients") {
        const auto inst = random_instance(40, 7, 1, 8);
        MatrixXd y(40, 3);
        y << inst.y, inst.y, inst.y;
        const auto fm = fit_pls1(inst.x, y, 3);
        CHECK(max_abs(fm.beta_hat.col(1) - fm.beta_hat.col(0)) < 1e-12);
        CHECK(max_abs(fm.beta_hat.col(2) - fm.beta_hat.col(0)) < 1e-12);
    }

    TEST_CASE("PLS1 columns equal separate single response fits") {
        Rng rng(9);
        const int n = 80;
        const MatrixXd x = standard_normal(n, 6, rng);
        MatrixXd y(n, 2);
        y.col(0) = x.leftCols(3) * Eigen::Vector3d(1.0, -0.5, 0.8) + 0.1 * standard_normal(n, 1, rng);
        y.col(1) = x.rightCols(3) * Eigen::Vector3d(0.3, 1.2, -0.7) + 0.1 * standard_normal(n, 1, rng);
        for (int a = 1; a <= 6; ++a) {
            const auto joint = fit_pls1(x, y, a);
            for (int j = 0; j < 2; ++j) {
                const auto single = fit_pls1(x, y.col(j), a);
                CHECK(max_abs(joint.beta_hat.col(j) - single.beta_hat) < 1e-12);
            }
        }
    }
}

TEST_SUITE("prereduce") {
    TEST_CASE("one dominant direction") {
        Rng rng(10);
        const MatrixXd t = standard_normal(50, 1, rng);
        const VectorXd v = random_basis(6, 1, rng);
        const MatrixXd x = 10.0 * t * v.transpose() + 0.1 * standard_normal(50, 6, rng);
        const auto red = pca_prereduce(x);
        CHECK(red.reduction.k == 1);
        CHECK(red.reduction.explained >= 0.975);
        CHECK(red.scores.cols() == 1);
    }

    TEST_CASE("isotropic sample keeps everything") {
        Rng rng(11);
        const MatrixXd x = centered_orthonormal(40, 4, rng);
        const auto red = pca_prereduce(x);
        CHECK(red.reduction.k == 4);
    }

    TEST_CASE("wide sample reduces below n") {
        SimulationParams params;
        params.p = 250;
        params.q = 250;
        params.gamma = 0.2;
        Rng rng(12);
        const auto pop = build_population(params, rng);
        const auto data = sample_dataset(pop, 100, rng);
        const auto red = pca_prereduce(data.x);
        const int k = red.reduction.k;
        CHECK(k < 100);
        CHECK(red.reduction.explained >= 0.975);
        const MatrixXd ek = red.reduction.e_k;
        CHECK(max_abs(ek.transpose() * ek - MatrixXd::Identity(k, k)) < 1e-10);
        const MatrixXd xc0 = center_columns(data.x);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(xc0 * xc0.transpose());
        const VectorXd ev = es.eigenvalues().reverse();
        const double below = ev.head(k - 1).sum() / ev.sum();
        const double at = ev.head(k).sum() / ev.sum();
        CHECK(below < 0.975);
        CHECK(at >= 0.975);
        CHECK(red.reduction.explained == doctest::Approx(at).epsilon(1e-10));
        const MatrixXd xc = center_columns(data.x);
        CHECK(max_abs(red.scores - xc * ek) < 1e-9);
    }

    TEST_CASE("constant predictors are rejected") {
        CHECK_THROWS_AS(pca_prereduce(MatrixXd::Constant(10, 3, 2.0)), NumericalError);
        CHECK_THROWS_AS(pca_prereduce(MatrixXd::Ones(1, 3)), ParameterError);
        CHECK_THROWS_AS(pca_prereduce(MatrixXd::Random(10, 3), 1.5), ParameterError);
    }

    TEST_CASE("backtransform") {
        Rng rng(13);
        PreReduction pre;
        pre.e_k = random_basis(7, 3, rng);
        pre.k = 3;
        CHECK(max_abs(backtransform(pre, MatrixXd::Zero(3, 2))) == 0.0);
        const MatrixXd alpha = standard_normal(3, 2, rng);
        const MatrixXd b = backtransform(pre, alpha);
        const MatrixXd resid = b - pre.e_k * (pre.e_k.transpose() * b);
        CHECK(max_abs(resid) < 1e-12);
        PreReduction ident;
        ident.e_k = MatrixXd::Identity(3, 3);
        ident.k = 3;
        CHECK(max_abs(backtransform(ident, alpha) - alpha) == 0.0);
        CHECK_THROWS_AS(backtransform(pre, MatrixXd::Zero(4, 2)), ParameterError);
    }
}

TEST_SUITE("envelopes") {
    TEST_CASE("planted predictor envelope recovered") {
        Rng rng(14);
        const auto inst = planted_envelope(5000, 6, 3, 1e-2, rng);
        const auto fm = fit_xenv(inst.x, inst.y, 2);
        CHECK(frobenius_gap(fm.beta_hat, inst.beta) < 1e-2);
        CHECK_FALSE(fm.prereduced);
    }

    TEST_CASE("simultaneous envelope with full response dimension matches Xenv") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto inst = random_instance(40, 6, 3, 100 + s);
            const int ncomp = 1 + static_cast<int>(s % 5);
            const auto a = fit_senv(inst.x, inst.y, ncomp, 3);
            const auto b = fit_xenv(inst.x, inst.y, ncomp);
            CHECK(max_abs(a.beta_hat - b.beta_hat) < 1e-6);
            CHECK(max_abs(a.intercept - b.intercept) < 1e-6);
        }
    }

    TEST_CASE("simultaneous envelope coefficient rank") {
        Rng rng(15);
        const int n = 4000;
        const int p = 6;
        const int m = 4;
        const MatrixXd gx = random_basis(p, 2, rng);
        const MatrixXd gy = random_basis(m, 1, rng);
        const MatrixXd beta = gx * standard_normal(2, 1, rng) * gy.transpose();
        const MatrixXd x = standard_normal(n, p, rng);
        const MatrixXd y = x * beta + 0.01 * standard_normal(n, m, rng);
        for (int a = 1; a <= 3; ++a) {
            for (int r = 1; r <= 2; ++r) {
                const auto fm = fit_senv(x, y, a, r);
                Eigen::JacobiSVD<MatrixXd> svd(fm.beta_hat);
                const VectorXd sv = svd.singularValues();
                const int bound = std::min(a, r);
                CAPTURE(a);
                CAPTURE(r);
                for (Eigen::Index i = bound; i < sv.size(); ++i) CHECK(sv(i) < 1e-10 * sv(0));
            }
        }
        const auto fm = fit_senv(x, y, 2, 1);
        CHECK(frobenius_gap(fm.beta_hat, beta) < 5e-2);
        CHECK_THROWS_AS(fit_senv(x, y, 2, 0), ParameterError);
        CHECK_THROWS_AS(fit_senv(x, y, 2, 5), ParameterError);
    }

    TEST_CASE("wide data is pre-reduced") {
        const auto inst = random_instance(30, 40, 4, 16);
        const auto fm = fit_xenv(inst.x, inst.y, 3);
        CHECK(fm.prereduced);
        CHECK(fm.reduced_k >= 3);
        CHECK(fm.beta_hat.rows() == 40);
        CHECK(fm.beta_hat.allFinite());
        const int mx = max_components(Method::Xenv, inst.x, inst.y);
        CHECK(mx == fm.reduced_k);
        CHECK_THROWS_AS(fit_xenv(inst.x, inst.y, mx + 1), ParameterError);
        const auto fs = fit_senv(inst.x, inst.y, 3, 2);
        CHECK(fs.prereduced);
        CHECK(fs.beta_hat.allFinite());
    }
}

TEST_SUITE("invariances") {
    TEST_CASE("response scaling for column separable methods") {
        const auto inst = random_instance(50, 8, 4, 17);
        const Eigen::Vector4d d(0.5, 2.0, 3.0, 7.5);
        const MatrixXd ys = inst.y * d.asDiagonal();
        for (int a = 1; a <= 5; ++a) {
            const auto p0 = fit_pcr(inst.x, inst.y, a);
            const auto p1 = fit_pcr(inst.x, ys, a);
            CHECK(max_abs(p1.beta_hat - p0.beta_hat * d.asDiagonal()) < 1e-10);
            const auto q0 = fit_pls1(inst.x, inst.y, a);
            const auto q1 = fit_pls1(inst.x, ys, a);
            CHECK(max_abs(q1.beta_hat - q0.beta_hat * d.asDiagonal()) < 1e-10);
        }
    }

    TEST_CASE("shifting predictors changes only intercepts") {
        for (int wide = 0; wide < 2; ++wide) {
            const auto inst = wide ? random_instance(25, 30, 4, 18) : random_instance(60, 7, 4, 19);
            const auto p = static_cast<int>(inst.x.cols());
            Rng rng(20);
            const RowVectorXd shift = 5.0 * standard_normal(1, p, rng);
            const MatrixXd xs = inst.x.rowwise() + shift;
            for (Method m : all_methods()) {
                for (int a : {1, 3}) {
                    CAPTURE(method_name(m));
                    CAPTURE(a);
                    CAPTURE(wide);
                    const auto f0 = fit(m, inst.x, inst.y, a);
                    const auto f1 = fit(m, xs, inst.y, a);
                    CHECK(max_abs(f0.beta_hat - f1.beta_hat) < 1e-8);
                    const VectorXd di = f0.intercept - f1.intercept;
                    CHECK(max_abs(di - f0.beta_hat.transpose() * shift.transpose()) < 1e-6);
                }
            }
        }
    }
}

TEST_SUITE("path") {
    TEST_CASE("path entries equal direct fits") {
        const auto inst = random_instance(40, 6, 4, 21);
        for (Method m : all_methods()) {
            CAPTURE(method_name(m));
            const auto path = fit_path(m, inst.x, inst.y, 6);
            REQUIRE(path.size() == 7);
            for (int a = 0; a <= 6; ++a) {
                REQUIRE(path[a].model.has_value());
                const auto direct = fit(m, inst.x, inst.y, a);
                CHECK(max_abs(path[a].model->beta_hat - direct.beta_hat) < 1e-8);
                CHECK_FALSE(path[a].model->saturated);
            }
        }
    }

    TEST_CASE("counts beyond the maximum saturate") {
        const auto inst = random_instance(20, 30, 4, 22);
        for (Method m : all_methods()) {
            CAPTURE(method_name(m));
            const int mx = max_components(m, inst.x, inst.y);
            const auto path = fit_path(m, inst.x, inst.y, mx + 2);
            REQUIRE(path.size() == static_cast<std::size_t>(mx + 3));
            REQUIRE(path[mx].model.has_value());
            CHECK_FALSE(path[mx].model->saturated);
            for (int a = mx + 1; a <= mx + 2; ++a) {
                REQUIRE(path[a].model.has_value());
                CHECK(path[a].model->saturated);
                CHECK(path[a].model->ncomp == mx);
                CHECK(max_abs(path[a].model->beta_hat - path[mx].model->beta_hat) == 0.0);
            }
        }
        CHECK(max_components(Method::PCR, inst.x, inst.y) == 19);
    }

    TEST_CASE("coefficient csv") {
        const auto inst = random_instance(30, 3, 2, 23);
        const auto fm = fit_pls2(inst.x, inst.y, 2);
        std::stringstream ss;
        write_fitted_model_csv(ss, fm);
        std::string line;
        std::getline(ss, line);
        CHECK(line == "# method=PLS2,ncomp=2");
        std::getline(ss, line);
        CHECK(line == "term,y1,y2");
        int rows = 0;
        while (std::getline(ss, line)) ++rows;
        CHECK(rows == 4);
        const auto pred = fm.predict(inst.x);
        const MatrixXd manual = (inst.x * fm.beta_hat).rowwise() + fm.intercept.transpose();
        CHECK(max_abs(pred - manual) < 1e-12);
    }
}
