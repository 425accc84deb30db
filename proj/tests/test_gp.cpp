#include <doctest.h>

#include "oracles.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/gp.hpp"
#include "sapgp/solvers.hpp"

using namespace sapgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
KernelSpec rbf(Index d, double ell, double var = 1.0) { return {KernelFamily::rbf, VectorXd::Constant(d, ell), var}; }

SystemSolver dense_solver(const KernelOracle& k) {
    const MatrixXd a = k.dense() + k.likelihood_variance() * MatrixXd::Identity(k.size(), k.size());
    return [a](const MatrixXd& r) { return oracle::dense_solve(a, r); };
}

// Points on a line spaced `gap` apart.
MatrixXd line(Index n, double gap) {
    MatrixXd x(n, 1);
    for (Index i = 0; i < n; ++i) x(i, 0) = gap * i;
    return x;
}
}  // namespace

TEST_SUITE("gp") {
    TEST_CASE("posterior mean of zero targets is zero") {
        const MatrixXd x = oracle::randn(15, 2, 1);
        const KernelOracle k(rbf(2, 1.0), x, 0.1);
        const auto m = posterior_mean(k, dense_solver(k), VectorXd::Zero(15));
        CHECK(m(oracle::randn(4, 2, 2)).norm() == 0.0);
    }

    TEST_CASE("posterior mean interpolates as the noise vanishes") {
        const MatrixXd x = line(12, 3.0);
        const VectorXd y = oracle::randn(12, 1, 3);
        const KernelOracle k(rbf(1, 1.0), x, 1e-10);
        const auto m = posterior_mean(k, dense_solver(k), y);
        CHECK(oracle::rel(m(x), y) <= 1e-4);
    }

    TEST_CASE("iterative posterior mean matches the dense formula") {
        const MatrixXd x = oracle::randn(50, 2, 4), xs = oracle::randn(6, 2, 5);
        const VectorXd y = oracle::randn(50, 1, 6);
        const KernelOracle k(rbf(2, 1.2), x, 0.05);
        DenseOperator op(k.dense(), 0.05);
        SolverConfig cfg;
        cfg.max_iters = 200;
        cfg.tolerance = 1e-11;
        const SystemSolver pcg = [&](const MatrixXd& r) { return pcg_solve(op, r, 0, cfg).w; };
        const MatrixXd a = oracle::rbf_gram(x, x, 1.2) + 0.05 * MatrixXd::Identity(50, 50);
        const VectorXd ref = oracle::rbf_gram(xs, x, 1.2) * oracle::dense_solve(a, y);
        CHECK(oracle::rel(posterior_mean(k, pcg, y)(xs), ref) <= 1e-8);
    }

    TEST_CASE("random features reproduce the kernel in expectation") {
        Eigen::Vector2d xa(0.0, 0.0), xb(0.0, 1.1774);  // rbf value close to 1/2
        MatrixXd pts(2, 2);
        pts.row(0) = xa;
        pts.row(1) = xb;
        const double k_ab = kernel_eval(rbf(2, 1.0), xa, xb);
        REQUIRE(k_ab == doctest::Approx(0.5).epsilon(1e-3));

        double cross = 0.0, sq = 0.0, inner = 0.0;
        const int draws = 2000;
        for (int i = 0; i < draws; ++i) {
            const RandomFeatureMap map(rbf(2, 1.0), 64, 1000 + i);
            const VectorXd f = sample_prior(map, 5000 + i)(pts);
            cross += f(0) * f(1);
            sq += f(0) * f(0);
            const MatrixXd phi = map.features(pts);
            inner += phi.row(0).dot(phi.row(1));
        }
        CHECK(std::abs(cross / draws - k_ab) <= 0.05 * k_ab);
        CHECK(std::abs(sq / draws - 1.0) <= 0.05);
        CHECK(std::abs(inner / draws - k_ab) <= 0.01);
    }

    TEST_CASE("matern features approximate the matern kernel") {
        for (auto fam : {KernelFamily::matern32, KernelFamily::matern52}) {
            const KernelSpec spec{fam, VectorXd::Constant(3, 0.8), 2.0};
            const RandomFeatureMap map(spec, 200000, 3);
            const MatrixXd x = oracle::randn(4, 3, 7) * 0.5;
            const MatrixXd phi = map.features(x);
            for (Index i = 0; i < 4; ++i)
                for (Index j = 0; j < 4; ++j)
                    CHECK(std::abs(phi.row(i).dot(phi.row(j)) - kernel_eval(spec, x.row(i).transpose(),
                                                                             x.row(j).transpose())) < 0.03);
        }
    }

    TEST_CASE("prior functions are deterministic in the seed") {
        const RandomFeatureMap map(rbf(2, 1.0), 128, 9);
        const MatrixXd x = oracle::randn(5, 2, 1);
        CHECK(sample_prior(map, 4)(x) == sample_prior(map, 4)(x));
        CHECK(RandomFeatureMap(rbf(2, 1.0), 128, 9).features(x) == map.features(x));
    }

    TEST_CASE("pathwise sample mean converges to the posterior mean") {
        const MatrixXd x = oracle::randn(40, 1, 10) * 2.0, xs = oracle::randn(5, 1, 11);
        const VectorXd y = x.col(0).array().sin().matrix() + 0.1 * oracle::randn(40, 1, 12);
        const KernelOracle k(rbf(1, 1.0), x, 0.05);
        const auto set = pathwise_sample(k, x, xs, y, dense_solver(k), 256, 512, 13);
        const VectorXd sd = set.sample_variance().cwiseSqrt();
        const VectorXd mean = posterior_mean(k, dense_solver(k), y)(xs);
        CHECK(oracle::rel(set.mean, mean) <= 1e-10);
        for (Index i = 0; i < 5; ++i) CHECK(std::abs(set.sample_mean()(i) - mean(i)) <= 4.0 * sd(i) / 16.0);
    }

    TEST_CASE("single-sample reproducibility") {
        const MatrixXd x = oracle::randn(10, 2, 1), xs = oracle::randn(3, 2, 2);
        const VectorXd y = oracle::randn(10, 1, 3);
        const KernelOracle k(rbf(2, 1.0), x, 0.1);
        const auto a = pathwise_sample(k, x, xs, y, dense_solver(k), 1, 64, 5);
        const auto b = pathwise_sample(k, x, xs, y, dense_solver(k), 1, 64, 5);
        CHECK(a.samples == b.samples);
        CHECK(a.num_samples() == 1);
    }

    TEST_CASE("metrics") {
        const VectorXd t = oracle::randn(7, 1, 1);
        CHECK(rmse(t, t) == 0.0);
        CHECK(rmse(t.array() + 0.3, t) == doctest::Approx(0.3));
        VectorXd zero = VectorXd::Zero(1), one = VectorXd::Ones(1);
        CHECK(mean_nll(zero, one, zero) == doctest::Approx(0.5 * std::log(2 * M_PI)));
        Index clamped = 0;
        const double v = mean_nll(zero, VectorXd::Constant(1, -1.0), zero, &clamped);
        CHECK(clamped == 1);
        CHECK(std::isfinite(v));
    }
}
