#include <doctest.h>

#include "oracles.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/randnla.hpp"

using namespace sapgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
NystromFactor nystrom_of(const MatrixXd& m, Index r, unsigned seed) {
    const MatrixXd omega = oracle::randn(m.rows(), r, seed);
    return rand_nystrom(m * omega, omega, r);
}
MatrixXd dense_of(const NystromFactor& f, double rho) {
    return f.U * f.S.asDiagonal() * f.U.transpose() + rho * MatrixXd::Identity(f.dim(), f.dim());
}
// Top eigenvalue of P^{-1/2} H P^{-1/2} by a dense generalized eigensolve.
double dense_top(const MatrixXd& h, const MatrixXd& p) {
    Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(h, p);
    return es.eigenvalues().maxCoeff();
}
}  // namespace

TEST_SUITE("randnla") {
    TEST_CASE("identity matrix gives unit eigenvalues and an orthoprojection") {
        const auto f = nystrom_of(MatrixXd::Identity(12, 12), 5, 1);
        CHECK((f.S.array() - 1.0).abs().maxCoeff() < 1e-8);
        const MatrixXd p = f.U * f.U.transpose();
        CHECK((p * p - p).norm() < 1e-8);
        CHECK(p.trace() == doctest::Approx(5.0));
        CHECK((f.U.transpose() * f.U - MatrixXd::Identity(5, 5)).norm() < 1e-8);
    }

    TEST_CASE("full-rank sketch reconstructs exactly") {
        const MatrixXd m = oracle::random_psd(20, 20, 3) + 0.1 * MatrixXd::Identity(20, 20);
        const auto f = nystrom_of(m, 20, 4);
        CHECK(oracle::rel(dense_of(f, 0.0), m) < 1e-8);
        for (Index i = 1; i < f.rank(); ++i) CHECK(f.S(i - 1) >= f.S(i));
        CHECK(f.S.minCoeff() >= 0.0);
    }

    TEST_CASE("zero matrix gives a zero spectrum") {
        const auto f = nystrom_of(MatrixXd::Zero(6, 6), 3, 1);
        CHECK(f.S.norm() == 0.0);
        CHECK(f.rank() == 3);
    }

    TEST_CASE("rank-deficient test matrix is rejected") {
        MatrixXd omega = oracle::randn(6, 3, 2);
        omega.col(2) = omega.col(1);
        CHECK_THROWS_AS(rand_nystrom(omega, omega, 3), ContractError);
    }

    TEST_CASE("apply_inv edge cases and dense agreement") {
        const VectorXd g = oracle::randn(8, 1, 1);
        CHECK(apply_inv(NystromFactor::empty(8), 2.0, g).isApprox(g / 2.0));
        const auto f = nystrom_of(oracle::random_psd(8, 3, 5), 3, 6);
        CHECK(apply_inv(f, 0.3, VectorXd::Zero(8)).norm() == 0.0);
        const MatrixXd rhs = oracle::randn(8, 4, 7);
        CHECK(oracle::rel(apply_inv(f, 0.3, rhs), oracle::dense_solve(dense_of(f, 0.3), rhs)) < 1e-10);
        CHECK(oracle::rel(apply_inv_woodbury(f, 0.3, rhs), oracle::dense_solve(dense_of(f, 0.3), rhs)) < 1e-10);
    }

    TEST_CASE("zero modes are pruned without touching the result") {
        NystromFactor f = nystrom_of(oracle::random_psd(10, 4, 2), 4, 3);
        f.S(3) = 0.0;
        const NystromInverse inv(f, 0.5);
        CHECK_FALSE(inv.used_fallback());
        const MatrixXd rhs = oracle::randn(10, 2, 1);
        CHECK(oracle::rel(inv.apply(rhs), oracle::dense_solve(dense_of(f, 0.5), rhs)) < 1e-10);
    }

    TEST_CASE("inverse square root branches") {
        MatrixXd q = Eigen::HouseholderQR<MatrixXd>(oracle::randn(7, 7, 1)).householderQ();
        const NystromFactor f{q.leftCols(3), VectorXd::Constant(3, 4.0)};
        const VectorXd in_range = q.leftCols(3) * oracle::randn(3, 1, 2);
        const VectorXd orth = q.rightCols(4) * oracle::randn(4, 1, 3);
        CHECK(apply_inv_sqrt(f, 0.5, in_range).isApprox(in_range / std::sqrt(4.5), 1e-12));
        CHECK(apply_inv_sqrt(f, 0.5, orth).isApprox(orth / std::sqrt(0.5), 1e-12));

        const auto g = nystrom_of(oracle::random_psd(16, 6, 8), 6, 9);
        const MatrixXd v = oracle::randn(16, 3, 10);
        CHECK(oracle::rel(apply_inv_sqrt(g, 0.2, apply_inv_sqrt(g, 0.2, v)), apply_inv_woodbury(g, 0.2, v)) < 1e-10);
    }

    TEST_CASE("powering on trivial operators") {
        const LinearMap two = [](const VectorXd& v) { return VectorXd(2.0 * v); };
        CHECK(rand_power_stepsize(two, NystromFactor::empty(5), 1.0, 10, 1) == doctest::Approx(0.5).epsilon(1e-12));

        const auto f = nystrom_of(oracle::random_psd(10, 4, 1), 4, 2);
        const MatrixXd h = dense_of(f, 0.7);
        const LinearMap exact = [&](const VectorXd& v) { return VectorXd(h * v); };
        CHECK(std::abs(rand_power_stepsize(exact, f, 0.7, 10, 3) - 1.0) < 1e-6);
    }

    TEST_CASE("powering is within 10 percent of the dense stepsize on most seeds") {
        int within = 0;
        for (unsigned trial = 0; trial < 100; ++trial) {
            const MatrixXd k = oracle::random_psd(16, 16, 1000 + trial) / 16.0;
            const double lambda = 1e-2;
            const MatrixXd h = k + lambda * MatrixXd::Identity(16, 16);
            const auto f = nystrom_of(k, 8, 2000 + trial);
            const double rho = f.S(7) + lambda;
            const LinearMap op = [&](const VectorXd& v) { return VectorXd(h * v); };
            const double eta = rand_power_stepsize(op, f, rho, 10, trial);
            const double exact = 1.0 / dense_top(h, dense_of(f, rho));
            within += std::abs(eta - exact) <= 0.1 * exact;
        }
        CHECK(within >= 95);
    }
}
