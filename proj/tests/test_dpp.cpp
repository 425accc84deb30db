#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "sapgp/dpp.hpp"
#include "sapgp/errors.hpp"

using namespace sapgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<Index>> subsets(Index n, Index k) {
    std::vector<std::vector<Index>> out;
    std::vector<Index> cur;
    std::function<void(Index)> rec = [&](Index start) {
        if (static_cast<Index>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (Index i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
    return out;
}

// Empirical subset frequencies against det(A_BB) / sum det, within 3 binomial sigmas.
void check_frequencies(const MatrixXd& a, Index k, int draws, std::uint64_t seed) {
    const DppModel model(a, k);
    const auto all = subsets(a.rows(), k);
    double total = 0.0;
    std::vector<double> w;
    for (const auto& s : all) total += w.emplace_back(oracle::det(a, s));
    std::map<std::vector<Index>, int> counts;
    for (int i = 0; i < draws; ++i) ++counts[sample_kdpp(model, seed * 1000003 + i)];
    for (std::size_t i = 0; i < all.size(); ++i) {
        const double p = w[i] / total;
        const double freq = static_cast<double>(counts[all[i]]) / draws;
        CHECK(std::abs(freq - p) <= 3.0 * std::sqrt(p * (1 - p) / draws) + 1e-12);
    }
}
}  // namespace

TEST_SUITE("dpp") {
    TEST_CASE("elementary symmetric table satisfies the recurrence") {
        const DppModel model(oracle::random_psd(7, 7, 2), 3);
        const MatrixXd& e = model.elementary_symmetric();
        const VectorXd& lam = model.eigvals();
        REQUIRE_FALSE(model.log_space());
        for (Index m = 0; m <= 7; ++m) CHECK(e(0, m) == 1.0);
        for (Index l = 1; l <= 3; ++l) {
            CHECK(e(l, 0) == 0.0);
            for (Index m = 1; m <= 7; ++m) CHECK(e(l, m) == e(l, m - 1) + lam(m - 1) * e(l - 1, m - 1));
        }
        const MatrixXd& v = model.eigvecs();
        CHECK((v.transpose() * v - MatrixXd::Identity(7, 7)).norm() < 1e-8);
    }

    TEST_CASE("k=1 on diag(3,1)") {
        MatrixXd a = MatrixXd::Zero(2, 2);
        a.diagonal() << 3.0, 1.0;
        const DppModel model(a, 1);
        const int draws = 100000;
        int zeros = 0;
        for (int i = 0; i < draws; ++i) zeros += sample_kdpp(model, i).front() == 0;
        const double sigma = std::sqrt(0.75 * 0.25 / draws);
        CHECK(std::abs(static_cast<double>(zeros) / draws - 0.75) <= 3 * sigma);
    }

    TEST_CASE("k=n returns every index") {
        const DppModel model(oracle::random_psd(5, 5, 1), 5);
        for (std::uint64_t s = 0; s < 20; ++s) CHECK(sample_kdpp(model, s) == std::vector<Index>{0, 1, 2, 3, 4});
    }

    TEST_CASE("subset frequencies match determinant weights") {
        check_frequencies(oracle::random_psd(4, 4, 7), 2, 40000, 1);
        check_frequencies(oracle::random_psd(5, 5, 8) + 0.1 * MatrixXd::Identity(5, 5), 3, 40000, 2);
    }

    TEST_CASE("ill-spread spectra switch to log space and still sample") {
        VectorXd lam(6);
        lam << 1e8, 1e3, 1, 1e-3, 1e-6, 1e-9;
        const DppModel model(lam, MatrixXd::Identity(6, 6), 2);
        CHECK(model.log_space());
        const auto s = sample_kdpp(model, 3);
        CHECK(s.size() == 2);
    }

    TEST_CASE("samples are deterministic in the seed and sorted") {
        const DppModel model(oracle::random_psd(30, 30, 4), 6);
        const auto a = sample_kdpp(model, 42);
        CHECK(a == sample_kdpp(model, 42));
        CHECK(std::is_sorted(a.begin(), a.end()));
        CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
    }

    TEST_CASE("sample size beyond the rank is rejected") {
        CHECK_THROWS_AS(DppModel(oracle::random_psd(6, 2, 1), 3), ContractError);
        CHECK_THROWS_AS(DppModel(oracle::random_psd(6, 6, 1), 7), ContractError);
    }

    TEST_CASE("single projections are idempotent with trace k") {
        const DppModel model(oracle::random_psd(12, 12, 5), 4);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const MatrixXd p = projection_matrix(model, sample_kdpp(model, s));
            CHECK((p * p - p).norm() <= 1e-8);
            CHECK(p.trace() == doctest::Approx(4.0).epsilon(1e-8));
        }
    }

    TEST_CASE("expected projection of the identity on three items") {
        const DppModel model(MatrixXd::Identity(3, 3), 2);
        const auto est = expected_projection_mc(model, 3000, 1);
        for (Index i = 0; i < 3; ++i)
            for (Index j = 0; j < 3; ++j) {
                const double target = i == j ? 2.0 / 3.0 : 0.0;
                CHECK(std::abs(est.mean(i, j) - target) <= 3 * est.stderr_(i, j) + 1e-12);
            }
    }

    TEST_CASE("off-diagonal noise shrinks with the sample count") {
        VectorXd lam(10);
        for (Index i = 0; i < 10; ++i) lam(i) = 1.0 / ((i + 1) * (i + 1));
        // A rotated diagonal spectrum, so single projections are not diagonal in the eigenbasis.
        const MatrixXd v = Eigen::HouseholderQR<MatrixXd>(oracle::randn(10, 10, 2)).householderQ();
        const DppModel model(MatrixXd(v * lam.asDiagonal() * v.transpose()), 4);
        const auto small = expected_projection_mc(model, 200, 3, false);
        const auto large = expected_projection_mc(model, 3200, 4, false);
        // 16x the samples should cut the typical off-diagonal size by about 4x.
        CHECK(large.max_offdiag() < 0.5 * small.max_offdiag());
        CHECK(large.max_stderr() < 0.5 * small.max_stderr());
    }

    TEST_CASE("lower bound and smoothed condition formulas") {
        CHECK(lemma2_lower_bound(VectorXd::Constant(4, 2.5), 1, 1) == doctest::Approx(0.25));
        VectorXd s(4);
        s << 4, 2, 1, 1;
        CHECK(lemma2_lower_bound(s, 2, 2) == doctest::Approx(2.0 / 3.0));
        VectorXd capped(4);
        capped << 3, 1, 0, 0;
        CHECK(lemma2_lower_bound(capped, 2, 1) == 1.0);
        CHECK(smoothed_condition(s, 2, 2) == doctest::Approx(0.5));
        CHECK(smoothed_condition(s, 4, 1) == 0.0);
        const SmoothedCondition phi(s);
        CHECK(phi.phi(2, 2) == doctest::Approx(0.5));
        CHECK(phi.phi(1, 1) == doctest::Approx(1.0));
    }

    TEST_CASE("phi is ordered like the reference eigenvalues") {
        VectorXd s(50);
        for (Index i = 0; i < 50; ++i) s(i) = std::pow(i + 1.0, -1.5);
        const SmoothedCondition phi(s);
        for (Index b : {1, 5, 20})
            for (Index p = 1; p < 50; ++p) CHECK(phi.phi(b, p) <= phi.phi(b, p + 1));
    }

    TEST_CASE("phi(2l, l) stays bounded under polynomial decay") {
        double prev = 0.0;
        for (Index n : {100, 400, 1600}) {
            VectorXd s(n);
            for (Index i = 0; i < n; ++i) s(i) = 1.0 / ((i + 1.0) * (i + 1.0));
            const double v = SmoothedCondition(s).phi(16, 8);
            CHECK(v >= prev);
            CHECK(v < 1.0);
            prev = v;
        }
    }
}
