#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "sapgp/core_data.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

using namespace sapgp;
namespace fs = std::filesystem;

namespace {
fs::path write_tmp(const std::string& name, const std::string& text) {
    const auto p = fs::temp_directory_path() / ("sapgp_test_" + name);
    std::ofstream(p) << text;
    return p;
}
}  // namespace

TEST_SUITE("core_data") {
    TEST_CASE("load_csv shape and default last target column") {
        const auto p = write_tmp("plain.csv", "1,2,3\n4,5,6\n7,8,9\n");
        const Dataset ds = load_csv(p, Index{-1});
        CHECK(ds.size() == 3);
        CHECK(ds.dim() == 2);
        CHECK(ds.targets(2) == 9.0);
        CHECK(ds.features(1, 0) == 4.0);
    }

    TEST_CASE("load_csv named target column") {
        const auto p = write_tmp("named.csv", "a,y,b\n1,10,2\n3,30,4\n");
        const Dataset ds = load_csv(p, std::string("y"));
        CHECK(ds.dim() == 2);
        CHECK(ds.targets(0) == 10.0);
        CHECK(ds.targets(1) == 30.0);
        CHECK(ds.features(1, 1) == 4.0);
    }

    TEST_CASE("load_csv rejects NaN and names the row") {
        const auto p = write_tmp("nan.csv", "x,y\n1,2\nNaN,3\n");
        try {
            load_csv(p, Index{-1});
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.row() == 3);
        }
    }

    TEST_CASE("load_csv rejects ragged rows and unknown columns") {
        CHECK_THROWS_AS(load_csv(write_tmp("ragged.csv", "1,2\n3\n"), Index{-1}), ParseError);
        CHECK_THROWS_AS(load_csv(write_tmp("nocol.csv", "a,b\n1,2\n"), std::string("z")), ParseError);
    }

    TEST_CASE("standardize uses the sample standard deviation") {
        Eigen::MatrixXd x(2, 1);
        x << 1, 3;
        const Dataset s = standardize(Dataset(x, Eigen::VectorXd::Zero(2)));
        CHECK(s.features(0, 0) == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
        CHECK(s.features(1, 0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
        CHECK(s.feature_stds(0) == doctest::Approx(std::sqrt(2.0)));
    }

    TEST_CASE("standardize is idempotent and handles constant columns") {
        Rng rng = make_stream(3, "test");
        const Dataset once = standardize(Dataset(gaussian_matrix(20, 3, rng) * 4.0, gaussian_vector(20, rng)));
        const Dataset twice = standardize(Dataset(once.features, once.targets));
        CHECK((twice.features - once.features).cwiseAbs().maxCoeff() < 1e-8);
        CHECK((twice.targets - once.targets).cwiseAbs().maxCoeff() < 1e-8);

        Eigen::MatrixXd c(3, 1);
        c << 5, 5, 5;
        const Dataset s = standardize(Dataset(c, Eigen::Vector3d(1, 2, 3)));
        CHECK(s.features.cwiseAbs().maxCoeff() == 0.0);
        CHECK(s.feature_stds(0) == 1.0);
    }

    TEST_CASE("split sizes, disjointness and determinism") {
        const auto a = split_indices(10, 0.1, 7);
        CHECK(a.train.size() == 9);
        CHECK(a.test.size() == 1);
        CHECK(split_indices(3, 0.1, 1).test.size() == 1);
        std::set<Index> all(a.train.begin(), a.train.end());
        all.insert(a.test.begin(), a.test.end());
        CHECK(all.size() == 10);
        const auto b = split_indices(10, 0.1, 7);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
    }

    TEST_CASE("different seeds give different splits") {
        // With n=5 and 2 test rows there are 10 possible test sets; across 30
        // seed pairs at least one must differ unless the seed is ignored.
        int differ = 0;
        for (std::uint64_t s = 0; s < 30; ++s) {
            auto a = split_indices(5, 0.4, s).test;
            auto b = split_indices(5, 0.4, s + 1000).test;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            differ += a != b;
        }
        CHECK(differ >= 15);
    }

    TEST_CASE("train_test_split standardizes with train statistics only") {
        Rng rng = make_stream(11, "test");
        const Dataset raw(gaussian_matrix(40, 2, rng) * 3.0 + Eigen::MatrixXd::Constant(40, 2, 5.0),
                          gaussian_vector(40, rng));
        const auto [train, test] = train_test_split(raw, 0.25, 4);
        CHECK(train.size() == 30);
        CHECK(test.size() == 10);
        CHECK(train.features.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(test.feature_means.isApprox(train.feature_means));
        CHECK(test.target_std == train.target_std);
    }
}
