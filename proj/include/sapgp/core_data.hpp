#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace sapgp {

using Index = Eigen::Index;

// Features, targets and the affine maps that were used to standardize them.
// A freshly loaded dataset carries identity statistics (mean 0, std 1).
struct Dataset {
    Eigen::MatrixXd features;  // n x d
    Eigen::VectorXd targets;   // n
    Eigen::VectorXd feature_means;
    Eigen::VectorXd feature_stds;
    double target_mean = 0.0;
    double target_std = 1.0;

    Dataset() = default;
    Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

    Index size() const { return features.rows(); }
    Index dim() const { return features.cols(); }

    // Maps standardized targets back to the original scale.
    Eigen::VectorXd destandardize_targets(const Eigen::VectorXd& t) const;
    // Applies this dataset's feature statistics to raw features.
    Eigen::MatrixXd standardize_features(const Eigen::MatrixXd& raw) const;
};

// Column selector: a header name or a zero-based column index.
using TargetColumn = std::variant<std::string, Index>;

// Reads a comma-separated file with an optional single header line.
// Throws ParseError (1-based row numbers, header counted) on malformed or
// non-finite input.
Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target_column);

// Per-column z-scoring with the sample (n-1) standard deviation. Constant
// columns, and every column when n == 1, get std := 1.
Dataset standardize(const Dataset& ds);

// Disjoint split with floor(n * test_fraction) (at least 1) test rows, chosen
// by a seeded permutation. Both parts are standardized with statistics of the
// raw train part only.
std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

// Row indices of the split, exposed for callers that need the partition.
struct SplitIndices {
    std::vector<Index> train;
    std::vector<Index> test;
};
SplitIndices split_indices(Index n, double test_fraction, std::uint64_t seed);

}  // namespace sapgp
