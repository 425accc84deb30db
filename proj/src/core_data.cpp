#include "sapgp/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

namespace sapgp {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_real(const std::string& field, double& value) {
    if (field.empty()) return false;
    // strtod accepts "nan"/"inf" so non-finite values can be reported as such.
    char* end = nullptr;
    value = std::strtod(field.c_str(), &end);
    return end == field.c_str() + field.size();
}

void check_finite(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    SAPGP_REQUIRE(x.rows() >= 1 && x.cols() >= 1, "dataset needs n >= 1 and d >= 1");
    SAPGP_REQUIRE(y.size() == x.rows(), "targets length must equal number of rows");
    SAPGP_REQUIRE(x.allFinite() && y.allFinite(), "dataset contains non-finite values");
}

}  // namespace

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y)
    : features(std::move(x)),
      targets(std::move(y)),
      feature_means(Eigen::VectorXd::Zero(features.cols())),
      feature_stds(Eigen::VectorXd::Ones(features.cols())) {
    check_finite(features, targets);
}

Eigen::VectorXd Dataset::destandardize_targets(const Eigen::VectorXd& t) const {
    return (t.array() * target_std + target_mean).matrix();
}

Eigen::MatrixXd Dataset::standardize_features(const Eigen::MatrixXd& raw) const {
    SAPGP_REQUIRE(raw.cols() == dim(), "feature dimension mismatch");
    Eigen::MatrixXd out = raw;
    for (Index j = 0; j < out.cols(); ++j)
        out.col(j) = ((out.col(j).array() - feature_means(j)) / feature_stds(j)).matrix();
    return out;
}

Dataset load_csv(const std::filesystem::path& path, const TargetColumn& target_column) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> header;
    std::size_t arity = 0;
    std::string line;
    long row_number = 0;
    while (std::getline(in, line)) {
        ++row_number;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (arity == 0) arity = fields.size();
        if (fields.size() != arity)
            throw ParseError("expected " + std::to_string(arity) + " fields, got " + std::to_string(fields.size()),
                             row_number);
        std::vector<double> values(fields.size());
        bool numeric = true;
        for (std::size_t j = 0; j < fields.size() && numeric; ++j) numeric = parse_real(fields[j], values[j]);
        if (!numeric) {
            if (rows.empty() && header.empty()) {
                header = fields;
                continue;
            }
            throw ParseError("malformed number", row_number);
        }
        for (double v : values)
            if (!std::isfinite(v)) throw ParseError("non-finite value rejected", row_number);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no data rows in " + path.string(), row_number);
    if (arity < 2) throw ParseError("need at least one feature column and a target column", 1);

    Index target = -1;
    if (const auto* name = std::get_if<std::string>(&target_column)) {
        const auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw ParseError("target column '" + *name + "' not found in header", 1);
        target = static_cast<Index>(it - header.begin());
    } else {
        target = std::get<Index>(target_column);
        if (target < 0) target += static_cast<Index>(arity);
        if (target < 0 || target >= static_cast<Index>(arity))
            throw ParseError("target column index out of range", 1);
    }

    const Index n = static_cast<Index>(rows.size());
    const Index d = static_cast<Index>(arity) - 1;
    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
        Index c = 0;
        for (Index j = 0; j < static_cast<Index>(arity); ++j) {
            if (j == target)
                y(i) = rows[i][j];
            else
                x(i, c++) = rows[i][j];
        }
    }
    return Dataset(std::move(x), std::move(y));
}

namespace {

// Sample mean and (n-1) std; std := 1 for constant columns or n == 1.
std::pair<double, double> moments(const Eigen::Ref<const Eigen::VectorXd>& v) {
    const double mean = v.mean();
    if (v.size() < 2) return {mean, 1.0};
    const double var = (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
    const double sd = std::sqrt(var);
    if (!(sd > 0.0) || sd <= 1e-300) return {mean, 1.0};
    return {mean, sd};
}

// Composes the new standardization with whatever `ds` already carried so that
// destandardize_targets always maps back to the original units.
Dataset apply_stats(const Dataset& ds, const Eigen::VectorXd& means, const Eigen::VectorXd& stds, double tmean,
                    double tstd) {
    Dataset out;
    out.features = ds.features;
    for (Index j = 0; j < out.features.cols(); ++j)
        out.features.col(j) = ((out.features.col(j).array() - means(j)) / stds(j)).matrix();
    out.targets = ((ds.targets.array() - tmean) / tstd).matrix();
    out.feature_means = ds.feature_means.array() + ds.feature_stds.array() * means.array();
    out.feature_stds = ds.feature_stds.array() * stds.array();
    out.target_mean = ds.target_mean + ds.target_std * tmean;
    out.target_std = ds.target_std * tstd;
    return out;
}

}  // namespace

Dataset standardize(const Dataset& ds) {
    const Index d = ds.dim();
    Eigen::VectorXd means(d), stds(d);
    for (Index j = 0; j < d; ++j) std::tie(means(j), stds(j)) = moments(ds.features.col(j));
    const auto [tmean, tstd] = moments(ds.targets);
    return apply_stats(ds, means, stds, tmean, tstd);
}

SplitIndices split_indices(Index n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw ConfigError("test_fraction must lie in (0, 1)");
    const Index n_test = std::max<Index>(1, static_cast<Index>(std::floor(static_cast<double>(n) * test_fraction)));
    if (n_test >= n) throw ConfigError("split leaves no training rows");

    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    Rng rng = make_stream(seed, "split");
    for (Index i = n - 1; i > 0; --i) {
        std::uniform_int_distribution<Index> pick(0, i);
        std::swap(perm[i], perm[pick(rng)]);
    }
    SplitIndices out;
    out.test.assign(perm.begin(), perm.begin() + n_test);
    out.train.assign(perm.begin() + n_test, perm.end());
    std::sort(out.test.begin(), out.test.end());
    std::sort(out.train.begin(), out.train.end());
    return out;
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    const auto idx = split_indices(ds.size(), test_fraction, seed);
    auto take = [&](const std::vector<Index>& rows) {
        Dataset part;
        part.features = ds.features(rows, Eigen::all);
        part.targets = ds.targets(rows);
        part.feature_means = ds.feature_means;
        part.feature_stds = ds.feature_stds;
        part.target_mean = ds.target_mean;
        part.target_std = ds.target_std;
        return part;
    };
    const Dataset train_raw = take(idx.train);
    const Dataset test_raw = take(idx.test);

    const Index d = ds.dim();
    Eigen::VectorXd means(d), stds(d);
    for (Index j = 0; j < d; ++j) std::tie(means(j), stds(j)) = moments(train_raw.features.col(j));
    const auto [tmean, tstd] = moments(train_raw.targets);
    return {apply_stats(train_raw, means, stds, tmean, tstd), apply_stats(test_raw, means, stds, tmean, tstd)};
}

}  // namespace sapgp
