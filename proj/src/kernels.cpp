#include "sapgp/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "sapgp/errors.hpp"

namespace sapgp {

KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "rbf") return KernelFamily::rbf;
    if (name == "matern32") return KernelFamily::matern32;
    if (name == "matern52") return KernelFamily::matern52;
    throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::rbf: return "rbf";
        case KernelFamily::matern32: return "matern32";
        case KernelFamily::matern52: return "matern52";
    }
    return "unknown";
}

void KernelSpec::validate() const {
    SAPGP_REQUIRE(lengthscales.size() >= 1, "kernel needs at least one lengthscale");
    SAPGP_REQUIRE((lengthscales.array() > 0.0).all() && lengthscales.allFinite(), "lengthscales must be positive");
    SAPGP_REQUIRE(variance > 0.0 && std::isfinite(variance), "kernel variance must be positive");
}

double kernel_from_sqdist(KernelFamily family, double variance, double s) {
    switch (family) {
        case KernelFamily::rbf: return variance * std::exp(-0.5 * s);
        case KernelFamily::matern32: {
            const double r = std::sqrt(3.0 * s);
            return variance * (1.0 + r) * std::exp(-r);
        }
        case KernelFamily::matern52: {
            const double r = std::sqrt(5.0 * s);
            return variance * (1.0 + r + r * r / 3.0) * std::exp(-r);
        }
    }
    return 0.0;
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& xp) {
    SAPGP_REQUIRE(x.size() == spec.dim() && xp.size() == spec.dim(), "kernel_eval: dimension mismatch");
    double s = 0.0;
    for (Index j = 0; j < x.size(); ++j) {
        const double diff = x(j) / spec.lengthscales(j) - xp(j) / spec.lengthscales(j);
        s += diff * diff;
    }
    return kernel_from_sqdist(spec.family, spec.variance, s);
}

KernelOracle::KernelOracle(KernelSpec spec, const Eigen::MatrixXd& x, double likelihood_variance)
    : spec_(std::move(spec)), lambda_(likelihood_variance) {
    spec_.validate();
    SAPGP_REQUIRE(x.cols() == spec_.dim(), "feature dimension does not match the number of lengthscales");
    SAPGP_REQUIRE(x.rows() >= 1, "kernel oracle needs at least one point");
    SAPGP_REQUIRE(likelihood_variance >= 0.0, "likelihood variance must be nonnegative");
    points_ = std::make_shared<const Eigen::MatrixXd>(scale(x));
}

Eigen::MatrixXd KernelOracle::scale(const Eigen::MatrixXd& x) const {
    SAPGP_REQUIRE(x.cols() == spec_.dim(), "feature dimension mismatch");
    Eigen::MatrixXd out(x.cols(), x.rows());
    for (Index i = 0; i < x.rows(); ++i)
        for (Index j = 0; j < x.cols(); ++j) out(j, i) = x(i, j) / spec_.lengthscales(j);
    return out;
}

double KernelOracle::scaled_entry(const double* a, const double* b) const {
    const Index d = dim();
    double s = 0.0;
    for (Index j = 0; j < d; ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return kernel_from_sqdist(spec_.family, spec_.variance, s);
}

void check_block_indices(std::span<const Index> rows, Index n) {
    std::vector<Index> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end());
    SAPGP_REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(), "duplicate index in block");
    SAPGP_REQUIRE(sorted.empty() || (sorted.front() >= 0 && sorted.back() < n), "block index out of range");
}

void KernelOracle::check_rows(std::span<const Index> rows) const { check_block_indices(rows, size()); }

double KernelOracle::entry(Index i, Index j) const {
    SAPGP_REQUIRE(i >= 0 && i < size() && j >= 0 && j < size(), "entry index out of range");
    const auto& p = *points_;
    return scaled_entry(p.col(i).data(), p.col(j).data());
}

Eigen::MatrixXd KernelOracle::column_tile_times(std::span<const Index> rows, Index begin, Index end,
                                                const Eigen::MatrixXd& m) const {
    const auto& p = *points_;
    const Index b = static_cast<Index>(rows.size());
    Eigen::MatrixXd tile(b, end - begin);
    for (Index c = begin; c < end; ++c) {
        const double* pc = p.col(c).data();
        for (Index r = 0; r < b; ++r) tile(r, c - begin) = scaled_entry(p.col(rows[r]).data(), pc);
    }
    return tile * m.middleRows(begin, end - begin);
}

Eigen::MatrixXd KernelOracle::block_rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const {
    check_rows(rows);
    SAPGP_REQUIRE(m.rows() == size(), "block_rows_times: right-hand side must have n rows");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Index>(rows.size()), m.cols());
    for (Index t = 0; t < num_tiles(); ++t) {
        const Index begin = t * kKernelTileSize;
        const Index end = std::min(size(), begin + kKernelTileSize);
        if (t == 0)
            out = column_tile_times(rows, begin, end, m);
        else
            out += column_tile_times(rows, begin, end, m);
    }
    return out;
}

Eigen::MatrixXd KernelOracle::block_block(std::span<const Index> rows) const {
    check_rows(rows);
    const auto& p = *points_;
    const Index b = static_cast<Index>(rows.size());
    Eigen::MatrixXd out(b, b);
    for (Index j = 0; j < b; ++j) {
        out(j, j) = spec_.variance;
        for (Index i = j + 1; i < b; ++i) {
            const double v = scaled_entry(p.col(rows[i]).data(), p.col(rows[j]).data());
            out(i, j) = v;
            out(j, i) = v;
        }
    }
    return out;
}

Eigen::RowVectorXd KernelOracle::block_row_times(std::span<const Index> rows, Index i,
                                                 const Eigen::MatrixXd& omega) const {
    const auto& p = *points_;
    const Index b = static_cast<Index>(rows.size());
    Eigen::RowVectorXd krow(b);
    const double* pi = p.col(rows[i]).data();
    for (Index j = 0; j < b; ++j) krow(j) = scaled_entry(pi, p.col(rows[j]).data());
    return krow * omega;
}

Eigen::MatrixXd KernelOracle::cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const {
    const Eigen::MatrixXd sa = scale(a);
    const Eigen::MatrixXd sb = scale(b);
    Eigen::MatrixXd out(sa.cols(), sb.cols());
    for (Index j = 0; j < sb.cols(); ++j)
        for (Index i = 0; i < sa.cols(); ++i) out(i, j) = scaled_entry(sa.col(i).data(), sb.col(j).data());
    return out;
}

Eigen::MatrixXd KernelOracle::cross(const Eigen::MatrixXd& x_star) const {
    const Eigen::MatrixXd s = scale(x_star);
    const auto& p = *points_;
    Eigen::MatrixXd out(s.cols(), size());
    for (Index j = 0; j < size(); ++j)
        for (Index i = 0; i < s.cols(); ++i) out(i, j) = scaled_entry(s.col(i).data(), p.col(j).data());
    return out;
}

Eigen::MatrixXd KernelOracle::cross_times(const Eigen::MatrixXd& x_star, const Eigen::MatrixXd& m) const {
    SAPGP_REQUIRE(m.rows() == size(), "cross_times: right-hand side must have n rows");
    const Eigen::MatrixXd s = scale(x_star);
    const auto& p = *points_;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.cols(), m.cols());
    Eigen::MatrixXd tile;
    for (Index begin = 0; begin < size(); begin += kKernelTileSize) {
        const Index end = std::min(size(), begin + kKernelTileSize);
        tile.resize(s.cols(), end - begin);
        for (Index c = begin; c < end; ++c)
            for (Index r = 0; r < s.cols(); ++r) tile(r, c - begin) = scaled_entry(s.col(r).data(), p.col(c).data());
        out.noalias() += tile * m.middleRows(begin, end - begin);
    }
    return out;
}

Eigen::MatrixXd KernelOracle::dense() const {
    SAPGP_REQUIRE(size() <= kDenseThreshold, "refusing to materialize K above the dense threshold");
    std::vector<Index> all(static_cast<std::size_t>(size()));
    for (Index i = 0; i < size(); ++i) all[i] = i;
    return block_block(all);
}

}  // namespace sapgp
