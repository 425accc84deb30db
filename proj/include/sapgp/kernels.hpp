#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sapgp {

using Index = Eigen::Index;

enum class KernelFamily { rbf, matern32, matern52 };

KernelFamily parse_kernel_family(std::string_view name);
std::string to_string(KernelFamily family);

// Stationary ARD kernel: one lengthscale per input dimension.
struct KernelSpec {
    KernelFamily family = KernelFamily::rbf;
    Eigen::VectorXd lengthscales;
    double variance = 1.0;

    void validate() const;
    Index dim() const { return lengthscales.size(); }
};

// Kernel value as a function of the scaled squared distance s.
//   rbf:      v exp(-s/2)
//   matern32: v (1 + sqrt(3) r) exp(-sqrt(3) r),          r = sqrt(s)
//   matern52: v (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r)
double kernel_from_sqdist(KernelFamily family, double variance, double s);

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& xp);

// Throws ContractError on duplicate or out-of-range indices.
void check_block_indices(std::span<const Index> rows, Index n);

// Rows of K are evaluated in column tiles of this width.
inline constexpr Index kKernelTileSize = 256;
// Dense materialization of K is refused above this size.
inline constexpr Index kDenseThreshold = 4096;

// Lazy access to K = k(X, X) for a fixed point set. K is never stored; every
// product re-evaluates the kernel tile by tile. Copies share the point set.
class KernelOracle {
public:
    KernelOracle(KernelSpec spec, const Eigen::MatrixXd& x, double likelihood_variance);

    Index size() const { return points_->cols(); }
    Index dim() const { return points_->rows(); }
    const KernelSpec& spec() const { return spec_; }
    double likelihood_variance() const { return lambda_; }

    double entry(Index i, Index j) const;

    // K[rows, :] * m, accumulated over column tiles in ascending order.
    Eigen::MatrixXd block_rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const;
    // K[rows, rows]. Each unordered pair is evaluated once.
    Eigen::MatrixXd block_block(std::span<const Index> rows) const;

    // K[rows, cols[begin, end)] * m[begin:end, :], the unit of column work.
    Eigen::MatrixXd column_tile_times(std::span<const Index> rows, Index begin, Index end,
                                      const Eigen::MatrixXd& m) const;
    // Row i of K[rows, rows] times omega, the unit of row work.
    Eigen::RowVectorXd block_row_times(std::span<const Index> rows, Index i, const Eigen::MatrixXd& omega) const;

    // k(x_star, X) * m for new points given in original (unscaled) coordinates.
    Eigen::MatrixXd cross_times(const Eigen::MatrixXd& x_star, const Eigen::MatrixXd& m) const;
    // k(x_star, X), dense. Only for small test sets.
    Eigen::MatrixXd cross(const Eigen::MatrixXd& x_star) const;
    // k(a, b) for arbitrary point sets in original coordinates.
    Eigen::MatrixXd cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) const;

    // Full K; throws ContractError above kDenseThreshold.
    Eigen::MatrixXd dense() const;

    Index num_tiles() const { return (size() + kKernelTileSize - 1) / kKernelTileSize; }

private:
    // Points in original coordinates (one per row) -> scaled, one per column.
    Eigen::MatrixXd scale(const Eigen::MatrixXd& x) const;
    void check_rows(std::span<const Index> rows) const;
    double scaled_entry(const double* a, const double* b) const;

    KernelSpec spec_;
    std::shared_ptr<const Eigen::MatrixXd> points_;  // x / lengthscale, stored d x n
    double lambda_;
};

}  // namespace sapgp
