#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sapgp {

using Index = Eigen::Index;

// The solvers' view of a regularized system A = K + lambda I with K symmetric
// PSD. Only block products are required; K itself may never exist in memory.
class BlockOperator {
public:
    virtual ~BlockOperator() = default;

    virtual Index size() const = 0;
    virtual double regularizer() const = 0;

    // K[rows, :] * m (no regularizer).
    virtual Eigen::MatrixXd rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const = 0;
    // K[rows, rows] * omega.
    virtual Eigen::MatrixXd block_times(std::span<const Index> rows, const Eigen::MatrixXd& omega) const = 0;
    // K[rows, rows], dense.
    virtual Eigen::MatrixXd block(std::span<const Index> rows) const = 0;

    // (K + lambda I) m over all rows.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& m) const;
    // ||(K + lambda I) w - y||_F.
    double residual_norm(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y) const;

    std::vector<Index> all_rows() const;
};

// Explicit K held in memory; used for synthetic-spectrum problems and tests.
class DenseOperator final : public BlockOperator {
public:
    DenseOperator(Eigen::MatrixXd k, double lambda);

    Index size() const override { return k_.rows(); }
    double regularizer() const override { return lambda_; }
    Eigen::MatrixXd rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const override;
    Eigen::MatrixXd block_times(std::span<const Index> rows, const Eigen::MatrixXd& omega) const override;
    Eigen::MatrixXd block(std::span<const Index> rows) const override;

    const Eigen::MatrixXd& matrix() const { return k_; }

private:
    Eigen::MatrixXd k_;
    double lambda_;
};

}  // namespace sapgp
