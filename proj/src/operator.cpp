#include "sapgp/operator.hpp"

#include <algorithm>
#include <numeric>

#include "sapgp/errors.hpp"

namespace sapgp {

std::vector<Index> BlockOperator::all_rows() const {
    std::vector<Index> rows(static_cast<std::size_t>(size()));
    std::iota(rows.begin(), rows.end(), Index{0});
    return rows;
}

Eigen::MatrixXd BlockOperator::apply(const Eigen::MatrixXd& m) const {
    Eigen::MatrixXd out = rows_times(all_rows(), m);
    out += regularizer() * m;
    return out;
}

double BlockOperator::residual_norm(const Eigen::MatrixXd& w, const Eigen::MatrixXd& y) const {
    return (apply(w) - y).norm();
}

DenseOperator::DenseOperator(Eigen::MatrixXd k, double lambda) : k_(std::move(k)), lambda_(lambda) {
    SAPGP_REQUIRE(k_.rows() == k_.cols(), "DenseOperator needs a square matrix");
    SAPGP_REQUIRE(lambda_ >= 0.0, "regularizer must be nonnegative");
}

Eigen::MatrixXd DenseOperator::rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const {
    SAPGP_REQUIRE(m.rows() == size(), "rows_times: right-hand side must have n rows");
    if (static_cast<Index>(rows.size()) == size() && std::is_sorted(rows.begin(), rows.end()) &&
        rows.front() == 0 && rows.back() == size() - 1)
        return k_ * m;
    const std::vector<Index> r(rows.begin(), rows.end());
    return k_(r, Eigen::all) * m;
}

Eigen::MatrixXd DenseOperator::block_times(std::span<const Index> rows, const Eigen::MatrixXd& omega) const {
    return block(rows) * omega;
}

Eigen::MatrixXd DenseOperator::block(std::span<const Index> rows) const {
    const std::vector<Index> r(rows.begin(), rows.end());
    return k_(r, r);
}

}  // namespace sapgp
