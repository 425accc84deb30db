#pragma once

// Reference computations written directly from the formulas, without going
// through the library's kernel tiles, Woodbury forms or iterative solvers.

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd randn(Eigen::Index r, Eigen::Index c, unsigned seed) {
    std::mt19937 g(seed);
    std::normal_distribution<double> nd;
    MatrixXd m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = nd(g);
    return m;
}

// Squared-exponential Gram matrix with isotropic lengthscale.
inline MatrixXd rbf_gram(const MatrixXd& a, const MatrixXd& b, double ell, double var = 1.0) {
    MatrixXd k(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            k(i, j) = var * std::exp(-0.5 * (a.row(i) - b.row(j)).squaredNorm() / (ell * ell));
    return k;
}

inline MatrixXd random_psd(Eigen::Index n, Eigen::Index rank, unsigned seed) {
    const MatrixXd g = randn(n, rank, seed);
    return g * g.transpose();
}

inline MatrixXd dense_solve(const MatrixXd& a, const MatrixXd& y) { return a.fullPivLu().solve(y); }

inline double det(const MatrixXd& a, const std::vector<Eigen::Index>& s) {
    MatrixXd sub(s.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j) sub(i, j) = a(s[i], s[j]);
    return sub.determinant();
}

inline double rel(const MatrixXd& a, const MatrixXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace oracle
