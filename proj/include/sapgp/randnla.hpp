#pragma once

#include <cstdint>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace sapgp {

using Index = Eigen::Index;

// Low-rank PSD approximation U diag(S) U^T with orthonormal U (b x r) and
// S sorted descending, S >= 0. An empty factor (r = 0) is allowed.
struct NystromFactor {
    Eigen::MatrixXd U;
    Eigen::VectorXd S;

    Index rank() const { return S.size(); }
    Index dim() const { return U.rows(); }
    static NystromFactor empty(Index dim) { return {Eigen::MatrixXd(dim, 0), Eigen::VectorXd(0)}; }
};

// Stabilized randomized Nystrom approximation of a symmetric PSD M from the
// sketch M * omega. Shifts the Gram matrix by eps * tr(omega^T M omega) before
// the Cholesky, takes a thin SVD of sketch * C^{-1}, then removes the shift.
// shift_scale multiplies that shift.
NystromFactor rand_nystrom(const Eigen::MatrixXd& sketch, const Eigen::MatrixXd& omega, Index rank,
                           double shift_scale = 1.0);
// Same, retrying with a 10x larger shift (up to 1e6x) while the Cholesky fails.
NystromFactor rand_nystrom_escalating(const Eigen::MatrixXd& sketch, const Eigen::MatrixXd& omega, Index rank);

// Gaussian p x r test matrix with orthonormalized columns.
Eigen::MatrixXd orthonormal_test_matrix(Index p, Index r, std::mt19937_64& rng);

// Applies (U S U^T + rho I)^{-1} through a Cholesky factor of rho S^{-1} + U^T U.
// Modes with S_i == 0 are pruned first; they are covered by the g / rho term.
// If that factorization fails the plain Woodbury form is used instead and
// used_fallback() reports it.
class NystromInverse {
public:
    NystromInverse(const NystromFactor& factor, double rho);

    Eigen::MatrixXd apply(const Eigen::MatrixXd& g) const;
    double rho() const { return rho_; }
    bool used_fallback() const { return fallback_; }

private:
    Eigen::MatrixXd U_;
    Eigen::VectorXd S_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double rho_;
    bool fallback_ = false;
};

Eigen::MatrixXd apply_inv(const NystromFactor& factor, double rho, const Eigen::MatrixXd& g);

// Plain Woodbury: U (S + rho)^{-1} U^T g + (g - U U^T g) / rho.
Eigen::MatrixXd apply_inv_woodbury(const NystromFactor& factor, double rho, const Eigen::MatrixXd& g);

// U (S + rho)^{-1/2} U^T v + (v - U U^T v) / sqrt(rho).
Eigen::MatrixXd apply_inv_sqrt(const NystromFactor& factor, double rho, const Eigen::MatrixXd& v);

using LinearMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Reciprocal of the top eigenvalue of (P + rho I)^{-1/2} H (P + rho I)^{-1/2},
// P = U S U^T, estimated by `iters` normalized power steps from a Gaussian
// start. The eigenvalue estimate is v^T w with v the unit iterate entering the
// last step and w its (unnormalized) image.
double rand_power_stepsize(const LinearMap& h_apply, const NystromFactor& factor, double rho, int iters,
                           std::uint64_t seed);

}  // namespace sapgp
