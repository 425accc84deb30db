#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>

#include <Eigen/Dense>

#include "sapgp/kernels.hpp"

namespace sapgp {

// phi(x) = sqrt(2 sigma^2 / q) cos(Omega x + b), with Omega drawn from the
// kernel's spectral density: Gaussian for rbf, multivariate t with 3 (matern32)
// or 5 (matern52) degrees of freedom. Frequencies are divided by the lengthscales.
class RandomFeatureMap {
public:
    RandomFeatureMap(const KernelSpec& spec, Index num_features, std::uint64_t seed);

    Index num_features() const { return frequencies_.rows(); }
    Index dim() const { return frequencies_.cols(); }
    const Eigen::MatrixXd& frequencies() const { return frequencies_; }
    const Eigen::VectorXd& phases() const { return phases_; }
    double scale() const { return scale_; }

    // Rows are points: returns |X| x q.
    Eigen::MatrixXd features(const Eigen::MatrixXd& x) const;

private:
    Eigen::MatrixXd frequencies_;  // q x d
    Eigen::VectorXd phases_;
    double scale_;
};

// f(x) = phi(x)^T theta with theta ~ N(0, I_q).
class PriorFunction {
public:
    PriorFunction(RandomFeatureMap map, std::uint64_t seed);

    Eigen::VectorXd operator()(const Eigen::MatrixXd& x) const;
    const Eigen::VectorXd& weights() const { return theta_; }
    const RandomFeatureMap& map() const { return map_; }

private:
    RandomFeatureMap map_;
    Eigen::VectorXd theta_;
};

PriorFunction sample_prior(const RandomFeatureMap& map, std::uint64_t seed);

// Solves (K + lambda I) W = R for a block of right-hand sides.
using SystemSolver = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

// m(X*) = k(X*, X) W.
class PosteriorMean {
public:
    PosteriorMean(KernelOracle oracle, Eigen::MatrixXd weights);

    Eigen::MatrixXd operator()(const Eigen::MatrixXd& x_star) const;
    const Eigen::MatrixXd& weights() const { return weights_; }

private:
    KernelOracle oracle_;
    Eigen::MatrixXd weights_;
};

PosteriorMean posterior_mean(const KernelOracle& oracle, const SystemSolver& solver, const Eigen::VectorXd& y);

struct PosteriorSampleSet {
    Eigen::VectorXd mean_weights;   // (K + lambda I)^{-1} y
    Eigen::MatrixXd weights;        // n x s, one solve per sample
    Eigen::MatrixXd prior_at_test;  // |X*| x s
    Eigen::MatrixXd samples;        // |X*| x s, f_n(X*)
    Eigen::VectorXd mean;           // k(X*, X) mean_weights

    Index num_samples() const { return samples.cols(); }
    Eigen::VectorXd sample_mean() const;
    Eigen::VectorXd sample_variance() const;
};

// Pathwise conditioning with the prior cross-covariance:
//   f_n(X*) = f(X*) + k(X*, X) (K + lambda I)^{-1} (y - f(X) - zeta),  zeta ~ N(0, lambda I).
// Sample i uses its own feature map and weights (substream "prior", index i)
// and noise (substream "zeta", index i). The mean system and all s sample
// systems are solved together as one block of s + 1 right-hand sides.
PosteriorSampleSet pathwise_sample(const KernelOracle& oracle, const Eigen::MatrixXd& x_train,
                                   const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y,
                                   const SystemSolver& solver, Index num_samples, Index num_features,
                                   std::uint64_t seed);

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth);

// Mean Gaussian negative log-likelihood; variances below 1e-12 are clamped and
// counted in *clamped when given.
double mean_nll(const Eigen::VectorXd& mean, const Eigen::VectorXd& var, const Eigen::VectorXd& truth,
                Index* clamped = nullptr);

// point_id,mean,variance[,sample_0..]
void write_predictions_csv(const std::filesystem::path& path, const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                           const Eigen::MatrixXd* samples = nullptr);

}  // namespace sapgp
