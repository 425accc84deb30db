#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sapgp/kernels.hpp"
#include "sapgp/operator.hpp"
#include "sapgp/solvers.hpp"

namespace sapgp {

// Eigenpairs of K (descending) with the regularizer of K_lambda = K + lambda I.
class SpectralBasis {
public:
    SpectralBasis(const Eigen::MatrixXd& k, double lambda);
    SpectralBasis(Eigen::VectorXd eigvals, Eigen::MatrixXd eigvecs, double lambda);

    Index size() const { return eigvals_.size(); }
    const Eigen::VectorXd& eigvals() const { return eigvals_; }
    const Eigen::MatrixXd& eigvecs() const { return eigvecs_; }
    double lambda() const { return lambda_; }
    // Eigenvalues of K_lambda.
    Eigen::VectorXd regularized_eigvals() const { return eigvals_.array() + lambda_; }

    // Q_l = V_l V_l^T as a dense matrix, and its action.
    Eigen::MatrixXd q(Index ell) const;
    Eigen::VectorXd project(const Eigen::VectorXd& x, Index ell) const;
    // K_lambda^{1/2} x.
    Eigen::VectorXd sqrt_apply(const Eigen::VectorXd& x) const;

private:
    Eigen::VectorXd eigvals_;
    Eigen::MatrixXd eigvecs_;
    double lambda_;
};

// lambda_i = scale * i^{-beta}, i = 1..n.
Eigen::VectorXd polynomial_spectrum(Index n, double beta, double scale = 1.0);
// lambda_i = ratio^{i-1}.
Eigen::VectorXd geometric_spectrum(Index n, double ratio);

enum class PlantMode { gaussian_targets, gaussian_solution };

// K = V diag(spectrum) V^T with a Haar-random rotation V, A = K + lambda I and
// a planted pair (w*, y = A w*). gaussian_targets draws y ~ N(0, A).
struct SyntheticSpectrumProblem {
    SyntheticSpectrumProblem(const Eigen::VectorXd& spectrum, double lambda, std::uint64_t seed,
                             PlantMode mode = PlantMode::gaussian_targets);

    Index size() const { return kernel.rows(); }
    DenseOperator op() const { return DenseOperator(kernel, lambda); }
    SpectralBasis basis() const { return SpectralBasis(spectrum, rotation, lambda); }

    Eigen::VectorXd spectrum;  // of K, descending
    double lambda;
    Eigen::MatrixXd rotation;
    Eigen::MatrixXd kernel;
    Eigen::VectorXd w_star;
    Eigen::VectorXd y;
    double y_norm_ainv_sq;     // y^T A^{-1} y = w*^T A w*
};

Eigen::MatrixXd haar_rotation(Index n, std::uint64_t seed);

struct SubspaceError {
    double rkhs;   // ||Q_l (w - w*)||_K^2
    double bound;  // ||Q_l (w - w*)||_{K_lambda}^2
};

SubspaceError subspace_error(const SpectralBasis& basis, const Eigen::VectorXd& w, const Eigen::VectorXd& w_star,
                             Index ell);

// ---------------------------------------------------------------- reports

struct Lemma2Report {
    Index n = 0;
    Index b = 0;
    Index num_samples = 0;
    Eigen::VectorXd diag;
    Eigen::VectorXd bound;
    Eigen::VectorXd stderr_;
    double max_offdiag = 0.0;
    double max_stderr = 0.0;
    bool diag_pass = false;
    bool offdiag_pass = false;
    bool pass() const { return diag_pass && offdiag_pass; }
    nlohmann::json to_json() const;
};

Lemma2Report verify_lemma2(const SyntheticSpectrumProblem& problem, Index b, Index num_samples, std::uint64_t seed);

struct GridPoint {
    Index t = 0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
    bool sublinear_branch = false;  // which branch of the min is active
    bool pass = false;
};

struct Theorem1Report {
    Index n = 0;
    Index b = 0;
    Index ell = 0;
    Index trials = 0;
    Index horizon = 0;
    SamplerKind sampler = SamplerKind::kdpp;
    double phi_b_ell = 0.0;
    double phi_b_n = 0.0;
    double y_norm_sq = 0.0;
    double crossover_t = 0.0;  // where the linear branch becomes the smaller one
    bool crossover_observed = false;
    bool assumption_held = false;  // lambda_l(E Pi) >= 2 lambda_n(E Pi)
    bool asserted = true;          // false for the uniform-sampling ablation
    std::vector<GridPoint> grid;
    bool pass() const;
    nlohmann::json to_json() const;
    std::string csv() const;
};

// Even t in {2, 4, 6, 8, 12, 16, 24, 32, ...} up to horizon, plus the horizon.
std::vector<Index> log_grid(Index horizon);

double theorem1_bound(const SmoothedCondition& phi, Index b, Index ell, Index t, double y_norm_sq);

// Tail-averaged exact SAP from zero with 2b-DPP blocks (or uniform blocks of
// size 2b for the ablation); compares E||Q_l(w_t - w*)||^2_{K_lambda} with the bound.
Theorem1Report verify_theorem1(const SyntheticSpectrumProblem& problem, Index b, Index ell, Index trials, Index horizon,
                               std::uint64_t seed, SamplerKind sampler = SamplerKind::kdpp,
                               Index projection_samples = 2000);

struct LinearRateReport {
    Index n = 0;
    Index b = 0;
    Index trials = 0;
    double lambda_min = 0.0;  // lambda_n of the Monte-Carlo E[Pi]
    double initial_error = 0.0;
    std::vector<GridPoint> grid;
    bool pass() const;
    nlohmann::json to_json() const;
};

LinearRateReport verify_linear_rate(const SyntheticSpectrumProblem& problem, Index b, Index trials, Index horizon,
                                    std::uint64_t seed, Index projection_samples = 2000);

struct Corollary1Report {
    Index n = 0;
    Index ell = 0;
    Index block = 0;  // DPP sample size, 4 ell
    double epsilon = 0.0;
    double constant = 0.0;
    Index horizon = 0;  // ceil(C (n / ell) / epsilon)
    Index trials = 0;
    Index successes = 0;
    std::vector<double> ratios;  // error / (epsilon * target) per trial
    double success_rate() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
    bool pass() const { return success_rate() >= 0.9; }
    nlohmann::json to_json() const;
};

Corollary1Report verify_corollary1(const SyntheticSpectrumProblem& problem, Index ell, double epsilon, double constant,
                                   Index trials, std::uint64_t seed);

// phi(multiple * ell, ell) of a spectrum.
double effective_rank_check(const Eigen::VectorXd& spectrum, Index ell, Index multiple = 2);

struct EffectiveRankReport {
    Index ell = 0;
    Index n = 0;
    double phi2_n = 0.0, phi2_4n = 0.0, phi4_n = 0.0, phi4_4n = 0.0;
    bool pass() const;
    nlohmann::json to_json() const;
};

// Compares phi(2l, l) and phi(4l, l) at n and 4n for lambda_i = eig(i).
EffectiveRankReport effective_rank_growth(const std::function<double(Index)>& eig, Index n, Index ell);

// Dense Gaussian posterior at test points (mean and covariance, n <= dense threshold).
struct DensePosterior {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};
DensePosterior dense_posterior(const KernelOracle& oracle, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_test);

struct PathwiseReport {
    Index n = 0;
    Index num_test = 0;
    Index num_samples = 0;
    double max_mean_z = 0.0;  // |mean error| / stderr, worst entry
    double max_cov_z = 0.0;
    bool pass() const { return max_mean_z <= 4.0 && max_cov_z <= 4.0; }
    nlohmann::json to_json() const;
};

PathwiseReport verify_pathwise(Index n, Index num_test, Index num_samples, Index num_features, std::uint64_t seed);

struct NystromReport {
    double reconstruction_rel = 0.0;
    double inverse_rel = 0.0;
    double sqrt_rel = 0.0;
    Index stepsize_within = 0;
    Index stepsize_trials = 0;
    bool pass() const;
    nlohmann::json to_json() const;
};

NystromReport verify_nystrom(std::uint64_t seed);

}  // namespace sapgp
