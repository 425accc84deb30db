#include "sapgp/gp.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

namespace sapgp {

RandomFeatureMap::RandomFeatureMap(const KernelSpec& spec, Index num_features, std::uint64_t seed) {
    spec.validate();
    SAPGP_REQUIRE(num_features >= 1, "need at least one random feature");
    const Index d = spec.dim();
    Rng rng = make_stream(seed, "features");
    frequencies_ = gaussian_matrix(num_features, d, rng);
    if (spec.family != KernelFamily::rbf) {
        const double df = spec.family == KernelFamily::matern32 ? 3.0 : 5.0;
        std::chi_squared_distribution<double> chi2(df);
        for (Index i = 0; i < num_features; ++i) frequencies_.row(i) *= std::sqrt(df / chi2(rng));
    }
    for (Index j = 0; j < d; ++j) frequencies_.col(j) /= spec.lengthscales(j);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    phases_.resize(num_features);
    for (Index i = 0; i < num_features; ++i) phases_(i) = phase(rng);
    scale_ = std::sqrt(2.0 * spec.variance / static_cast<double>(num_features));
}

Eigen::MatrixXd RandomFeatureMap::features(const Eigen::MatrixXd& x) const {
    SAPGP_REQUIRE(x.cols() == dim(), "feature dimension mismatch");
    Eigen::MatrixXd arg = x * frequencies_.transpose();
    arg.rowwise() += phases_.transpose();
    return scale_ * arg.array().cos().matrix();
}

PriorFunction::PriorFunction(RandomFeatureMap map, std::uint64_t seed) : map_(std::move(map)) {
    Rng rng = make_stream(seed, "theta");
    theta_ = gaussian_vector(map_.num_features(), rng);
}

Eigen::VectorXd PriorFunction::operator()(const Eigen::MatrixXd& x) const { return map_.features(x) * theta_; }

PriorFunction sample_prior(const RandomFeatureMap& map, std::uint64_t seed) { return PriorFunction(map, seed); }

PosteriorMean::PosteriorMean(KernelOracle oracle, Eigen::MatrixXd weights)
    : oracle_(std::move(oracle)), weights_(std::move(weights)) {
    SAPGP_REQUIRE(weights_.rows() == oracle_.size(), "posterior weights must have n rows");
}

Eigen::MatrixXd PosteriorMean::operator()(const Eigen::MatrixXd& x_star) const {
    return oracle_.cross_times(x_star, weights_);
}

PosteriorMean posterior_mean(const KernelOracle& oracle, const SystemSolver& solver, const Eigen::VectorXd& y) {
    SAPGP_REQUIRE(y.size() == oracle.size(), "targets must have n entries");
    return PosteriorMean(oracle, solver(y));
}

Eigen::VectorXd PosteriorSampleSet::sample_mean() const { return samples.rowwise().mean(); }

Eigen::VectorXd PosteriorSampleSet::sample_variance() const {
    const Index s = num_samples();
    SAPGP_REQUIRE(s >= 2, "sample variance needs at least two samples");
    const Eigen::MatrixXd centered = samples.colwise() - sample_mean();
    return centered.rowwise().squaredNorm() / static_cast<double>(s - 1);
}

PosteriorSampleSet pathwise_sample(const KernelOracle& oracle, const Eigen::MatrixXd& x_train,
                                   const Eigen::MatrixXd& x_test, const Eigen::VectorXd& y,
                                   const SystemSolver& solver, Index num_samples, Index num_features,
                                   std::uint64_t seed) {
    const Index n = oracle.size();
    SAPGP_REQUIRE(x_train.rows() == n && y.size() == n, "training data must match the oracle");
    SAPGP_REQUIRE(num_samples >= 0, "sample count must be nonnegative");
    const Index s = num_samples;
    const Index nt = x_test.rows();
    const double lambda = oracle.likelihood_variance();

    PosteriorSampleSet out;
    out.prior_at_test.resize(nt, s);
    Eigen::MatrixXd rhs(n, s + 1);
    rhs.col(0) = y;
    for (Index i = 0; i < s; ++i) {
        const auto idx = static_cast<std::uint64_t>(i);
        const RandomFeatureMap map(oracle.spec(), num_features, derive_seed(seed, "prior", idx));
        const PriorFunction f(map, derive_seed(seed, "prior", idx));
        Rng zeta_rng = make_stream(seed, "zeta", idx);
        const Eigen::VectorXd zeta = std::sqrt(lambda) * gaussian_vector(n, zeta_rng);
        rhs.col(i + 1) = y - f(x_train) - zeta;
        out.prior_at_test.col(i) = f(x_test);
    }

    const Eigen::MatrixXd alpha = solver(rhs);
    SAPGP_REQUIRE(alpha.rows() == n && alpha.cols() == s + 1, "solver returned the wrong shape");
    if (!alpha.allFinite()) throw NumericalError("pathwise solve produced non-finite weights");
    const Eigen::MatrixXd at_test = oracle.cross_times(x_test, alpha);

    out.mean_weights = alpha.col(0);
    out.weights = alpha.rightCols(s);
    out.mean = at_test.col(0);
    out.samples = out.prior_at_test + at_test.rightCols(s);
    return out;
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
    SAPGP_REQUIRE(pred.size() == truth.size() && pred.size() > 0, "rmse needs equal nonempty vectors");
    return std::sqrt((pred - truth).squaredNorm() / static_cast<double>(pred.size()));
}

double mean_nll(const Eigen::VectorXd& mean, const Eigen::VectorXd& var, const Eigen::VectorXd& truth,
                Index* clamped) {
    SAPGP_REQUIRE(mean.size() == truth.size() && var.size() == truth.size() && truth.size() > 0,
                  "mean_nll needs equal nonempty vectors");
    constexpr double kFloor = 1e-12;
    Index low = 0;
    double total = 0.0;
    for (Index i = 0; i < truth.size(); ++i) {
        double v = var(i);
        if (!(v >= kFloor)) {
            v = kFloor;
            ++low;
        }
        const double r = truth(i) - mean(i);
        total += 0.5 * std::log(2.0 * std::numbers::pi * v) + r * r / (2.0 * v);
    }
    if (clamped) *clamped = low;
    return total / static_cast<double>(truth.size());
}

void write_predictions_csv(const std::filesystem::path& path, const Eigen::VectorXd& mean, const Eigen::VectorXd& var,
                           const Eigen::MatrixXd* samples) {
    SAPGP_REQUIRE(mean.size() == var.size(), "mean and variance sizes differ");
    if (samples) SAPGP_REQUIRE(samples->rows() == mean.size(), "sample rows must match the test points");
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << std::setprecision(17) << "point_id,mean,variance";
    if (samples)
        for (Index j = 0; j < samples->cols(); ++j) f << ",sample_" << j;
    f << '\n';
    for (Index i = 0; i < mean.size(); ++i) {
        f << i << ',' << mean(i) << ',' << var(i);
        if (samples)
            for (Index j = 0; j < samples->cols(); ++j) f << ',' << (*samples)(i, j);
        f << '\n';
    }
}

}  // namespace sapgp
