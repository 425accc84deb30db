#include "sapgp/dpp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

namespace sapgp {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

void check_descending(const Eigen::VectorXd& spectrum) {
    SAPGP_REQUIRE(spectrum.size() >= 1, "empty spectrum");
    for (Index i = 1; i < spectrum.size(); ++i)
        SAPGP_REQUIRE(spectrum(i) <= spectrum(i - 1), "spectrum must be sorted descending");
}

}  // namespace

DppModel::DppModel(const Eigen::MatrixXd& a, Index sample_size) : k_(sample_size) {
    SAPGP_REQUIRE(a.rows() == a.cols() && a.rows() >= 1, "DPP kernel must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("DPP kernel eigendecomposition failed");
    eigvals_ = eig.eigenvalues().reverse();
    eigvecs_ = eig.eigenvectors().rowwise().reverse();
    // Roundoff can leave a tiny negative eigenvalue on a PSD input.
    const double floor = -1e-12 * std::max(1.0, eigvals_(0));
    SAPGP_REQUIRE(eigvals_.minCoeff() >= floor, "DPP kernel must be positive semidefinite");
    // Eigenvalues at roundoff level count as zero so that the rank check is meaningful.
    const double tol = static_cast<double>(a.rows()) * std::numeric_limits<double>::epsilon() * std::max(0.0, eigvals_(0));
    eigvals_ = (eigvals_.array() > tol).select(eigvals_, 0.0);
    build();
}

DppModel::DppModel(const Eigen::VectorXd& eigvals, const Eigen::MatrixXd& eigvecs, Index sample_size)
    : k_(sample_size) {
    SAPGP_REQUIRE(eigvecs.rows() == eigvals.size() && eigvecs.cols() == eigvals.size(), "eigenpair shapes differ");
    SAPGP_REQUIRE((eigvals.array() >= 0.0).all() && eigvals.allFinite(), "DPP eigenvalues must be nonnegative");
    std::vector<Index> order(static_cast<std::size_t>(eigvals.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return eigvals(i) > eigvals(j); });
    eigvals_ = eigvals(order);
    eigvecs_ = eigvecs(Eigen::all, order);
    build();
}

void DppModel::build() {
    const Index n = size();
    SAPGP_REQUIRE(k_ >= 0 && k_ <= n, "DPP sample size must lie in [0, n]");
    const Index positive = (eigvals_.array() > 0.0).count();
    SAPGP_REQUIRE(positive >= k_, "DPP kernel rank is below the sample size");

    const double spread = positive == 0 ? 1.0 : eigvals_(0) / eigvals_(positive - 1);
    esym_ = Eigen::MatrixXd::Zero(k_ + 1, n + 1);
    esym_.row(0).setOnes();
    for (Index m = 1; m <= n; ++m)
        for (Index l = 1; l <= std::min(k_, m); ++l)
            esym_(l, m) = esym_(l, m - 1) + eigvals_(m - 1) * esym_(l - 1, m - 1);
    log_space_ = spread > 1e12 || !esym_.allFinite() || (k_ > 0 && !(esym_(k_, n) > 0.0));
    if (!log_space_) return;

    esym_.setConstant(kNegInf);
    esym_.row(0).setZero();
    for (Index m = 1; m <= n; ++m) {
        const double log_lambda = eigvals_(m - 1) > 0.0 ? std::log(eigvals_(m - 1)) : kNegInf;
        for (Index l = 1; l <= std::min(k_, m); ++l)
            esym_(l, m) = log_add(esym_(l, m - 1), log_lambda + esym_(l - 1, m - 1));
    }
}

double DppModel::inclusion_probability(Index l, Index m) const {
    if (l == 0) return 0.0;
    if (l >= m) return 1.0;
    const double lam = eigvals_(m - 1);
    if (log_space_) {
        if (lam <= 0.0) return 0.0;
        return std::exp(std::log(lam) + esym_(l - 1, m - 1) - esym_(l, m));
    }
    return lam * esym_(l - 1, m - 1) / esym_(l, m);
}

std::vector<Index> sample_kdpp(const DppModel& model, std::uint64_t seed) {
    const Index n = model.size();
    const Index k = model.sample_size();
    SAPGP_REQUIRE(n <= kExactDppThreshold, "exact DPP sampling is limited to n <= 2048");
    Rng rng = make_stream(seed, "sampler");
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    std::vector<Index> chosen;
    chosen.reserve(static_cast<std::size_t>(k));
    Index remaining = k;
    for (Index m = n; m >= 1 && remaining > 0; --m) {
        if (unif(rng) < model.inclusion_probability(remaining, m)) {
            chosen.push_back(m - 1);
            --remaining;
        }
    }
    if (k == 0) return {};
    const Eigen::MatrixXd vk = model.eigvecs()(Eigen::all, chosen);

    Eigen::VectorXd d = vk.rowwise().squaredNorm();
    Eigen::MatrixXd f(n, k);
    std::vector<Index> subset;
    subset.reserve(static_cast<std::size_t>(k));
    for (Index j = 0; j < k; ++j) {
        const double total = d.sum();
        double u = unif(rng) * total;
        Index pick = -1;
        for (Index i = 0; i < n; ++i) {
            if (d(i) <= 0.0) continue;
            pick = i;
            u -= d(i);
            if (u < 0.0) break;
        }
        if (pick < 0) throw NumericalError("projection DPP sampler ran out of mass");
        Eigen::VectorXd col = vk * vk.row(pick).transpose();
        if (j > 0) col.noalias() -= f.leftCols(j) * f.row(pick).head(j).transpose();
        col /= std::sqrt(d(pick));
        f.col(j) = col;
        d -= col.cwiseAbs2();
        d = d.cwiseMax(0.0);
        d(pick) = 0.0;
        subset.push_back(pick);
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}

Eigen::MatrixXd projection_spectral(const DppModel& model, const std::vector<Index>& subset) {
    const Index n = model.size();
    SAPGP_REQUIRE(!subset.empty(), "projection needs a nonempty subset");
    // Y = S V D^{1/2}; V^T Pi V = Y^T (Y Y^T)^+ Y.
    const Eigen::MatrixXd y =
        model.eigvecs()(subset, Eigen::all) * model.eigvals().cwiseSqrt().asDiagonal();
    const Eigen::MatrixXd gram = y * y.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double cutoff = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * ev.cwiseAbs().maxCoeff();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Index i = 0; i < ev.size(); ++i)
        if (ev(i) > cutoff) inv(i) = 1.0 / ev(i);
    const Eigen::MatrixXd q = eig.eigenvectors().transpose() * y;
    return q.transpose() * inv.asDiagonal() * q;
}

Eigen::MatrixXd projection_matrix(const DppModel& model, const std::vector<Index>& subset) {
    const Eigen::MatrixXd& v = model.eigvecs();
    return v * projection_spectral(model, subset) * v.transpose();
}

double ProjectionEstimate::max_offdiag() const {
    double out = 0.0;
    for (Index j = 0; j < spectral_mean.cols(); ++j)
        for (Index i = 0; i < spectral_mean.rows(); ++i)
            if (i != j) out = std::max(out, std::abs(spectral_mean(i, j)));
    return out;
}

double ProjectionEstimate::max_stderr() const { return spectral_stderr.maxCoeff(); }

namespace {

Eigen::MatrixXd standard_error(const Eigen::MatrixXd& sum, const Eigen::MatrixXd& sumsq, Index count) {
    const double c = static_cast<double>(count);
    if (count < 2) return Eigen::MatrixXd::Constant(sum.rows(), sum.cols(), std::numeric_limits<double>::infinity());
    const Eigen::ArrayXXd mean = sum.array() / c;
    const Eigen::ArrayXXd var = ((sumsq.array() - c * mean.square()) / (c - 1.0)).max(0.0);
    return (var / c).sqrt().matrix();
}

}  // namespace

ProjectionEstimate expected_projection_mc(const DppModel& model, Index num_samples, std::uint64_t seed,
                                          bool standard_basis) {
    const Index n = model.size();
    SAPGP_REQUIRE(num_samples >= 1, "need at least one sample");
    SAPGP_REQUIRE(model.sample_size() >= 1, "sample size must be positive");
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd std_sum, std_sumsq;
    if (standard_basis) {
        std_sum = Eigen::MatrixXd::Zero(n, n);
        std_sumsq = Eigen::MatrixXd::Zero(n, n);
    }
    const Eigen::MatrixXd& v = model.eigvecs();
    for (Index s = 0; s < num_samples; ++s) {
        const auto subset = sample_kdpp(model, derive_seed(seed, "sample", static_cast<std::uint64_t>(s)));
        const Eigen::MatrixXd pi = projection_spectral(model, subset);
        sum += pi;
        sumsq += pi.cwiseAbs2();
        if (standard_basis) {
            const Eigen::MatrixXd p = v * pi * v.transpose();
            std_sum += p;
            std_sumsq += p.cwiseAbs2();
        }
    }
    ProjectionEstimate out;
    out.num_samples = num_samples;
    out.spectral_mean = sum / static_cast<double>(num_samples);
    out.spectral_stderr = standard_error(sum, sumsq, num_samples);
    if (standard_basis) {
        out.mean = std_sum / static_cast<double>(num_samples);
        out.stderr_ = standard_error(std_sum, std_sumsq, num_samples);
    }
    return out;
}

double lemma2_lower_bound(const Eigen::VectorXd& spectrum, Index b, Index j) {
    check_descending(spectrum);
    const Index n = spectrum.size();
    SAPGP_REQUIRE(b >= 1 && b <= n, "b must lie in [1, n]");
    SAPGP_REQUIRE(j >= 1 && j <= n, "j must lie in [1, n]");
    const double tail = spectrum.tail(n - b).sum();
    if (tail == 0.0) return 1.0;
    const double lj = spectrum(j - 1);
    return lj / (lj + tail / static_cast<double>(b));
}

double smoothed_condition(const Eigen::VectorXd& spectrum, Index b, Index p) {
    check_descending(spectrum);
    const Index n = spectrum.size();
    SAPGP_REQUIRE(b >= 1 && b <= n, "b must lie in [1, n]");
    SAPGP_REQUIRE(p >= 1 && p <= n, "p must lie in [1, n]");
    SAPGP_REQUIRE(spectrum(p - 1) > 0.0, "phi needs a positive reference eigenvalue");
    return spectrum.tail(n - b).sum() / (static_cast<double>(b) * spectrum(p - 1));
}

SmoothedCondition::SmoothedCondition(Eigen::VectorXd spectrum) : spectrum_(std::move(spectrum)) {
    check_descending(spectrum_);
    SAPGP_REQUIRE(spectrum_(spectrum_.size() - 1) > 0.0, "smoothed condition needs a positive spectrum");
    const Index n = spectrum_.size();
    tail_ = Eigen::VectorXd::Zero(n + 1);
    for (Index b = n - 1; b >= 0; --b) tail_(b) = tail_(b + 1) + spectrum_(b);
}

double SmoothedCondition::phi(Index b, Index p) const {
    const Index n = spectrum_.size();
    SAPGP_REQUIRE(b >= 1 && b <= n, "b must lie in [1, n]");
    SAPGP_REQUIRE(p >= 1 && p <= n, "p must lie in [1, n]");
    return tail_(b) / (static_cast<double>(b) * spectrum_(p - 1));
}

}  // namespace sapgp
