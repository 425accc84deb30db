#include "sapgp/theory_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "sapgp/dist.hpp"
#include "sapgp/dpp.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/gp.hpp"
#include "sapgp/randnla.hpp"
#include "sapgp/random.hpp"

namespace sapgp {
namespace {

using nlohmann::json;

json to_json_vector(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Running first and second moments of a scalar across trials.
struct Moments {
    double sum = 0.0;
    double sumsq = 0.0;
    Index count = 0;

    void add(double x) {
        sum += x;
        sumsq += x * x;
        ++count;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
    double stderr_() const {
        if (count < 2) return std::numeric_limits<double>::infinity();
        const double c = static_cast<double>(count);
        const double var = std::max(0.0, (sumsq - c * mean() * mean()) / (c - 1.0));
        return std::sqrt(var / c);
    }
};

json grid_json(const std::vector<GridPoint>& grid) {
    json out = json::array();
    for (const auto& g : grid)
        out.push_back({{"t", g.t},
                       {"mean", g.mean},
                       {"stderr", g.stderr_},
                       {"bound", g.bound},
                       {"branch", g.sublinear_branch ? "sublinear" : "linear"},
                       {"pass", g.pass}});
    return out;
}

std::shared_ptr<const DppModel> dpp_of(const SyntheticSpectrumProblem& problem, Index k) {
    return std::make_shared<const DppModel>(problem.spectrum.array() + problem.lambda, problem.rotation, k);
}

// Runs exact SAP from zero for `horizon` steps and hands the iterate after
// every step (and the initial zero iterate) to `visit(i, w_i)`.
void run_sap(const DenseOperator& op, const Eigen::VectorXd& y, const BlockSampler& sampler, Index horizon,
             const std::function<void(Index, const Eigen::MatrixXd&)>& visit) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(op.size(), 1);
    const Eigen::MatrixXd rhs = y;
    visit(0, w);
    for (Index t = 0; t < horizon; ++t) {
        const auto block = sampler.draw(t);
        sap_step(op, w, block, rhs);
        visit(t + 1, w);
    }
}

std::unique_ptr<BlockSampler> make_sampler(SamplerKind kind, const SyntheticSpectrumProblem& problem,
                                           const std::shared_ptr<const DppModel>& model, Index k,
                                           std::uint64_t seed) {
    if (kind == SamplerKind::kdpp) return std::make_unique<DppSampler>(model, seed);
    return std::make_unique<UniformSampler>(problem.size(), k, seed);
}

Eigen::VectorXd projection_eigenvalues(const ProjectionEstimate& est) {
    const Eigen::MatrixXd sym = 0.5 * (est.spectral_mean + est.spectral_mean.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().reverse();
}

}  // namespace

// ---------------------------------------------------------------- spectral basis

SpectralBasis::SpectralBasis(const Eigen::MatrixXd& k, double lambda) : lambda_(lambda) {
    SAPGP_REQUIRE(k.rows() == k.cols(), "spectral basis needs a square matrix");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (k + k.transpose()));
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    eigvals_ = eig.eigenvalues().reverse();
    eigvecs_ = eig.eigenvectors().rowwise().reverse();
}

SpectralBasis::SpectralBasis(Eigen::VectorXd eigvals, Eigen::MatrixXd eigvecs, double lambda)
    : eigvals_(std::move(eigvals)), eigvecs_(std::move(eigvecs)), lambda_(lambda) {
    SAPGP_REQUIRE(eigvecs_.rows() == eigvals_.size() && eigvecs_.cols() == eigvals_.size(), "eigenpair shapes differ");
}

Eigen::MatrixXd SpectralBasis::q(Index ell) const {
    SAPGP_REQUIRE(ell >= 0 && ell <= size(), "l must lie in [0, n]");
    const auto v = eigvecs_.leftCols(ell);
    return v * v.transpose();
}

Eigen::VectorXd SpectralBasis::project(const Eigen::VectorXd& x, Index ell) const {
    SAPGP_REQUIRE(ell >= 0 && ell <= size(), "l must lie in [0, n]");
    const auto v = eigvecs_.leftCols(ell);
    return v * (v.transpose() * x);
}

Eigen::VectorXd SpectralBasis::sqrt_apply(const Eigen::VectorXd& x) const {
    return eigvecs_ * ((eigvals_.array() + lambda_).sqrt() * (eigvecs_.transpose() * x).array()).matrix();
}

Eigen::VectorXd polynomial_spectrum(Index n, double beta, double scale) {
    SAPGP_REQUIRE(n >= 1, "spectrum needs n >= 1");
    Eigen::VectorXd out(n);
    for (Index i = 0; i < n; ++i) out(i) = scale * std::pow(static_cast<double>(i + 1), -beta);
    return out;
}

Eigen::VectorXd geometric_spectrum(Index n, double ratio) {
    SAPGP_REQUIRE(n >= 1 && ratio > 0.0 && ratio <= 1.0, "geometric spectrum needs ratio in (0, 1]");
    Eigen::VectorXd out(n);
    for (Index i = 0; i < n; ++i) out(i) = std::pow(ratio, static_cast<double>(i));
    return out;
}

Eigen::MatrixXd haar_rotation(Index n, std::uint64_t seed) {
    Rng rng = make_stream(seed, "rotation");
    const Eigen::MatrixXd g = gaussian_matrix(n, n, rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd& r = qr.matrixQR();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

SyntheticSpectrumProblem::SyntheticSpectrumProblem(const Eigen::VectorXd& spec, double lam, std::uint64_t seed,
                                                   PlantMode mode)
    : spectrum(spec), lambda(lam) {
    const Index n = spectrum.size();
    SAPGP_REQUIRE(n >= 1, "empty spectrum");
    SAPGP_REQUIRE(lambda > 0.0, "lambda must be positive");
    SAPGP_REQUIRE((spectrum.array() >= 0.0).all(), "spectrum must be nonnegative");
    for (Index i = 1; i < n; ++i) SAPGP_REQUIRE(spectrum(i) <= spectrum(i - 1), "spectrum must be descending");

    rotation = haar_rotation(n, seed);
    kernel = rotation * spectrum.asDiagonal() * rotation.transpose();
    kernel = (0.5 * (kernel + kernel.transpose())).eval();

    const Eigen::ArrayXd a = spectrum.array() + lambda;
    Rng rng = make_stream(seed, "plant");
    const Eigen::VectorXd z = gaussian_vector(n, rng);
    if (mode == PlantMode::gaussian_targets) {
        y = rotation * (a.sqrt() * z.array()).matrix();
        w_star = rotation * (z.array() / a.sqrt()).matrix();
        y_norm_ainv_sq = z.squaredNorm();
    } else {
        w_star = z;
        const Eigen::ArrayXd c = (rotation.transpose() * z).array();
        y = rotation * (a * c).matrix();
        y_norm_ainv_sq = (a * c.square()).sum();
    }
}

SubspaceError subspace_error(const SpectralBasis& basis, const Eigen::VectorXd& w, const Eigen::VectorXd& w_star,
                             Index ell) {
    SAPGP_REQUIRE(ell >= 0 && ell <= basis.size(), "l must lie in [0, n]");
    SAPGP_REQUIRE(w.size() == basis.size() && w_star.size() == basis.size(), "dimension mismatch");
    const Eigen::VectorXd c = basis.eigvecs().leftCols(ell).transpose() * (w - w_star);
    const Eigen::ArrayXd lam = basis.eigvals().head(ell).array();
    const double k_err = (lam * c.array().square()).sum();
    return {k_err, k_err + basis.lambda() * c.squaredNorm()};
}

// ---------------------------------------------------------------- expected projection

json Lemma2Report::to_json() const {
    return {{"suite", "lemma2"},
            {"n", n},
            {"b", b},
            {"num_samples", num_samples},
            {"diag", to_json_vector(diag)},
            {"bound", to_json_vector(bound)},
            {"stderr", to_json_vector(stderr_)},
            {"max_offdiag", max_offdiag},
            {"max_stderr", max_stderr},
            {"diag_pass", diag_pass},
            {"offdiag_pass", offdiag_pass},
            {"pass", pass()}};
}

Lemma2Report verify_lemma2(const SyntheticSpectrumProblem& problem, Index b, Index num_samples, std::uint64_t seed) {
    const Index n = problem.size();
    SAPGP_REQUIRE(n <= 256, "projection verification is limited to n <= 256");
    SAPGP_REQUIRE(b >= 1 && 2 * b < n, "need 1 <= b and 2b < n");
    const auto model = dpp_of(problem, 2 * b);
    const auto est = expected_projection_mc(*model, num_samples, seed, false);
    const Eigen::VectorXd a = model->eigvals();

    Lemma2Report out;
    out.n = n;
    out.b = b;
    out.num_samples = num_samples;
    out.diag = est.spectral_mean.diagonal();
    out.stderr_ = est.spectral_stderr.diagonal();
    out.bound.resize(n);
    out.diag_pass = true;
    for (Index j = 0; j < n; ++j) {
        out.bound(j) = lemma2_lower_bound(a, b, j + 1);
        if (out.diag(j) < out.bound(j) - 3.0 * out.stderr_(j)) out.diag_pass = false;
    }
    out.max_offdiag = est.max_offdiag();
    out.max_stderr = est.max_stderr();
    out.offdiag_pass = out.max_offdiag <= 4.0 * out.max_stderr;
    return out;
}

// ---------------------------------------------------------------- two-phase bound

std::vector<Index> log_grid(Index horizon) {
    SAPGP_REQUIRE(horizon >= 2, "grid needs a horizon of at least 2");
    std::vector<Index> out;
    for (Index p = 2; p <= horizon; p *= 2) {
        out.push_back(p);
        const Index mid = p + p / 2;
        if (p >= 4 && mid <= horizon) out.push_back(mid);
    }
    out.push_back(horizon);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double theorem1_bound(const SmoothedCondition& phi, Index b, Index ell, Index t, double y_norm_sq) {
    const Index n = phi.spectrum().size();
    const double sub = 8.0 * phi.phi(b, ell) / static_cast<double>(t);
    const double lin = std::pow(1.0 - 1.0 / (2.0 * phi.phi(b, n)), 0.5 * static_cast<double>(t));
    return std::min(sub, lin) * y_norm_sq;
}

bool Theorem1Report::pass() const {
    if (!asserted) return true;
    return std::all_of(grid.begin(), grid.end(), [](const GridPoint& g) { return g.pass; });
}

json Theorem1Report::to_json() const {
    return {{"suite", "theorem1"},
            {"n", n},
            {"b", b},
            {"dpp_size", 2 * b},
            {"ell", ell},
            {"trials", trials},
            {"horizon", horizon},
            {"sampler", to_string(sampler)},
            {"phi_b_ell", phi_b_ell},
            {"phi_b_n", phi_b_n},
            {"y_norm_sq", y_norm_sq},
            {"crossover_t", crossover_t},
            {"crossover_observed", crossover_observed},
            {"assumption_held", assumption_held},
            {"asserted", asserted},
            {"grid", grid_json(grid)},
            {"pass", pass()}};
}

std::string Theorem1Report::csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "t,mean,stderr,bound,branch,pass\n";
    for (const auto& g : grid)
        out << g.t << ',' << g.mean << ',' << g.stderr_ << ',' << g.bound << ','
            << (g.sublinear_branch ? "sublinear" : "linear") << ',' << (g.pass ? 1 : 0) << '\n';
    return out.str();
}

Theorem1Report verify_theorem1(const SyntheticSpectrumProblem& problem, Index b, Index ell, Index trials, Index horizon,
                               std::uint64_t seed, SamplerKind sampler, Index projection_samples) {
    const Index n = problem.size();
    SAPGP_REQUIRE(n <= 512, "two-phase verification is limited to n <= 512");
    SAPGP_REQUIRE(b >= 1 && 2 * b < n, "need 1 <= b and 2b < n");
    SAPGP_REQUIRE(ell >= 1 && ell <= n, "l must lie in [1, n]");
    SAPGP_REQUIRE(trials >= 2, "need at least two trials");
    const Index k = 2 * b;
    const Eigen::VectorXd a = problem.spectrum.array() + problem.lambda;
    const SmoothedCondition phi(a);
    const SpectralBasis basis = problem.basis();
    const DenseOperator op = problem.op();
    const auto model = dpp_of(problem, k);

    Theorem1Report out;
    out.n = n;
    out.b = b;
    out.ell = ell;
    out.trials = trials;
    out.horizon = horizon;
    out.sampler = sampler;
    out.asserted = sampler == SamplerKind::kdpp;
    out.phi_b_ell = phi.phi(b, ell);
    out.phi_b_n = phi.phi(b, n);
    out.y_norm_sq = problem.y_norm_ainv_sq;

    const auto grid = log_grid(horizon);
    std::vector<Index> needed;
    for (Index t : grid) {
        needed.push_back((t + 1) / 2);
        needed.push_back(t);
    }
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    std::vector<Moments> stats(grid.size());

    for (Index trial = 0; trial < trials; ++trial) {
        const auto block_sampler =
            make_sampler(sampler, problem, model, k, derive_seed(seed, "trial", static_cast<std::uint64_t>(trial)));
        // prefix[i] = sum_{j < i} w_j at the needed indices.
        std::vector<Eigen::VectorXd> prefix(needed.size());
        Eigen::VectorXd running = Eigen::VectorXd::Zero(n);
        std::size_t next = 0;
        run_sap(op, problem.y, *block_sampler, horizon, [&](Index i, const Eigen::MatrixXd& w) {
            if (next < needed.size() && needed[next] == i) prefix[next++] = running;
            running += w.col(0);
        });
        const auto at = [&](Index i) -> const Eigen::VectorXd& {
            return prefix[std::lower_bound(needed.begin(), needed.end(), i) - needed.begin()];
        };
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const Index t = grid[g];
            const Index begin = (t + 1) / 2;
            const Eigen::VectorXd avg = (at(t) - at(begin)) / static_cast<double>(t - begin);
            stats[g].add(subspace_error(basis, avg, problem.w_star, ell).bound);
        }
    }

    bool seen_sublinear = false;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        GridPoint p;
        p.t = grid[g];
        p.mean = stats[g].mean();
        p.stderr_ = stats[g].stderr_();
        p.bound = theorem1_bound(phi, b, ell, p.t, out.y_norm_sq);
        const double sub = 8.0 * out.phi_b_ell / static_cast<double>(p.t);
        const double lin = std::pow(1.0 - 1.0 / (2.0 * out.phi_b_n), 0.5 * static_cast<double>(p.t));
        p.sublinear_branch = sub <= lin;
        p.pass = p.mean <= p.bound + 3.0 * p.stderr_;
        if (p.sublinear_branch) seen_sublinear = true;
        if (!p.sublinear_branch && seen_sublinear) out.crossover_observed = true;
        out.grid.push_back(p);
    }

    // First even t, after the sublinear branch has taken over, where the linear branch is smaller again.
    out.crossover_t = std::numeric_limits<double>::infinity();
    bool sub_active = false;
    for (Index t = 2; t <= 100'000'000; t += 2) {
        const double sub = 8.0 * out.phi_b_ell / static_cast<double>(t);
        const double lin = std::pow(1.0 - 1.0 / (2.0 * out.phi_b_n), 0.5 * static_cast<double>(t));
        if (sub <= lin) sub_active = true;
        if (sub_active && lin < sub) {
            out.crossover_t = static_cast<double>(t);
            break;
        }
        if (!sub_active && t > 1000) {
            out.crossover_t = 2.0;
            break;
        }
    }

    if (projection_samples > 0) {
        const auto est = expected_projection_mc(*model, projection_samples, derive_seed(seed, "projection"), false);
        const Eigen::VectorXd ev = projection_eigenvalues(est);
        out.assumption_held = ev(ell - 1) >= 2.0 * ev(n - 1);
    }
    return out;
}

// ---------------------------------------------------------------- linear rate

bool LinearRateReport::pass() const {
    return std::all_of(grid.begin(), grid.end(), [](const GridPoint& g) { return g.pass; });
}

json LinearRateReport::to_json() const {
    return {{"suite", "linear_rate"}, {"n", n},           {"b", b},
            {"trials", trials},       {"lambda_min", lambda_min}, {"initial_error", initial_error},
            {"grid", grid_json(grid)}, {"pass", pass()}};
}

LinearRateReport verify_linear_rate(const SyntheticSpectrumProblem& problem, Index b, Index trials, Index horizon,
                                    std::uint64_t seed, Index projection_samples) {
    const Index n = problem.size();
    SAPGP_REQUIRE(n <= 512, "linear-rate verification is limited to n <= 512");
    SAPGP_REQUIRE(b >= 1 && 2 * b < n, "need 1 <= b and 2b < n");
    SAPGP_REQUIRE(trials >= 2, "need at least two trials");
    const Index k = 2 * b;
    const auto model = dpp_of(problem, k);
    const DenseOperator op = problem.op();
    const SpectralBasis basis = problem.basis();

    LinearRateReport out;
    out.n = n;
    out.b = b;
    out.trials = trials;
    out.initial_error = problem.y_norm_ainv_sq;
    const auto est = expected_projection_mc(*model, projection_samples, derive_seed(seed, "projection"), false);
    out.lambda_min = std::max(0.0, projection_eigenvalues(est)(n - 1));

    const auto grid = log_grid(horizon);
    std::vector<Moments> stats(grid.size());
    for (Index trial = 0; trial < trials; ++trial) {
        const DppSampler sampler(model, derive_seed(seed, "trial", static_cast<std::uint64_t>(trial)));
        std::size_t g = 0;
        run_sap(op, problem.y, sampler, horizon, [&](Index i, const Eigen::MatrixXd& w) {
            if (g < grid.size() && grid[g] == i) stats[g++].add(subspace_error(basis, w.col(0), problem.w_star, n).bound);
        });
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        GridPoint p;
        p.t = grid[g];
        p.mean = stats[g].mean();
        p.stderr_ = stats[g].stderr_();
        p.bound = std::pow(1.0 - out.lambda_min, static_cast<double>(p.t)) * out.initial_error;
        p.pass = p.mean <= p.bound + 3.0 * p.stderr_;
        out.grid.push_back(p);
    }
    return out;
}

// ---------------------------------------------------------------- iteration count

json Corollary1Report::to_json() const {
    return {{"suite", "corollary1"}, {"n", n},
            {"ell", ell},            {"block", block},
            {"epsilon", epsilon},    {"constant", constant},
            {"horizon", horizon},    {"trials", trials},
            {"successes", successes}, {"success_rate", success_rate()},
            {"ratios", ratios},      {"pass", pass()}};
}

Corollary1Report verify_corollary1(const SyntheticSpectrumProblem& problem, Index ell, double epsilon, double constant,
                                   Index trials, std::uint64_t seed) {
    const Index n = problem.size();
    const Index k = 4 * ell;
    SAPGP_REQUIRE(ell >= 1 && k < n, "need 4l < n");
    SAPGP_REQUIRE(epsilon > 0.0 && constant > 0.0, "epsilon and C must be positive");
    const auto model = dpp_of(problem, k);
    const DenseOperator op = problem.op();
    const SpectralBasis basis = problem.basis();

    Corollary1Report out;
    out.n = n;
    out.ell = ell;
    out.block = k;
    out.epsilon = epsilon;
    out.constant = constant;
    out.trials = trials;
    out.horizon = static_cast<Index>(
        std::ceil(constant * static_cast<double>(n) / static_cast<double>(ell) / epsilon - 1e-9));
    const double target = subspace_error(basis, Eigen::VectorXd::Zero(n), problem.w_star, ell).rkhs;
    SAPGP_REQUIRE(target > 0.0, "planted solution has no top-l component");

    for (Index trial = 0; trial < trials; ++trial) {
        const DppSampler sampler(model, derive_seed(seed, "trial", static_cast<std::uint64_t>(trial)));
        auto tail = TailAverager::for_horizon(out.horizon);
        run_sap(op, problem.y, sampler, out.horizon, [&](Index i, const Eigen::MatrixXd& w) { tail.push(i, w); });
        const double err = subspace_error(basis, tail.mean().col(0), problem.w_star, ell).rkhs;
        const double ratio = err / (epsilon * target);
        out.ratios.push_back(ratio);
        if (ratio <= 1.0) ++out.successes;
    }
    return out;
}

// ---------------------------------------------------------------- effective rank

double effective_rank_check(const Eigen::VectorXd& spectrum, Index ell, Index multiple) {
    SAPGP_REQUIRE(ell >= 1 && multiple >= 1, "l and the multiple must be positive");
    const Index b = std::min<Index>(multiple * ell, spectrum.size());
    return smoothed_condition(spectrum, b, ell);
}

bool EffectiveRankReport::pass() const {
    const auto close = [](double a, double b) { return std::abs(a - b) <= 0.1 * std::max(std::abs(a), std::abs(b)); };
    return close(phi2_n, phi2_4n) && close(phi4_n, phi4_4n);
}

json EffectiveRankReport::to_json() const {
    return {{"suite", "effective_rank"}, {"ell", ell},         {"n", n},
            {"phi_2l_n", phi2_n},        {"phi_2l_4n", phi2_4n}, {"phi_4l_n", phi4_n},
            {"phi_4l_4n", phi4_4n},      {"pass", pass()}};
}

EffectiveRankReport effective_rank_growth(const std::function<double(Index)>& eig, Index n, Index ell) {
    SAPGP_REQUIRE(4 * ell <= n, "need 4l <= n");
    Eigen::VectorXd small(n), large(4 * n);
    for (Index i = 0; i < 4 * n; ++i) {
        large(i) = eig(i + 1);
        if (i < n) small(i) = large(i);
    }
    EffectiveRankReport out;
    out.ell = ell;
    out.n = n;
    out.phi2_n = effective_rank_check(small, ell, 2);
    out.phi2_4n = effective_rank_check(large, ell, 2);
    out.phi4_n = effective_rank_check(small, ell, 4);
    out.phi4_4n = effective_rank_check(large, ell, 4);
    return out;
}

// ---------------------------------------------------------------- pathwise

DensePosterior dense_posterior(const KernelOracle& oracle, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_test) {
    Eigen::MatrixXd k = oracle.dense();
    k.diagonal().array() += oracle.likelihood_variance();
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) throw NumericalError("K + lambda I is not positive definite");
    const Eigen::MatrixXd kxs = oracle.cross(x_test);
    DensePosterior out;
    out.mean = kxs * llt.solve(y);
    out.cov = oracle.cross(x_test, x_test) - kxs * llt.solve(kxs.transpose());
    return out;
}

json PathwiseReport::to_json() const {
    return {{"suite", "pathwise"},   {"n", n},
            {"num_test", num_test},  {"num_samples", num_samples},
            {"max_mean_z", max_mean_z}, {"max_cov_z", max_cov_z},
            {"pass", pass()}};
}

PathwiseReport verify_pathwise(Index n, Index num_test, Index num_samples, Index num_features, std::uint64_t seed) {
    SAPGP_REQUIRE(n >= 2 && num_test >= 1 && num_samples >= 2, "pathwise check needs n >= 2, tests, and samples");
    Rng rng = make_stream(seed, "data");
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    Eigen::MatrixXd x(n, 2), xs(num_test, 2);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < 2; ++j) x(i, j) = unif(rng);
    for (Index i = 0; i < num_test; ++i)
        for (Index j = 0; j < 2; ++j) xs(i, j) = unif(rng);
    const Eigen::VectorXd noise = 0.1 * gaussian_vector(n, rng);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) y(i) = std::sin(x(i, 0)) + 0.5 * std::cos(x(i, 1)) + noise(i);

    KernelSpec spec{KernelFamily::rbf, Eigen::VectorXd::Constant(2, 1.2), 1.0};
    const KernelOracle oracle(spec, x, 0.05);
    WorkerPool pool(1);
    const KernelOperator op(oracle, pool);
    SolverConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iters = 4 * n;
    cfg.seed = derive_seed(seed, "solver");
    const SystemSolver solver = [&](const Eigen::MatrixXd& rhs) { return pcg_solve(op, rhs, 0, cfg).w; };

    const auto samples = pathwise_sample(oracle, x, xs, y, solver, num_samples, num_features, seed);
    const auto exact = dense_posterior(oracle, y, xs);

    PathwiseReport out;
    out.n = n;
    out.num_test = num_test;
    out.num_samples = num_samples;
    const double s = static_cast<double>(num_samples);
    const Eigen::VectorXd mu = samples.sample_mean();
    const Eigen::MatrixXd centered = samples.samples.colwise() - mu;
    for (Index i = 0; i < num_test; ++i) {
        const double se = std::sqrt(centered.row(i).squaredNorm() / (s - 1.0) / s);
        out.max_mean_z = std::max(out.max_mean_z, std::abs(mu(i) - exact.mean(i)) / se);
        for (Index j = 0; j < num_test; ++j) {
            const Eigen::ArrayXd prod = (centered.row(i).array() * centered.row(j).array()).transpose();
            const double cov = prod.sum() / (s - 1.0);
            const double var = (prod - prod.mean()).square().sum() / (s - 1.0);
            const double se_cov = std::sqrt(var / s);
            out.max_cov_z = std::max(out.max_cov_z, std::abs(cov - exact.cov(i, j)) / se_cov);
        }
    }
    return out;
}

// ---------------------------------------------------------------- Nystrom

bool NystromReport::pass() const {
    return reconstruction_rel <= 1e-8 && inverse_rel <= 1e-10 && sqrt_rel <= 1e-10 &&
           stepsize_within * 100 >= 95 * stepsize_trials;
}

json NystromReport::to_json() const {
    return {{"suite", "nystrom"},
            {"reconstruction_rel", reconstruction_rel},
            {"inverse_rel", inverse_rel},
            {"sqrt_rel", sqrt_rel},
            {"stepsize_within", stepsize_within},
            {"stepsize_trials", stepsize_trials},
            {"pass", pass()}};
}

NystromReport verify_nystrom(std::uint64_t seed) {
    NystromReport out;
    const auto kernel_block = [](Index b, Index d, std::uint64_t s) {
        Rng rng = make_stream(s, "points");
        const Eigen::MatrixXd x = gaussian_matrix(b, d, rng);
        const KernelOracle oracle(KernelSpec{KernelFamily::rbf, Eigen::VectorXd::Constant(d, 1.0), 1.0}, x, 0.0);
        return oracle.dense();
    };

    {
        const Index b = 32;
        const Eigen::MatrixXd m = kernel_block(b, 6, derive_seed(seed, "reconstruct"));
        Rng rng = make_stream(seed, "omega", 0);
        const Eigen::MatrixXd omega = gaussian_matrix(b, b, rng);
        const auto f = rand_nystrom(m * omega, omega, b);
        out.reconstruction_rel = (f.U * f.S.asDiagonal() * f.U.transpose() - m).norm() / m.norm();
    }
    {
        const Index b = 64, r = 16;
        const Eigen::MatrixXd m = kernel_block(b, 4, derive_seed(seed, "inverse"));
        Rng rng = make_stream(seed, "omega", 1);
        const Eigen::MatrixXd omega = gaussian_matrix(b, r, rng);
        const auto f = rand_nystrom(m * omega, omega, r);
        const double rho = f.S(r - 1) + 1e-3;
        const Eigen::MatrixXd g = gaussian_matrix(b, 3, rng);
        Eigen::MatrixXd p = f.U * f.S.asDiagonal() * f.U.transpose();
        p.diagonal().array() += rho;
        const Eigen::MatrixXd dense = p.llt().solve(g);
        out.inverse_rel = (apply_inv(f, rho, g) - dense).norm() / dense.norm();
        const Eigen::MatrixXd twice = apply_inv_sqrt(f, rho, apply_inv_sqrt(f, rho, g));
        const Eigen::MatrixXd inv = apply_inv(f, rho, g);
        out.sqrt_rel = (twice - inv).norm() / inv.norm();
    }
    {
        const Index b = 16, r = 8;
        const double lambda = 1e-2;
        out.stepsize_trials = 100;
        for (Index trial = 0; trial < out.stepsize_trials; ++trial) {
            const auto ts = derive_seed(seed, "stepsize", static_cast<std::uint64_t>(trial));
            Rng rng = make_stream(ts, "omega");
            const Eigen::MatrixXd g = gaussian_matrix(b, b, rng);
            const Eigen::MatrixXd k = g * g.transpose() / static_cast<double>(b);
            Eigen::MatrixXd h = k;
            h.diagonal().array() += lambda;
            const Eigen::MatrixXd omega = gaussian_matrix(b, r, rng);
            const auto f = rand_nystrom(k * omega, omega, r);
            const double rho = f.S(r - 1) + lambda;
            const double eta = rand_power_stepsize([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(h * v); },
                                                   f, rho, 10, ts);
            const Eigen::MatrixXd isq = apply_inv_sqrt(f, rho, Eigen::MatrixXd::Identity(b, b));
            const Eigen::MatrixXd pre = isq * h * isq;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (pre + pre.transpose()), Eigen::EigenvaluesOnly);
            const double exact = 1.0 / eig.eigenvalues().maxCoeff();
            if (std::abs(eta - exact) <= 0.1 * exact) ++out.stepsize_within;
        }
    }
    return out;
}

}  // namespace sapgp
