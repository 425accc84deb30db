#include "sapgp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "sapgp/errors.hpp"
#include "sapgp/randnla.hpp"
#include "sapgp/random.hpp"

namespace sapgp {

SolverId parse_solver_id(std::string_view name) {
    if (name == "sap") return SolverId::sap;
    if (name == "adasap") return SolverId::adasap;
    if (name == "adasap_i") return SolverId::adasap_i;
    if (name == "sdd") return SolverId::sdd;
    if (name == "pcg") return SolverId::pcg;
    throw ConfigError("unknown solver '" + std::string(name) + "'");
}

std::string to_string(SolverId id) {
    switch (id) {
        case SolverId::sap: return "sap";
        case SolverId::adasap: return "adasap";
        case SolverId::adasap_i: return "adasap_i";
        case SolverId::sdd: return "sdd";
        case SolverId::pcg: return "pcg";
    }
    return "unknown";
}

SamplerKind parse_sampler_kind(std::string_view name) {
    if (name == "uniform") return SamplerKind::uniform;
    if (name == "kdpp") return SamplerKind::kdpp;
    throw ConfigError("unknown sampler '" + std::string(name) + "'");
}

std::string to_string(SamplerKind kind) { return kind == SamplerKind::uniform ? "uniform" : "kdpp"; }

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::budget: return "budget";
        case SolveStatus::diverged: return "diverged";
    }
    return "unknown";
}

double AccelParams::beta() const { return 1.0 - std::sqrt(mu / nu); }
double AccelParams::gamma() const { return 1.0 / std::sqrt(mu * nu); }
double AccelParams::alpha() const { return 1.0 / (1.0 + gamma() * nu); }

// ---------------------------------------------------------------- trace

std::string ConvergenceTrace::csv() const {
    std::ostringstream out;
    out << std::setprecision(17);
    out << "iter,seconds,passes,residual,rel_residual,stepsize,block_hash,phase1_s,phase2_s,phase3_s,phase4_s";
    if (has_subspace) out << ",subspace_err_l";
    out << '\n';
    for (const auto& r : records) {
        out << r.iter << ',' << r.seconds << ',' << r.passes << ',' << r.residual << ',' << r.rel_residual << ','
            << r.stepsize << ',' << r.block_hash;
        for (double p : r.phase_seconds) out << ',' << p;
        if (has_subspace) out << ',' << r.subspace_err;
        out << '\n';
    }
    return out.str();
}

void ConvergenceTrace::write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path.string());
    f << csv();
}

double ConvergenceTrace::passes_to(double target) const {
    for (const auto& r : records)
        if (std::isfinite(r.rel_residual) && r.rel_residual <= target) return r.passes;
    return std::numeric_limits<double>::infinity();
}

double ConvergenceTrace::final_rel_residual() const {
    for (auto it = records.rbegin(); it != records.rend(); ++it)
        if (!std::isnan(it->rel_residual)) return it->rel_residual;
    return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------- tail averaging

TailAverager::TailAverager(Index begin, Index end) : begin_(begin), end_(end) {
    SAPGP_REQUIRE(begin >= 0 && end >= begin, "tail-average window is empty");
}

TailAverager TailAverager::for_horizon(Index horizon) {
    SAPGP_REQUIRE(horizon >= 2, "tail averaging needs at least two iterations");
    return TailAverager((horizon + 1) / 2, horizon - 1);
}

void TailAverager::push(Index index, const Eigen::MatrixXd& w) {
    if (!in_window(index)) return;
    if (count_ == 0)
        sum_ = w;
    else
        sum_ += w;
    ++count_;
}

Eigen::MatrixXd TailAverager::mean() const {
    SAPGP_REQUIRE(count_ > 0, "tail average over an empty window");
    return sum_ / static_cast<double>(count_);
}

// ---------------------------------------------------------------- samplers

UniformSampler::UniformSampler(Index n, Index b, std::uint64_t seed) : n_(n), b_(b), seed_(seed) {
    SAPGP_REQUIRE(b >= 1 && b <= n, "blocksize must lie in [1, n]");
}

std::vector<Index> UniformSampler::draw(Index t) const {
    Rng rng = make_stream(seed_, "sampler", static_cast<std::uint64_t>(t));
    std::vector<Index> perm(static_cast<std::size_t>(n_));
    std::iota(perm.begin(), perm.end(), Index{0});
    for (Index i = 0; i < b_; ++i) {
        std::uniform_int_distribution<Index> pick(i, n_ - 1);
        std::swap(perm[i], perm[pick(rng)]);
    }
    perm.resize(static_cast<std::size_t>(b_));
    std::sort(perm.begin(), perm.end());
    return perm;
}

DppSampler::DppSampler(std::shared_ptr<const DppModel> model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed) {
    SAPGP_REQUIRE(model_ != nullptr, "DPP sampler needs a model");
    SAPGP_REQUIRE(model_->sample_size() >= 1, "DPP sample size must be positive");
}

std::vector<Index> DppSampler::draw(Index t) const {
    return sample_kdpp(*model_, derive_seed(seed_, "sampler", static_cast<std::uint64_t>(t)));
}

std::uint64_t block_hash(std::span<const Index> block) {
    return fnv1a(std::string_view(reinterpret_cast<const char*>(block.data()), block.size_bytes()));
}

// ---------------------------------------------------------------- shared driver

Index default_blocksize(Index n) { return std::max<Index>(1, n / 100); }
Index default_rank(Index b) { return std::min<Index>(100, b); }

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Index resolve_blocksize(const SolverConfig& config, Index n) {
    const Index b = config.blocksize > 0 ? config.blocksize : default_blocksize(n);
    SAPGP_REQUIRE(b <= n, "blocksize exceeds n");
    return b;
}

Index resolve_horizon(const SolverConfig& config, double passes_per_iter, double fixed_passes = 0.0) {
    if (config.max_iters > 0) return config.max_iters;
    SAPGP_REQUIRE(config.max_passes > 0.0, "either max_iters or max_passes must be set");
    const double budget = config.max_passes - fixed_passes;
    SAPGP_REQUIRE(budget > 0.0, "pass budget is exhausted before the first iteration");
    return std::max<Index>(1, static_cast<Index>(std::ceil(budget / passes_per_iter - 1e-9)));
}

std::vector<Index> block_rows_of(std::span<const Index> block) { return {block.begin(), block.end()}; }

// Bookkeeping common to the iterative solvers: residual checks, stop rules
// and the trace.
class Runner {
public:
    Runner(const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config, double passes_per_iter,
           Index horizon, Index default_every, double fixed_passes = 0.0)
        : op_(op), y_(y), config_(config), ppi_(passes_per_iter), fixed_passes_(fixed_passes), horizon_(horizon),
          every_(config.residual_every > 0 ? config.residual_every : std::max<Index>(1, default_every)),
          ynorm_(y.norm()), start_(Clock::now()) {
        TraceRecord r;
        r.passes = fixed_passes_;
        r.residual = ynorm_;
        r.rel_residual = relative(ynorm_);
        initial_ = ynorm_;
        trace_.records.push_back(r);
    }

    Index horizon() const { return horizon_; }
    double passes(Index t) const { return fixed_passes_ + static_cast<double>(t) * ppi_; }

    // Appends iteration t; returns true when the run should stop.
    bool step(Index t, const Eigen::MatrixXd& w, double stepsize, std::uint64_t hash, const double* phases,
              bool allow_early_stop = true, std::optional<double> known_residual = std::nullopt) {
        TraceRecord r;
        r.iter = t;
        r.seconds = seconds_since(start_);
        r.passes = passes(t);
        r.stepsize = stepsize;
        r.block_hash = hash;
        if (phases)
            for (int i = 0; i < 4; ++i) r.phase_seconds[i] = phases[i];
        const bool evaluate = known_residual.has_value() || t % every_ == 0 || t == horizon_;
        if (evaluate) {
            r.residual = known_residual ? *known_residual : op_.residual_norm(w, y_);
            r.rel_residual = relative(r.residual);
        }
        trace_.records.push_back(r);
        if (evaluate) {
            const double limit = config_.divergence_factor * std::max(initial_, std::numeric_limits<double>::min());
            if (!std::isfinite(r.residual) || r.residual > limit) {
                status_ = SolveStatus::diverged;
                return true;
            }
            if (allow_early_stop && config_.tolerance > 0.0 && r.rel_residual <= config_.tolerance) {
                status_ = SolveStatus::converged;
                return true;
            }
        }
        return t >= horizon_;
    }

    SolveResult finish(Eigen::MatrixXd w, Index iterations, bool refresh_residual) {
        if (refresh_residual && status_ != SolveStatus::diverged) {
            auto& last = trace_.records.back();
            last.residual = op_.residual_norm(w, y_);
            last.rel_residual = relative(last.residual);
            if (config_.tolerance > 0.0 && last.rel_residual <= config_.tolerance) status_ = SolveStatus::converged;
        }
        trace_.status = status_;
        SolveResult out;
        out.w = std::move(w);
        out.trace = std::move(trace_);
        out.status = status_;
        out.iterations = iterations;
        out.passes = passes(iterations);
        return out;
    }

    void set_status(SolveStatus s) { status_ = s; }

private:
    double relative(double residual) const { return ynorm_ > 0.0 ? residual / ynorm_ : residual; }

    const BlockOperator& op_;
    const Eigen::MatrixXd& y_;
    const SolverConfig& config_;
    double ppi_;
    double fixed_passes_;
    Index horizon_;
    Index every_;
    double ynorm_;
    double initial_ = 0.0;
    Clock::time_point start_;
    ConvergenceTrace trace_;
    SolveStatus status_ = SolveStatus::budget;
};

void check_rhs(const BlockOperator& op, const Eigen::MatrixXd& y) {
    SAPGP_REQUIRE(y.rows() == op.size(), "right-hand side must have n rows");
    SAPGP_REQUIRE(y.cols() >= 1, "right-hand side must have at least one column");
    SAPGP_REQUIRE(y.allFinite(), "right-hand side must be finite");
}

}  // namespace

// ---------------------------------------------------------------- SAP

void sap_step(const BlockOperator& op, Eigen::MatrixXd& w, std::span<const Index> block, const Eigen::MatrixXd& y) {
    SAPGP_REQUIRE(!block.empty(), "empty block");
    const auto rows = block_rows_of(block);
    const double lambda = op.regularizer();
    Eigen::MatrixXd g = op.rows_times(block, w);
    g += lambda * w(rows, Eigen::all) - y(rows, Eigen::all);
    Eigen::MatrixXd kbb = op.block(block);
    kbb.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(kbb);
    if (llt.info() != Eigen::Success) throw NumericalError("K_BB + lambda I is not numerically positive definite");
    w(rows, Eigen::all) -= llt.solve(g);
}

SolveResult sap_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const BlockSampler& sampler,
                      const SolverConfig& config) {
    check_rhs(op, y);
    const Index n = op.size();
    const Index b = sampler.block_size();
    const double ppi = static_cast<double>(b) / static_cast<double>(n);
    const Index horizon = resolve_horizon(config, ppi);
    Runner run(op, y, config, ppi, horizon, n / b);
    std::optional<TailAverager> tail;
    if (config.tail_average) tail = TailAverager::for_horizon(horizon);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, y.cols());
    Index t = 0;
    while (t < horizon) {
        const auto block = sampler.draw(t);
        const auto t0 = Clock::now();
        sap_step(op, w, block, y);
        const double phases[4] = {seconds_since(t0), 0.0, 0.0, 0.0};
        ++t;
        if (tail) tail->push(t, w);
        if (config.on_iterate) config.on_iterate(t, w);
        if (run.step(t, w, 1.0, block_hash(block), phases, !tail)) break;
    }
    if (tail && tail->count() > 0) return run.finish(tail->mean(), t, true);
    return run.finish(std::move(w), t, false);
}

// ---------------------------------------------------------------- ADASAP

void nesterov_update(Eigen::MatrixXd& w, Eigen::MatrixXd& v, Eigen::MatrixXd& z, const Eigen::MatrixXd& d, double eta,
                     double beta, double gamma, double alpha) {
    SAPGP_REQUIRE(w.rows() == d.rows() && w.cols() == d.cols() && v.rows() == d.rows() && v.cols() == d.cols() &&
                      z.rows() == d.rows() && z.cols() == d.cols(),
                  "nesterov_update: shape mismatch");
    Eigen::MatrixXd w_next = z - eta * d;
    Eigen::MatrixXd v_next = beta * v + (1.0 - beta) * z - (gamma * eta) * d;
    Eigen::MatrixXd z_next = alpha * v + (1.0 - alpha) * w_next;
    w = std::move(w_next);
    v = std::move(v_next);
    z = std::move(z_next);
}

AdasapStepInfo adasap_step(const BlockOperator& op, AdasapState& state, std::span<const Index> block,
                           const Eigen::MatrixXd& y, Index t, const SolverConfig& config,
                           bool identity_preconditioner) {
    SAPGP_REQUIRE(!block.empty(), "empty block");
    const Index n = op.size();
    const Index b = static_cast<Index>(block.size());
    const double lambda = op.regularizer();
    const auto rows = block_rows_of(block);
    AdasapStepInfo info;
    info.block_hash = block_hash(block);

    // Phase I: block gradient.
    auto t0 = Clock::now();
    const Eigen::MatrixXd& at = config.gradient_at_z ? state.z : state.w;
    Eigen::MatrixXd g = op.rows_times(block, at);
    g += lambda * at(rows, Eigen::all) - y(rows, Eigen::all);
    info.phase_seconds[0] = seconds_since(t0);

    const auto h_apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        Eigen::VectorXd out = op.block_times(block, v);
        out += lambda * v;
        return out;
    };
    const std::uint64_t power_seed = derive_seed(config.seed, "power", static_cast<std::uint64_t>(t));

    if (identity_preconditioner) {
        t0 = Clock::now();
        info.stepsize = rand_power_stepsize(h_apply, NystromFactor::empty(b), 1.0, config.power_iters, power_seed);
        info.direction = std::move(g);
        info.phase_seconds[2] = seconds_since(t0);
    } else {
        // Phase II: sketch of K_BB.
        t0 = Clock::now();
        const Index r = std::min(b, config.rank > 0 ? config.rank : default_rank(b));
        Rng omega_rng = make_stream(config.seed, "omega", static_cast<std::uint64_t>(t));
        const Eigen::MatrixXd omega = orthonormal_test_matrix(b, r, omega_rng);
        const Eigen::MatrixXd sketch = op.block_times(block, omega);
        info.phase_seconds[1] = seconds_since(t0);

        // Phase III: preconditioner and stepsize.
        t0 = Clock::now();
        const NystromFactor factor = rand_nystrom_escalating(sketch, omega, r);
        const double rho = factor.S(r - 1) + lambda;
        info.stepsize = rand_power_stepsize(h_apply, factor, rho, config.power_iters, power_seed);
        info.direction = NystromInverse(factor, rho).apply(g);
        info.phase_seconds[2] = seconds_since(t0);
    }

    // Phase IV: update.
    t0 = Clock::now();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, y.cols());
    d(rows, Eigen::all) = info.direction;
    if (config.accelerate) {
        const AccelParams acc{config.mu.value_or(lambda),
                              config.nu.value_or(static_cast<double>(n) / static_cast<double>(b))};
        SAPGP_REQUIRE(acc.mu > 0.0 && acc.nu > 0.0 && acc.mu <= acc.nu, "acceleration needs 0 < mu <= nu");
        nesterov_update(state.w, state.v, state.z, d, info.stepsize, acc.beta(), acc.gamma(), acc.alpha());
    } else {
        const Eigen::MatrixXd& base = config.gradient_at_z ? state.z : state.w;
        state.w = base - info.stepsize * d;
        state.v = state.w;
        state.z = state.w;
    }
    info.phase_seconds[3] = seconds_since(t0);
    return info;
}

SolveResult adasap_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config,
                         bool identity_preconditioner) {
    check_rhs(op, y);
    const Index n = op.size();
    const Index b = resolve_blocksize(config, n);
    if (!identity_preconditioner) SAPGP_REQUIRE(config.rank <= b, "nystrom rank exceeds blocksize");
    const double ppi = static_cast<double>(b) / static_cast<double>(n);
    const Index horizon = resolve_horizon(config, ppi);
    Runner run(op, y, config, ppi, horizon, n / b);
    std::optional<TailAverager> tail;
    if (config.tail_average) tail = TailAverager::for_horizon(horizon);
    const UniformSampler sampler(n, b, config.seed);

    AdasapState state{Eigen::MatrixXd::Zero(n, y.cols()), Eigen::MatrixXd::Zero(n, y.cols()),
                      Eigen::MatrixXd::Zero(n, y.cols())};
    Index t = 0;
    while (t < horizon) {
        const auto block = sampler.draw(t);
        const auto info = adasap_step(op, state, block, y, t, config, identity_preconditioner);
        ++t;
        if (tail) tail->push(t, state.w);
        if (config.on_iterate) config.on_iterate(t, state.w);
        if (run.step(t, state.w, info.stepsize, info.block_hash, info.phase_seconds, !tail)) break;
    }
    if (tail && tail->count() > 0) return run.finish(tail->mean(), t, true);
    return run.finish(std::move(state.w), t, false);
}

// ---------------------------------------------------------------- SDD

SolveResult sdd_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config) {
    check_rhs(op, y);
    SAPGP_REQUIRE(config.sdd_scale >= 0.0, "SDD stepsize scale must be nonnegative");
    const Index n = op.size();
    const Index b = resolve_blocksize(config, n);
    const double ppi = static_cast<double>(b) / static_cast<double>(n);
    const Index horizon = resolve_horizon(config, ppi);
    Runner run(op, y, config, ppi, horizon, n / b);
    const UniformSampler sampler(n, b, config.seed);

    const double lambda = op.regularizer();
    const double eta = config.sdd_scale / static_cast<double>(n);
    const double momentum = 0.9;
    const double avg = std::min(1.0, 100.0 / static_cast<double>(horizon));
    const double unbias = static_cast<double>(n) / static_cast<double>(b);

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, y.cols());
    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, y.cols());
    Eigen::MatrixXd w_avg = Eigen::MatrixXd::Zero(n, y.cols());
    Index t = 0;
    while (t < horizon) {
        const auto block = sampler.draw(t);
        const auto rows = block_rows_of(block);
        const auto t0 = Clock::now();
        Eigen::MatrixXd g = op.rows_times(block, w);
        g += lambda * w(rows, Eigen::all) - y(rows, Eigen::all);
        g *= unbias;
        const double phase1 = seconds_since(t0);
        const auto t1 = Clock::now();
        velocity *= momentum;
        velocity(rows, Eigen::all) -= eta * g;
        w += velocity;
        w_avg = avg * w + (1.0 - avg) * w_avg;
        const double phases[4] = {phase1, 0.0, 0.0, seconds_since(t1)};
        ++t;
        if (config.on_iterate) config.on_iterate(t, w);
        if (run.step(t, w_avg, eta, block_hash(block), phases)) break;
    }
    return run.finish(std::move(w_avg), t, false);
}

// ---------------------------------------------------------------- PCG

SolveResult pcg_solve(const BlockOperator& op, const Eigen::MatrixXd& y, Index rank, const SolverConfig& config) {
    check_rhs(op, y);
    const Index n = op.size();
    const Index m = y.cols();
    SAPGP_REQUIRE(rank >= 0 && rank <= n, "PCG rank must lie in [0, n]");
    const double lambda = op.regularizer();
    SAPGP_REQUIRE(lambda > 0.0 || rank == 0, "Nystrom PCG needs a positive regularizer");

    const double sketch_passes = rank > 0 ? 1.0 : 0.0;
    const Index horizon = resolve_horizon(config, 1.0, sketch_passes);
    Runner run(op, y, config, 1.0, horizon, 1, sketch_passes);

    NystromFactor factor = NystromFactor::empty(n);
    double rho = 1.0;
    if (rank > 0) {
        Rng omega_rng = make_stream(config.seed, "omega");
        const Eigen::MatrixXd omega = orthonormal_test_matrix(n, rank, omega_rng);
        const Eigen::MatrixXd sketch = op.rows_times(op.all_rows(), omega);
        factor = rand_nystrom_escalating(sketch, omega, rank);
        rho = factor.S(rank - 1) + lambda;
    }
    // P^{-1} r = U (S + lambda)^{-1} U^T r + (r - U U^T r) / (S_r + lambda).
    const Eigen::VectorXd top_scale = (factor.S.array() + lambda).inverse().matrix();
    const auto precondition = [&](const Eigen::MatrixXd& r) -> Eigen::MatrixXd {
        if (rank == 0) return r;
        const Eigen::MatrixXd utr = factor.U.transpose() * r;
        Eigen::MatrixXd out = factor.U * (top_scale.asDiagonal() * utr);
        out += (r - factor.U * utr) / rho;
        return out;
    };

    const Eigen::VectorXd target = config.tolerance * y.colwise().norm().transpose();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
    Eigen::MatrixXd r = y;
    Eigen::MatrixXd z = precondition(r);
    Eigen::MatrixXd p = z;
    Eigen::VectorXd rz = (r.cwiseProduct(z)).colwise().sum().transpose();
    std::vector<bool> active(static_cast<std::size_t>(m));
    const auto refresh_active = [&] {
        bool any = false;
        for (Index j = 0; j < m; ++j) {
            const double rn = r.col(j).norm();
            active[j] = rn > 0.0 && rn > target(j);
            any = any || active[j];
        }
        return any;
    };

    Index t = 0;
    bool any_active = refresh_active();
    if (!any_active) run.set_status(SolveStatus::converged);
    while (any_active && t < horizon) {
        const auto t0 = Clock::now();
        const Eigen::MatrixXd ap = op.apply(p);
        const double phase1 = seconds_since(t0);
        const auto t1 = Clock::now();
        for (Index j = 0; j < m; ++j) {
            if (!active[j]) continue;
            const double pap = p.col(j).dot(ap.col(j));
            if (!(pap > 0.0)) throw NumericalError("PCG breakdown: p^T A p <= 0");
            const double alpha = rz(j) / pap;
            x.col(j) += alpha * p.col(j);
            r.col(j) -= alpha * ap.col(j);
        }
        z = precondition(r);
        for (Index j = 0; j < m; ++j) {
            if (!active[j]) continue;
            const double rz_next = r.col(j).dot(z.col(j));
            const double beta = rz_next / rz(j);
            rz(j) = rz_next;
            p.col(j) = z.col(j) + beta * p.col(j);
        }
        const double phases[4] = {phase1, 0.0, 0.0, seconds_since(t1)};
        ++t;
        if (config.on_iterate) config.on_iterate(t, x);
        any_active = refresh_active();
        if (run.step(t, x, std::numeric_limits<double>::quiet_NaN(), 0, phases, true, r.norm())) break;
        if (!any_active) {
            run.set_status(SolveStatus::converged);
            break;
        }
    }
    return run.finish(std::move(x), t, true);
}

// ---------------------------------------------------------------- dispatch

SolveResult solve(SolverId id, const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config) {
    switch (id) {
        case SolverId::sap: {
            const UniformSampler sampler(op.size(), resolve_blocksize(config, op.size()), config.seed);
            return sap_solve(op, y, sampler, config);
        }
        case SolverId::adasap: return adasap_solve(op, y, config, false);
        case SolverId::adasap_i: return adasap_solve(op, y, config, true);
        case SolverId::sdd: return sdd_solve(op, y, config);
        case SolverId::pcg: {
            const Index b = resolve_blocksize(config, op.size());
            return pcg_solve(op, y, config.rank > 0 ? config.rank : default_rank(b), config);
        }
    }
    throw ConfigError("unknown solver");
}

}  // namespace sapgp
