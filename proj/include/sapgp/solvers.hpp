#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sapgp/dpp.hpp"
#include "sapgp/operator.hpp"

namespace sapgp {

enum class SolverId { sap, adasap, adasap_i, sdd, pcg };
enum class SamplerKind { uniform, kdpp };
enum class SolveStatus { converged, budget, diverged };

SolverId parse_solver_id(std::string_view name);
std::string to_string(SolverId id);
SamplerKind parse_sampler_kind(std::string_view name);
std::string to_string(SamplerKind kind);
std::string to_string(SolveStatus status);

// Nesterov parameters. beta, gamma, alpha are always derived from (mu, nu).
struct AccelParams {
    double mu;
    double nu;

    double beta() const;
    double gamma() const;
    double alpha() const;
};

struct TraceRecord {
    Index iter = 0;
    double seconds = 0.0;
    double passes = 0.0;
    double residual = std::numeric_limits<double>::quiet_NaN();
    double rel_residual = std::numeric_limits<double>::quiet_NaN();
    double stepsize = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t block_hash = 0;
    double phase_seconds[4] = {0.0, 0.0, 0.0, 0.0};
    double subspace_err = std::numeric_limits<double>::quiet_NaN();
};

// One record per iteration (plus the initial state as iter 0). Residuals are
// NaN on iterations where they were not evaluated.
struct ConvergenceTrace {
    std::vector<TraceRecord> records;
    SolveStatus status = SolveStatus::budget;
    bool has_subspace = false;

    // Columns: iter,seconds,passes,residual,rel_residual,stepsize,block_hash,
    // phase1_s..phase4_s and subspace_err_l when has_subspace is set.
    void write_csv(const std::filesystem::path& path) const;
    std::string csv() const;

    // Pass count at which rel_residual first drops to `target` (inf if never).
    double passes_to(double target) const;
    double final_rel_residual() const;
};

// Streaming mean of the iterates with indices in [begin, end].
class TailAverager {
public:
    TailAverager(Index begin, Index end);
    // Window [ceil(T/2), T-1] for a run of T iterations.
    static TailAverager for_horizon(Index horizon);

    void push(Index index, const Eigen::MatrixXd& w);
    bool in_window(Index index) const { return index >= begin_ && index <= end_; }
    Index count() const { return count_; }
    Eigen::MatrixXd mean() const;

private:
    Index begin_;
    Index end_;
    Index count_ = 0;
    Eigen::MatrixXd sum_;
};

class BlockSampler {
public:
    virtual ~BlockSampler() = default;
    // Block for iteration t; deterministic in (seed, t). Sorted.
    virtual std::vector<Index> draw(Index t) const = 0;
    virtual Index block_size() const = 0;
};

class UniformSampler final : public BlockSampler {
public:
    UniformSampler(Index n, Index b, std::uint64_t seed);
    std::vector<Index> draw(Index t) const override;
    Index block_size() const override { return b_; }

private:
    Index n_;
    Index b_;
    std::uint64_t seed_;
};

class DppSampler final : public BlockSampler {
public:
    DppSampler(std::shared_ptr<const DppModel> model, std::uint64_t seed);
    std::vector<Index> draw(Index t) const override;
    Index block_size() const override { return model_->sample_size(); }

private:
    std::shared_ptr<const DppModel> model_;
    std::uint64_t seed_;
};

std::uint64_t block_hash(std::span<const Index> block);

struct SolverConfig {
    Index blocksize = 0;        // 0: n / 100, at least 1
    Index rank = 0;             // 0: min(100, b)
    Index max_iters = 0;        // 0: derived from max_passes
    double max_passes = 0.0;    // 0: no pass budget
    double tolerance = 0.0;     // relative residual; 0 disables the early stop
    bool tail_average = false;
    std::uint64_t seed = 0;
    std::optional<double> mu;   // default lambda
    std::optional<double> nu;   // default n / b
    bool accelerate = true;
    bool gradient_at_z = true;
    Index residual_every = 0;   // 0: once per pass
    double sdd_scale = 1.0;
    int power_iters = 10;
    double divergence_factor = 1e6;
    // Called after every iteration with the iteration count and the raw iterate.
    std::function<void(Index, const Eigen::MatrixXd&)> on_iterate;
};

struct SolveResult {
    Eigen::MatrixXd w;
    ConvergenceTrace trace;
    SolveStatus status = SolveStatus::budget;
    Index iterations = 0;
    double passes = 0.0;
};

// Effective defaults for a system of size n.
Index default_blocksize(Index n);
Index default_rank(Index b);

// W <- W - I_B^T (K_BB + lambda I)^{-1} (K_Bn W + lambda W_B - Y_B).
void sap_step(const BlockOperator& op, Eigen::MatrixXd& w, std::span<const Index> block, const Eigen::MatrixXd& y);

SolveResult sap_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const BlockSampler& sampler,
                      const SolverConfig& config);

struct AdasapState {
    Eigen::MatrixXd w;
    Eigen::MatrixXd v;
    Eigen::MatrixXd z;
};

struct AdasapStepInfo {
    double stepsize = 0.0;
    std::uint64_t block_hash = 0;
    double phase_seconds[4] = {0.0, 0.0, 0.0, 0.0};
    Eigen::MatrixXd direction;  // b x m block of D (rows of B)
};

// One ADASAP iteration on block `block`, iteration index t (seeds Omega and
// the power iteration). identity_preconditioner selects ADASAP-I.
AdasapStepInfo adasap_step(const BlockOperator& op, AdasapState& state, std::span<const Index> block,
                           const Eigen::MatrixXd& y, Index t, const SolverConfig& config, bool identity_preconditioner);

SolveResult adasap_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config,
                         bool identity_preconditioner = false);

// W' = Z - eta D; V' = beta V + (1 - beta) Z - gamma eta D; Z' = alpha V + (1 - alpha) W'
// (Z' uses the old V).
void nesterov_update(Eigen::MatrixXd& w, Eigen::MatrixXd& v, Eigen::MatrixXd& z, const Eigen::MatrixXd& d, double eta,
                     double beta, double gamma, double alpha);

SolveResult sdd_solve(const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config);

// Nystrom-preconditioned CG per right-hand side; rank 0 gives plain CG.
SolveResult pcg_solve(const BlockOperator& op, const Eigen::MatrixXd& y, Index rank, const SolverConfig& config);

// Dispatch by id using config.blocksize / rank; sap uses a uniform sampler.
SolveResult solve(SolverId id, const BlockOperator& op, const Eigen::MatrixXd& y, const SolverConfig& config);

}  // namespace sapgp
