#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sapgp/core_data.hpp"
#include "sapgp/kernels.hpp"
#include "sapgp/solvers.hpp"

namespace sapgp {

struct DatasetConfig {
    std::string path;
    TargetColumn target_column = Index{-1};  // negative indices count from the end
    double test_fraction = 0.1;
};

// Generated problems. "kernel" draws points and a smooth target and uses the
// configured kernel; "spectrum" plants a rotation with lambda_i = scale i^{-decay}.
struct SyntheticConfig {
    std::string type = "kernel";
    Index n = 1000;
    Index dim = 3;
    double decay = 2.0;
    bool trace_normalize = false;
    double noise = 0.1;
};

struct RunConfig {
    KernelSpec kernel;
    double likelihood_variance = 1.0;
    Index blocksize = 0;
    Index nystrom_rank = 0;
    Index max_iters = 0;
    double max_passes = 50.0;
    SolverId solver_id = SolverId::adasap;
    SamplerKind sampler = SamplerKind::uniform;
    bool tail_average = false;
    bool accelerate = true;
    std::string gradient_at = "z";
    std::uint64_t seed = 0;
    int num_workers = 1;
    std::optional<double> mu;
    std::optional<double> nu;
    double tolerance = 0.0;
    Index residual_every = 0;
    double sdd_scale = 1.0;
    Index num_samples = 0;
    Index num_features = 2048;
    std::optional<DatasetConfig> dataset;
    std::optional<SyntheticConfig> synthetic;
    nlohmann::json verify = nlohmann::json::object();
    nlohmann::json bench = nlohmann::json::object();

    // Checks r <= b <= n where n is known, and the scalar ranges.
    void validate(std::optional<Index> n = std::nullopt) const;
    SolverConfig solver_config(Index n) const;
    // The kernel with a single lengthscale broadcast to d dimensions.
    KernelSpec kernel_for(Index d) const;
};

// Parses a config tree. Unknown keys raise ConfigError.
RunConfig parse_config(const nlohmann::json& tree);

// Applies "a.b.c=value"; value is parsed as JSON and kept as a string otherwise.
void apply_override(nlohmann::json& tree, const std::string& assignment);

// Canonical serialization of the effective config and its FNV-1a hash.
nlohmann::json to_json(const RunConfig& config);
std::string config_hash(const nlohmann::json& tree);

}  // namespace sapgp
