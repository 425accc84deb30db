#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sapgp/operator.hpp"
#include "sapgp/solvers.hpp"

namespace sapgp {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitVerifyFailed = 3;

// "sap", "adasap", "adasap_i", "pcg", "sdd" or "sdd-<scale>".
struct BenchEntry {
    std::string label;
    SolverId id;
    double sdd_scale = 1.0;
};
BenchEntry parse_bench_entry(const std::string& label);

struct BenchRow {
    std::string label;
    std::uint64_t seed = 0;
    SolveStatus status = SolveStatus::budget;
    double passes_to_target = 0.0;
    double final_rel_residual = 0.0;
};

// Runs every entry once per seed; the seed replaces base.seed.
std::vector<BenchRow> run_bench(const BlockOperator& op, const Eigen::MatrixXd& y,
                                const std::vector<BenchEntry>& entries, const std::vector<std::uint64_t>& seeds,
                                const SolverConfig& base, double target);

// Median of passes_to_target per label (inf when most runs miss the target).
double median_passes(const std::vector<BenchRow>& rows, const std::string& label);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sapgp
