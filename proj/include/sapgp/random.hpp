#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace sapgp {

using Rng = std::mt19937_64;

// Independent generator for the named substream `name` of a root seed.
// Every random draw in the library goes through one of these so that a single
// root seed fixes a whole run, independently of the worker count.
Rng make_stream(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0);

// Derives a child seed (used when a component takes a plain seed argument).
std::uint64_t derive_seed(std::uint64_t root_seed, std::string_view name, std::uint64_t index = 0);

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Eigen::VectorXd gaussian_vector(Eigen::Index size, Rng& rng);

// FNV-1a, used for stream names and block-index fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 1469598103934665603ULL);

}  // namespace sapgp
