#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace sapgp {

using Index = Eigen::Index;

// Exact sampling is refused above this many items.
inline constexpr Index kExactDppThreshold = 2048;

// Fixed-size DPP over {0..n-1} with kernel A = V diag(lambda) V^T:
// Pr[B] is proportional to det(A[B, B]) over all |B| = k.
class DppModel {
public:
    DppModel(const Eigen::MatrixXd& a, Index sample_size);
    // Eigenpairs in any order; they are sorted descending internally.
    DppModel(const Eigen::VectorXd& eigvals, const Eigen::MatrixXd& eigvecs, Index sample_size);

    Index size() const { return eigvals_.size(); }
    Index sample_size() const { return k_; }
    const Eigen::VectorXd& eigvals() const { return eigvals_; }
    const Eigen::MatrixXd& eigvecs() const { return eigvecs_; }

    // e_l(lambda_1..lambda_m) for 0 <= l <= k, 0 <= m <= n. In log mode the
    // table holds log e_l and log_space() is true.
    const Eigen::MatrixXd& elementary_symmetric() const { return esym_; }
    bool log_space() const { return log_space_; }

    // Probability that eigen-index m (1-based) is taken when l eigenvectors are
    // still needed among the first m.
    double inclusion_probability(Index l, Index m) const;

private:
    void build();

    Eigen::VectorXd eigvals_;
    Eigen::MatrixXd eigvecs_;
    Index k_;
    Eigen::MatrixXd esym_;
    bool log_space_ = false;
};

// Exact k-DPP draw: an eigenvector subset of size k chosen by the
// elementary-symmetric backward recursion, then the projection DPP on those
// eigenvectors sampled by incremental Cholesky. Indices are returned sorted.
std::vector<Index> sample_kdpp(const DppModel& model, std::uint64_t seed);

// V^T Pi V for Pi = A^{1/2} S^T (S A S^T)^+ S A^{1/2}, S the selector of `subset`.
Eigen::MatrixXd projection_spectral(const DppModel& model, const std::vector<Index>& subset);
// Pi itself.
Eigen::MatrixXd projection_matrix(const DppModel& model, const std::vector<Index>& subset);

struct ProjectionEstimate {
    Eigen::MatrixXd spectral_mean;    // V^T E[Pi] V
    Eigen::MatrixXd spectral_stderr;
    Eigen::MatrixXd mean;             // E[Pi]; empty unless requested
    Eigen::MatrixXd stderr_;
    Index num_samples = 0;

    double max_offdiag() const;
    double max_stderr() const;
};

ProjectionEstimate expected_projection_mc(const DppModel& model, Index num_samples, std::uint64_t seed,
                                          bool standard_basis = true);

// lambda_j / (lambda_j + (1/b) sum_{i>b} lambda_i), j 1-based, spectrum descending.
double lemma2_lower_bound(const Eigen::VectorXd& spectrum, Index b, Index j);

// phi(b, p) = (1/b) sum_{i>b} lambda_i / lambda_p, p 1-based, spectrum descending.
double smoothed_condition(const Eigen::VectorXd& spectrum, Index b, Index p);

class SmoothedCondition {
public:
    explicit SmoothedCondition(Eigen::VectorXd spectrum);

    double phi(Index b, Index p) const;
    const Eigen::VectorXd& spectrum() const { return spectrum_; }

private:
    Eigen::VectorXd spectrum_;
    Eigen::VectorXd tail_;  // tail_(b) = sum_{i>b} lambda_i
};

}  // namespace sapgp
