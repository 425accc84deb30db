#include "sapgp/randnla.hpp"

#include <cmath>
#include <limits>

#include "sapgp/errors.hpp"
#include "sapgp/random.hpp"

namespace sapgp {

NystromFactor rand_nystrom(const Eigen::MatrixXd& sketch, const Eigen::MatrixXd& omega, Index rank,
                           double shift_scale) {
    SAPGP_REQUIRE(shift_scale > 0.0, "shift_scale must be positive");
    SAPGP_REQUIRE(sketch.rows() == omega.rows() && sketch.cols() == omega.cols(), "sketch and omega shapes differ");
    SAPGP_REQUIRE(omega.cols() == rank, "omega must have `rank` columns");
    SAPGP_REQUIRE(rank <= omega.rows(), "rank cannot exceed the dimension");
    const Index p = omega.rows();
    if (rank == 0) return NystromFactor::empty(p);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(omega);
    SAPGP_REQUIRE(qr.rank() == rank, "test matrix omega is rank deficient");

    Eigen::MatrixXd gram = omega.transpose() * sketch;
    gram = (0.5 * (gram + gram.transpose())).eval();
    const double trace = gram.trace();
    if (!(trace > 0.0)) {
        // M = 0 (or numerically so): the clamp gives S = 0 on an orthonormal basis of range(omega).
        Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(p, rank);
        return {std::move(q), Eigen::VectorXd::Zero(rank)};
    }
    const double shift = shift_scale * std::numeric_limits<double>::epsilon() * trace;
    gram.noalias() += shift * (omega.transpose() * omega);

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw NumericalError("rand_nystrom: Cholesky of the shifted Gram matrix failed; increase the shift");
    // C = L^T, so B = Y C^{-1} satisfies B^T = L^{-1} Y^T.
    const Eigen::MatrixXd bt = llt.matrixL().solve(sketch.transpose());
    Eigen::BDCSVD<Eigen::MatrixXd> svd(bt.transpose(), Eigen::ComputeThinU);
    const Eigen::VectorXd sigma = svd.singularValues();
    Eigen::VectorXd s = (sigma.array().square() - shift).max(0.0).matrix();
    return {svd.matrixU(), std::move(s)};
}

NystromFactor rand_nystrom_escalating(const Eigen::MatrixXd& sketch, const Eigen::MatrixXd& omega, Index rank) {
    for (double scale = 1.0;; scale *= 10.0) {
        try {
            return rand_nystrom(sketch, omega, rank, scale);
        } catch (const NumericalError&) {
            if (scale >= 1e6) throw;
        }
    }
}

Eigen::MatrixXd orthonormal_test_matrix(Index p, Index r, std::mt19937_64& rng) {
    SAPGP_REQUIRE(r <= p, "rank cannot exceed the dimension");
    const Eigen::MatrixXd g = gaussian_matrix(p, r, rng);
    return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ() * Eigen::MatrixXd::Identity(p, r);
}

NystromInverse::NystromInverse(const NystromFactor& factor, double rho) : rho_(rho) {
    SAPGP_REQUIRE(rho > 0.0 && std::isfinite(rho), "damping rho must be positive");
    SAPGP_REQUIRE(factor.U.cols() == factor.S.size(), "factor U and S sizes differ");
    Index keep = 0;
    for (Index i = 0; i < factor.rank(); ++i)
        if (factor.S(i) > 0.0) ++keep;
    U_.resize(factor.dim(), keep);
    S_.resize(keep);
    for (Index i = 0, k = 0; i < factor.rank(); ++i) {
        if (!(factor.S(i) > 0.0)) continue;
        U_.col(k) = factor.U.col(i);
        S_(k++) = factor.S(i);
    }
    if (keep == 0) return;
    Eigen::MatrixXd core = U_.transpose() * U_;
    core.diagonal().array() += rho / S_.array();
    llt_.compute(core);
    fallback_ = llt_.info() != Eigen::Success;
}

Eigen::MatrixXd NystromInverse::apply(const Eigen::MatrixXd& g) const {
    SAPGP_REQUIRE(g.rows() == U_.rows(), "apply_inv: dimension mismatch");
    if (S_.size() == 0) return g / rho_;
    if (fallback_) return apply_inv_woodbury({U_, S_}, rho_, g);
    Eigen::MatrixXd out = g;
    out.noalias() -= U_ * llt_.solve(U_.transpose() * g);
    return out / rho_;
}

Eigen::MatrixXd apply_inv(const NystromFactor& factor, double rho, const Eigen::MatrixXd& g) {
    return NystromInverse(factor, rho).apply(g);
}

Eigen::MatrixXd apply_inv_woodbury(const NystromFactor& factor, double rho, const Eigen::MatrixXd& g) {
    SAPGP_REQUIRE(rho > 0.0, "damping rho must be positive");
    SAPGP_REQUIRE(g.rows() == factor.dim(), "apply_inv: dimension mismatch");
    const Eigen::MatrixXd utg = factor.U.transpose() * g;
    const Eigen::VectorXd scale = (factor.S.array() + rho).inverse().matrix();
    Eigen::MatrixXd out = factor.U * (scale.asDiagonal() * utg);
    out += (g - factor.U * utg) / rho;
    return out;
}

Eigen::MatrixXd apply_inv_sqrt(const NystromFactor& factor, double rho, const Eigen::MatrixXd& v) {
    SAPGP_REQUIRE(rho > 0.0, "damping rho must be positive");
    SAPGP_REQUIRE(v.rows() == factor.dim(), "apply_inv_sqrt: dimension mismatch");
    const Eigen::MatrixXd utv = factor.U.transpose() * v;
    const Eigen::VectorXd scale = (factor.S.array() + rho).rsqrt().matrix();
    Eigen::MatrixXd out = factor.U * (scale.asDiagonal() * utv);
    out += (v - factor.U * utv) / std::sqrt(rho);
    return out;
}

double rand_power_stepsize(const LinearMap& h_apply, const NystromFactor& factor, double rho, int iters,
                           std::uint64_t seed) {
    SAPGP_REQUIRE(iters >= 1, "power iteration needs at least one step");
    const Index b = factor.dim();
    SAPGP_REQUIRE(b >= 1, "power iteration needs a nonempty operator");
    Rng rng = make_stream(seed, "power");
    Eigen::VectorXd v = gaussian_vector(b, rng);
    if (!(v.norm() > 0.0)) v = gaussian_vector(b, rng);
    if (!(v.norm() > 0.0)) throw NumericalError("power iteration: zero starting vector");
    v.normalize();

    double lambda = 0.0;
    for (int i = 0; i < iters; ++i) {
        Eigen::VectorXd w = apply_inv_sqrt(factor, rho, v);
        w = h_apply(w);
        w = apply_inv_sqrt(factor, rho, w);
        lambda = v.dot(w);
        const double norm = w.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("power iteration collapsed");
        v = w / norm;
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw NumericalError("power iteration gave a nonpositive estimate");
    return 1.0 / lambda;
}

}  // namespace sapgp
