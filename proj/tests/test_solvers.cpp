#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "sapgp/errors.hpp"
#include "sapgp/solvers.hpp"

using namespace sapgp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
std::vector<Index> iota(Index n) {
    std::vector<Index> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}
DenseOperator rbf_problem(Index n, Index d, double ell, double lambda, unsigned seed) {
    const MatrixXd x = oracle::randn(n, d, seed);
    return DenseOperator(oracle::rbf_gram(x, x, ell), lambda);
}
MatrixXd system_matrix(const DenseOperator& op) {
    return op.matrix() + op.regularizer() * MatrixXd::Identity(op.size(), op.size());
}
double rel_residual(const DenseOperator& op, const MatrixXd& w, const MatrixXd& y) {
    return (system_matrix(op) * w - y).norm() / y.norm();
}
double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}
// Textbook conjugate gradients on a dense matrix, recording every iterate.
std::vector<VectorXd> reference_cg(const MatrixXd& a, const VectorXd& y, int iters) {
    std::vector<VectorXd> out;
    VectorXd x = VectorXd::Zero(y.size()), r = y, p = r;
    for (int k = 0; k < iters; ++k) {
        const VectorXd ap = a * p;
        const double alpha = r.squaredNorm() / p.dot(ap);
        x += alpha * p;
        const VectorXd r2 = r - alpha * ap;
        p = r2 + (r2.squaredNorm() / r.squaredNorm()) * p;
        r = r2;
        out.push_back(x);
    }
    return out;
}
}  // namespace

TEST_SUITE("solvers") {
    TEST_CASE("names round-trip") {
        for (auto id : {SolverId::sap, SolverId::adasap, SolverId::adasap_i, SolverId::sdd, SolverId::pcg})
            CHECK(parse_solver_id(to_string(id)) == id);
        CHECK(parse_sampler_kind("kdpp") == SamplerKind::kdpp);
        CHECK_THROWS(parse_solver_id("gmres"));
    }

    TEST_CASE("full-block SAP step is a direct solve") {
        const DenseOperator op = rbf_problem(40, 2, 1.0, 0.1, 1);
        const MatrixXd y = oracle::randn(40, 2, 2);
        MatrixXd w = MatrixXd::Zero(40, 2);
        sap_step(op, w, iota(40), y);
        CHECK(rel_residual(op, w, y) <= 1e-8);

        const DenseOperator one(MatrixXd::Constant(1, 1, 2.0), 0.5);
        MatrixXd w1 = MatrixXd::Zero(1, 1);
        sap_step(one, w1, iota(1), MatrixXd::Constant(1, 1, 5.0));
        CHECK(w1(0, 0) == doctest::Approx(2.0));
    }

    TEST_CASE("SAP zeroes the residual on the sampled rows") {
        const DenseOperator op = rbf_problem(60, 3, 1.5, 1e-3, 3);
        const MatrixXd y = oracle::randn(60, 1, 4);
        MatrixXd w = oracle::randn(60, 1, 5);
        const std::vector<Index> block{1, 7, 8, 30, 59};
        sap_step(op, w, block, y);
        const MatrixXd r = system_matrix(op) * w - y;
        for (Index i : block) CHECK(std::abs(r(i, 0)) <= 1e-8 * y.norm());
    }

    TEST_CASE("SAP with zero targets stays at zero") {
        const DenseOperator op = rbf_problem(30, 2, 1.0, 0.1, 6);
        SolverConfig cfg;
        cfg.max_iters = 20;
        cfg.on_iterate = [](Index, const MatrixXd& w) { CHECK(w.norm() == 0.0); };
        const auto res = sap_solve(op, MatrixXd::Zero(30, 1), UniformSampler(30, 5, 1), cfg);
        CHECK(res.w.norm() == 0.0);
    }

    TEST_CASE("SAP converges on a small RBF system") {
        const DenseOperator op = rbf_problem(100, 3, 1.0, 0.1, 7);
        const MatrixXd y = oracle::randn(100, 1, 8);
        std::vector<double> finals, halfway;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            SolverConfig cfg;
            cfg.max_iters = 500;
            cfg.seed = seed;
            MatrixXd mid;
            cfg.on_iterate = [&](Index t, const MatrixXd& w) {
                if (t == 250) mid = w;
            };
            const auto res = sap_solve(op, y, UniformSampler(100, 20, seed), cfg);
            finals.push_back(rel_residual(op, res.w, y));
            halfway.push_back(rel_residual(op, mid, y));
        }
        CHECK(median(finals) < 1e-4);
        CHECK(median(finals) <= median(halfway));
    }

    TEST_CASE("uniform blocks are sorted, distinct and reproducible") {
        const UniformSampler s(50, 10, 3);
        for (Index t = 0; t < 20; ++t) {
            const auto b = s.draw(t);
            CHECK(b.size() == 10);
            CHECK(std::is_sorted(b.begin(), b.end()));
            CHECK(std::adjacent_find(b.begin(), b.end()) == b.end());
            CHECK(b == s.draw(t));
        }
        CHECK(s.draw(0) != s.draw(1));
    }

    TEST_CASE("acceleration parameters") {
        const AccelParams p{0.3, 0.3};
        CHECK(p.beta() == doctest::Approx(0.0));
        CHECK(p.gamma() == doctest::Approx(1.0 / 0.3));
        CHECK(p.alpha() == doctest::Approx(0.5));
        const AccelParams q{0.01, 5.0};
        CHECK(q.beta() >= 0.0);
        CHECK(q.beta() < 1.0);
    }

    TEST_CASE("nesterov update degenerate cases") {
        const MatrixXd w0 = oracle::randn(5, 1, 1), v0 = oracle::randn(5, 1, 2), z0 = oracle::randn(5, 1, 3);
        const MatrixXd d = oracle::randn(5, 1, 4);
        MatrixXd w = w0, v = v0, z = z0;
        nesterov_update(w, v, z, d, 0.7, 1.0, 0.0, 0.0);
        CHECK(v.isApprox(v0));
        CHECK(w.isApprox(z0 - 0.7 * d));
        CHECK(z.isApprox(w));

        MatrixXd a = w0, b = w0, c = w0;
        nesterov_update(a, b, c, MatrixXd::Zero(5, 1), 0.7, 0.4, 2.0, 0.3);
        CHECK(a.isApprox(w0));
        CHECK(b.isApprox(w0));
        CHECK(c.isApprox(w0));
    }

    TEST_CASE("full-rank ADASAP direction equals the SAP direction on a low-rank block") {
        // Nearly coincident 1-D points make K_BB numerically low rank, so the
        // rank-b Nystrom factor plus (S_b + lambda) I reproduces K_BB + lambda I.
        const Index n = 40;
        MatrixXd x(n, 1);
        for (Index i = 0; i < n; ++i) x(i, 0) = 0.01 * i;
        const DenseOperator op(oracle::rbf_gram(x, x, 5.0), 1e-2);
        const MatrixXd y = oracle::randn(n, 1, 9);
        const std::vector<Index> block{0, 3, 9, 14, 22, 31, 35, 39};
        SolverConfig cfg;
        cfg.blocksize = 8;
        cfg.rank = 8;
        cfg.mu = cfg.nu = 1.0;
        AdasapState st{MatrixXd::Zero(n, 1), MatrixXd::Zero(n, 1), MatrixXd::Zero(n, 1)};
        const auto info = adasap_step(op, st, block, y, 0, cfg, false);
        CHECK(std::abs(info.stepsize - 1.0) < 1e-6);
        MatrixXd w = MatrixXd::Zero(n, 1);
        sap_step(op, w, block, y);
        for (std::size_t i = 0; i < block.size(); ++i)
            CHECK(-info.stepsize * info.direction(i, 0) == doctest::Approx(w(block[i], 0)).epsilon(1e-6));
    }

    TEST_CASE("without acceleration the three sequences coincide") {
        const DenseOperator op = rbf_problem(50, 2, 1.0, 0.1, 10);
        const MatrixXd y = oracle::randn(50, 1, 11);
        SolverConfig cfg;
        cfg.blocksize = 10;
        cfg.rank = 5;
        cfg.accelerate = false;
        AdasapState st{MatrixXd::Zero(50, 1), MatrixXd::Zero(50, 1), MatrixXd::Zero(50, 1)};
        const UniformSampler s(50, 10, 2);
        for (Index t = 0; t < 10; ++t) {
            adasap_step(op, st, s.draw(t), y, t, cfg, t % 2 == 1);
            CHECK(st.v == st.w);
            CHECK(st.z == st.w);
        }
    }

    TEST_CASE("ADASAP recovers a planted all-ones solution") {
        const DenseOperator op = rbf_problem(200, 2, 1.0, 0.5, 12);
        const MatrixXd y = system_matrix(op) * VectorXd::Ones(200);
        SolverConfig cfg;
        cfg.blocksize = 50;
        cfg.rank = 20;
        cfg.max_iters = 200;
        const auto res = adasap_solve(op, y, cfg);
        CHECK((res.w - VectorXd::Ones(200)).norm() / std::sqrt(200.0) <= 1e-3);
        CHECK(res.trace.records.size() == 201);
    }

    TEST_CASE("ADASAP and ADASAP-I keep zero targets at zero and reduce the residual") {
        const DenseOperator op = rbf_problem(80, 2, 1.0, 0.1, 13);
        SolverConfig cfg;
        cfg.blocksize = 16;
        cfg.max_iters = 30;
        CHECK(adasap_solve(op, MatrixXd::Zero(80, 1), cfg).w.norm() == 0.0);
        const MatrixXd y = oracle::randn(80, 1, 14);
        for (bool identity : {false, true}) {
            const auto res = adasap_solve(op, y, cfg, identity);
            CHECK(res.trace.final_rel_residual() < (identity ? 0.95 : 0.5));
        }
    }

    TEST_CASE("trace records are complete and ordered") {
        const DenseOperator op = rbf_problem(60, 2, 1.0, 0.1, 15);
        SolverConfig cfg;
        cfg.blocksize = 6;
        cfg.max_passes = 3.0;
        const auto res = adasap_solve(op, oracle::randn(60, 1, 16), cfg);
        const auto& rec = res.trace.records;
        REQUIRE(rec.size() == 31);
        for (std::size_t i = 1; i < rec.size(); ++i) {
            CHECK(rec[i].iter == static_cast<Index>(i));
            CHECK(rec[i].seconds >= rec[i - 1].seconds);
            CHECK(rec[i].passes > rec[i - 1].passes);
        }
        CHECK(rec.back().passes == doctest::Approx(3.0));
        CHECK(std::isfinite(rec.back().rel_residual));
        const std::string csv = res.trace.csv();
        CHECK(csv.rfind("iter,seconds,passes,residual,rel_residual,stepsize,block_hash", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
    }

    TEST_CASE("solves are deterministic in the seed") {
        const DenseOperator op = rbf_problem(50, 2, 1.0, 0.1, 17);
        const MatrixXd y = oracle::randn(50, 2, 18);
        SolverConfig cfg;
        cfg.blocksize = 10;
        cfg.max_iters = 25;
        cfg.seed = 99;
        for (auto id : {SolverId::sap, SolverId::adasap, SolverId::adasap_i, SolverId::sdd, SolverId::pcg})
            CHECK(solve(id, op, y, cfg).w == solve(id, op, y, cfg).w);
    }

    TEST_CASE("SDD: zero stepsize freezes, scale 1 makes progress, huge scale diverges") {
        const DenseOperator op = rbf_problem(100, 3, 1.0, 0.5, 19);
        const MatrixXd y = oracle::randn(100, 1, 20);
        SolverConfig cfg;
        cfg.blocksize = 10;
        cfg.sdd_scale = 0.0;
        cfg.max_iters = 20;
        CHECK(sdd_solve(op, y, cfg).w.norm() == 0.0);

        cfg.sdd_scale = 1.0;
        cfg.max_iters = 10 * 50;
        const auto res = sdd_solve(op, y, cfg);
        CHECK(res.trace.final_rel_residual() <= 0.1);

        MatrixXd x(100, 1);
        for (Index i = 0; i < 100; ++i) x(i, 0) = 0.05 * i;
        const DenseOperator ill(oracle::rbf_gram(x, x, 3.0), 1e-6);
        cfg.sdd_scale = 1000.0;
        cfg.max_iters = 2000;
        const auto bad = sdd_solve(ill, y, cfg);
        CHECK(bad.status == SolveStatus::diverged);
    }

    TEST_CASE("PCG: identity system, dense agreement and plain CG at rank 0") {
        const DenseOperator eye(1e-8 * MatrixXd::Identity(20, 20), 1.0);
        const MatrixXd y1 = oracle::randn(20, 1, 21);
        SolverConfig cfg;
        cfg.max_iters = 50;
        cfg.tolerance = 1e-10;
        const auto r1 = pcg_solve(eye, y1, 0, cfg);
        CHECK(r1.iterations == 1);
        CHECK(r1.status == SolveStatus::converged);

        const DenseOperator op = rbf_problem(500, 3, 1.0, 1e-2, 22);
        const MatrixXd y = oracle::randn(500, 1, 23);
        cfg.max_iters = 200;
        cfg.tolerance = 1e-9;
        const auto res = pcg_solve(op, y, 100, cfg);
        const MatrixXd ref = oracle::dense_solve(system_matrix(op), y);
        CHECK(oracle::rel(res.w, ref) <= 1e-6);
        CHECK(res.iterations <= 200);

        const DenseOperator small = rbf_problem(40, 2, 1.0, 0.1, 24);
        const MatrixXd ys = oracle::randn(40, 1, 25);
        const auto reference = reference_cg(system_matrix(small), ys, 8);
        SolverConfig plain;
        plain.max_iters = 8;
        plain.on_iterate = [&](Index t, const MatrixXd& w) {
            CHECK((w.col(0) - reference[t - 1]).norm() <= 1e-10 * reference[t - 1].norm());
        };
        pcg_solve(small, ys, 0, plain);
    }

    TEST_CASE("tail averaging") {
        TailAverager same = TailAverager::for_horizon(10);
        const MatrixXd w = oracle::randn(4, 2, 1);
        for (Index t = 0; t < 10; ++t) same.push(t, w);
        CHECK(same.mean().isApprox(w, 1e-15));
        CHECK(same.count() == 5);

        TailAverager four = TailAverager::for_horizon(4);
        const MatrixXd a = oracle::randn(3, 1, 2), b = oracle::randn(3, 1, 3);
        four.push(0, MatrixXd::Constant(3, 1, 100.0));
        four.push(1, MatrixXd::Constant(3, 1, 100.0));
        four.push(2, a);
        four.push(3, b);
        CHECK(four.mean().isApprox((a + b) / 2));

        TailAverager stream(7, 29);
        MatrixXd batch = MatrixXd::Zero(6, 1);
        for (Index t = 0; t < 40; ++t) {
            const MatrixXd wt = oracle::randn(6, 1, 100 + static_cast<unsigned>(t));
            stream.push(t, wt);
            if (t >= 7 && t <= 29) batch += wt;
        }
        CHECK((stream.mean() - batch / 23.0).norm() <= 1e-12 * batch.norm());
        CHECK_THROWS_AS(TailAverager(3, 5).mean(), ContractError);
    }

    TEST_CASE("invalid configurations are rejected") {
        const DenseOperator op = rbf_problem(20, 2, 1.0, 0.1, 26);
        const MatrixXd y = oracle::randn(20, 1, 27);
        SolverConfig cfg;
        cfg.max_iters = 5;
        cfg.blocksize = 30;
        CHECK_THROWS_AS(solve(SolverId::adasap, op, y, cfg), ContractError);
        cfg.blocksize = 5;
        cfg.rank = 6;
        CHECK_THROWS_AS(solve(SolverId::adasap, op, y, cfg), ContractError);
        cfg.rank = 0;
        cfg.mu = 2.0;
        cfg.nu = 1.0;
        CHECK_THROWS_AS(solve(SolverId::adasap, op, y, cfg), ContractError);
    }
}
