#include <doctest.h>

#include <atomic>
#include <numeric>

#include "oracles.hpp"
#include "sapgp/dist.hpp"
#include "sapgp/errors.hpp"

using namespace sapgp;

namespace {
KernelOracle make_oracle(Index n, unsigned seed) {
    return KernelOracle({KernelFamily::rbf, Eigen::VectorXd::Constant(3, 1.1), 1.0}, oracle::randn(n, 3, seed), 0.1);
}
std::vector<Index> iota(Index n) {
    std::vector<Index> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}
}  // namespace

TEST_SUITE("dist") {
    TEST_CASE("partition covers the range with balanced disjoint pieces") {
        for (Index size : {0, 1, 7, 64, 100})
            for (int parts : {1, 2, 3, 4, 8}) {
                const auto p = partition(size, parts);
                REQUIRE(p.size() == static_cast<std::size_t>(parts));
                Index next = 0, lo = size, hi = 0;
                for (const auto& r : p) {
                    CHECK(r.begin == next);
                    next = r.end;
                    lo = std::min(lo, r.size());
                    hi = std::max(hi, r.size());
                }
                CHECK(next == size);
                CHECK(hi - lo <= 1);
                CHECK(partition(size, parts) == p);
            }
        CHECK_THROWS_AS(partition(4, 0), ContractError);
    }

    TEST_CASE("pool runs every worker once and reports the lowest failing worker") {
        WorkerPool pool(4);
        std::atomic<int> mask{0};
        pool.run([&](int id) { mask |= 1 << id; });
        CHECK(mask == 0xF);
        try {
            pool.run([](int id) {
                if (id >= 2) throw std::runtime_error("boom");
            });
            FAIL("expected WorkerError");
        } catch (const WorkerError& e) {
            CHECK(e.worker() == 2);
        }
        std::atomic<int> count{0};
        pool.run([&](int) { ++count; });
        CHECK(count == 4);
    }

    TEST_CASE("col_dist_matmul is bitwise identical across worker counts") {
        for (unsigned seed = 0; seed < 3; ++seed) {
            const KernelOracle k = make_oracle(600, seed);  // several column tiles
            const Eigen::MatrixXd w = oracle::randn(600, 4, seed + 10);
            const std::vector<Index> rows{3, 100, 257, 599};
            const Eigen::MatrixXd serial = k.block_rows_times(rows, w);
            for (int workers : {1, 2, 4}) {
                WorkerPool pool(workers);
                CHECK((col_dist_matmul(k, w, rows, pool) - serial).cwiseAbs().maxCoeff() == 0.0);
            }
            WorkerPool pool(2);
            CHECK(col_dist_matmul(k, Eigen::MatrixXd::Zero(600, 2), rows, pool).norm() == 0.0);
        }
    }

    TEST_CASE("row_dist_matmul concatenates to the serial product") {
        const KernelOracle k = make_oracle(64, 9);
        std::vector<Index> rows(30);
        for (Index i = 0; i < 30; ++i) rows[i] = 2 * i + 1;
        const Eigen::MatrixXd omega = oracle::randn(30, 5, 2);
        WorkerPool p1(1), p3(3);
        const Eigen::MatrixXd serial = row_dist_matmul(k, omega, rows, p1);
        CHECK((row_dist_matmul(k, omega, rows, p3) - serial).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::MatrixXd dense = k.block_block(rows) * omega;
        CHECK(oracle::rel(serial, dense) < 1e-13);
        const Eigen::MatrixXd col = omega.col(0);
        CHECK(oracle::rel(row_dist_matmul(k, col, rows, p3), k.block_block(rows) * col) < 1e-13);
    }

    TEST_CASE("kernel operator agrees with the dense operator") {
        const KernelOracle k = make_oracle(64, 4);
        WorkerPool pool(4);
        const KernelOperator op(k, pool);
        const DenseOperator dense(k.dense(), 0.1);
        const Eigen::MatrixXd m = oracle::randn(64, 2, 1);
        CHECK(oracle::rel(op.apply(m), dense.apply(m)) < 1e-13);
        const auto all = iota(64);
        CHECK(oracle::rel(op.rows_times(all, m), dense.rows_times(all, m)) < 1e-13);
    }
}
