#pragma once

#include <condition_variable>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sapgp/kernels.hpp"
#include "sapgp/operator.hpp"

namespace sapgp {

// Half-open index range [begin, end).
struct Range {
    Index begin = 0;
    Index end = 0;
    Index size() const { return end - begin; }
    bool operator==(const Range&) const = default;
};

// Contiguous balanced split of [0, size) into `parts` ranges whose sizes differ
// by at most one; the first size % parts ranges get the extra element.
std::vector<Range> partition(Index size, int parts);

// Fixed set of worker threads. Worker 0 is the calling thread.
class WorkerPool {
public:
    explicit WorkerPool(int num_workers = 1);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    int size() const { return num_workers_; }

    // Runs task(worker_id) once on every worker and waits for all of them.
    // If any task throws, the lowest failing worker id is reported as a
    // WorkerError after all workers have finished.
    void run(const std::function<void(int)>& task);

private:
    void loop(int id);

    int num_workers_;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable start_cv_;
    std::condition_variable done_cv_;
    const std::function<void(int)>* task_ = nullptr;
    std::vector<std::exception_ptr> errors_;
    std::size_t generation_ = 0;
    int pending_ = 0;
    bool stop_ = false;
};

// K[rows, :] * w with the columns of K split across workers. Work is done in
// the oracle's fixed column tiles and the per-tile partial products are summed
// in ascending tile order, so the result is bitwise identical to
// KernelOracle::block_rows_times for every worker count.
Eigen::MatrixXd col_dist_matmul(const KernelOracle& oracle, const Eigen::MatrixXd& w, std::span<const Index> rows,
                                WorkerPool& pool);

// K[rows, rows] * omega with the rows split across workers and the slices
// concatenated in partition order.
Eigen::MatrixXd row_dist_matmul(const KernelOracle& oracle, const Eigen::MatrixXd& omega, std::span<const Index> rows,
                                WorkerPool& pool);

// Kernel system K + lambda I whose block products run on a worker pool.
class KernelOperator final : public BlockOperator {
public:
    KernelOperator(KernelOracle oracle, WorkerPool& pool) : oracle_(std::move(oracle)), pool_(&pool) {}

    Index size() const override { return oracle_.size(); }
    double regularizer() const override { return oracle_.likelihood_variance(); }
    Eigen::MatrixXd rows_times(std::span<const Index> rows, const Eigen::MatrixXd& m) const override {
        return col_dist_matmul(oracle_, m, rows, *pool_);
    }
    Eigen::MatrixXd block_times(std::span<const Index> rows, const Eigen::MatrixXd& omega) const override {
        return row_dist_matmul(oracle_, omega, rows, *pool_);
    }
    Eigen::MatrixXd block(std::span<const Index> rows) const override { return oracle_.block_block(rows); }

    const KernelOracle& oracle() const { return oracle_; }
    WorkerPool& pool() const { return *pool_; }

private:
    KernelOracle oracle_;
    WorkerPool* pool_;
};

}  // namespace sapgp
