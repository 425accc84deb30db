#include "sapgp/dist.hpp"

#include <algorithm>

#include "sapgp/errors.hpp"

namespace sapgp {

std::vector<Range> partition(Index size, int parts) {
    SAPGP_REQUIRE(parts >= 1, "partition needs at least one part");
    SAPGP_REQUIRE(size >= 0, "partition size must be nonnegative");
    std::vector<Range> out(static_cast<std::size_t>(parts));
    const Index base = size / parts;
    const Index extra = size % parts;
    Index begin = 0;
    for (int i = 0; i < parts; ++i) {
        const Index len = base + (i < extra ? 1 : 0);
        out[i] = {begin, begin + len};
        begin += len;
    }
    return out;
}

WorkerPool::WorkerPool(int num_workers) : num_workers_(num_workers) {
    SAPGP_REQUIRE(num_workers >= 1, "num_workers must be at least 1");
    errors_.resize(static_cast<std::size_t>(num_workers));
    for (int id = 1; id < num_workers; ++id) threads_.emplace_back([this, id] { loop(id); });
}

WorkerPool::~WorkerPool() {
    {
        std::lock_guard lock(mutex_);
        stop_ = true;
    }
    start_cv_.notify_all();
    for (auto& t : threads_) t.join();
}

void WorkerPool::loop(int id) {
    std::size_t seen = 0;
    while (true) {
        const std::function<void(int)>* task = nullptr;
        {
            std::unique_lock lock(mutex_);
            start_cv_.wait(lock, [&] { return stop_ || generation_ != seen; });
            if (stop_) return;
            seen = generation_;
            task = task_;
        }
        try {
            (*task)(id);
        } catch (...) {
            errors_[id] = std::current_exception();
        }
        {
            std::lock_guard lock(mutex_);
            if (--pending_ == 0) done_cv_.notify_one();
        }
    }
}

void WorkerPool::run(const std::function<void(int)>& task) {
    std::fill(errors_.begin(), errors_.end(), nullptr);
    if (num_workers_ > 1) {
        std::lock_guard lock(mutex_);
        task_ = &task;
        pending_ = num_workers_ - 1;
        ++generation_;
    }
    start_cv_.notify_all();
    try {
        task(0);
    } catch (...) {
        errors_[0] = std::current_exception();
    }
    if (num_workers_ > 1) {
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [&] { return pending_ == 0; });
        task_ = nullptr;
    }
    for (int id = 0; id < num_workers_; ++id) {
        if (!errors_[id]) continue;
        try {
            std::rethrow_exception(errors_[id]);
        } catch (const std::exception& e) {
            throw WorkerError(id, e.what());
        } catch (...) {
            throw WorkerError(id, "unknown exception");
        }
    }
}

Eigen::MatrixXd col_dist_matmul(const KernelOracle& oracle, const Eigen::MatrixXd& w, std::span<const Index> rows,
                                WorkerPool& pool) {
    SAPGP_REQUIRE(w.rows() == oracle.size(), "col_dist_matmul: W must have n rows");
    const Index n = oracle.size();
    const Index tiles = oracle.num_tiles();
    check_block_indices(rows, n);

    std::vector<Eigen::MatrixXd> partials(static_cast<std::size_t>(tiles));
    const auto plan = partition(tiles, pool.size());
    pool.run([&](int id) {
        for (Index t = plan[id].begin; t < plan[id].end; ++t) {
            const Index begin = t * kKernelTileSize;
            const Index end = std::min(n, begin + kKernelTileSize);
            partials[t] = oracle.column_tile_times(rows, begin, end, w);
        }
    });

    Eigen::MatrixXd out = std::move(partials[0]);
    for (Index t = 1; t < tiles; ++t) out += partials[t];
    return out;
}

Eigen::MatrixXd row_dist_matmul(const KernelOracle& oracle, const Eigen::MatrixXd& omega, std::span<const Index> rows,
                                WorkerPool& pool) {
    const Index b = static_cast<Index>(rows.size());
    SAPGP_REQUIRE(omega.rows() == b, "row_dist_matmul: omega must have b rows");
    check_block_indices(rows, oracle.size());
    Eigen::MatrixXd out(b, omega.cols());
    const auto plan = partition(b, pool.size());
    pool.run([&](int id) {
        for (Index i = plan[id].begin; i < plan[id].end; ++i) out.row(i) = oracle.block_row_times(rows, i, omega);
    });
    return out;
}

}  // namespace sapgp
