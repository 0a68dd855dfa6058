#pragma once

// Sharded Monte Carlo driver. Paths [0, n) are cut into `shards` contiguous
// ranges; worker threads claim shards from an atomic counter and each shard
// fills its own accumulator. Accumulators are merged in shard order, so the
// result depends on (seed, shards) only, never on the thread count or timing.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fpt/random.hpp"

namespace fpt {

struct run_options {
    std::uint64_t seed = 42;
    unsigned shards = 8;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Streaming mean and variance (Welford), mergeable (Chan et al.).
class moments {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }

    void merge(const moments& o) noexcept {
        if (o.n_ == 0) return;
        if (n_ == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(o.n_);
        const double d = o.mean_ - mean_;
        const double n = na + nb;
        mean_ += d * nb / n;
        m2_ += o.m2_ + d * d * na * nb / n;
        n_ += o.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const noexcept {
        return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
    std::string method;
};

inline estimate to_estimate(const moments& acc, std::string method, double scale = 1.0) {
    return {acc.mean() * scale, acc.std_error() * std::abs(scale), acc.count(), std::move(method)};
}

/// Calls body(acc, rng, path) for every path with rng reseeded to the
/// (seed, tag, path) substream. Returns one accumulator per shard.
template <class Acc, class Body>
std::vector<Acc> run_sharded(std::size_t n, const run_options& opt, std::uint64_t tag, const Acc& init,
                             Body&& body) {
    const std::size_t shards = std::max<std::size_t>(1, std::min<std::size_t>(opt.shards, std::max<std::size_t>(n, 1)));
    std::vector<Acc> out(shards, init);
    unsigned threads = opt.threads != 0 ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, shards));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        rng_stream rng;
        while (true) {
            const std::size_t s = next.fetch_add(1);
            if (s >= shards) return;
            const std::size_t lo = n * s / shards;
            const std::size_t hi = n * (s + 1) / shards;
            try {
                for (std::size_t path = lo; path < hi; ++path) {
                    rng.reseed(opt.seed, tag, path);
                    body(out[s], rng, path);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(shards);
                return;
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// Merges per-shard accumulators left to right.
template <class Acc>
Acc merge_shards(const std::vector<Acc>& shards) {
    Acc total{};
    for (const auto& s : shards) total.merge(s);
    return total;
}

}  // namespace fpt
