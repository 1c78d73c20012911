#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace cltlab {

/// Samples per work chunk. Chunk c of a run seeded with s draws from
/// substream (s, chunk_stream(tag, c)), so results never depend on worker count.
inline constexpr std::uint64_t kChunkSize = 8192;

/// Substream for chunk `chunk` of the run family identified by `tag`.
inline std::uint64_t chunk_stream(std::uint64_t tag, std::size_t chunk) {
    return (tag << 40) | static_cast<std::uint64_t>(chunk);
}

inline std::size_t chunk_count(std::uint64_t samples) {
    return static_cast<std::size_t>((samples + kChunkSize - 1) / kChunkSize);
}

inline std::uint64_t chunk_length(std::uint64_t samples, std::size_t chunk) {
    const std::uint64_t begin = chunk * kChunkSize;
    return std::min(kChunkSize, samples - begin);
}

/// Runs body(c) for c in [0, chunks) on up to `workers` threads. The first
/// exception thrown by any chunk is rethrown after all threads join.
inline void for_each_chunk(std::size_t chunks, unsigned workers,
                           const std::function<void(std::size_t)>& body) {
    const unsigned width = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), chunks));
    if (width <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) body(c);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(width);
        for (unsigned w = 0; w < width; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < chunks; c = next++) {
                    try {
                        body(c);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

/// Count, mean and centred sum of squares, merged with Chan's update.
struct MomentAccumulator {
    std::uint64_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }

    void merge(const MomentAccumulator& other) {
        if (other.count == 0) return;
        if (count == 0) {
            *this = other;
            return;
        }
        const double n_a = static_cast<double>(count);
        const double n_b = static_cast<double>(other.count);
        const double total = n_a + n_b;
        const double d = other.mean - mean;
        mean += d * (n_b / total);
        m2 += other.m2 + d * d * (n_a * n_b / total);
        count += other.count;
    }

    double sample_variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_error() const {
        return count > 1 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
    }
};

/// Reduces a sequence of partial results by recursive halving, so the
/// combination tree depends only on the number of parts.
template <typename T, typename Merge>
T pairwise_reduce(std::span<const T> parts, Merge merge) {
    if (parts.empty()) return T{};
    if (parts.size() == 1) return parts.front();
    const std::size_t half = parts.size() / 2;
    T left = pairwise_reduce(parts.first(half), merge);
    merge(left, pairwise_reduce(parts.subspan(half), merge));
    return left;
}

inline MomentAccumulator reduce_moments(std::span<const MomentAccumulator> parts) {
    return pairwise_reduce(parts, [](MomentAccumulator& a, const MomentAccumulator& b) { a.merge(b); });
}

}  // namespace cltlab
