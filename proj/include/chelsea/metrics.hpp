#pragma once

#include <atomic>
#include <cstdint>

namespace chelsea {

// Point-in-time view of the global counters, consumed by the CLI reports.
struct MetricsSnapshot {
    std::uint64_t similarity_evals = 0;  // pairwise similarity entries computed
    std::uint64_t csm_passes = 0;        // individual matching passes
    std::uint64_t compressions = 0;      // chelsea_step invocations that compressed
    std::uint64_t prune_clamps = 0;      // prune requests clamped to the edge count
};

// Shared tally, safe for concurrent increments.
class MetricsRegistry {
public:
    void add_similarity_evals(std::uint64_t n) { similarity_evals_.fetch_add(n, std::memory_order_relaxed); }
    void add_csm_pass() { csm_passes_.fetch_add(1, std::memory_order_relaxed); }
    void add_compression() { compressions_.fetch_add(1, std::memory_order_relaxed); }
    void add_prune_clamp() { prune_clamps_.fetch_add(1, std::memory_order_relaxed); }

    MetricsSnapshot snapshot() const;
    void reset();

private:
    std::atomic<std::uint64_t> similarity_evals_{0};
    std::atomic<std::uint64_t> csm_passes_{0};
    std::atomic<std::uint64_t> compressions_{0};
    std::atomic<std::uint64_t> prune_clamps_{0};
};

MetricsRegistry& metrics();

}  // namespace chelsea
