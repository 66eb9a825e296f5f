#include "chelsea/metrics.hpp"

namespace chelsea {

MetricsSnapshot MetricsRegistry::snapshot() const {
    MetricsSnapshot s;
    s.similarity_evals = similarity_evals_.load(std::memory_order_relaxed);
    s.csm_passes = csm_passes_.load(std::memory_order_relaxed);
    s.compressions = compressions_.load(std::memory_order_relaxed);
    s.prune_clamps = prune_clamps_.load(std::memory_order_relaxed);
    return s;
}

void MetricsRegistry::reset() {
    similarity_evals_.store(0, std::memory_order_relaxed);
    csm_passes_.store(0, std::memory_order_relaxed);
    compressions_.store(0, std::memory_order_relaxed);
    prune_clamps_.store(0, std::memory_order_relaxed);
}

MetricsRegistry& metrics() {
    static MetricsRegistry registry;
    return registry;
}

}  // namespace chelsea
