#pragma once

#include "chelsea/attention.hpp"
#include "chelsea/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace chelsea {

// Per-pass compression ratio r(i) = max(floor, r_init - alpha * min(m, i)).
// Validated at construction: every reachable ratio lies in [0, 0.5]. The
// floor keeps schedules that decay to zero convergent.
class RatioSchedule {
public:
    RatioSchedule() : RatioSchedule(0.45, 0.05, 3) {}
    RatioSchedule(Real r_init, Real alpha, Index m, Real floor_value = kDefaultFloor);

    Real r_init() const { return r_init_; }
    Real alpha() const { return alpha_; }
    Index m() const { return m_; }
    Real floor_value() const { return floor_; }

    static constexpr Real kDefaultFloor = 0.05;

    static RatioSchedule llama2_preset(Real floor_value = kDefaultFloor);
    static RatioSchedule llama3_preset(Real floor_value = kDefaultFloor);
    static RatioSchedule qwen_preset(Real floor_value = kDefaultFloor);

private:
    Real r_init_;
    Real alpha_;
    Index m_;
    Real floor_;
};

/// Ratio for clustering step i (i counts passes, starting at 0).
Real schedule_ratio(const RatioSchedule& schedule, Index i);

struct ChelseaConfig {
    Real cache_ratio = 0.2;       // R in (0, 1]
    Index max_decode = 64;        // decode steps driven per run
    Index sink = 16;              // leading rows preserved verbatim
    Index recent = 64;            // trailing rows preserved verbatim
    Index interval = 16;          // g: compression trigger is s >= B + g
    Index chunk_size = 256;       // c
    RatioSchedule schedule;
    Index head_count = 0;         // 0 = infer from inputs
    Real outlier_ratio = 0.0;     // fraction of heads exempted from compression
    Real outlier_threshold = 0.8; // edge-similarity cutoff for head profiling
    Index head_dim = 0;           // softmax scale; 0 = infer from key dim

    /// Throws ConfigError on out-of-range tunables.
    void validate() const;
};

// Mutable per-head cache threaded through decode. Length is keys.rows() by
// construction, so the row-count invariants cannot drift.
struct CacheState {
    Matrix keys;
    Matrix values;
    Degrees degrees;
    Index clustering_step = 0;  // ratio-schedule position, advances per pass
    Index budget = 0;           // B, fixed at prefill

    Index length() const { return keys.rows(); }
    std::int64_t degree_sum() const { return degrees.size() > 0 ? degrees.sum() : 0; }
};

struct CsmPassStats {
    Index region_len = 0;  // compressible tokens before the pass
    Index kept = 0;        // merge edges retained = tokens removed
    Real ratio = 0.0;      // schedule ratio used
};

struct CompressionStats {
    Index length_before = 0;
    Index length_after = 0;
    std::vector<CsmPassStats> passes;

    bool compressed() const { return !passes.empty(); }
};

/// Budget from the cache ratio: B = floor(R * (prompt_len + max_decode)).
Index cache_budget(const ChelseaConfig& cfg, Index prompt_len);

/// Compresses the cache until length <= budget. Sink and recent rows are
/// preserved bit-exactly; each pass runs chunked matching on the middle
/// region at the scheduled ratio, capped so the final pass lands exactly on
/// the budget. No-op if already within budget. Throws ConvergenceError if a
/// pass cannot remove any token while still over budget.
CompressionStats chelsea_step(CacheState& state, const ChelseaConfig& cfg);

struct PrefillResult {
    Matrix outputs;  // row i = causal exact attention of query i over keys 0..i
    CacheState state;
    CompressionStats compression;
};

/// Initializes the cache from the prompt and runs the post-prefill
/// compression check. budget_override >= 0 substitutes for the computed B
/// (used for per-head reallocation).
PrefillResult prefill(Eigen::Ref<const Matrix> queries, Eigen::Ref<const Matrix> keys,
                      Eigen::Ref<const Matrix> values, const ChelseaConfig& cfg,
                      Index budget_override = -1);

struct DecodeResult {
    RowVector out;
    CompressionStats compression;
};

/// Appends (k, v) with degree 1, computes degree-biased attention over the
/// whole cache, then compresses if the trigger s >= B + g is met.
DecodeResult decode_step(CacheState& state, Eigen::Ref<const RowVector> q,
                         Eigen::Ref<const RowVector> k, Eigen::Ref<const RowVector> v,
                         const ChelseaConfig& cfg);

/// Splits head_count * budget tokens across heads: outlier heads get
/// full_len (never compressed), the rest share the remainder evenly with
/// leftovers going to the lowest head indices. Total is conserved exactly.
std::vector<Index> allocate_head_budgets(Index budget, Index head_count,
                                         const std::vector<Index>& outlier_heads, Index full_len,
                                         Index min_head_budget);

// Full q/k/v row streams for one head: rows [0, prompt_len) are the prompt,
// the next max_decode rows feed the decode loop.
struct HeadTensors {
    Matrix queries;
    Matrix keys;
    Matrix values;
};

struct TranscriptRecord {
    Index step = 0;  // 0 = prefill, then 1..max_decode
    Index head = 0;
    Index cache_len = 0;     // s at the end of the step
    std::string event;       // "prefill", "decode", or "compress"
    Real l2_error = 0.0;     // output distance to the uncompressed oracle
};

struct CompressionEvent {
    Index step = 0;
    Index head = 0;
    CompressionStats stats;
};

struct HeadRun {
    Matrix prefill_outputs;
    Matrix decode_outputs;
    Matrix oracle_decode_outputs;
    std::vector<Index> cache_len;           // per step 0..max_decode
    std::vector<std::int64_t> degree_sums;  // per step 0..max_decode
    CacheState final_state;
};

struct RunResult {
    std::vector<HeadRun> heads;
    std::vector<TranscriptRecord> records;  // ordered by (step, head)
    std::vector<CompressionEvent> compressions;
    std::vector<Index> head_budgets;
    std::vector<Index> outlier_heads;
};

/// Drives prefill plus max_decode decode steps for every head, with the
/// uncompressed exact-attention oracle computed alongside. When
/// cfg.outlier_ratio > 0, heads are profiled on their prompt keys and the
/// selected outliers keep the full cache via budget reallocation.
RunResult run_pipeline(const std::vector<HeadTensors>& heads, Index prompt_len,
                       const ChelseaConfig& cfg);

/// Line-delimited transcript: header then one "step,head,s,event,l2_error"
/// row per record. Byte-deterministic for fixed inputs.
void write_transcript_csv(std::ostream& os, const RunResult& result);

}  // namespace chelsea
