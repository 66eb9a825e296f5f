#include "chelsea/pipeline.hpp"

#include "chelsea/calibration.hpp"
#include "chelsea/errors.hpp"
#include "chelsea/matching.hpp"
#include "chelsea/merging.hpp"
#include "chelsea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace chelsea {
namespace {

Real checked_ratio(Real r, const char* what) {
    if (!(r >= 0.0 && r <= 0.5)) {
        throw ConfigError(std::string(what) + " must lie in [0, 0.5], got " + std::to_string(r));
    }
    return r;
}

Index resolve_head_dim(const ChelseaConfig& cfg, Index key_dim) {
    return cfg.head_dim > 0 ? cfg.head_dim : key_dim;
}

}  // namespace

RatioSchedule::RatioSchedule(Real r_init, Real alpha, Index m, Real floor_value)
    : r_init_(r_init), alpha_(alpha), m_(m), floor_(floor_value) {
    if (m_ < 0) {
        throw ConfigError("RatioSchedule: m must be >= 0");
    }
    checked_ratio(floor_, "RatioSchedule: floor");
    // r(i) is monotone between i = 0 and i = m, so the endpoints bound it.
    checked_ratio(std::max(floor_, r_init_), "RatioSchedule: r(0)");
    checked_ratio(std::max(floor_, r_init_ - alpha_ * static_cast<Real>(m_)),
                  "RatioSchedule: r(m)");
}

RatioSchedule RatioSchedule::llama2_preset(Real floor_value) {
    return RatioSchedule(0.45, 0.05, 3, floor_value);
}

RatioSchedule RatioSchedule::llama3_preset(Real floor_value) {
    return RatioSchedule(0.35, 0.1, 2, floor_value);
}

RatioSchedule RatioSchedule::qwen_preset(Real floor_value) {
    return RatioSchedule(0.2, 0.1, 2, floor_value);
}

Real schedule_ratio(const RatioSchedule& schedule, Index i) {
    if (i < 0) {
        throw ContractError("schedule_ratio: negative step");
    }
    const Real stepped =
        schedule.r_init() - schedule.alpha() * static_cast<Real>(std::min(schedule.m(), i));
    return std::max(schedule.floor_value(), stepped);
}

void ChelseaConfig::validate() const {
    if (!(cache_ratio > 0.0 && cache_ratio <= 1.0)) {
        throw ConfigError("cache_ratio must lie in (0, 1]");
    }
    if (max_decode < 0) {
        throw ConfigError("max_decode must be >= 0");
    }
    if (sink < 0 || recent < 0) {
        throw ConfigError("sink and recent must be >= 0");
    }
    if (interval < 1) {
        throw ConfigError("interval must be >= 1");
    }
    if (chunk_size < 2) {
        throw ConfigError("chunk_size must be >= 2");
    }
    if (head_count < 0) {
        throw ConfigError("head_count must be >= 0");
    }
    if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) {
        throw ConfigError("outlier_ratio must lie in [0, 1)");
    }
    if (!(outlier_threshold > -1.0 && outlier_threshold < 1.0)) {
        throw ConfigError("outlier_threshold must lie in (-1, 1)");
    }
    if (head_dim < 0) {
        throw ConfigError("head_dim must be >= 0");
    }
}

Index cache_budget(const ChelseaConfig& cfg, Index prompt_len) {
    return static_cast<Index>(
        std::floor(cfg.cache_ratio * static_cast<Real>(prompt_len + cfg.max_decode) + 1e-9));
}

CompressionStats chelsea_step(CacheState& state, const ChelseaConfig& cfg) {
    cfg.validate();
    if (state.keys.rows() != state.values.rows() || state.keys.rows() != state.degrees.size()) {
        throw ContractError("chelsea_step: key/value/degree row counts disagree");
    }
    CompressionStats stats;
    stats.length_before = state.length();

    const Index protected_rows = cfg.sink + cfg.recent;
    while (state.length() > state.budget) {
        const Index s = state.length();
        const Index region_len = s - protected_rows;
        if (region_len < 2) {
            throw ConvergenceError(
                "chelsea_step: compressible region exhausted while still over budget");
        }
        const Real r = schedule_ratio(cfg.schedule, state.clustering_step);
        const Index target = std::min(edges_to_keep(region_len, r), s - state.budget);
        if (target < 1) {
            throw ConvergenceError(
                "chelsea_step: ratio schedule yields no reduction while over budget (r = " +
                std::to_string(r) + ")");
        }

        const auto mid_keys = state.keys.middleRows(cfg.sink, region_len);
        const auto mid_values = state.values.middleRows(cfg.sink, region_len);
        const auto mid_degrees = state.degrees.segment(cfg.sink, region_len);
        const Clustering clustering = csm_pass(mid_keys, cfg.chunk_size, target);
        const CompressedCache mid = compress_cache(mid_keys, mid_values, mid_degrees, clustering);
        const Index kept = region_len - mid.keys.rows();
        if (kept < 1) {
            throw ConvergenceError("chelsea_step: matching produced no merge edges");
        }

        const Index new_len = cfg.sink + mid.keys.rows() + cfg.recent;
        Matrix keys(new_len, state.keys.cols());
        Matrix values(new_len, state.values.cols());
        Degrees degrees(new_len);
        keys.topRows(cfg.sink) = state.keys.topRows(cfg.sink);
        values.topRows(cfg.sink) = state.values.topRows(cfg.sink);
        degrees.head(cfg.sink) = state.degrees.head(cfg.sink);
        keys.middleRows(cfg.sink, mid.keys.rows()) = mid.keys;
        values.middleRows(cfg.sink, mid.values.rows()) = mid.values;
        degrees.segment(cfg.sink, mid.degrees.size()) = mid.degrees;
        keys.bottomRows(cfg.recent) = state.keys.bottomRows(cfg.recent);
        values.bottomRows(cfg.recent) = state.values.bottomRows(cfg.recent);
        degrees.tail(cfg.recent) = state.degrees.tail(cfg.recent);

        state.keys = std::move(keys);
        state.values = std::move(values);
        state.degrees = std::move(degrees);
        stats.passes.push_back(CsmPassStats{region_len, kept, r});
        ++state.clustering_step;
    }

    stats.length_after = state.length();
    if (stats.compressed()) {
        metrics().add_compression();
    }
    return stats;
}

PrefillResult prefill(Eigen::Ref<const Matrix> queries, Eigen::Ref<const Matrix> keys,
                      Eigen::Ref<const Matrix> values, const ChelseaConfig& cfg,
                      Index budget_override) {
    cfg.validate();
    const Index n = keys.rows();
    if (n < 1) {
        throw ContractError("prefill: empty prompt");
    }
    if (queries.rows() != n || values.rows() != n || queries.cols() != keys.cols()) {
        throw ContractError("prefill: query/key/value shapes disagree");
    }
    const Index budget = budget_override >= 0 ? budget_override : cache_budget(cfg, n);
    if (budget < cfg.sink + cfg.recent + 2) {
        throw ConfigError("prefill: budget " + std::to_string(budget) +
                          " cannot hold sink + recent + 2 tokens");
    }
    const Index head_dim = resolve_head_dim(cfg, keys.cols());

    PrefillResult result;
    result.outputs.resize(n, values.cols());
    for (Index i = 0; i < n; ++i) {
        result.outputs.row(i) =
            vanilla_attention(queries.row(i), keys.topRows(i + 1), values.topRows(i + 1), head_dim)
                .out;
    }
    result.state.keys = keys;
    result.state.values = values;
    result.state.degrees = Degrees::Ones(n);
    result.state.budget = budget;

    if (result.state.length() >= budget + cfg.interval) {
        result.compression = chelsea_step(result.state, cfg);
    } else {
        result.compression.length_before = n;
        result.compression.length_after = n;
    }
    return result;
}

DecodeResult decode_step(CacheState& state, Eigen::Ref<const RowVector> q,
                         Eigen::Ref<const RowVector> k, Eigen::Ref<const RowVector> v,
                         const ChelseaConfig& cfg) {
    if (k.size() != state.keys.cols() || v.size() != state.values.cols()) {
        throw ContractError("decode_step: state dim does not match cache");
    }
    if (state.budget < 1) {
        throw ContractError("decode_step: state has no budget; initialize via prefill");
    }
    const Index s = state.length();
    state.keys.conservativeResize(s + 1, Eigen::NoChange);
    state.values.conservativeResize(s + 1, Eigen::NoChange);
    state.degrees.conservativeResize(s + 1);
    state.keys.row(s) = k;
    state.values.row(s) = v;
    state.degrees(s) = 1;

    DecodeResult result;
    result.out = approx_attention(q, state.keys, state.values, state.degrees,
                                  resolve_head_dim(cfg, state.keys.cols()))
                     .out;
    if (state.length() >= state.budget + cfg.interval) {
        result.compression = chelsea_step(state, cfg);
    } else {
        result.compression.length_before = state.length();
        result.compression.length_after = state.length();
    }
    return result;
}

std::vector<Index> allocate_head_budgets(Index budget, Index head_count,
                                         const std::vector<Index>& outlier_heads, Index full_len,
                                         Index min_head_budget) {
    if (head_count < 1) {
        throw ContractError("allocate_head_budgets: head_count must be >= 1");
    }
    std::vector<bool> is_outlier(static_cast<std::size_t>(head_count), false);
    for (Index h : outlier_heads) {
        if (h < 0 || h >= head_count) {
            throw ContractError("allocate_head_budgets: outlier index out of range");
        }
        if (is_outlier[static_cast<std::size_t>(h)]) {
            throw ContractError("allocate_head_budgets: duplicate outlier index");
        }
        is_outlier[static_cast<std::size_t>(h)] = true;
    }
    const Index outliers = static_cast<Index>(outlier_heads.size());
    if (outliers >= head_count) {
        throw ConfigError("allocate_head_budgets: every head marked outlier");
    }

    const Index regular = head_count - outliers;
    const Index total = head_count * budget - outliers * full_len;
    if (total < regular * min_head_budget) {
        throw ConfigError("allocate_head_budgets: reallocation infeasible, regular heads would "
                          "drop below " +
                          std::to_string(min_head_budget));
    }
    const Index base = total / regular;
    Index remainder = total % regular;

    std::vector<Index> budgets(static_cast<std::size_t>(head_count));
    for (Index h = 0; h < head_count; ++h) {
        if (is_outlier[static_cast<std::size_t>(h)]) {
            budgets[static_cast<std::size_t>(h)] = full_len;
        } else {
            budgets[static_cast<std::size_t>(h)] = base + (remainder > 0 ? 1 : 0);
            if (remainder > 0) {
                --remainder;
            }
        }
    }
    return budgets;
}

RunResult run_pipeline(const std::vector<HeadTensors>& heads, Index prompt_len,
                       const ChelseaConfig& cfg) {
    cfg.validate();
    const Index head_count = static_cast<Index>(heads.size());
    if (head_count < 1) {
        throw ContractError("run_pipeline: no heads");
    }
    if (cfg.head_count > 0 && cfg.head_count != head_count) {
        throw ConfigError("run_pipeline: head_count in config (" + std::to_string(cfg.head_count) +
                          ") does not match inputs (" + std::to_string(head_count) + ")");
    }
    const Index total_len = prompt_len + cfg.max_decode;
    if (prompt_len < 1) {
        throw ContractError("run_pipeline: prompt_len must be >= 1");
    }
    for (const HeadTensors& h : heads) {
        if (h.queries.rows() < total_len || h.keys.rows() < total_len ||
            h.values.rows() < total_len) {
            throw ContractError("run_pipeline: head tensors shorter than prompt + decode");
        }
        if (h.keys.cols() != heads[0].keys.cols() || h.values.cols() != heads[0].values.cols()) {
            throw ContractError("run_pipeline: head dims disagree");
        }
    }

    RunResult result;
    const Index budget = cache_budget(cfg, prompt_len);

    if (cfg.outlier_ratio > 0.0) {
        std::vector<HeadProfile> profiles;
        profiles.reserve(static_cast<std::size_t>(head_count));
        for (Index h = 0; h < head_count; ++h) {
            std::vector<Matrix> sample = {heads[static_cast<std::size_t>(h)].keys.topRows(prompt_len)};
            HeadProfile p = profile_head(sample, cfg.chunk_size, cfg.outlier_threshold);
            p.head_index = h;
            profiles.push_back(std::move(p));
        }
        result.outlier_heads = select_outliers(profiles, cfg.outlier_ratio);
        result.head_budgets = allocate_head_budgets(budget, head_count, result.outlier_heads,
                                                    total_len, cfg.sink + cfg.recent + 2);
    } else {
        result.head_budgets.assign(static_cast<std::size_t>(head_count), budget);
    }

    const Index head_dim = resolve_head_dim(cfg, heads[0].keys.cols());
    for (Index h = 0; h < head_count; ++h) {
        const HeadTensors& input = heads[static_cast<std::size_t>(h)];
        HeadRun run;

        PrefillResult pre = prefill(input.queries.topRows(prompt_len),
                                    input.keys.topRows(prompt_len),
                                    input.values.topRows(prompt_len), cfg,
                                    result.head_budgets[static_cast<std::size_t>(h)]);
        run.prefill_outputs = std::move(pre.outputs);
        CacheState state = std::move(pre.state);
        run.cache_len.push_back(state.length());
        run.degree_sums.push_back(state.degree_sum());
        result.records.push_back(TranscriptRecord{
            0, h, state.length(), pre.compression.compressed() ? "compress" : "prefill", 0.0});
        if (pre.compression.compressed()) {
            result.compressions.push_back(CompressionEvent{0, h, std::move(pre.compression)});
        }

        run.decode_outputs.resize(cfg.max_decode, input.values.cols());
        run.oracle_decode_outputs.resize(cfg.max_decode, input.values.cols());
        for (Index t = 0; t < cfg.max_decode; ++t) {
            const Index row = prompt_len + t;
            DecodeResult step = decode_step(state, input.queries.row(row), input.keys.row(row),
                                            input.values.row(row), cfg);
            run.decode_outputs.row(t) = step.out;
            run.oracle_decode_outputs.row(t) =
                vanilla_attention(input.queries.row(row), input.keys.topRows(row + 1),
                                  input.values.topRows(row + 1), head_dim)
                    .out;
            const Real l2 = (run.decode_outputs.row(t) - run.oracle_decode_outputs.row(t)).norm();
            run.cache_len.push_back(state.length());
            run.degree_sums.push_back(state.degree_sum());
            result.records.push_back(TranscriptRecord{
                t + 1, h, state.length(), step.compression.compressed() ? "compress" : "decode",
                l2});
            if (step.compression.compressed()) {
                result.compressions.push_back(CompressionEvent{t + 1, h, std::move(step.compression)});
            }
        }
        run.final_state = std::move(state);
        result.heads.push_back(std::move(run));
    }

    std::sort(result.records.begin(), result.records.end(),
              [](const TranscriptRecord& a, const TranscriptRecord& b) {
                  return a.step != b.step ? a.step < b.step : a.head < b.head;
              });
    return result;
}

void write_transcript_csv(std::ostream& os, const RunResult& result) {
    os << "step,head,s,event,l2_error\n";
    char buf[64];
    for (const TranscriptRecord& rec : result.records) {
        std::snprintf(buf, sizeof(buf), "%.17g", rec.l2_error);
        os << rec.step << ',' << rec.head << ',' << rec.cache_len << ',' << rec.event << ','
           << buf << '\n';
    }
}

}  // namespace chelsea
