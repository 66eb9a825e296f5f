#include "chelsea/matching.hpp"

#include "chelsea/metrics.hpp"
#include "chelsea/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace chelsea {

ChunkPlan make_chunks(Index region_len, Index c) {
    if (c < 2) {
        throw ConfigError("make_chunks: chunk size must be >= 2, got " + std::to_string(c));
    }
    if (region_len < 0) {
        throw ContractError("make_chunks: negative region length");
    }
    ChunkPlan plan;
    plan.chunk_size = c;
    for (Index start = 0; start < region_len; start += c) {
        plan.ranges.emplace_back(start, std::min(start + c, region_len));
    }
    return plan;
}

Bipartition alternating_partition(Index start, Index end) {
    Bipartition p;
    if (end - start < 2) {
        return p;  // too short to bipartition; caller skips
    }
    for (Index i = start; i < end; ++i) {
        ((i - start) % 2 == 0 ? p.a : p.b).push_back(i);
    }
    return p;
}

std::vector<Edge> match_chunk(Eigen::Ref<const Matrix> keys, Index start, Index end,
                              Index chunk_id) {
    if (start < 0 || end > keys.rows() || end - start < 2) {
        throw ContractError("match_chunk: invalid range [" + std::to_string(start) + ", " +
                            std::to_string(end) + ")");
    }
    const Bipartition part = alternating_partition(start, end);
    Matrix a_rows(static_cast<Index>(part.a.size()), keys.cols());
    Matrix b_rows(static_cast<Index>(part.b.size()), keys.cols());
    for (std::size_t i = 0; i < part.a.size(); ++i) {
        a_rows.row(static_cast<Index>(i)) = keys.row(part.a[i]);
    }
    for (std::size_t i = 0; i < part.b.size(); ++i) {
        b_rows.row(static_cast<Index>(i)) = keys.row(part.b[i]);
    }
    const Matrix sim = pairwise_similarity(a_rows, b_rows);

    std::vector<Edge> edges;
    edges.reserve(part.a.size());
    for (Index i = 0; i < sim.rows(); ++i) {
        Index best = 0;
        for (Index j = 1; j < sim.cols(); ++j) {
            if (sim(i, j) > sim(i, best)) {
                best = j;
            }
        }
        edges.push_back(Edge{part.a[static_cast<std::size_t>(i)],
                             part.b[static_cast<std::size_t>(best)], sim(i, best), chunk_id});
    }
    return edges;
}

namespace {

// similarity descending, then (chunk_id, a_index) ascending
bool edge_order(const Edge& x, const Edge& y) {
    if (x.similarity != y.similarity) {
        return x.similarity > y.similarity;
    }
    if (x.chunk_id != y.chunk_id) {
        return x.chunk_id < y.chunk_id;
    }
    return x.a_index < y.a_index;
}

}  // namespace

std::vector<Edge> prune_edges(std::vector<Edge> edges, Index keep) {
    if (keep < 0) {
        throw ContractError("prune_edges: negative keep count");
    }
    if (keep > static_cast<Index>(edges.size())) {
        metrics().add_prune_clamp();
        keep = static_cast<Index>(edges.size());
    }
    std::sort(edges.begin(), edges.end(), edge_order);
    edges.resize(static_cast<std::size_t>(keep));
    return edges;
}

Index edges_to_keep(Index compressible_len, Real r) {
    if (!(r >= 0.0 && r <= 0.5)) {
        throw ConfigError("edges_to_keep: ratio must lie in [0, 0.5], got " + std::to_string(r));
    }
    // Nudge past representation error so exact products floor correctly.
    return static_cast<Index>(std::floor(r * static_cast<Real>(compressible_len) + 1e-9));
}

Clustering build_clusters(const std::vector<Edge>& kept, Index region_len) {
    std::vector<bool> touched(static_cast<std::size_t>(region_len), false);
    std::map<Index, std::vector<Index>> by_target;  // b_index -> merged a_indices
    for (const Edge& e : kept) {
        if (e.a_index < 0 || e.a_index >= region_len || e.b_index < 0 || e.b_index >= region_len) {
            throw ContractError("build_clusters: edge outside region");
        }
        touched[static_cast<std::size_t>(e.a_index)] = true;
        touched[static_cast<std::size_t>(e.b_index)] = true;
        by_target[e.b_index].push_back(e.a_index);
    }

    Clustering out;
    for (Index i = 0; i < region_len; ++i) {
        if (auto it = by_target.find(i); it != by_target.end()) {
            std::vector<Index> members = it->second;
            members.push_back(i);
            std::sort(members.begin(), members.end());
            out.clusters.push_back(std::move(members));
            out.representative_order.push_back(i);
        } else if (!touched[static_cast<std::size_t>(i)]) {
            out.clusters.push_back({i});
            out.representative_order.push_back(i);
        }
        // merged A-tokens surface via their cluster's representative
    }
    return out;
}

Clustering csm_pass(Eigen::Ref<const Matrix> keys, Index c, Index keep) {
    const Index region_len = keys.rows();
    const ChunkPlan plan = make_chunks(region_len, c);

    std::vector<Edge> edges;
    Index chunk_id = 0;
    for (const auto& [start, end] : plan.ranges) {
        if (end - start >= 2) {
            auto chunk_edges = match_chunk(keys, start, end, chunk_id);
            edges.insert(edges.end(), chunk_edges.begin(), chunk_edges.end());
        }
        ++chunk_id;
    }

    keep = std::min(keep, static_cast<Index>(edges.size()));
    const std::vector<Edge> kept = prune_edges(std::move(edges), keep);
    metrics().add_csm_pass();
    return build_clusters(kept, region_len);
}

Clustering chunked_soft_matching(Eigen::Ref<const Matrix> keys, Index c, Real r) {
    return csm_pass(keys, c, edges_to_keep(keys.rows(), r));
}

}  // namespace chelsea
