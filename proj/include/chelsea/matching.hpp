#pragma once

#include "chelsea/errors.hpp"
#include "chelsea/types.hpp"

#include <utility>
#include <vector>

namespace chelsea {

// Contiguous chunk ranges covering a compressible region. Every range is
// chunk_size long except possibly the last; ranges shorter than 2 cannot be
// bipartitioned and pass through uncompressed.
struct ChunkPlan {
    Index chunk_size = 0;
    std::vector<std::pair<Index, Index>> ranges;  // half-open [start, end)
};

// Candidate merge edge from an A-token to its best B-token in the same chunk.
struct Edge {
    Index a_index = 0;  // region-relative token index, A side
    Index b_index = 0;  // region-relative token index, B side
    Real similarity = 0.0;
    Index chunk_id = 0;
};

// Even/odd split of one chunk; indices are region-relative.
struct Bipartition {
    std::vector<Index> a;
    std::vector<Index> b;
};

// Partition of the compressible region. clusters[i] is sorted ascending and
// its surviving representative is representative_order[i]; the representative
// of a merged cluster is its B-token, singletons represent themselves.
struct Clustering {
    std::vector<std::vector<Index>> clusters;
    std::vector<Index> representative_order;

    Index surviving_count() const { return static_cast<Index>(representative_order.size()); }
};

/// Splits [0, region_len) into ceil(region_len / c) chunk ranges.
ChunkPlan make_chunks(Index region_len, Index c);

/// Even offsets to A, odd offsets to B. Ranges shorter than 2 yield an empty
/// bipartition (skip signal, not an error).
Bipartition alternating_partition(Index start, Index end);

/// For each A-token in the chunk, draws an edge to its most similar B-token.
/// Ties break toward the smaller b_index. Similarities are counted globally.
std::vector<Edge> match_chunk(Eigen::Ref<const Matrix> keys, Index start, Index end,
                              Index chunk_id);

/// Keeps the `keep` highest-similarity edges across all chunks; ties break by
/// (chunk_id, a_index) ascending and the result is sorted by that total
/// order. keep > |edges| clamps and bumps the prune_clamps counter.
std::vector<Edge> prune_edges(std::vector<Edge> edges, Index keep);

/// Number of merge edges to retain for a region of compressible_len tokens at
/// ratio r in [0, 0.5]; equals the exact token reduction of one pass.
Index edges_to_keep(Index compressible_len, Real r);

/// Groups kept edges into clusters over [0, region_len): A-tokens sharing a
/// B-target join one cluster, untouched tokens stay singletons.
Clustering build_clusters(const std::vector<Edge>& kept, Index region_len);

/// Matching pass with an explicit edge-retention count (clamped to the edges
/// actually drawn). The budget loop uses this to land exactly on target.
Clustering csm_pass(Eigen::Ref<const Matrix> keys, Index c, Index keep);

/// One full matching pass: chunk, bipartition, match, prune, cluster.
/// Returned cluster count is region_len minus the number of kept edges.
Clustering chunked_soft_matching(Eigen::Ref<const Matrix> keys, Index c, Real r);

}  // namespace chelsea
