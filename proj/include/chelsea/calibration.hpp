#pragma once

#include "chelsea/types.hpp"

#include <vector>

namespace chelsea {

// Per-head clustering affinity: the share of A-tokens whose best match falls
// below the similarity threshold, averaged over samples. Heads with a high
// proportion lack similarity structure and are exempted from compression.
struct HeadProfile {
    Index head_index = 0;
    Real unmatched_proportion = 0.0;
    Index sample_count = 0;
    std::vector<Real> sample_proportions;  // one per sample, for variance reporting
};

/// Runs the chunked matching front end (chunk, bipartition, best-match) on
/// each key sample and counts A-tokens with best-match similarity below
/// threshold.
HeadProfile profile_head(const std::vector<Matrix>& key_samples, Index c, Real threshold);

/// The ceil(ratio * H) heads with the highest unmatched proportion, ties to
/// the lower head index. Result is sorted ascending.
std::vector<Index> select_outliers(const std::vector<HeadProfile>& profiles, Real outlier_ratio);

}  // namespace chelsea
