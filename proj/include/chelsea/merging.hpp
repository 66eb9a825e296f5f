#pragma once

#include "chelsea/matching.hpp"
#include "chelsea/types.hpp"

#include <cstdint>
#include <utility>

namespace chelsea {

/// Degree-weighted centroid of stacked state rows. Returns the centroid and
/// the summed degree.
std::pair<RowVector, std::int64_t> merge_rows(Eigen::Ref<const Matrix> states,
                                              Eigen::Ref<const Degrees> degrees);

struct CompressedCache {
    Matrix keys;
    Matrix values;
    Degrees degrees;
};

/// Merges key and value rows cluster by cluster. Output rows follow
/// clustering.representative_order; values use the same weights as keys and
/// the total degree is conserved.
CompressedCache compress_cache(Eigen::Ref<const Matrix> keys, Eigen::Ref<const Matrix> values,
                               Eigen::Ref<const Degrees> degrees, const Clustering& clustering);

}  // namespace chelsea
