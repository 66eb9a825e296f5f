#pragma once

#include "chelsea/types.hpp"

#include <cstdint>
#include <vector>

namespace chelsea {

// Synthetic key/value workload with controllable locality. Keys follow a
// latent AR(1) walk with correlation length locality_scale plus isotropic
// noise, so expected neighbor similarity decays with token distance; values
// are independent noise. locality_scale = infinity freezes the walk (all
// keys identical when noise is 0).
struct SyntheticSpec {
    Index n = 1024;
    Index d = 64;
    Index heads = 1;
    Real locality_scale = 64.0;  // > 0
    Real noise = 0.1;            // >= 0
    std::uint64_t seed = 0;
};

struct HeadStates {
    Matrix keys;
    Matrix values;
};

/// Deterministic per-head key/value matrices.
std::vector<HeadStates> generate_synthetic(const SyntheticSpec& spec);

/// Deterministic per-head query matrices drawn from an independent stream of
/// the same seed (same locality process as keys).
std::vector<Matrix> synthetic_queries(const SyntheticSpec& spec);

// Mean cosine similarity of key pairs at each token distance 1..window,
// averaged over sampled anchors.
struct ProfileCurve {
    Index window = 0;
    std::vector<Real> mean_similarity;  // index i = distance i+1
};

/// Samples `samples` anchor tokens (positions with a full window ahead) and
/// averages similarity per distance.
ProfileCurve similarity_distance_profile(Eigen::Ref<const Matrix> keys, Index window,
                                         Index samples, std::uint64_t seed);

}  // namespace chelsea
