#pragma once

#include "chelsea/types.hpp"

namespace chelsea {

struct AttentionOutput {
    RowVector out;    // attended value, dim d
    Vector weights;   // softmax probabilities over cache positions, sum 1
};

/// softmax(q K^T / sqrt(head_dim)) V with max-subtracted softmax.
AttentionOutput vanilla_attention(Eigen::Ref<const RowVector> q, Eigen::Ref<const Matrix> keys,
                                  Eigen::Ref<const Matrix> values, Index head_dim);

/// Degree-biased attention over cluster centroids:
/// softmax(q K^T / sqrt(head_dim) + log N) V. With all degrees 1 this is
/// exactly vanilla_attention.
AttentionOutput approx_attention(Eigen::Ref<const RowVector> q, Eigen::Ref<const Matrix> keys,
                                 Eigen::Ref<const Matrix> values,
                                 Eigen::Ref<const Degrees> degrees, Index head_dim);

struct AttentionError {
    Real l2 = 0.0;
    Real linf = 0.0;
    Real cosine = 0.0;
};

AttentionError attention_error(const AttentionOutput& exact, const AttentionOutput& approx);

}  // namespace chelsea
