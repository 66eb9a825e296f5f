#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace chelsea {

// All internal arithmetic runs in double precision; tensor files store
// float32 payloads (see tensor_io.hpp).
using Real = double;
using Index = Eigen::Index;

// Caches are row-major: row i is the state of token i.
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Cluster degrees: number of original tokens behind each cached row. Every
// entry is >= 1 and the sum is invariant under compression.
using Degrees = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

}  // namespace chelsea
