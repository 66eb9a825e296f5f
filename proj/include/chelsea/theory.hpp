#pragma once

#include "chelsea/types.hpp"

#include <cstdint>
#include <vector>

namespace chelsea {
namespace theory {

// Tabulated score f(1..2n-1) over token distances, 1-based to mirror the
// positions {1..2n} it scores. Construction enforces the convex,
// monotonically decreasing hypothesis:
//   f(1)-f(2) >= f(2)-f(3) >= ... >= f(2n-2)-f(2n-1) >= 0.
class ScoreFunction {
public:
    /// Throws ContractError if the hypothesis fails (validated with a small
    /// slack for reconstructed tables).
    explicit ScoreFunction(std::vector<Real> values);

    /// Skips the hypothesis check; for probing non-convex score tables.
    static ScoreFunction unchecked(std::vector<Real> values);

    Real operator()(Index distance) const { return values_[static_cast<std::size_t>(distance - 1)]; }
    Index max_distance() const { return static_cast<Index>(values_.size()); }
    Index pair_count() const { return (max_distance() + 1) / 2; }  // n with 2n-1 distances
    const std::vector<Real>& values() const { return values_; }

private:
    struct Unchecked {};
    ScoreFunction(std::vector<Real> values, Unchecked);

    std::vector<Real> values_;
};

// One balanced partition of [2n] as 1-based index sets.
struct Partition {
    std::vector<Index> a;
    std::vector<Index> b;
};

struct TheoremReport {
    bool holds = false;
    Real best_value = 0.0;
    Real alternating_value = 0.0;
    std::vector<Partition> argmax_partitions;  // canonicalized with 1 in A
};

/// Cross-set objective sum_{x in A} sum_{y in B} f(|x - y|). A and B must be
/// disjoint, cover [2n], and have equal size n.
Real partition_objective(const std::vector<Index>& a, const std::vector<Index>& b,
                         const ScoreFunction& f);

/// The alternating partition ({1,3,...,2n-1}, {2,4,...,2n}).
Partition alternating_partition_1based(Index n);

/// Enumerates every balanced partition of [2n] (1 fixed in A; the objective
/// is symmetric in A and B) and checks that the alternating partition attains
/// the maximum within 1e-9. n <= 8.
TheoremReport verify_theorem(Index n, const ScoreFunction& f);

/// Draws a random score table guaranteed to satisfy the hypothesis: samples
/// nonnegative curvature increments b_1..b_{2n-2} plus a tail value and
/// reconstructs f(i) = f(2n-1) + sum_{j>=i} (j-i+1) b_j.
ScoreFunction random_valid_score(Index n, std::uint64_t seed);

}  // namespace theory
}  // namespace chelsea
