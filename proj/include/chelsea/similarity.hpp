#pragma once

#include "chelsea/errors.hpp"
#include "chelsea/types.hpp"

#include <cmath>

namespace chelsea {

// Below this norm a vector is treated as degenerate: its similarity to
// anything is 0, so it never wins a merge match.
inline constexpr Real kZeroNormEps = 1e-12;

/// Cosine similarity of two vectors (any Eigen vector expressions).
/// Returns 0 if either norm is below kZeroNormEps.
template <typename DerivedA, typename DerivedB>
Real cosine_similarity(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
    if (a.size() != b.size() || a.size() < 1) {
        throw ContractError("cosine_similarity: dimension mismatch (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
    }
    const Real na = a.norm();
    const Real nb = b.norm();
    if (na < kZeroNormEps || nb < kZeroNormEps) {
        return 0.0;
    }
    Real dot = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        dot += static_cast<Real>(a(i)) * static_cast<Real>(b(i));
    }
    return dot / (na * nb);
}

/// Row-by-row cosine similarity: entry (i, j) = cosine of A.row(i) and
/// B.row(j). Adds rows(A) * rows(B) to the global similarity counter.
Matrix pairwise_similarity(Eigen::Ref<const Matrix> a, Eigen::Ref<const Matrix> b);

}  // namespace chelsea
