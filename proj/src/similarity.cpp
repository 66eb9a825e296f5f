#include "chelsea/similarity.hpp"

#include "chelsea/metrics.hpp"

namespace chelsea {

Matrix pairwise_similarity(Eigen::Ref<const Matrix> a, Eigen::Ref<const Matrix> b) {
    if (a.cols() != b.cols()) {
        throw ContractError("pairwise_similarity: column mismatch (" + std::to_string(a.cols()) +
                            " vs " + std::to_string(b.cols()) + ")");
    }
    metrics().add_similarity_evals(static_cast<std::uint64_t>(a.rows()) *
                                   static_cast<std::uint64_t>(b.rows()));

    const Vector na = a.rowwise().norm();
    const Vector nb = b.rowwise().norm();
    Matrix sim = a * b.transpose();
    for (Index i = 0; i < sim.rows(); ++i) {
        for (Index j = 0; j < sim.cols(); ++j) {
            if (na(i) < kZeroNormEps || nb(j) < kZeroNormEps) {
                sim(i, j) = 0.0;
            } else {
                sim(i, j) /= na(i) * nb(j);
            }
        }
    }
    return sim;
}

}  // namespace chelsea
