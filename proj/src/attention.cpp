#include "chelsea/attention.hpp"

#include "chelsea/errors.hpp"
#include "chelsea/similarity.hpp"

#include <cmath>

namespace chelsea {
namespace {

AttentionOutput attend(Eigen::Ref<const RowVector> q, Eigen::Ref<const Matrix> keys,
                       Eigen::Ref<const Matrix> values, Index head_dim, const Vector* log_bias) {
    const Index n = keys.rows();
    if (n < 1) {
        throw ContractError("attention: empty cache");
    }
    if (values.rows() != n) {
        throw ContractError("attention: key/value row counts disagree");
    }
    if (q.size() != keys.cols()) {
        throw ContractError("attention: query dim does not match key dim");
    }
    if (head_dim < 1) {
        throw ContractError("attention: head_dim must be >= 1");
    }

    Vector logits = (keys * q.transpose()) / std::sqrt(static_cast<Real>(head_dim));
    if (log_bias != nullptr) {
        logits += *log_bias;
    }
    const Real peak = logits.maxCoeff();
    Vector weights = (logits.array() - peak).exp();
    weights /= weights.sum();

    AttentionOutput out;
    out.out = weights.transpose() * values;
    out.weights = std::move(weights);
    return out;
}

}  // namespace

AttentionOutput vanilla_attention(Eigen::Ref<const RowVector> q, Eigen::Ref<const Matrix> keys,
                                  Eigen::Ref<const Matrix> values, Index head_dim) {
    return attend(q, keys, values, head_dim, nullptr);
}

AttentionOutput approx_attention(Eigen::Ref<const RowVector> q, Eigen::Ref<const Matrix> keys,
                                 Eigen::Ref<const Matrix> values,
                                 Eigen::Ref<const Degrees> degrees, Index head_dim) {
    if (degrees.size() != keys.rows()) {
        throw ContractError("approx_attention: degree count does not match cache length");
    }
    if (degrees.size() > 0 && degrees.minCoeff() < 1) {
        throw ContractError("approx_attention: degree < 1");
    }
    const Vector log_bias = degrees.cast<Real>().array().log();
    return attend(q, keys, values, head_dim, &log_bias);
}

AttentionError attention_error(const AttentionOutput& exact, const AttentionOutput& approx) {
    if (exact.out.size() != approx.out.size()) {
        throw ContractError("attention_error: output dims disagree");
    }
    const RowVector diff = exact.out - approx.out;
    AttentionError e;
    e.l2 = diff.norm();
    e.linf = diff.size() > 0 ? diff.cwiseAbs().maxCoeff() : 0.0;
    e.cosine = cosine_similarity(exact.out, approx.out);
    return e;
}

}  // namespace chelsea
