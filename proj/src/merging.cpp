#include "chelsea/merging.hpp"

#include "chelsea/errors.hpp"

namespace chelsea {

std::pair<RowVector, std::int64_t> merge_rows(Eigen::Ref<const Matrix> states,
                                              Eigen::Ref<const Degrees> degrees) {
    if (states.rows() < 1) {
        throw ContractError("merge_rows: empty cluster");
    }
    if (states.rows() != degrees.size()) {
        throw ContractError("merge_rows: degree count does not match row count");
    }
    std::int64_t total = 0;
    RowVector acc = RowVector::Zero(states.cols());
    for (Index i = 0; i < states.rows(); ++i) {
        if (degrees(i) < 1) {
            throw ContractError("merge_rows: degree < 1");
        }
        acc += static_cast<Real>(degrees(i)) * states.row(i);
        total += degrees(i);
    }
    acc /= static_cast<Real>(total);
    return {std::move(acc), total};
}

CompressedCache compress_cache(Eigen::Ref<const Matrix> keys, Eigen::Ref<const Matrix> values,
                               Eigen::Ref<const Degrees> degrees, const Clustering& clustering) {
    const Index n = keys.rows();
    if (values.rows() != n || degrees.size() != n) {
        throw ContractError("compress_cache: key/value/degree row counts disagree");
    }
    Index covered = 0;
    for (const auto& cluster : clustering.clusters) {
        covered += static_cast<Index>(cluster.size());
    }
    if (covered != n ||
        clustering.clusters.size() != clustering.representative_order.size()) {
        throw ContractError("compress_cache: clustering does not cover the region");
    }

    const Index out_rows = clustering.surviving_count();
    CompressedCache out;
    out.keys.resize(out_rows, keys.cols());
    out.values.resize(out_rows, values.cols());
    out.degrees.resize(out_rows);

    for (Index ci = 0; ci < out_rows; ++ci) {
        const auto& members = clustering.clusters[static_cast<std::size_t>(ci)];
        if (members.size() == 1) {
            const Index idx = members[0];
            out.keys.row(ci) = keys.row(idx);
            out.values.row(ci) = values.row(idx);
            out.degrees(ci) = degrees(idx);
            continue;
        }
        Matrix k_rows(static_cast<Index>(members.size()), keys.cols());
        Matrix v_rows(static_cast<Index>(members.size()), values.cols());
        Degrees d(static_cast<Index>(members.size()));
        for (std::size_t mi = 0; mi < members.size(); ++mi) {
            if (members[mi] < 0 || members[mi] >= n) {
                throw ContractError("compress_cache: cluster index outside region");
            }
            k_rows.row(static_cast<Index>(mi)) = keys.row(members[mi]);
            v_rows.row(static_cast<Index>(mi)) = values.row(members[mi]);
            d(static_cast<Index>(mi)) = degrees(members[mi]);
        }
        auto [k_merged, total] = merge_rows(k_rows, d);
        auto [v_merged, v_total] = merge_rows(v_rows, d);
        out.keys.row(ci) = k_merged;
        out.values.row(ci) = v_merged;
        out.degrees(ci) = total;
        (void)v_total;
    }
    return out;
}

}  // namespace chelsea
