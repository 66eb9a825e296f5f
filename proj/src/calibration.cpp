#include "chelsea/calibration.hpp"

#include "chelsea/errors.hpp"
#include "chelsea/matching.hpp"

#include <algorithm>
#include <cmath>

namespace chelsea {

HeadProfile profile_head(const std::vector<Matrix>& key_samples, Index c, Real threshold) {
    if (key_samples.empty()) {
        throw ContractError("profile_head: no key samples");
    }
    if (!(threshold > -1.0 && threshold < 1.0)) {
        throw ConfigError("profile_head: threshold must lie in (-1, 1)");
    }

    HeadProfile profile;
    for (const Matrix& keys : key_samples) {
        if (keys.rows() < 2) {
            throw ContractError("profile_head: each sample needs at least 2 rows");
        }
        const ChunkPlan plan = make_chunks(keys.rows(), c);
        Index a_total = 0;
        Index unmatched = 0;
        Index chunk_id = 0;
        for (const auto& [start, end] : plan.ranges) {
            if (end - start >= 2) {
                for (const Edge& e : match_chunk(keys, start, end, chunk_id)) {
                    ++a_total;
                    if (e.similarity < threshold) {
                        ++unmatched;
                    }
                }
            }
            ++chunk_id;
        }
        profile.sample_proportions.push_back(static_cast<Real>(unmatched) /
                                             static_cast<Real>(a_total));
    }

    profile.sample_count = static_cast<Index>(profile.sample_proportions.size());
    Real sum = 0.0;
    for (Real p : profile.sample_proportions) {
        sum += p;
    }
    profile.unmatched_proportion = sum / static_cast<Real>(profile.sample_count);
    return profile;
}

std::vector<Index> select_outliers(const std::vector<HeadProfile>& profiles, Real outlier_ratio) {
    if (profiles.empty()) {
        throw ContractError("select_outliers: no profiles");
    }
    if (!(outlier_ratio >= 0.0 && outlier_ratio < 1.0)) {
        throw ConfigError("select_outliers: ratio must lie in [0, 1)");
    }
    const Index head_count = static_cast<Index>(profiles.size());
    const Index want = std::min<Index>(
        head_count,
        static_cast<Index>(std::ceil(outlier_ratio * static_cast<Real>(head_count) - 1e-9)));
    if (want <= 0) {
        return {};
    }

    std::vector<const HeadProfile*> order;
    order.reserve(profiles.size());
    for (const HeadProfile& p : profiles) {
        order.push_back(&p);
    }
    std::sort(order.begin(), order.end(), [](const HeadProfile* a, const HeadProfile* b) {
        if (a->unmatched_proportion != b->unmatched_proportion) {
            return a->unmatched_proportion > b->unmatched_proportion;
        }
        return a->head_index < b->head_index;
    });

    std::vector<Index> selected;
    selected.reserve(static_cast<std::size_t>(want));
    for (Index i = 0; i < want; ++i) {
        selected.push_back(order[static_cast<std::size_t>(i)]->head_index);
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

}  // namespace chelsea
