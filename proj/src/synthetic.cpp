#include "chelsea/synthetic.hpp"

#include "chelsea/errors.hpp"
#include "chelsea/rng.hpp"
#include "chelsea/similarity.hpp"

#include <cmath>

namespace chelsea {
namespace {

constexpr std::uint64_t kKeyStream = 1;
constexpr std::uint64_t kValueStream = 2;
constexpr std::uint64_t kQueryStream = 3;
constexpr std::uint64_t kHeadStride = 101;

void check_spec(const SyntheticSpec& spec) {
    if (spec.n < 1 || spec.d < 1 || spec.heads < 1) {
        throw ContractError("generate_synthetic: n, d and heads must be >= 1");
    }
    if (!(spec.locality_scale > 0.0) || spec.noise < 0.0) {
        throw ConfigError("generate_synthetic: locality_scale must be > 0 and noise >= 0");
    }
}

Matrix latent_walk(Index n, Index d, Real locality_scale, Real noise, Rng& rng) {
    const Real rho = std::isinf(locality_scale) ? 1.0 : std::exp(-1.0 / locality_scale);
    const Real innovation = std::sqrt(std::max(0.0, 1.0 - rho * rho));

    RowVector latent(d);
    for (Index j = 0; j < d; ++j) {
        latent(j) = rng.normal();
    }
    Matrix out(n, d);
    for (Index t = 0; t < n; ++t) {
        if (t > 0) {
            for (Index j = 0; j < d; ++j) {
                latent(j) = rho * latent(j) + innovation * rng.normal();
            }
        }
        for (Index j = 0; j < d; ++j) {
            out(t, j) = latent(j) + (noise > 0.0 ? noise * rng.normal() : 0.0);
        }
    }
    return out;
}

Matrix white_noise(Index n, Index d, Rng& rng) {
    Matrix out(n, d);
    for (Index t = 0; t < n; ++t) {
        for (Index j = 0; j < d; ++j) {
            out(t, j) = rng.normal();
        }
    }
    return out;
}

}  // namespace

std::vector<HeadStates> generate_synthetic(const SyntheticSpec& spec) {
    check_spec(spec);
    std::vector<HeadStates> heads;
    heads.reserve(static_cast<std::size_t>(spec.heads));
    for (Index h = 0; h < spec.heads; ++h) {
        const auto hs = static_cast<std::uint64_t>(h) * kHeadStride;
        Rng key_rng(spec.seed, hs + kKeyStream);
        Rng value_rng(spec.seed, hs + kValueStream);
        HeadStates states;
        states.keys = latent_walk(spec.n, spec.d, spec.locality_scale, spec.noise, key_rng);
        states.values = white_noise(spec.n, spec.d, value_rng);
        heads.push_back(std::move(states));
    }
    return heads;
}

std::vector<Matrix> synthetic_queries(const SyntheticSpec& spec) {
    check_spec(spec);
    std::vector<Matrix> queries;
    queries.reserve(static_cast<std::size_t>(spec.heads));
    for (Index h = 0; h < spec.heads; ++h) {
        const auto hs = static_cast<std::uint64_t>(h) * kHeadStride;
        Rng rng(spec.seed, hs + kQueryStream);
        queries.push_back(latent_walk(spec.n, spec.d, spec.locality_scale, spec.noise, rng));
    }
    return queries;
}

ProfileCurve similarity_distance_profile(Eigen::Ref<const Matrix> keys, Index window,
                                         Index samples, std::uint64_t seed) {
    const Index n = keys.rows();
    if (window < 1 || window >= n) {
        throw ContractError("similarity_distance_profile: window must lie in [1, n)");
    }
    if (samples < 1) {
        throw ContractError("similarity_distance_profile: samples must be >= 1");
    }

    Rng rng(seed, 0xf00dULL);
    ProfileCurve curve;
    curve.window = window;
    curve.mean_similarity.assign(static_cast<std::size_t>(window), 0.0);

    // anchors with the whole window in range keep per-distance counts equal
    for (Index s = 0; s < samples; ++s) {
        const Index anchor = rng.uniform_int(0, n - 1 - window);
        for (Index dist = 1; dist <= window; ++dist) {
            curve.mean_similarity[static_cast<std::size_t>(dist - 1)] +=
                cosine_similarity(keys.row(anchor), keys.row(anchor + dist));
        }
    }
    for (auto& v : curve.mean_similarity) {
        v /= static_cast<Real>(samples);
    }
    return curve;
}

}  // namespace chelsea
