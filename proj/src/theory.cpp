#include "chelsea/theory.hpp"

#include "chelsea/errors.hpp"
#include "chelsea/rng.hpp"

#include <algorithm>
#include <cmath>

namespace chelsea {
namespace theory {

ScoreFunction::ScoreFunction(std::vector<Real> values, Unchecked) : values_(std::move(values)) {}

ScoreFunction::ScoreFunction(std::vector<Real> values) : values_(std::move(values)) {
    if (values_.empty() || values_.size() % 2 == 0) {
        throw ContractError("ScoreFunction: needs 2n-1 tabulated distances");
    }
    Real scale = 0.0;
    for (Real v : values_) {
        if (!std::isfinite(v)) {
            throw ContractError("ScoreFunction: non-finite value");
        }
        scale = std::max(scale, std::abs(v));
    }
    const Real slack = 1e-12 * (1.0 + scale);
    Real prev_diff = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        const Real diff = values_[i] - values_[i + 1];
        if (diff < -slack || diff > prev_diff + slack) {
            throw ContractError(
                "ScoreFunction: hypothesis violated (differences must be nonnegative and "
                "non-increasing)");
        }
        prev_diff = diff;
    }
}

ScoreFunction ScoreFunction::unchecked(std::vector<Real> values) {
    if (values.empty() || values.size() % 2 == 0) {
        throw ContractError("ScoreFunction: needs 2n-1 tabulated distances");
    }
    return ScoreFunction(std::move(values), Unchecked{});
}

Real partition_objective(const std::vector<Index>& a, const std::vector<Index>& b,
                         const ScoreFunction& f) {
    const Index n = f.pair_count();
    if (static_cast<Index>(a.size()) != n || static_cast<Index>(b.size()) != n) {
        throw ContractError("partition_objective: sets must both have size n");
    }
    std::vector<bool> seen(static_cast<std::size_t>(2 * n + 1), false);
    for (const auto& set : {a, b}) {
        for (Index x : set) {
            if (x < 1 || x > 2 * n || seen[static_cast<std::size_t>(x)]) {
                throw ContractError("partition_objective: sets must partition [2n]");
            }
            seen[static_cast<std::size_t>(x)] = true;
        }
    }
    Real total = 0.0;
    for (Index x : a) {
        for (Index y : b) {
            total += f(std::abs(x - y));
        }
    }
    return total;
}

Partition alternating_partition_1based(Index n) {
    Partition p;
    for (Index i = 1; i <= 2 * n; ++i) {
        (i % 2 == 1 ? p.a : p.b).push_back(i);
    }
    return p;
}

TheoremReport verify_theorem(Index n, const ScoreFunction& f) {
    if (n < 1 || n > 8) {
        throw ContractError("verify_theorem: n must lie in [1, 8] for exhaustion");
    }
    if (f.pair_count() != n) {
        throw ContractError("verify_theorem: score table does not cover distances 1..2n-1");
    }

    constexpr Real kTol = 1e-9;
    TheoremReport report;
    report.best_value = -std::numeric_limits<Real>::infinity();

    // Choose the remaining n-1 members of A from {2..2n}; 1 stays in A since
    // swapping A and B leaves the objective unchanged.
    std::vector<bool> pick(static_cast<std::size_t>(2 * n - 1), false);
    std::fill(pick.end() - (n - 1), pick.end(), true);
    std::vector<Partition> candidates;
    do {
        Partition p;
        p.a.push_back(1);
        for (Index i = 0; i < 2 * n - 1; ++i) {
            (pick[static_cast<std::size_t>(i)] ? p.a : p.b).push_back(i + 2);
        }
        const Real value = partition_objective(p.a, p.b, f);
        if (value > report.best_value + kTol) {
            report.best_value = value;
            candidates.clear();
        }
        if (value >= report.best_value - kTol) {
            report.best_value = std::max(report.best_value, value);
            candidates.push_back(std::move(p));
        }
    } while (std::next_permutation(pick.begin(), pick.end()));

    // Re-filter: early candidates may have entered against a weaker maximum.
    for (auto& p : candidates) {
        if (partition_objective(p.a, p.b, f) >= report.best_value - kTol) {
            report.argmax_partitions.push_back(std::move(p));
        }
    }

    const Partition alt = alternating_partition_1based(n);
    report.alternating_value = partition_objective(alt.a, alt.b, f);
    report.holds = report.alternating_value >= report.best_value - kTol;
    return report;
}

ScoreFunction random_valid_score(Index n, std::uint64_t seed) {
    if (n < 1) {
        throw ContractError("random_valid_score: n must be >= 1");
    }
    Rng rng(seed);
    const Index len = 2 * n - 1;
    std::vector<Real> b(static_cast<std::size_t>(std::max<Index>(len - 1, 0)));
    for (auto& v : b) {
        v = rng.uniform();  // nonnegative curvature increments
    }
    const Real tail = rng.uniform();
    std::vector<Real> f(static_cast<std::size_t>(len));
    f[static_cast<std::size_t>(len - 1)] = tail;
    // f(i) = f(2n-1) + sum_{j=i}^{2n-2} (j - i + 1) * b_j, accumulated backwards
    for (Index i = len - 2; i >= 0; --i) {
        Real acc = tail;
        for (Index j = i; j <= len - 2; ++j) {
            acc += static_cast<Real>(j - i + 1) * b[static_cast<std::size_t>(j)];
        }
        f[static_cast<std::size_t>(i)] = acc;
    }
    return ScoreFunction(std::move(f));
}

}  // namespace theory
}  // namespace chelsea
