#include "chelsea/matching.hpp"

#include "chelsea/metrics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <set>

using namespace chelsea;
using test::random_matrix;
using test::rows;

TEST_SUITE("matching.make_chunks") {
    TEST_CASE("splits with a short tail") {
        const ChunkPlan plan = make_chunks(10, 4);
        REQUIRE(plan.ranges.size() == 3);
        CHECK(plan.ranges[0] == std::pair<Index, Index>{0, 4});
        CHECK(plan.ranges[1] == std::pair<Index, Index>{4, 8});
        CHECK(plan.ranges[2] == std::pair<Index, Index>{8, 10});
    }

    TEST_CASE("region smaller than chunk") {
        const ChunkPlan plan = make_chunks(4, 256);
        REQUIRE(plan.ranges.size() == 1);
        CHECK(plan.ranges[0] == std::pair<Index, Index>{0, 4});
    }

    TEST_CASE("empty region") {
        CHECK(make_chunks(0, 256).ranges.empty());
    }

    TEST_CASE("chunk size below 2 is a config error") {
        CHECK_THROWS_AS(make_chunks(10, 1), ConfigError);
        CHECK_THROWS_AS(make_chunks(10, 0), ConfigError);
    }
}

TEST_SUITE("matching.alternating_partition") {
    TEST_CASE("even length") {
        const Bipartition p = alternating_partition(0, 6);
        CHECK(p.a == std::vector<Index>{0, 2, 4});
        CHECK(p.b == std::vector<Index>{1, 3, 5});
    }

    TEST_CASE("minimal chunk") {
        const Bipartition p = alternating_partition(0, 2);
        CHECK(p.a == std::vector<Index>{0});
        CHECK(p.b == std::vector<Index>{1});
    }

    TEST_CASE("odd length") {
        const Bipartition p = alternating_partition(0, 5);
        CHECK(p.a == std::vector<Index>{0, 2, 4});
        CHECK(p.b == std::vector<Index>{1, 3});
    }

    TEST_CASE("offset range keeps global indices") {
        const Bipartition p = alternating_partition(4, 8);
        CHECK(p.a == std::vector<Index>{4, 6});
        CHECK(p.b == std::vector<Index>{5, 7});
    }

    TEST_CASE("too-short range is a skip signal") {
        CHECK(alternating_partition(3, 4).a.empty());
        CHECK(alternating_partition(3, 3).a.empty());
    }

    TEST_CASE("set sizes are ceil and floor of len/2") {
        for (Index len = 2; len <= 9; ++len) {
            const Bipartition p = alternating_partition(0, len);
            CHECK(static_cast<Index>(p.a.size()) == (len + 1) / 2);
            CHECK(static_cast<Index>(p.b.size()) == len / 2);
        }
    }
}

TEST_SUITE("matching.match_chunk") {
    TEST_CASE("identical pairs match across sets") {
        // 2x2 similarity table: A={0,2}, B={1,3}; token 0 matches 1, token 2 matches 3
        const Matrix keys = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
        const auto edges = match_chunk(keys, 0, 4, 0);
        REQUIRE(edges.size() == 2);
        CHECK(edges[0].a_index == 0);
        CHECK(edges[0].b_index == 1);
        CHECK(edges[0].similarity == doctest::Approx(1.0));
        CHECK(edges[1].a_index == 2);
        CHECK(edges[1].b_index == 3);
        CHECK(edges[1].similarity == doctest::Approx(1.0));
    }

    TEST_CASE("single candidate") {
        const Matrix keys = rows({{1, 0}, {0, 1}});
        const auto edges = match_chunk(keys, 0, 2, 0);
        REQUIRE(edges.size() == 1);
        CHECK(edges[0].a_index == 0);
        CHECK(edges[0].b_index == 1);
        CHECK(edges[0].similarity == doctest::Approx(0.0));
    }

    TEST_CASE("ties break toward the smaller b_index") {
        const Matrix keys = rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}});
        const auto edges = match_chunk(keys, 0, 4, 0);
        REQUIRE(edges.size() == 2);
        CHECK(edges[0].a_index == 0);
        CHECK(edges[0].b_index == 1);
        CHECK(edges[1].a_index == 2);
        CHECK(edges[1].b_index == 1);
    }

    TEST_CASE("edge count equals |A|") {
        Rng rng(5);
        const Matrix keys = random_matrix(9, 4, rng);
        CHECK(match_chunk(keys, 0, 9, 0).size() == 5);
        CHECK(match_chunk(keys, 2, 9, 1).size() == 4);
    }
}

namespace {
Edge make_edge(Index a, Index b, Real sim = 1.0, Index chunk = 0) {
    return Edge{a, b, sim, chunk};
}
}  // namespace

TEST_SUITE("matching.prune_edges") {
    TEST_CASE("top-k by similarity") {
        const auto kept = prune_edges(
            {make_edge(0, 1, 0.9, 0), make_edge(2, 3, 0.5, 0), make_edge(4, 5, 0.7, 1)}, 2);
        REQUIRE(kept.size() == 2);
        CHECK(kept[0].similarity == 0.9);
        CHECK(kept[1].similarity == 0.7);
    }

    TEST_CASE("keep zero") {
        CHECK(prune_edges({make_edge(0, 1, 0.9, 0)}, 0).empty());
    }

    TEST_CASE("equal similarity prefers the lower chunk") {
        const auto kept = prune_edges({make_edge(0, 1, 0.8, 1), make_edge(2, 3, 0.8, 0)}, 1);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].chunk_id == 0);
        CHECK(kept[0].a_index == 2);
    }

    TEST_CASE("equal similarity and chunk prefers the lower a_index") {
        const auto kept = prune_edges({make_edge(6, 7, 0.8, 0), make_edge(2, 3, 0.8, 0)}, 1);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].a_index == 2);
    }

    TEST_CASE("keep beyond edge count clamps with a warning counter") {
        metrics().reset();
        const auto kept = prune_edges({make_edge(0, 1, 0.9, 0), make_edge(2, 3, 0.5, 0)}, 5);
        CHECK(kept.size() == 2);
        CHECK(metrics().snapshot().prune_clamps == 1);
    }
}

TEST_SUITE("matching.edges_to_keep") {
    TEST_CASE("fraction of the region length") {
        CHECK(edges_to_keep(100, 0.45) == 45);
        CHECK(edges_to_keep(100, 0.0) == 0);
        CHECK(edges_to_keep(7, 0.5) == 3);
        CHECK(edges_to_keep(100, 0.35) == 35);
    }

    TEST_CASE("ratio outside [0, 0.5] is a config error") {
        CHECK_THROWS_AS(edges_to_keep(100, 0.51), ConfigError);
        CHECK_THROWS_AS(edges_to_keep(100, -0.01), ConfigError);
    }
}

TEST_SUITE("matching.build_clusters") {
    TEST_CASE("disjoint pairs") {
        const Clustering c = build_clusters({make_edge(0, 1), make_edge(2, 3)}, 4);
        REQUIRE(c.clusters.size() == 2);
        CHECK(c.clusters[0] == std::vector<Index>{0, 1});
        CHECK(c.clusters[1] == std::vector<Index>{2, 3});
        CHECK(c.representative_order == std::vector<Index>{1, 3});
    }

    TEST_CASE("no edges keeps everything") {
        const Clustering c = build_clusters({}, 4);
        REQUIRE(c.clusters.size() == 4);
        CHECK(c.representative_order == std::vector<Index>{0, 1, 2, 3});
    }

    TEST_CASE("shared target forms a star") {
        const Clustering c = build_clusters({make_edge(0, 1), make_edge(2, 1)}, 4);
        REQUIRE(c.clusters.size() == 2);
        CHECK(c.clusters[0] == std::vector<Index>{0, 1, 2});
        CHECK(c.clusters[1] == std::vector<Index>{3});
        CHECK(c.representative_order == std::vector<Index>{1, 3});
    }

    TEST_CASE("edge outside region throws") {
        CHECK_THROWS_AS(build_clusters({make_edge(0, 7)}, 4), ContractError);
    }
}

TEST_SUITE("matching.chunked_soft_matching") {
    TEST_CASE("identical pairs at half ratio merge into two clusters") {
        const Matrix keys = rows({{1, 0}, {1, 0}, {0, 1}, {0, 1}});
        const Clustering c = chunked_soft_matching(keys, 4, 0.5);
        REQUIRE(c.clusters.size() == 2);
        CHECK(c.clusters[0] == std::vector<Index>{0, 1});
        CHECK(c.clusters[1] == std::vector<Index>{2, 3});
    }

    TEST_CASE("zero ratio is the identity clustering") {
        Rng rng(7);
        const Matrix keys = random_matrix(17, 8, rng);
        const Clustering c = chunked_soft_matching(keys, 4, 0.0);
        REQUIRE(c.clusters.size() == 17);
        for (Index i = 0; i < 17; ++i) {
            CHECK(c.clusters[static_cast<std::size_t>(i)] == std::vector<Index>{i});
        }
    }

    TEST_CASE("token conservation and reduction exactness") {
        Rng rng(8);
        for (int trial = 0; trial < 30; ++trial) {
            const Index n = rng.uniform_int(1, 200);
            const Index c = rng.uniform_int(2, 64);
            const Real r = rng.uniform() * 0.5;
            const Matrix keys = random_matrix(n, 6, rng);
            const Clustering out = chunked_soft_matching(keys, c, r);

            Index covered = 0;
            std::set<Index> seen;
            for (const auto& cluster : out.clusters) {
                covered += static_cast<Index>(cluster.size());
                for (Index idx : cluster) {
                    CHECK(seen.insert(idx).second);  // partition: no index twice
                }
            }
            CHECK(covered == n);

            const Index surviving = out.surviving_count();
            CHECK(surviving >= (n + 1) / 2);  // at-most-half reduction
            CHECK(n - surviving <= edges_to_keep(n, r));
        }
    }

    TEST_CASE("clusters stay inside one chunk") {
        Rng rng(9);
        const Index c = 16;
        const Matrix keys = random_matrix(100, 4, rng);
        const Clustering out = chunked_soft_matching(keys, c, 0.5);
        for (const auto& cluster : out.clusters) {
            for (Index idx : cluster) {
                CHECK(idx / c == cluster.front() / c);
            }
        }
    }

    TEST_CASE("deterministic for identical inputs") {
        Rng rng(10);
        const Matrix keys = random_matrix(50, 4, rng);
        const Clustering a = chunked_soft_matching(keys, 8, 0.4);
        const Clustering b = chunked_soft_matching(keys, 8, 0.4);
        CHECK(a.clusters == b.clusters);
        CHECK(a.representative_order == b.representative_order);
    }

    TEST_CASE("representatives stay ascending and clusters align with them") {
        Rng rng(11);
        const Matrix keys = random_matrix(64, 4, rng);
        const Clustering out = chunked_soft_matching(keys, 16, 0.5);
        for (std::size_t i = 0; i + 1 < out.representative_order.size(); ++i) {
            CHECK(out.representative_order[i] < out.representative_order[i + 1]);
        }
        for (std::size_t i = 0; i < out.clusters.size(); ++i) {
            bool found = false;
            for (Index idx : out.clusters[i]) {
                found = found || idx == out.representative_order[i];
            }
            CHECK(found);
        }
    }

    TEST_CASE("similarity evaluations bounded by n*c/4") {
        Rng rng(12);
        for (Index c : {16, 64, 256}) {
            const Index n = 256;
            const Matrix keys = random_matrix(n, 8, rng);
            metrics().reset();
            chunked_soft_matching(keys, c, 0.5);
            const auto count = metrics().snapshot().similarity_evals;
            CHECK(count <= static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(c) / 4);
        }
    }
}
