#include "oracles.hpp"

#include "cobig/neighbor_index.hpp"

#include <doctest.h>

using namespace cobig;

namespace {

void check_against_brute(const std::vector<Vec3>& pts, const Vec3& q, std::size_t k,
                         const NeighborIndex& index)
{
    const auto expected = oracle::brute_knn(pts, q, k);
    const auto got = index.knn(q, k);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].index == expected[i].index);
        CHECK(got[i].squared_distance == expected[i].d2);
    }
}

} // namespace

TEST_SUITE("neighbor_index")
{
    TEST_CASE("empty cloud is rejected")
    {
        CHECK_THROWS_WITH_AS(NeighborIndex(std::vector<Vec3>{}), "empty point cloud",
                             std::invalid_argument);
    }

    TEST_CASE("single point answers every query")
    {
        const std::vector<Vec3> pts{Vec3(1, 2, 3)};
        const NeighborIndex index(pts);
        oracle::Rng rng(1);
        for (int i = 0; i < 20; ++i) {
            const Vec3 q = rng.vec(-100, 100);
            CHECK(index.nearest(q).index == 0);
            CHECK(index.knn(q, 5).size() == 1);
        }
    }

    TEST_CASE("100 random points, k = 5")
    {
        oracle::Rng rng(2);
        const auto pts = oracle::random_cloud(rng, 100);
        const NeighborIndex index(pts);
        for (int i = 0; i < 100; ++i) {
            check_against_brute(pts, rng.vec(-1.5, 1.5), 5, index);
        }
    }

    TEST_CASE("duplicates resolve to the lowest index")
    {
        std::vector<Vec3> pts(30, Vec3(0.5, 0.5, 0.5));
        pts.push_back(Vec3(2, 2, 2));
        pts.insert(pts.begin(), Vec3(-3, 0, 0));
        const NeighborIndex index(pts);
        CHECK(index.nearest(Vec3(0.5, 0.5, 0.6)).index == 1);
        const auto hits = index.knn(Vec3(0.5, 0.5, 0.5), 4);
        for (std::size_t i = 0; i < hits.size(); ++i) {
            CHECK(hits[i].index == i + 1);
        }
    }

    TEST_CASE("equidistant points resolve to the lowest index")
    {
        const std::vector<Vec3> pts{Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0)};
        const NeighborIndex index(pts);
        CHECK(index.nearest(Vec3::Zero()).index == 0);
        const auto hits = index.knn(Vec3::Zero(), 3);
        CHECK(hits[0].index == 0);
        CHECK(hits[1].index == 1);
        CHECK(hits[2].index == 2);
    }

    TEST_CASE("1000 random clouds match exhaustive search")
    {
        oracle::Rng rng(3);
        for (int trial = 0; trial < 1000; ++trial) {
            const std::size_t n = static_cast<std::size_t>(rng.integer(1, 200));
            const auto pts = trial % 2 == 0 ? oracle::random_cloud(rng, n)
                                            : oracle::lattice_cloud(rng, n, 3);
            const NeighborIndex index(pts);
            const std::size_t k = static_cast<std::size_t>(rng.integer(1, 25));
            for (int q = 0; q < 5; ++q) {
                const Vec3 query = trial % 2 == 0 ? rng.vec(-1.2, 1.2)
                                                  : Vec3(rng.integer(-1, 4), rng.integer(-1, 4),
                                                         rng.integer(-1, 4));
                check_against_brute(pts, query, k, index);
                CHECK(index.nearest(query).index == oracle::brute_argmin(pts, query));
            }
        }
    }

    TEST_CASE("results are sorted and complete")
    {
        oracle::Rng rng(4);
        const auto pts = oracle::random_cloud(rng, 500);
        const NeighborIndex index(pts);
        const auto hits = index.knn(Vec3::Zero(), 1000);
        CHECK(hits.size() == 500);
        CHECK(std::is_sorted(hits.begin(), hits.end()));
    }
}
