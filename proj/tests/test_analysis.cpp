#include <doctest.h>

#include <algorithm>
#include <random>

#include "fano/analysis.hpp"

using namespace fano;

namespace {

WeightVector random_point(std::mt19937_64& rng, std::size_t m, std::int64_t extent)
{
    std::vector<std::int64_t> c(m);
    for (auto& x : c)
        x = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(extent));
    std::sort(c.begin(), c.end());
    return WeightVector{std::span<const std::int64_t>(c)};
}

const WeightVector x1011{1, 10, 31, 143, 337, 490};
const WeightVector x1020{1, 15, 32, 139, 340, 494};

}  // namespace

TEST_CASE("nearest distance: worked example")
{
    const std::vector<WeightVector> pool{{1, 1, 1, 1, 1, 1}, x1011, {2, 40, 61, 200, 400, 500}, x1020};
    const auto r = nearest_distances({x1020}, pool);
    REQUIRE(r.size() == 1);
    CHECK(r[0].distance == 17);
    CHECK(r[0].nearest == x1011);
    CHECK_THROWS_AS(nearest_distances({x1020}, {x1020}), std::invalid_argument);
    CHECK_THROWS_AS(nearest_distances({x1020}, {}), std::invalid_argument);
}

TEST_CASE("nearest distance: scan and index agree")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t) {
        const std::size_t m = 2 + rng() % 5;
        const std::int64_t extent = 5 + static_cast<std::int64_t>(rng() % 200);
        std::vector<WeightVector> pool(64 + rng() % 936), queries(100);
        for (auto& p : pool)
            p = random_point(rng, m, extent);
        for (auto& q : queries)
            q = rng() % 2 ? pool[rng() % pool.size()] : random_point(rng, m, extent);
        const auto a = nearest_distances_scan(queries, pool);
        const KdIndex index(pool);
        for (std::size_t i = 0; i < queries.size(); ++i) {
            const auto b = index.nearest(queries[i]);
            REQUIRE(b.has_value());
            CHECK(a[i].distance == b->distance);
            CHECK(a[i].nearest == b->nearest);
            CHECK(a[i].distance > 0);
        }
        CHECK(nearest_distances(queries, pool).size() == queries.size());
    }
}

TEST_CASE("step bounds")
{
    CHECK(step_bounds(x1011, 1).lower == 1);
    CHECK(step_bounds(x1011, 1).upper == 1);
    CHECK(step_bounds(x1011, 0).upper == 1);

    // q deep inside the cone: radius 0 and radius 1 balls are complete
    const auto b = step_bounds(WeightVector{10, 20, 30, 40}, 2);
    CHECK(b.lower == 2);
    CHECK(b.upper == 9);

    // on the plane from (1,1), by hand: B(q,1) = {(1,1),(1,2)},
    // B(q,2) = {(1,1),(1,2),(1,3),(2,2)}
    const auto toy = step_bounds(WeightVector{1, 1}, 3);
    CHECK(toy.lower == 3);
    CHECK(toy.upper == 4);

    const auto far = step_bounds(x1011, 17);
    CHECK(far.upper >= 1041501);
    CHECK(far.lower <= far.upper);
}

TEST_CASE("half-space approximation")
{
    CHECK(s_lower_approx(5, 6) == 305);
    CHECK(s_lower_approx(2, 6) == 2);
    CHECK(s_lower_approx(1, 6) == 1);

    // With a_1 = 1 and gaps wider than the radius the cone ball is the half-space ball.
    std::mt19937_64 rng(7);
    for (int t = 0; t < 60; ++t) {
        const std::int64_t D = 2 + static_cast<std::int64_t>(rng() % 6);
        std::vector<std::int64_t> c{1};
        for (int i = 1; i < 6; ++i)
            c.push_back(c.back() + D + 1 + static_cast<std::int64_t>(rng() % 50));
        const WeightVector q{std::span<const std::int64_t>(c)};
        CHECK(s_lower_approx(D, 6) <= step_bounds(q, D).lower);
        CHECK(s_lower_approx(D, 6) == step_bounds(q, D).lower);
    }
}

TEST_CASE("discovery probability")
{
    CHECK(prob_lower_bound(3, 2, 4) == doctest::Approx(2.0 / 3.0));
    CHECK(prob_lower_bound(4, 2, 4) == 1.0);
    CHECK(prob_lower_bound(2, 2, 4) == doctest::Approx(1.0 / 3.0));
    CHECK_THROWS_AS(prob_lower_bound(1, 2, 4), std::invalid_argument);
    CHECK_THROWS_AS(prob_lower_bound(5, 2, 4), std::invalid_argument);
    double last = 0;
    for (std::uint64_t s = 100; s <= 1000; ++s) {
        const double p = prob_lower_bound(s, 100, 1000);
        CHECK(p > last);
        last = p;
    }
    CHECK(last == 1.0);
}

TEST_CASE("bounds are ordered on random centers")
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        const auto q = random_point(rng, 2 + rng() % 4, 40);
        const std::int64_t D = static_cast<std::int64_t>(rng() % 8);
        const auto b = step_bounds(q, D);
        CHECK(b.lower <= b.upper + 1);
        CHECK(b.lower >= 1);
    }
}

TEST_CASE("set partition")
{
    const std::vector<WeightVector> f{{1, 2}, {1, 3}, {2, 2}, {1, 2}};
    const std::vector<WeightVector> d{{2, 2}, {3, 4}};
    const auto p = set_partition(f, d);
    CHECK(p.only_first == std::vector<WeightVector>{{1, 2}, {1, 3}});
    CHECK(p.only_second == std::vector<WeightVector>{{3, 4}});
    CHECK(p.both == std::vector<WeightVector>{{2, 2}});

    const auto same = set_partition(f, f);
    CHECK(same.only_first.empty());
    CHECK(same.only_second.empty());
    CHECK(same.both.size() == 3);
    CHECK(set_partition({{1, 1}}, {{1, 2}}).both.empty());
}

TEST_CASE("reachability report")
{
    const std::vector<WeightVector> found{x1020, {1, 1, 1, 1, 1, 1}};
    const std::vector<WeightVector> ref{x1011, {1, 1, 1, 1, 1, 2}};
    const auto rep = reachability(found, ref);
    REQUIRE(rep.size() == 2);
    CHECK(rep[0].distance == 17);
    CHECK(rep[0].nearest == x1011);
    CHECK(rep[0].closest_assumption);
    CHECK(rep[0].s_lower <= rep[0].s_upper);
    CHECK(rep[0].p_lower == doctest::Approx(1.0 / double(rep[0].s_upper - rep[0].s_lower + 1)));
    CHECK(rep[1].distance == 1);
    CHECK(rep[1].p_lower == 1.0);

    // a closer found point breaks the assumption for the far one
    const auto rep2 = reachability({x1020, WeightVector{1, 10, 31, 143, 337, 491}}, ref);
    CHECK_FALSE(rep2[0].closest_assumption);
    CHECK(rep2[1].closest_assumption);
}

TEST_CASE("histogram and percentiles")
{
    const std::vector<std::int64_t> v{3, 1, 4, 1, 5, 9, 2, 6};
    const auto h = distance_histogram(v);
    CHECK(h.at(1) == 2);
    CHECK(h.at(9) == 1);
    CHECK(h.size() == 7);

    std::vector<std::int64_t> ramp;
    for (int i = 1; i <= 20; ++i)
        ramp.push_back(i);
    CHECK(percentile(ramp, 95) == 19);
    CHECK(percentile(ramp, 100) == 20);
    CHECK(percentile({1, 2, 3, 4}, 50) == 2);
    CHECK(percentile({7}, 1) == 7);
    CHECK_THROWS_AS(percentile({}, 50), std::invalid_argument);
    CHECK_THROWS_AS(percentile({1}, 0), std::invalid_argument);
}
