#include <cmath>
#include <random>

#include "doctest.h"
#include "micmac/stats.hpp"
#include "oracles.hpp"

using namespace micmac;

namespace {

GroupSamples normal_groups(std::vector<double> shifts, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    GroupSamples g;
    for (std::size_t i = 0; i < shifts.size(); ++i) {
        Group grp{"g" + std::to_string(i), {}};
        for (std::size_t j = 0; j < n; ++j) grp.values.push_back(shifts[i] + z(rng));
        g.push_back(grp);
    }
    return g;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("identical groups give q = 0 and p = 1") {
    const std::vector<double> v{0.7, 0.8, 0.75, 0.9};
    const auto rows = tukey_hsd({{"a", v}, {"b", v}});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].q == 0.0);
    CHECK(rows[0].p == doctest::Approx(1.0));
}

TEST_CASE("well separated groups") {
    const auto rows = tukey_hsd(normal_groups({0.0, 5.0}, 10, 1));
    CHECK(rows[0].p < 0.001);
    CHECK(rows[0].mean_diff < 0.0);
}

TEST_CASE("symmetry and location invariance") {
    GroupSamples g = normal_groups({0.0, 0.4, 1.0}, 9, 2);
    const auto base = tukey_hsd(g);
    REQUIRE(base.size() == 3);
    GroupSamples swapped{g[1], g[0], g[2]};
    const auto sw = tukey_hsd(swapped);
    CHECK(sw[0].q == doctest::Approx(base[0].q));
    CHECK(sw[0].p == doctest::Approx(base[0].p));
    for (auto& grp : g) {
        for (auto& v : grp.values) v += 123.0;
    }
    const auto shifted = tukey_hsd(g);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(shifted[i].q == doctest::Approx(base[i].q).epsilon(1e-9));
        CHECK(shifted[i].p == doctest::Approx(base[i].p).epsilon(1e-9));
    }
}

TEST_CASE("q statistic matches an independent computation") {
    const GroupSamples g = normal_groups({0.0, 0.5, 0.2, 1.0}, 8, 3);
    const auto rows = tukey_hsd(g);
    std::vector<std::vector<double>> raw;
    for (const auto& grp : g) raw.push_back(grp.values);
    const auto q = oracle::pairwise_q(raw);
    REQUIRE(rows.size() == q.size());
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(rows[i].q == doctest::Approx(q[i]).epsilon(1e-12));
}

TEST_CASE("zero within-group variance") {
    const auto eq = tukey_hsd({{"a", {1.0, 1.0}}, {"b", {1.0, 1.0}}});
    CHECK(eq[0].p == 1.0);
    const auto ne = tukey_hsd({{"a", {1.0, 1.0}}, {"b", {2.0, 2.0}}});
    CHECK(ne[0].p == 0.0);
}

TEST_CASE("studentized range distribution") {
    CHECK(studentized_range_cdf(0.0, 3, 20) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(studentized_range_cdf(100.0, 3, 20) >= 0.999999);
    CHECK(std::abs(studentized_range_cdf(3.88, 3, 10) - 0.95) <= 0.005);
    CHECK(std::abs(studentized_range_cdf(3.58, 3, 20) - 0.95) <= 0.005);
    for (int k : {2, 3, 5}) {
        double prev = 0.0;
        for (double q = 0.0; q <= 8.0; q += 0.25) {
            const double p = studentized_range_cdf(q, k, 12);
            CHECK(p >= prev - 1e-9);
            CHECK(p <= 1.0 + 1e-9);
            prev = p;
        }
    }
    // k = 2 reduces to |T| * sqrt(2) with T ~ t(df).
    CHECK(studentized_range_cdf(2.0 * std::sqrt(2.0), 2, 1e6) == doctest::Approx(0.9545).epsilon(1e-3));
}

TEST_CASE("argument checks") {
    CHECK_THROWS_WITH(tukey_hsd({{"a", {1.0, 2.0}}}), doctest::Contains("need >= 2 groups"));
    CHECK_THROWS(tukey_hsd({{"a", {1.0, 2.0}}, {"b", {1.0}}}));
    CHECK_THROWS(studentized_range_cdf(1.0, 1, 10));
    CHECK_THROWS(studentized_range_cdf(1.0, 3, 0.5));
    CHECK_THROWS(studentized_range_cdf(std::nan(""), 3, 10));
}

}
