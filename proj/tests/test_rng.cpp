#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "delaykit/rng.hpp"

using namespace delaykit;

TEST_CASE("same seed gives a bit-identical stream") {
    Rng a(123), b(123);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different cell seeds decorrelate") {
    CHECK(seed_hash(1, 2, 3) != seed_hash(1, 3, 2));
    CHECK(seed_hash(1, 2) != seed_hash(2, 2));
    std::set<std::uint64_t> seen;
    for (std::uint64_t m = 0; m < 8; ++m)
        for (std::uint64_t t = 0; t < 64; ++t) seen.insert(seed_hash(42, m, t));
    CHECK(seen.size() == 8 * 64);
}

TEST_CASE("uniform stays in [0,1) and gaussian has roughly unit variance") {
    Rng rng(9);
    double acc = 0.0, acc2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const double g = rng.gaussian();
        acc += g;
        acc2 += g * g;
    }
    const double mean = acc / n;
    const double var = acc2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("sample_without_replacement yields distinct indices") {
    Rng rng(5);
    const auto idx = sample_without_replacement(100, 30, rng);
    CHECK(idx.size() == 30);
    std::set<std::size_t> unique(idx.begin(), idx.end());
    CHECK(unique.size() == 30);
    for (const auto i : idx) CHECK(i < 100);

    Rng rng2(5);
    const auto idx2 = sample_without_replacement(100, 30, rng2);
    CHECK(idx == idx2);

    Rng rng3(5);
    const auto all = sample_without_replacement(10, 99, rng3);
    CHECK(all.size() == 10);
}
