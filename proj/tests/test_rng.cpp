#include <doctest.h>

#include "obh/rng.hpp"

using obh::Rng;

TEST_CASE("rng: same seed, same stream") {
    Rng a(123);
    Rng b(123);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("rng: uniform01 stays in [0,1)") {
    Rng rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("rng: index covers the range") {
    Rng rng(11);
    bool seen[5] = {false, false, false, false, false};
    for (int i = 0; i < 1000; ++i) {
        const std::size_t idx = rng.index(5);
        REQUIRE(idx < 5);
        seen[idx] = true;
    }
    for (bool s : seen) {
        CHECK(s);
    }
}

TEST_CASE("rng: gaussian is roughly centered") {
    Rng rng(42);
    double sum = 0.0;
    double sum_sq = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum_sq += g * g;
    }
    CHECK(std::abs(sum / n) < 0.05);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.05);
}

TEST_CASE("rng: derived seeds differ per index") {
    CHECK(obh::derive_seed(1, 0) != obh::derive_seed(1, 1));
    CHECK(obh::derive_seed(1, 0) == obh::derive_seed(1, 0));
    CHECK(obh::derive_seed(1, 0) != obh::derive_seed(2, 0));
}
