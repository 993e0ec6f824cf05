#include <doctest.h>

#include <cmath>
#include <vector>

#include "bcot/rng.hpp"

using namespace bcot;

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream bit for bit") {
    Rng a(1234), b(1234);
    for (int i = 0; i < 1000; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("split streams do not depend on parent draw position") {
    Rng a(77);
    (void)a.next_u64();
    (void)a.normal();
    Rng b(77);
    CHECK(a.split(3).next_u64() == b.split(3).next_u64());
    CHECK(a.split(3).next_u64() != b.split(4).next_u64());
}

TEST_CASE("uniform01 stays in [0,1) and has the right mean") {
    Rng rng(5);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.005);
}

TEST_CASE("normal moments") {
    Rng rng(9);
    const int n = 400000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    double mean = s1 / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("uniform_below covers the range") {
    Rng rng(11);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) ++hits[rng.uniform_below(7)];
    for (int k = 0; k < 7; ++k) {
        CHECK(hits[k] > 9000);
        CHECK(hits[k] < 11000);
    }
}

TEST_CASE("shuffle is deterministic under a fixed seed") {
    std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
    Rng a(3), b(3);
    shuffle(v1, a);
    shuffle(v2, b);
    CHECK(v1 == v2);
}

} // TEST_SUITE
