#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bcot/process.hpp"

using namespace bcot;

TEST_SUITE("process") {

TEST_CASE("zero-noise path is constant") {
    GaussianAR1 model({1.0}, Mat(1, 1, 0.0), 3);
    Rng rng(1);
    Path p = sample_path(model, rng);
    REQUIRE(p.horizon() == 3);
    for (int t = 0; t <= 3; ++t) CHECK(p.point(t)[0] == 1.0);
}

TEST_CASE("one-step moments match the law") {
    GaussianAR1 model({0.0}, Mat::identity(1), 1);
    Rng rng(42);
    const int n = 1000000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        Path p = sample_path(model, rng);
        double x1 = p.point(1)[0];
        s1 += x1;
        s2 += x1 * x1;
    }
    double mean = s1 / n;
    double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("increment covariance matches diag(4,9)") {
    Mat cov(2, 2);
    cov(0, 0) = 4.0;
    cov(1, 1) = 9.0;
    GaussianAR1 model({0.0, 0.0}, cov, 1);
    Rng rng(7);
    const int n = 1000000;
    double c00 = 0.0, c01 = 0.0, c11 = 0.0, m0 = 0.0, m1 = 0.0;
    for (int i = 0; i < n; ++i) {
        Path p = sample_path(model, rng);
        double a = p.point(1)[0], b = p.point(1)[1];
        m0 += a;
        m1 += b;
        c00 += a * a;
        c01 += a * b;
        c11 += b * b;
    }
    m0 /= n;
    m1 /= n;
    CHECK(std::abs(c00 / n - m0 * m0 - 4.0) < 0.05);
    CHECK(std::abs(c01 / n - m0 * m1) < 0.05);
    CHECK(std::abs(c11 / n - m1 * m1 - 9.0) < 0.05);
}

TEST_CASE("marginal at the final time is N(x0, T*Sigma)") {
    const int T = 5;
    GaussianAR1 model({2.0}, Mat::identity(1, 0.5), T);
    Rng rng(12);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        Path p = sample_path(model, rng);
        double x = p.point(T)[0];
        s1 += x;
        s2 += x * x;
    }
    double mean = s1 / n, var = s2 / n - mean * mean;
    double se_mean = std::sqrt(T * 0.5 / n);
    double se_var = T * 0.5 * std::sqrt(2.0 / n);
    CHECK(std::abs(mean - 2.0) < 4.0 * se_mean);
    CHECK(std::abs(var - T * 0.5) < 4.0 * se_var);
}

TEST_CASE("product paths: zero-noise pairs are identical and aligned") {
    GaussianAR1 mx({1.0}, Mat(1, 1, 0.0), 2);
    GaussianAR1 my({2.0}, Mat(1, 1, 0.0), 2);
    Rng rng(3);
    auto pairs = sample_product_paths(mx, my, 5, rng);
    REQUIRE(pairs.size() == 5);
    for (const auto& [px, py] : pairs) {
        for (int t = 0; t <= 2; ++t) {
            CHECK(px.point(t)[0] == 1.0);
            CHECK(py.point(t)[0] == 2.0);
        }
    }
}

TEST_CASE("product paths: components are uncorrelated") {
    GaussianAR1 mx({0.0}, Mat::identity(1), 1);
    GaussianAR1 my({0.0}, Mat::identity(1), 1);
    Rng rng(19);
    const int n = 1000000;
    double sx = 0.0, sy = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        Path px = sample_path(mx, rng);
        Path py = sample_path(my, rng);
        double a = px.point(1)[0], b = py.point(1)[0];
        sx += a;
        sy += b;
        sxy += a * b;
    }
    double corr = (sxy / n - (sx / n) * (sy / n));
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("product paths: fixed seed reproduces the samples bit for bit") {
    GaussianAR1 mx({0.0}, Mat::identity(1), 3);
    GaussianAR1 my({1.0}, Mat::identity(1, 2.0), 3);
    Rng a(55), b(55);
    auto p1 = sample_product_paths(mx, my, 10, a);
    auto p2 = sample_product_paths(mx, my, 10, b);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        CHECK(p1[i].first.data == p2[i].first.data);
        CHECK(p1[i].second.data == p2[i].second.data);
    }
}

TEST_CASE("product paths reject mismatched horizons") {
    GaussianAR1 mx({0.0}, Mat::identity(1), 2);
    GaussianAR1 my({0.0}, Mat::identity(1), 3);
    Rng rng(1);
    CHECK_THROWS_AS(sample_product_paths(mx, my, 1, rng), std::invalid_argument);
}

TEST_CASE("path_cost hand values") {
    StageCost cost = StageCost::squared_euclidean();

    Path x(1, 2), y(1, 2);
    x.data = {1.0, 0.0, 0.0};
    y.data = {2.0, 1.0, 3.0};
    CHECK(path_cost(cost, x, y) == doctest::Approx(10.0));
    CHECK(path_cost(cost, x, x) == 0.0);

    Path a(2, 4), b(2, 4);
    for (int t = 0; t <= 4; ++t) {
        b.point(t)[0] = 1.0;
        b.point(t)[1] = 1.0;
    }
    CHECK(path_cost(cost, a, b) == doctest::Approx(8.0));
}

TEST_CASE("path_cost is symmetric for the squared cost") {
    StageCost cost = StageCost::squared_euclidean();
    Rng rng(8);
    GaussianAR1 mx({0.0}, Mat::identity(1), 4);
    GaussianAR1 my({1.0}, Mat::identity(1, 0.3), 4);
    for (int rep = 0; rep < 20; ++rep) {
        Path px = sample_path(mx, rng);
        Path py = sample_path(my, rng);
        CHECK(path_cost(cost, px, py) == doctest::Approx(path_cost(cost, py, px)).epsilon(1e-12));
    }
}

TEST_CASE("path_cost rejects mismatched shapes") {
    StageCost cost = StageCost::squared_euclidean();
    Path x(1, 2), y(1, 3);
    CHECK_THROWS_AS(path_cost(cost, x, y), std::invalid_argument);
}

TEST_CASE("covariance validation") {
    Mat asym(2, 2);
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(GaussianAR1({0.0, 0.0}, asym, 1), std::invalid_argument);
    Mat indef = Mat::identity(2);
    indef(0, 0) = -0.5;
    CHECK_THROWS_AS(GaussianAR1({0.0, 0.0}, indef, 1), std::invalid_argument);
}

} // TEST_SUITE
