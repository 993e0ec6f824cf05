#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bcot/gaussian_oracle.hpp"
#include "bcot/rng.hpp"

using namespace bcot;

namespace {

// random SPD matrix A = M M^T + eps*I
Mat random_spd(std::size_t d, Rng& rng, double eps = 0.05) {
    Mat m(d, d);
    for (double& x : m.a) x = rng.normal();
    Mat a(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) s += m(i, k) * m(j, k);
            a(i, j) = s;
        }
    }
    for (std::size_t i = 0; i < d; ++i) a(i, i) += eps;
    return a;
}

double frob(const Mat& a) {
    double s = 0.0;
    for (double x : a.a) s += x * x;
    return std::sqrt(s);
}

} // namespace

TEST_SUITE("gaussian_oracle") {

TEST_CASE("spd_sqrt of the identity is the identity") {
    SpdMatrix s = spd_sqrt(SpdMatrix::identity(3));
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(s(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("spd_sqrt of diag(4,9) is diag(2,3)") {
    Mat m(2, 2);
    m(0, 0) = 4.0;
    m(1, 1) = 9.0;
    SpdMatrix s = spd_sqrt(SpdMatrix(m));
    CHECK(s(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s(1, 1) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(std::abs(s(0, 1)) < 1e-12);
}

TEST_CASE("spd_sqrt squares back to the input on random SPD matrices") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        Mat a = random_spd(5, rng);
        SpdMatrix s = spd_sqrt(SpdMatrix(a));
        Mat sq = matmul(s.matrix(), s.matrix());
        for (std::size_t k = 0; k < sq.a.size(); ++k) sq.a[k] -= a.a[k];
        CHECK(frob(sq) <= 1e-10 * frob(a));
    }
}

TEST_CASE("SpdMatrix rejects bad inputs") {
    Mat asym(2, 2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(SpdMatrix{asym}, std::invalid_argument);

    Mat indef = Mat::identity(2);
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(SpdMatrix{indef}, std::invalid_argument);
}

TEST_CASE("identical processes have value zero") {
    std::vector<double> x0{0.3, -0.7};
    SpdMatrix s = SpdMatrix::identity(2, 0.8);
    CHECK(exact_value(x0, x0, s, s, 7) <= 1e-12);
}

TEST_CASE("reference configuration across horizons") {
    std::vector<double> x0{1.0}, y0{2.0};
    SpdMatrix sx = SpdMatrix::identity(1, 1.0);
    SpdMatrix sy = SpdMatrix::identity(1, 0.25);
    const std::vector<std::pair<int, double>> expected{
        {1, 1.25}, {2, 2.75}, {3, 4.5},  {4, 6.5},   {5, 8.75},   {6, 11.25}, {7, 14.0},
        {8, 17.0}, {9, 20.25}, {10, 23.75}, {11, 27.5}, {20, 72.5}, {40, 245.0}};
    for (auto [T, v] : expected) {
        CHECK(exact_value(x0, y0, sx, sy, T) == doctest::Approx(v).epsilon(1e-9));
    }
}

TEST_CASE("multidimensional diagonal configuration") {
    for (std::size_t d : {5u, 10u, 15u, 20u}) {
        std::vector<double> x0(d, 1.0), y0(d, 2.0);
        double v = exact_value(x0, y0, SpdMatrix::identity(d, 1.21), SpdMatrix::identity(d, 0.01), 5);
        CHECK(v == doctest::Approx(20.0 * d).epsilon(1e-9));
    }
}

TEST_CASE("value is symmetric under swapping the two processes") {
    Rng rng(31);
    for (int rep = 0; rep < 10; ++rep) {
        Mat a = random_spd(4, rng), b = random_spd(4, rng);
        std::vector<double> x0(4), y0(4);
        for (auto& v : x0) v = rng.normal();
        for (auto& v : y0) v = rng.normal();
        double v1 = exact_value(x0, y0, SpdMatrix(a), SpdMatrix(b), 3);
        double v2 = exact_value(y0, x0, SpdMatrix(b), SpdMatrix(a), 3);
        CHECK(v1 == doctest::Approx(v2).epsilon(1e-9));
    }
}

TEST_CASE("quadratic scaling in space") {
    Rng rng(33);
    Mat a = random_spd(3, rng), b = random_spd(3, rng);
    std::vector<double> x0{0.4, -1.0, 2.0}, y0{1.0, 0.5, -0.3};
    const double c = 1.7;
    Mat ca = a, cb = b;
    for (double& v : ca.a) v *= c * c;
    for (double& v : cb.a) v *= c * c;
    std::vector<double> cx0 = x0, cy0 = y0;
    for (double& v : cx0) v *= c;
    for (double& v : cy0) v *= c;
    double base = exact_value(x0, y0, SpdMatrix(a), SpdMatrix(b), 4);
    double scaled = exact_value(cx0, cy0, SpdMatrix(ca), SpdMatrix(cb), 4);
    CHECK(scaled == doctest::Approx(c * c * base).epsilon(1e-9));
}

TEST_CASE("value increases with the horizon") {
    std::vector<double> x0{1.0}, y0{2.0};
    SpdMatrix sx = SpdMatrix::identity(1, 1.0), sy = SpdMatrix::identity(1, 0.25);
    double prev = 0.0;
    for (int T = 1; T <= 12; ++T) {
        double v = exact_value(x0, y0, sx, sy, T);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("dimension mismatch and bad horizon are rejected") {
    std::vector<double> x0{1.0}, y0{2.0, 3.0};
    SpdMatrix s1 = SpdMatrix::identity(1);
    CHECK_THROWS_AS(exact_value(x0, y0, s1, s1, 1), std::invalid_argument);
    CHECK_THROWS_AS(exact_value(x0, x0, s1, s1, 0), std::invalid_argument);
}

} // TEST_SUITE
