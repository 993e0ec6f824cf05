#pragma once

#include <span>

#include "bcot/linalg.hpp"

namespace bcot {

// Symmetric positive semidefinite matrix. Construction validates symmetry
// (1e-12) and the eigenvalue floor (-1e-10); semidefinite inputs are accepted
// so zero-noise and near-degenerate covariances work.
class SpdMatrix {
public:
    explicit SpdMatrix(Mat m);
    static SpdMatrix identity(std::size_t d, double scale = 1.0);

    std::size_t dim() const { return m_.rows; }
    const Mat& matrix() const { return m_; }
    double trace() const;
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

private:
    Mat m_;
};

// Symmetric square root: S with S*S = M, negative eigenvalues clamped to 0.
SpdMatrix spd_sqrt(const SpdMatrix& m);

// Closed-form optimal value for two random walks started at x0 and y0 with
// step covariances sigma_x and sigma_y, squared-distance stage cost, horizon T:
//   T*|x0-y0|^2 + T(T+1)/2 * (tr Sx + tr Sy - 2 tr sqrt(sqrt(Sx) Sy sqrt(Sx))).
double exact_value(std::span<const double> x0, std::span<const double> y0,
                   const SpdMatrix& sigma_x, const SpdMatrix& sigma_y, int T);

} // namespace bcot
