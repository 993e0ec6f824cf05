#include "bcot/gaussian_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace bcot {

SpdMatrix::SpdMatrix(Mat m) : m_(std::move(m)) {
    if (m_.rows != m_.cols) throw std::invalid_argument("SpdMatrix: matrix not square");
    if (!is_symmetric(m_, 1e-12)) throw std::invalid_argument("SpdMatrix: matrix not symmetric within 1e-12");
    EighResult e = jacobi_eigh(m_);
    if (!e.eigenvalues.empty() && e.eigenvalues.front() < -1e-10) {
        throw std::invalid_argument("SpdMatrix: matrix has eigenvalue below -1e-10");
    }
}

SpdMatrix SpdMatrix::identity(std::size_t d, double scale) {
    return SpdMatrix(Mat::identity(d, scale));
}

double SpdMatrix::trace() const { return bcot::trace(m_); }

SpdMatrix spd_sqrt(const SpdMatrix& m) {
    EighResult e = jacobi_eigh(m.matrix());
    const std::size_t n = m.dim();
    Mat S(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double s = std::sqrt(std::max(e.eigenvalues[k], 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            double vs = e.vectors(i, k) * s;
            for (std::size_t j = 0; j <= i; ++j) {
                S(i, j) += vs * e.vectors(j, k);
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) S(i, j) = S(j, i);
    return SpdMatrix(std::move(S));
}

double exact_value(std::span<const double> x0, std::span<const double> y0,
                   const SpdMatrix& sigma_x, const SpdMatrix& sigma_y, int T) {
    const std::size_t d = sigma_x.dim();
    if (sigma_y.dim() != d || x0.size() != d || y0.size() != d) {
        throw std::invalid_argument("exact_value: dimension mismatch");
    }
    if (T < 1) throw std::invalid_argument("exact_value: horizon must be >= 1");

    double dist2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double diff = x0[i] - y0[i];
        dist2 += diff * diff;
    }

    SpdMatrix rx = spd_sqrt(sigma_x);
    Mat inner = matmul(matmul(rx.matrix(), sigma_y.matrix()), rx.matrix());
    // symmetrize away the roundoff before the second square root
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double s = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = s;
            inner(j, i) = s;
        }
    }
    double cross = spd_sqrt(SpdMatrix(std::move(inner))).trace();
    double bures = sigma_x.trace() + sigma_y.trace() - 2.0 * cross;

    double tt = static_cast<double>(T);
    double value = tt * dist2 + 0.5 * tt * (tt + 1.0) * bures;
    return std::max(value, 0.0);
}

} // namespace bcot
