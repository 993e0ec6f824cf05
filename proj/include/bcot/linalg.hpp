#pragma once

#include <cstddef>
#include <vector>

namespace bcot {

// Dense row-major matrix. Small sizes only (d <= ~50); no BLAS behind it.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n, double scale = 1.0) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
        return m;
    }
};

Mat matmul(const Mat& A, const Mat& B);
double trace(const Mat& A);
double max_abs(const Mat& A);
bool is_symmetric(const Mat& A, double tol);

struct EighResult {
    std::vector<double> eigenvalues; // ascending
    Mat vectors;                     // column k pairs with eigenvalues[k]
};

// Cyclic Jacobi rotations for symmetric matrices.
EighResult jacobi_eigh(Mat A, int max_sweeps = 64);

// Factor L with L*L^T = cov, for sampling N(0, cov). Plain Cholesky when the
// matrix is comfortably positive definite, eigendecomposition with clamped
// eigenvalues otherwise (semidefinite covariances are legal inputs).
Mat psd_sampling_factor(const Mat& cov);

} // namespace bcot
