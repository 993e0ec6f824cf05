#include "bcot/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bcot {

Mat matmul(const Mat& A, const Mat& B) {
    if (A.cols != B.rows) throw std::invalid_argument("matmul: shape mismatch");
    Mat C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t k = 0; k < A.cols; ++k) {
            double aik = A(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < B.cols; ++j) {
                C(i, j) += aik * B(k, j);
            }
        }
    }
    return C;
}

double trace(const Mat& A) {
    if (A.rows != A.cols) throw std::invalid_argument("trace: matrix not square");
    double t = 0.0;
    for (std::size_t i = 0; i < A.rows; ++i) t += A(i, i);
    return t;
}

double max_abs(const Mat& A) {
    double m = 0.0;
    for (double x : A.a) m = std::max(m, std::abs(x));
    return m;
}

bool is_symmetric(const Mat& A, double tol) {
    if (A.rows != A.cols) return false;
    for (std::size_t i = 0; i < A.rows; ++i) {
        for (std::size_t j = i + 1; j < A.cols; ++j) {
            if (std::abs(A(i, j) - A(j, i)) > tol) return false;
        }
    }
    return true;
}

EighResult jacobi_eigh(Mat A, int max_sweeps) {
    if (A.rows != A.cols) throw std::invalid_argument("jacobi_eigh: matrix not square");
    const std::size_t n = A.rows;
    Mat V = Mat::identity(n);
    if (n == 0) return {{}, V};

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        double scale = max_abs(A);
        if (std::sqrt(off) <= 1e-15 * std::max(1.0, scale) * static_cast<double>(n)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = A(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = A(i, i);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return eig[a] < eig[b]; });

    EighResult out;
    out.eigenvalues.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = eig[order[k]];
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = V(i, order[k]);
    }
    return out;
}

Mat psd_sampling_factor(const Mat& cov) {
    if (cov.rows != cov.cols) throw std::invalid_argument("psd_sampling_factor: matrix not square");
    const std::size_t n = cov.rows;
    const double scale = std::max(1.0, max_abs(cov));

    // Cholesky attempt; bail to the eigenvalue route on a weak pivot.
    Mat L(n, n);
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = cov(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= L(i, k) * L(j, k);
            if (i == j) {
                if (sum <= 1e-12 * scale) {
                    ok = false;
                    break;
                }
                L(i, j) = std::sqrt(sum);
            } else {
                L(i, j) = sum / L(j, j);
            }
        }
    }
    if (ok) return L;

    EighResult e = jacobi_eigh(cov);
    Mat F(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        double lam = std::max(e.eigenvalues[k], 0.0);
        double s = std::sqrt(lam);
        for (std::size_t i = 0; i < n; ++i) F(i, k) = e.vectors(i, k) * s;
    }
    return F;
}

} // namespace bcot
