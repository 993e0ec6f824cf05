#include "bcot/process.hpp"

#include <cmath>
#include <stdexcept>

namespace bcot {

GaussianAR1::GaussianAR1(std::vector<double> x0, Mat covariance, int horizon)
    : x0_(std::move(x0)), cov_(std::move(covariance)), horizon_(horizon) {
    const std::size_t d = x0_.size();
    if (d == 0) throw std::invalid_argument("GaussianAR1: dimension must be positive");
    if (horizon_ < 1) throw std::invalid_argument("GaussianAR1: horizon must be positive");
    if (cov_.rows != d || cov_.cols != d) {
        throw std::invalid_argument("GaussianAR1: covariance shape does not match x0");
    }
    if (!is_symmetric(cov_, 1e-12)) {
        throw std::invalid_argument("GaussianAR1: covariance not symmetric within 1e-12");
    }
    EighResult e = jacobi_eigh(cov_);
    if (!e.eigenvalues.empty() && e.eigenvalues.front() < -1e-12) {
        throw std::invalid_argument("GaussianAR1: covariance has eigenvalue below -1e-12");
    }
    factor_ = psd_sampling_factor(cov_);
}

void GaussianAR1::sample_next(std::span<const double> history, std::size_t count,
                              Rng& rng, double* out) const {
    const std::size_t d = x0_.size();
    if (history.size() < d || history.size() % d != 0) {
        throw std::invalid_argument("GaussianAR1: history length not a multiple of dimension");
    }
    const double* last = history.data() + history.size() - d;
    std::vector<double> z(d);
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t i = 0; i < d; ++i) z[i] = rng.normal();
        double* o = out + s * d;
        for (std::size_t i = 0; i < d; ++i) {
            double v = last[i];
            for (std::size_t k = 0; k < d; ++k) v += factor_(i, k) * z[k];
            o[i] = v;
        }
    }
}

StageCost StageCost::squared_euclidean() {
    StageCost c;
    c.is_squared_euclidean = true;
    c.evaluate = [](int, std::span<const double> x, std::span<const double> y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double diff = x[i] - y[i];
            s += diff * diff;
        }
        return s;
    };
    return c;
}

Path sample_path(const ProcessModel& model, Rng& rng) {
    const std::size_t d = model.dimension();
    const int T = model.horizon();
    Path path(d, T);
    auto x0 = model.initial_state();
    for (std::size_t i = 0; i < d; ++i) path.data[i] = x0[i];
    for (int t = 0; t < T; ++t) {
        std::span<const double> history{path.data.data(), (static_cast<std::size_t>(t) + 1) * d};
        model.sample_next(history, 1, rng, path.point(t + 1).data());
    }
    return path;
}

std::vector<std::pair<Path, Path>> sample_product_paths(const ProcessModel& model_x,
                                                        const ProcessModel& model_y,
                                                        std::size_t n, Rng& rng) {
    if (model_x.horizon() != model_y.horizon()) {
        throw std::invalid_argument("sample_product_paths: horizon mismatch");
    }
    std::vector<std::pair<Path, Path>> pairs;
    pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Path px = sample_path(model_x, rng);
        Path py = sample_path(model_y, rng);
        pairs.emplace_back(std::move(px), std::move(py));
    }
    return pairs;
}

double path_cost(const StageCost& cost, const Path& path_x, const Path& path_y) {
    if (path_x.data.size() != path_y.data.size() || path_x.dimension != path_y.dimension) {
        throw std::invalid_argument("path_cost: path shape mismatch");
    }
    const int T = path_x.horizon();
    double total = 0.0;
    for (int t = 1; t <= T; ++t) {
        total += cost(t, path_x.point(t), path_y.point(t));
    }
    return total;
}

} // namespace bcot
