#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "bcot/linalg.hpp"
#include "bcot/rng.hpp"

namespace bcot {

// One sampled trajectory: points x_0..x_T, each of dimension d, stored flat.
struct Path {
    std::size_t dimension = 1;
    std::vector<double> data; // (T+1) * dimension

    Path() = default;
    Path(std::size_t d, int horizon) : dimension(d), data((horizon + 1) * d, 0.0) {}

    int horizon() const { return static_cast<int>(data.size() / dimension) - 1; }
    std::span<const double> point(int t) const {
        return {data.data() + static_cast<std::size_t>(t) * dimension, dimension};
    }
    std::span<double> point(int t) {
        return {data.data() + static_cast<std::size_t>(t) * dimension, dimension};
    }
};

// A marginal path law given by its initial state and one-step conditional
// sampler. The sampler receives the full history so non-Markovian laws fit
// the interface, though only the AR(1) instance ships.
class ProcessModel {
public:
    virtual ~ProcessModel() = default;

    virtual std::size_t dimension() const = 0;
    virtual int horizon() const = 0;
    virtual std::span<const double> initial_state() const = 0;

    // Draw `count` conditional successors of the history x_{0:t} (flattened,
    // (t+1)*d values) into out (count*d values).
    virtual void sample_next(std::span<const double> history, std::size_t count,
                             Rng& rng, double* out) const = 0;
};

// Random walk x_{t+1} = x_t + noise, noise ~ N(0, covariance).
class GaussianAR1 final : public ProcessModel {
public:
    GaussianAR1(std::vector<double> x0, Mat covariance, int horizon);

    std::size_t dimension() const override { return x0_.size(); }
    int horizon() const override { return horizon_; }
    std::span<const double> initial_state() const override { return x0_; }
    const Mat& covariance() const { return cov_; }

    void sample_next(std::span<const double> history, std::size_t count,
                     Rng& rng, double* out) const override;

private:
    std::vector<double> x0_;
    Mat cov_;
    Mat factor_; // L with L L^T = covariance
    int horizon_;
};

// Per-stage transport cost c_t(x_t, y_t), t = 1..T. Total path cost is the
// sum over stages, which is what the backward recursions rely on.
struct StageCost {
    std::function<double(int, std::span<const double>, std::span<const double>)> evaluate;
    bool is_squared_euclidean = false;

    double operator()(int t, std::span<const double> x, std::span<const double> y) const {
        return evaluate(t, x, y);
    }

    static StageCost squared_euclidean();
};

Path sample_path(const ProcessModel& model, Rng& rng);

// N independent pairs; the X and Y components never share randomness.
std::vector<std::pair<Path, Path>> sample_product_paths(const ProcessModel& model_x,
                                                        const ProcessModel& model_y,
                                                        std::size_t n, Rng& rng);

// Sum of stage costs over t = 1..T; time 0 carries no cost.
double path_cost(const StageCost& cost, const Path& path_x, const Path& path_y);

} // namespace bcot
