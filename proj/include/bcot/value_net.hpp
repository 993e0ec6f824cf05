#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "bcot/rng.hpp"

namespace bcot {

// Separable cost-to-go approximator
//   F1(h) * sigmoid(mlp(x, y)) + F3(h),    h = horizon to go,
// where F1 and F3 are quadratics in h and the mlp is a two-hidden-layer ReLU
// network of width 8 on the concatenated state (x, y). All parameters live in
// one flat vector so the optimizer treats them uniformly.
class SeparableValueNet {
public:
    static constexpr std::size_t kHidden = 8;

    explicit SeparableValueNet(std::size_t state_dim);

    std::size_t state_dim() const { return d_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    // MLP weights uniform in +-1/sqrt(fan_in), biases and F1/F3 coefficients 0.
    void initialize(Rng rng);

    double forward(double h, std::span<const double> x, std::span<const double> y) const;

    // Evaluates forward(h, xs[i], ys[j]) for the whole bx x by grid into out
    // (row-major). The first-layer contributions of xs and ys are factored so
    // the per-pair work starts at the first hidden layer.
    void forward_grid(double h, const double* xs, std::size_t bx, const double* ys,
                      std::size_t by, double* out) const;

    // Flat layout offsets (f1, f3, w0, b1, w1, b2, w2, b3).
    std::size_t offset_f1() const { return 0; }
    std::size_t offset_f3() const { return 3; }
    std::size_t offset_w0() const { return 6; }
    std::size_t offset_b1() const { return 6 + kHidden * 2 * d_; }
    std::size_t offset_w1() const { return offset_b1() + kHidden; }
    std::size_t offset_b2() const { return offset_w1() + kHidden * kHidden; }
    std::size_t offset_w2() const { return offset_b2() + kHidden; }
    std::size_t offset_b3() const { return offset_w2() + kHidden; }

private:
    std::size_t d_;
    std::vector<double> params_;
};

// Huber-style regression loss: quadratic within tau of the target, linear
// beyond, C1 at the junction.
double smooth_l1(double f, double v, double tau);

struct TrainSample {
    double h = 0.0;
    std::span<const double> x;
    std::span<const double> y;
    double target = 0.0;
};

// Mean smooth-L1 loss over the minibatch and its exact gradient in the net's
// flat parameter layout.
struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

LossGrad grad_loss(const SeparableValueNet& net, std::span<const TrainSample> batch,
                   double tau);

struct AdamState {
    std::vector<double> m; // first moments
    std::vector<double> v; // second moments
    long step = 0;
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    AdamState(std::size_t param_count, double learning_rate);
};

struct ClipRange {
    double lo = -1.0;
    double hi = 1.0;
};

// One Adam update with bias correction. When clipping is set, gradients are
// clamped to the range before the moment update and parameters after.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::optional<ClipRange> clip);

} // namespace bcot
