#include "bcot/value_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcot {

namespace {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

} // namespace

SeparableValueNet::SeparableValueNet(std::size_t state_dim) : d_(state_dim) {
    if (d_ == 0) throw std::invalid_argument("SeparableValueNet: state dimension must be positive");
    params_.assign(offset_b3() + 1, 0.0);
}

void SeparableValueNet::initialize(Rng rng) {
    std::fill(params_.begin(), params_.end(), 0.0);
    auto fill_uniform = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t k = 0; k < count; ++k) {
            params_[offset + k] = (2.0 * rng.uniform01() - 1.0) * bound;
        }
    };
    fill_uniform(offset_w0(), kHidden * 2 * d_, 2 * d_);
    fill_uniform(offset_w1(), kHidden * kHidden, kHidden);
    fill_uniform(offset_w2(), kHidden, kHidden);
}

double SeparableValueNet::forward(double h, std::span<const double> x,
                                  std::span<const double> y) const {
    const double* p = params_.data();
    const double* w0 = p + offset_w0();
    const double* b1 = p + offset_b1();
    const double* w1 = p + offset_w1();
    const double* b2 = p + offset_b2();
    const double* w2 = p + offset_w2();
    const double b3 = p[offset_b3()];

    double r1[kHidden];
    for (std::size_t i = 0; i < kHidden; ++i) {
        double z = b1[i];
        const double* row = w0 + i * 2 * d_;
        for (std::size_t k = 0; k < d_; ++k) z += row[k] * x[k];
        for (std::size_t k = 0; k < d_; ++k) z += row[d_ + k] * y[k];
        r1[i] = z > 0.0 ? z : 0.0;
    }
    double r2[kHidden];
    for (std::size_t i = 0; i < kHidden; ++i) {
        double z = b2[i];
        const double* row = w1 + i * kHidden;
        for (std::size_t k = 0; k < kHidden; ++k) z += row[k] * r1[k];
        r2[i] = z > 0.0 ? z : 0.0;
    }
    double z3 = b3;
    for (std::size_t k = 0; k < kHidden; ++k) z3 += w2[k] * r2[k];
    double o = sigmoid(z3);

    double f1 = p[0] + p[1] * h + p[2] * h * h;
    double f3 = p[3] + p[4] * h + p[5] * h * h;
    return f1 * o + f3;
}

void SeparableValueNet::forward_grid(double h, const double* xs, std::size_t bx,
                                     const double* ys, std::size_t by, double* out) const {
    const double* p = params_.data();
    const double* w0 = p + offset_w0();
    const double* b1 = p + offset_b1();
    const double* w1 = p + offset_w1();
    const double* b2 = p + offset_b2();
    const double* w2 = p + offset_w2();
    const double b3 = p[offset_b3()];
    const double f1 = p[0] + p[1] * h + p[2] * h * h;
    const double f3 = p[3] + p[4] * h + p[5] * h * h;

    // first-layer contributions, x and y sides separately
    std::vector<double> ax(bx * kHidden), ay(by * kHidden);
    for (std::size_t s = 0; s < bx; ++s) {
        const double* xv = xs + s * d_;
        for (std::size_t i = 0; i < kHidden; ++i) {
            const double* row = w0 + i * 2 * d_;
            double z = 0.0;
            for (std::size_t k = 0; k < d_; ++k) z += row[k] * xv[k];
            ax[s * kHidden + i] = z;
        }
    }
    for (std::size_t s = 0; s < by; ++s) {
        const double* yv = ys + s * d_;
        for (std::size_t i = 0; i < kHidden; ++i) {
            const double* row = w0 + i * 2 * d_;
            double z = 0.0;
            for (std::size_t k = 0; k < d_; ++k) z += row[d_ + k] * yv[k];
            ay[s * kHidden + i] = z;
        }
    }

    for (std::size_t a = 0; a < bx; ++a) {
        const double* axa = ax.data() + a * kHidden;
        for (std::size_t b = 0; b < by; ++b) {
            const double* ayb = ay.data() + b * kHidden;
            double r1[kHidden];
            for (std::size_t i = 0; i < kHidden; ++i) {
                double z = axa[i] + ayb[i] + b1[i];
                r1[i] = z > 0.0 ? z : 0.0;
            }
            double r2[kHidden];
            for (std::size_t i = 0; i < kHidden; ++i) {
                const double* row = w1 + i * kHidden;
                double z = b2[i];
                for (std::size_t k = 0; k < kHidden; ++k) z += row[k] * r1[k];
                r2[i] = z > 0.0 ? z : 0.0;
            }
            double z3 = b3;
            for (std::size_t k = 0; k < kHidden; ++k) z3 += w2[k] * r2[k];
            out[a * by + b] = f1 * sigmoid(z3) + f3;
        }
    }
}

double smooth_l1(double f, double v, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("smooth_l1: tau must be positive");
    double e = std::abs(f - v);
    if (e < tau) return e * e / (2.0 * tau);
    return e - 0.5 * tau;
}

LossGrad grad_loss(const SeparableValueNet& net, std::span<const TrainSample> batch,
                   double tau) {
    if (batch.empty()) throw std::invalid_argument("grad_loss: empty minibatch");
    if (!(tau > 0.0)) throw std::invalid_argument("grad_loss: tau must be positive");

    const std::size_t d = net.state_dim();
    constexpr std::size_t H = SeparableValueNet::kHidden;
    std::span<const double> p = net.parameters();
    const double* w0 = p.data() + net.offset_w0();
    const double* b1 = p.data() + net.offset_b1();
    const double* w1 = p.data() + net.offset_w1();
    const double* b2 = p.data() + net.offset_b2();
    const double* w2 = p.data() + net.offset_w2();
    const double b3 = p[net.offset_b3()];

    LossGrad out;
    out.grad.assign(p.size(), 0.0);
    double* g = out.grad.data();
    double* gw0 = g + net.offset_w0();
    double* gb1 = g + net.offset_b1();
    double* gw1 = g + net.offset_w1();
    double* gb2 = g + net.offset_b2();
    double* gw2 = g + net.offset_w2();
    double* gb3 = g + net.offset_b3();

    const double inv_n = 1.0 / static_cast<double>(batch.size());
    double z1[H], r1[H], z2[H], r2[H], dz1[H], dz2[H];

    for (const TrainSample& s : batch) {
        for (std::size_t i = 0; i < H; ++i) {
            double z = b1[i];
            const double* row = w0 + i * 2 * d;
            for (std::size_t k = 0; k < d; ++k) z += row[k] * s.x[k];
            for (std::size_t k = 0; k < d; ++k) z += row[d + k] * s.y[k];
            z1[i] = z;
            r1[i] = z > 0.0 ? z : 0.0;
        }
        for (std::size_t i = 0; i < H; ++i) {
            double z = b2[i];
            const double* row = w1 + i * H;
            for (std::size_t k = 0; k < H; ++k) z += row[k] * r1[k];
            z2[i] = z;
            r2[i] = z > 0.0 ? z : 0.0;
        }
        double z3 = b3;
        for (std::size_t k = 0; k < H; ++k) z3 += w2[k] * r2[k];
        double o = sigmoid(z3);
        double f1 = p[0] + p[1] * s.h + p[2] * s.h * s.h;
        double f = f1 * o + (p[3] + p[4] * s.h + p[5] * s.h * s.h);

        double e = f - s.target;
        double ae = std::abs(e);
        double dldf;
        if (ae < tau) {
            out.loss += e * e / (2.0 * tau) * inv_n;
            dldf = e / tau * inv_n;
        } else {
            out.loss += (ae - 0.5 * tau) * inv_n;
            dldf = (e > 0.0 ? 1.0 : -1.0) * inv_n;
        }

        g[0] += dldf * o;
        g[1] += dldf * o * s.h;
        g[2] += dldf * o * s.h * s.h;
        g[3] += dldf;
        g[4] += dldf * s.h;
        g[5] += dldf * s.h * s.h;

        double dz3 = dldf * f1 * o * (1.0 - o);
        for (std::size_t k = 0; k < H; ++k) gw2[k] += dz3 * r2[k];
        *gb3 += dz3;

        for (std::size_t i = 0; i < H; ++i) {
            dz2[i] = (z2[i] > 0.0) ? dz3 * w2[i] : 0.0;
        }
        for (std::size_t i = 0; i < H; ++i) {
            if (dz2[i] == 0.0) continue;
            double* row = gw1 + i * H;
            for (std::size_t k = 0; k < H; ++k) row[k] += dz2[i] * r1[k];
            gb2[i] += dz2[i];
        }
        for (std::size_t k = 0; k < H; ++k) {
            double acc = 0.0;
            for (std::size_t i = 0; i < H; ++i) acc += dz2[i] * w1[i * H + k];
            dz1[k] = (z1[k] > 0.0) ? acc : 0.0;
        }
        for (std::size_t i = 0; i < H; ++i) {
            if (dz1[i] == 0.0) continue;
            double* row = gw0 + i * 2 * d;
            for (std::size_t k = 0; k < d; ++k) row[k] += dz1[i] * s.x[k];
            for (std::size_t k = 0; k < d; ++k) row[d + k] += dz1[i] * s.y[k];
            gb1[i] += dz1[i];
        }
    }
    return out;
}

AdamState::AdamState(std::size_t param_count, double learning_rate)
    : m(param_count, 0.0), v(param_count, 0.0), lr(learning_rate) {}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               std::optional<ClipRange> clip) {
    if (params.size() != grad.size() || params.size() != state.m.size()) {
        throw std::invalid_argument("adam_step: parameter/gradient/state size mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < params.size(); ++k) {
        double gk = grad[k];
        if (clip) gk = std::clamp(gk, clip->lo, clip->hi);
        state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * gk;
        state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * gk * gk;
        double mhat = state.m[k] / bc1;
        double vhat = state.v[k] / bc2;
        params[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        if (clip) params[k] = std::clamp(params[k], clip->lo, clip->hi);
    }
}

} // namespace bcot
