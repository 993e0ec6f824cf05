#include "bcot/fvi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bcot {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Stream indices under one time step's rng: per-sample streams first, then
// the shuffle stream.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kStepStreamBase = 1;

double solve_target_grid(std::vector<double>& grid, std::size_t B, TargetMode mode,
                         double epsilon, TransportWorkspace& ws,
                         std::vector<double>& uniform) {
    if (mode == TargetMode::exact) {
        return exact_ot_value(grid.data(), B, B, uniform.data(), uniform.data(), ws);
    }
    CostMatrix cost(B, B, grid);
    DiscreteMeasure u(uniform);
    return sinkhorn(cost, u, u, epsilon).value;
}

} // namespace

void FviConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("FviConfig: horizon must be >= 1");
    if (state_dim == 0) throw std::invalid_argument("FviConfig: state_dim must be positive");
    if (batch < 1) throw std::invalid_argument("FviConfig: batch must be >= 1");
    if (paths < batch) throw std::invalid_argument("FviConfig: paths must be >= batch");
    if (ot_samples < 1) throw std::invalid_argument("FviConfig: ot_samples must be >= 1");
    if (grad_steps < 1) throw std::invalid_argument("FviConfig: grad_steps must be >= 1");
    if (!(lr > 0.0)) throw std::invalid_argument("FviConfig: lr must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("FviConfig: tau must be positive");
    if (clip && !(clip_radius > 0.0)) {
        throw std::invalid_argument("FviConfig: clip_radius must be positive");
    }
    if (mode == TargetMode::entropic && !(epsilon > 0.0)) {
        throw std::invalid_argument("FviConfig: epsilon must be positive in entropic mode");
    }
}

double empirical_bellman_target(const SeparableValueNet& net, int t,
                                std::span<const double> x, std::span<const double> y,
                                const ProcessModel& model_x, const ProcessModel& model_y,
                                const StageCost& cost, std::size_t B, TargetMode mode,
                                double epsilon, Rng rng) {
    const int T = model_x.horizon();
    if (t < 0 || t >= T) {
        throw std::invalid_argument("empirical_bellman_target: t must lie in [0, T-1]");
    }
    const std::size_t d = model_x.dimension();

    std::vector<double> xs(B * d), ys(B * d);
    model_x.sample_next(x, B, rng, xs.data());
    model_y.sample_next(y, B, rng, ys.data());

    std::vector<double> grid(B * B);
    net.forward_grid(static_cast<double>(T - t - 1), xs.data(), B, ys.data(), B, grid.data());
    for (std::size_t a = 0; a < B; ++a) {
        std::span<const double> xa{xs.data() + a * d, d};
        for (std::size_t b = 0; b < B; ++b) {
            grid[a * B + b] += cost(t + 1, xa, {ys.data() + b * d, d});
        }
    }

    TransportWorkspace ws;
    std::vector<double> uniform(B, 1.0 / static_cast<double>(B));
    return solve_target_grid(grid, B, mode, epsilon, ws, uniform);
}

FviResult fit_value_functions(const ProcessModel& model_x, const ProcessModel& model_y,
                              const StageCost& cost, const FviConfig& config) {
    config.validate();
    if (model_x.horizon() != model_y.horizon()) {
        throw std::invalid_argument("fit_value_functions: model horizons differ");
    }
    if (model_x.dimension() != config.state_dim || model_y.dimension() != config.state_dim) {
        throw std::invalid_argument("fit_value_functions: model dimension does not match config");
    }
    if (model_x.horizon() != config.horizon) {
        throw std::invalid_argument("fit_value_functions: model horizon does not match config");
    }

    const int T = config.horizon;
    const std::size_t d = config.state_dim;
    const std::size_t N = config.paths;
    const std::size_t B = config.ot_samples;

    Rng run(config.seed);
    FviResult out{SeparableValueNet(d), 0.0, {}};
    out.net.initialize(run.split(kInitStream));
    out.diagnostics.losses.assign(static_cast<std::size_t>(T), {});

    AdamState adam(out.net.parameter_count(), config.lr);
    std::optional<ClipRange> clip;
    if (config.clip) clip = ClipRange{-config.clip_radius, config.clip_radius};

    auto x0 = model_x.initial_state();
    auto y0 = model_y.initial_state();

    std::vector<double> states_x(N * d), states_y(N * d), targets(N);
    std::vector<double> grid(B * B), xs(B * d), ys(B * d), path(d * (static_cast<std::size_t>(T) + 1));
    std::vector<double> uniform(B, 1.0 / static_cast<double>(B));
    TransportWorkspace ws;
    std::vector<std::size_t> order(N);
    std::vector<TrainSample> batch(config.batch);

    for (int t = T - 1; t >= 0; --t) {
        Rng t_rng = run.split(kStepStreamBase + static_cast<std::uint64_t>(t));

        // Sample N states from the product law truncated at time t (the fixed
        // initial state when t = 0), then price one Bellman target per state.
        auto t_start = Clock::now();
        for (std::size_t n = 0; n < N; ++n) {
            Rng sample_rng = t_rng.split(n);
            if (t == 0) {
                std::copy(x0.begin(), x0.end(), states_x.begin() + n * d);
                std::copy(y0.begin(), y0.end(), states_y.begin() + n * d);
            } else {
                Rng px_rng = sample_rng.split(0);
                Rng py_rng = sample_rng.split(1);
                std::copy(x0.begin(), x0.end(), path.begin());
                for (int u = 0; u < t; ++u) {
                    model_x.sample_next({path.data(), (static_cast<std::size_t>(u) + 1) * d}, 1,
                                        px_rng, path.data() + (u + 1) * d);
                }
                std::copy_n(path.data() + static_cast<std::size_t>(t) * d, d,
                            states_x.begin() + n * d);
                std::copy(y0.begin(), y0.end(), path.begin());
                for (int u = 0; u < t; ++u) {
                    model_y.sample_next({path.data(), (static_cast<std::size_t>(u) + 1) * d}, 1,
                                        py_rng, path.data() + (u + 1) * d);
                }
                std::copy_n(path.data() + static_cast<std::size_t>(t) * d, d,
                            states_y.begin() + n * d);
            }
        }
        out.diagnostics.sample_seconds += seconds_since(t_start);

        t_start = Clock::now();
        for (std::size_t n = 0; n < N; ++n) {
            Rng target_rng = t_rng.split(n).split(2);
            std::span<const double> sx{states_x.data() + n * d, d};
            std::span<const double> sy{states_y.data() + n * d, d};
            try {
                model_x.sample_next(sx, B, target_rng, xs.data());
                model_y.sample_next(sy, B, target_rng, ys.data());
                out.net.forward_grid(static_cast<double>(T - t - 1), xs.data(), B, ys.data(), B,
                                     grid.data());
                for (std::size_t a = 0; a < B; ++a) {
                    std::span<const double> xa{xs.data() + a * d, d};
                    for (std::size_t b = 0; b < B; ++b) {
                        grid[a * B + b] += cost(t + 1, xa, {ys.data() + b * d, d});
                    }
                }
                targets[n] = solve_target_grid(grid, B, config.mode, config.epsilon, ws, uniform);
            } catch (const std::exception& e) {
                throw std::runtime_error("fit_value_functions: target solve failed at t=" +
                                         std::to_string(t) + ", sample " + std::to_string(n) +
                                         ": " + e.what());
            }
        }
        out.diagnostics.target_seconds += seconds_since(t_start);

        // G Adam steps over shuffled minibatches, cycling through the targets.
        t_start = Clock::now();
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle_rng = t_rng.split(N);
        shuffle(order, shuffle_rng);
        const double h = static_cast<double>(T - t);
        std::size_t pos = 0;
        auto& losses = out.diagnostics.losses[t];
        losses.reserve(config.grad_steps);
        for (int g = 0; g < config.grad_steps; ++g) {
            for (std::size_t k = 0; k < config.batch; ++k) {
                std::size_t idx = order[pos];
                pos = (pos + 1) % N;
                batch[k] = TrainSample{h,
                                       {states_x.data() + idx * d, d},
                                       {states_y.data() + idx * d, d},
                                       targets[idx]};
            }
            LossGrad lg = grad_loss(out.net, batch, config.tau);
            adam_step(adam, out.net.parameters(), lg.grad, clip);
            losses.push_back(lg.loss);
            if (config.on_loss) config.on_loss(t, g, lg.loss);
        }
        out.diagnostics.train_seconds += seconds_since(t_start);
    }

    double v0 = out.net.forward(static_cast<double>(T), x0, y0);
    out.v0_estimate = std::max(v0, 0.0);
    return out;
}

} // namespace bcot
