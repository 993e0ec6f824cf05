#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bcot/discrete_ot.hpp"
#include "bcot/process.hpp"
#include "bcot/value_net.hpp"

namespace bcot {

enum class TargetMode { exact, entropic };

struct FviConfig {
    int horizon = 1;               // T
    std::size_t state_dim = 1;     // d
    std::size_t paths = 2000;      // N states sampled per time step
    std::size_t ot_samples = 50;   // B conditional draws per side
    int grad_steps = 50;           // G Adam updates per time step
    std::size_t batch = 128;       // minibatch size
    double lr = 0.01;
    double tau = 1.0;              // smooth-L1 threshold
    bool clip = true;              // truncate gradients and parameters to [-1, 1]
    double clip_radius = 1.0;
    TargetMode mode = TargetMode::exact;
    double epsilon = 0.1;          // entropic mode only
    std::uint64_t seed = 0;
    // optional observer for streaming per-step losses (t, step, loss)
    std::function<void(int, int, double)> on_loss;

    void validate() const;
};

struct FviDiagnostics {
    std::vector<std::vector<double>> losses; // losses[t][g], t = 0..T-1
    double sample_seconds = 0.0;
    double target_seconds = 0.0;
    double train_seconds = 0.0;
};

struct FviResult {
    SeparableValueNet net;
    double v0_estimate = 0.0;
    FviDiagnostics diagnostics;
};

// One bootstrapped regression target: draw B conditional successors on each
// side, price the grid with next-step stage cost plus the current net at
// horizon-to-go T-t-1, and solve the empirical OT over uniform marginals.
double empirical_bellman_target(const SeparableValueNet& net, int t,
                                std::span<const double> x, std::span<const double> y,
                                const ProcessModel& model_x, const ProcessModel& model_y,
                                const StageCost& cost, std::size_t B, TargetMode mode,
                                double epsilon, Rng rng);

// Backward fitted value iteration over t = T-1..0 with a single shared net:
// sample N product-law states at time t, compute empirical Bellman targets,
// and regress with G Adam steps on shuffled minibatches. The reported
// v0_estimate is the net at full horizon on the initial states, floored at 0.
FviResult fit_value_functions(const ProcessModel& model_x, const ProcessModel& model_y,
                              const StageCost& cost, const FviConfig& config);

} // namespace bcot
