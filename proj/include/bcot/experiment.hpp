#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bcot/fvi.hpp"

namespace bcot {

enum class Method { oracle, tree_lp, adapted_sinkhorn, fvi };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Flat experiment description: the Gaussian model, the solver, its knobs,
// repetitions and seeding. Scalar sigma_* are variances; the covariance is
// sigma * identity and the initial states are x0 * ones(d), y0 * ones(d).
struct ExperimentConfig {
    Method method = Method::oracle;
    std::size_t dimension = 1;
    int horizon = 1;
    double sigma_x = 1.0;
    double sigma_y = 0.25;
    double x0 = 1.0;
    double y0 = 2.0;

    std::size_t tree_samples = 1000; // S, per-node draws for quantization
    double epsilon = 0.1;            // entropic regularization
    std::size_t paths = 2000;        // N
    std::size_t ot_samples = 50;     // B
    int grad_steps = 50;             // G
    std::size_t batch = 128;
    double lr = 0.01;
    double tau = 1.0;
    std::string clip = "auto";        // on | off | auto (on iff d == 1)
    std::string target_mode = "exact"; // exact | entropic
    int reps = 10;
    std::uint64_t seed = 42;
    std::string out;
    std::vector<int> horizons; // bench sweeps; empty means single horizon
    int rep_workers = 0;       // 0 = auto
    bool verbose = false;

    void validate() const;
};

// One report row per (method, horizon) cell, matching the CSV columns.
struct ReportRow {
    std::string method;
    int horizon = 0;
    std::size_t dimension = 1;
    double actual = 0.0;
    double est_mean = 0.0;
    double est_sd = 0.0;
    double avg_runtime_s = 0.0;
    int reps = 0;
    std::uint64_t seed = 0;
    std::string params;
};

struct ExperimentReport {
    std::vector<ReportRow> rows;
};

// Parses the flat key=value config text ('#' starts a comment; one or more
// pairs per line). Unknown keys, type errors and range violations are
// reported with the offending key named.
ExperimentConfig parse_config(const std::string& text);

// Runs the configured experiment: R independently seeded repetitions per
// horizon (rep seed = split(master seed, rep index)), mean and sample SD
// (divisor R-1) over the estimates, per-repetition wall time averaged. The
// oracle method is deterministic and always reports one repetition.
ExperimentReport run_experiment(const ExperimentConfig& config);

// CSV with the fixed header
//   method,horizon,dimension,actual,est_mean,est_sd,avg_runtime_s,reps,seed,params
// floats at 6 significant digits, LF line endings.
void write_csv(const ExperimentReport& report, const std::string& path);

std::string to_csv(const ExperimentReport& report);

} // namespace bcot
