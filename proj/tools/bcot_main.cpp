#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bcot/experiment.hpp"

namespace {

struct FlagSet {
    std::string config_path;
    long T = 0, d = 0, S = 0, N = 0, B = 0, G = 0, batch = 0, reps = 0, rep_workers = 0;
    double sigma_x = 0, sigma_y = 0, x0 = 0, y0 = 0, epsilon = 0, lr = 0, tau = 0;
    std::string clip, target_mode, out, horizons, method;
    unsigned long long seed = 0;
    bool verbose = false;
};

void add_common_options(CLI::App* cmd, FlagSet& fs) {
    cmd->add_option("--config", fs.config_path, "config file (key=value lines, # comments)");
    cmd->add_option("--T", fs.T, "horizon");
    cmd->add_option("--d", fs.d, "state dimension");
    cmd->add_option("--sigma-x", fs.sigma_x, "variance of the X noise (covariance = sigma_x * I)");
    cmd->add_option("--sigma-y", fs.sigma_y, "variance of the Y noise");
    cmd->add_option("--x0", fs.x0, "initial X value (replicated across dimensions)");
    cmd->add_option("--y0", fs.y0, "initial Y value");
    cmd->add_option("--S", fs.S, "tree samples per node");
    cmd->add_option("--epsilon", fs.epsilon, "entropic regularization");
    cmd->add_option("--N", fs.N, "FVI sample paths per time step");
    cmd->add_option("--B", fs.B, "FVI empirical OT size");
    cmd->add_option("--G", fs.G, "FVI gradient steps per time step");
    cmd->add_option("--batch", fs.batch, "FVI minibatch size");
    cmd->add_option("--lr", fs.lr, "FVI learning rate");
    cmd->add_option("--tau", fs.tau, "smooth-L1 threshold");
    cmd->add_option("--clip", fs.clip, "FVI clipping: on, off or auto");
    cmd->add_option("--target-mode", fs.target_mode, "FVI target mode: exact or entropic");
    cmd->add_option("--reps", fs.reps, "repetitions");
    cmd->add_option("--seed", fs.seed, "master seed");
    cmd->add_option("--out", fs.out, "CSV output path");
    cmd->add_option("--rep-workers", fs.rep_workers, "repetition worker pool size (0 = auto)");
    cmd->add_flag("--verbose", fs.verbose, "stream per-step FVI loss to stderr");
}

bcot::ExperimentConfig assemble(const CLI::App* cmd, const FlagSet& fs,
                                const std::string& forced_method) {
    bcot::ExperimentConfig cfg;
    if (cmd->count("--config") > 0) {
        std::ifstream f(fs.config_path);
        if (!f) throw std::runtime_error("cannot open config file '" + fs.config_path + "'");
        std::ostringstream ss;
        ss << f.rdbuf();
        cfg = bcot::parse_config(ss.str());
    }
    auto set_if = [&](const char* flag, auto setter) {
        if (cmd->count(flag) > 0) setter();
    };
    set_if("--T", [&] { cfg.horizon = static_cast<int>(fs.T); });
    set_if("--d", [&] { cfg.dimension = static_cast<std::size_t>(fs.d); });
    set_if("--sigma-x", [&] { cfg.sigma_x = fs.sigma_x; });
    set_if("--sigma-y", [&] { cfg.sigma_y = fs.sigma_y; });
    set_if("--x0", [&] { cfg.x0 = fs.x0; });
    set_if("--y0", [&] { cfg.y0 = fs.y0; });
    set_if("--S", [&] { cfg.tree_samples = static_cast<std::size_t>(fs.S); });
    set_if("--epsilon", [&] { cfg.epsilon = fs.epsilon; });
    set_if("--N", [&] { cfg.paths = static_cast<std::size_t>(fs.N); });
    set_if("--B", [&] { cfg.ot_samples = static_cast<std::size_t>(fs.B); });
    set_if("--G", [&] { cfg.grad_steps = static_cast<int>(fs.G); });
    set_if("--batch", [&] { cfg.batch = static_cast<std::size_t>(fs.batch); });
    set_if("--lr", [&] { cfg.lr = fs.lr; });
    set_if("--tau", [&] { cfg.tau = fs.tau; });
    set_if("--clip", [&] { cfg.clip = fs.clip; });
    set_if("--target-mode", [&] { cfg.target_mode = fs.target_mode; });
    set_if("--reps", [&] { cfg.reps = static_cast<int>(fs.reps); });
    set_if("--seed", [&] { cfg.seed = fs.seed; });
    set_if("--out", [&] { cfg.out = fs.out; });
    set_if("--rep-workers", [&] { cfg.rep_workers = static_cast<int>(fs.rep_workers); });
    if (fs.verbose) cfg.verbose = true;

    if (!forced_method.empty()) {
        cfg.method = bcot::method_from_name(forced_method);
    } else if (cmd->count("--method") > 0) {
        cfg.method = bcot::method_from_name(fs.method);
    }
    if (cmd->count("--horizons") > 0) {
        cfg.horizons.clear();
        std::string item;
        for (char c : fs.horizons + ",") {
            if (c == ',') {
                if (!item.empty()) cfg.horizons.push_back(std::stoi(item));
                item.clear();
            } else {
                item += c;
            }
        }
    }
    cfg.validate();
    return cfg;
}

void print_report(const bcot::ExperimentReport& report) {
    std::printf("%-18s %3s %3s %12s %12s %10s %12s %5s\n", "method", "T", "d", "actual",
                "est_mean", "est_sd", "runtime_s", "reps");
    for (const auto& r : report.rows) {
        std::printf("%-18s %3d %3zu %12.6g %12.6g %10.6g %12.6g %5d\n", r.method.c_str(),
                    r.horizon, r.dimension, r.actual, r.est_mean, r.est_sd, r.avg_runtime_s,
                    r.reps);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bicausal optimal transport benchmarks"};
    app.require_subcommand(1);

    FlagSet fs;
    CLI::App* c_oracle = app.add_subcommand("oracle", "closed-form Gaussian value");
    CLI::App* c_lp = app.add_subcommand("tree-lp", "backward exact OT on scenario trees");
    CLI::App* c_sink = app.add_subcommand("adapted-sinkhorn", "backward entropic OT on scenario trees");
    CLI::App* c_fvi = app.add_subcommand("fvi", "fitted value iteration");
    CLI::App* c_bench = app.add_subcommand("bench", "sweep a method over a horizon list");
    for (CLI::App* c : {c_oracle, c_lp, c_sink, c_fvi, c_bench}) add_common_options(c, fs);
    c_bench->add_option("--method", fs.method, "method to sweep");
    c_bench->add_option("--horizons", fs.horizons, "comma-separated horizon list");

    CLI11_PARSE(app, argc, argv);

    try {
        bcot::ExperimentConfig cfg;
        if (c_oracle->parsed()) cfg = assemble(c_oracle, fs, "oracle");
        else if (c_lp->parsed()) cfg = assemble(c_lp, fs, "tree-lp");
        else if (c_sink->parsed()) cfg = assemble(c_sink, fs, "adapted-sinkhorn");
        else if (c_fvi->parsed()) cfg = assemble(c_fvi, fs, "fvi");
        else cfg = assemble(c_bench, fs, "");

        bcot::ExperimentReport report = bcot::run_experiment(cfg);
        print_report(report);
        if (!cfg.out.empty()) {
            bcot::write_csv(report, cfg.out);
            std::fprintf(stderr, "wrote %s\n", cfg.out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
