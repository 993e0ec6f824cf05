#include "bcot/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "bcot/backward_induction.hpp"
#include "bcot/gaussian_oracle.hpp"

namespace bcot {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

long parse_int_field(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected integer, got '" + value + "'");
    }
}

double parse_double_field(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected number, got '" + value + "'");
    }
}

std::uint64_t parse_u64_field(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': expected unsigned integer, got '" +
                                    value + "'");
    }
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "method") {
        cfg.method = method_from_name(value);
    } else if (key == "d") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'd': must be >= 1");
        cfg.dimension = static_cast<std::size_t>(v);
    } else if (key == "T") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'T': must be >= 1");
        cfg.horizon = static_cast<int>(v);
    } else if (key == "sigma_x") {
        double v = parse_double_field(key, value);
        if (v < 0.0) throw std::invalid_argument("config key 'sigma_x': must be >= 0");
        cfg.sigma_x = v;
    } else if (key == "sigma_y") {
        double v = parse_double_field(key, value);
        if (v < 0.0) throw std::invalid_argument("config key 'sigma_y': must be >= 0");
        cfg.sigma_y = v;
    } else if (key == "x0") {
        cfg.x0 = parse_double_field(key, value);
    } else if (key == "y0") {
        cfg.y0 = parse_double_field(key, value);
    } else if (key == "S") {
        long v = parse_int_field(key, value);
        if (v < 2) throw std::invalid_argument("config key 'S': must be >= 2");
        cfg.tree_samples = static_cast<std::size_t>(v);
    } else if (key == "epsilon") {
        double v = parse_double_field(key, value);
        if (!(v > 0.0)) throw std::invalid_argument("config key 'epsilon': must be > 0");
        cfg.epsilon = v;
    } else if (key == "N") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'N': must be >= 1");
        cfg.paths = static_cast<std::size_t>(v);
    } else if (key == "B") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'B': must be >= 1");
        cfg.ot_samples = static_cast<std::size_t>(v);
    } else if (key == "G") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'G': must be >= 1");
        cfg.grad_steps = static_cast<int>(v);
    } else if (key == "batch") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'batch': must be >= 1");
        cfg.batch = static_cast<std::size_t>(v);
    } else if (key == "lr") {
        double v = parse_double_field(key, value);
        if (!(v > 0.0)) throw std::invalid_argument("config key 'lr': must be > 0");
        cfg.lr = v;
    } else if (key == "tau") {
        double v = parse_double_field(key, value);
        if (!(v > 0.0)) throw std::invalid_argument("config key 'tau': must be > 0");
        cfg.tau = v;
    } else if (key == "clip") {
        if (value != "on" && value != "off" && value != "auto") {
            throw std::invalid_argument("config key 'clip': must be on, off or auto");
        }
        cfg.clip = value;
    } else if (key == "target_mode") {
        if (value != "exact" && value != "entropic") {
            throw std::invalid_argument("config key 'target_mode': must be exact or entropic");
        }
        cfg.target_mode = value;
    } else if (key == "reps") {
        long v = parse_int_field(key, value);
        if (v < 1) throw std::invalid_argument("config key 'reps': must be >= 1");
        cfg.reps = static_cast<int>(v);
    } else if (key == "seed") {
        cfg.seed = parse_u64_field(key, value);
    } else if (key == "out") {
        cfg.out = value;
    } else if (key == "rep_workers") {
        long v = parse_int_field(key, value);
        if (v < 0) throw std::invalid_argument("config key 'rep_workers': must be >= 0");
        cfg.rep_workers = static_cast<int>(v);
    } else if (key == "horizons") {
        cfg.horizons.clear();
        std::string item;
        std::string payload = value + ",";
        for (char c : payload) {
            if (c == ',') {
                if (!item.empty()) {
                    long v = parse_int_field("horizons", item);
                    if (v < 1) throw std::invalid_argument("config key 'horizons': entries must be >= 1");
                    cfg.horizons.push_back(static_cast<int>(v));
                    item.clear();
                }
            } else {
                item += c;
            }
        }
        if (cfg.horizons.empty()) {
            throw std::invalid_argument("config key 'horizons': list is empty");
        }
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

struct MethodRun {
    double estimate = 0.0;
    double linear = 0.0; // adapted-sinkhorn only
};

MethodRun run_once(const ExperimentConfig& cfg, int T, std::uint64_t rep_seed) {
    const std::size_t d = cfg.dimension;
    std::vector<double> x0(d, cfg.x0), y0(d, cfg.y0);
    Mat cov_x = Mat::identity(d, cfg.sigma_x);
    Mat cov_y = Mat::identity(d, cfg.sigma_y);
    GaussianAR1 mx(x0, cov_x, T);
    GaussianAR1 my(y0, cov_y, T);
    StageCost cost = StageCost::squared_euclidean();

    Rng rep_rng(rep_seed);
    MethodRun out;
    switch (cfg.method) {
        case Method::oracle: {
            out.estimate = exact_value(x0, y0, SpdMatrix(cov_x), SpdMatrix(cov_y), T);
            break;
        }
        case Method::tree_lp: {
            ScenarioTree tx = build_tree(mx, T, cfg.tree_samples, rep_rng.split(0));
            ScenarioTree ty = build_tree(my, T, cfg.tree_samples, rep_rng.split(1));
            out.estimate = backward_lp_value(tx, ty, cost, /*keep_tables=*/false).value;
            break;
        }
        case Method::adapted_sinkhorn: {
            ScenarioTree tx = build_tree(mx, T, cfg.tree_samples, rep_rng.split(0));
            ScenarioTree ty = build_tree(my, T, cfg.tree_samples, rep_rng.split(1));
            NestedSinkhornResult r = nested_sinkhorn_value(tx, ty, cost, cfg.epsilon,
                                                           /*tol=*/1e-4, /*max_iter=*/10000,
                                                           /*keep_tables=*/false);
            out.estimate = r.value;
            out.linear = r.linear_value;
            break;
        }
        case Method::fvi: {
            FviConfig fc;
            fc.horizon = T;
            fc.state_dim = d;
            fc.paths = cfg.paths;
            fc.ot_samples = cfg.ot_samples;
            fc.grad_steps = cfg.grad_steps;
            fc.batch = cfg.batch;
            fc.lr = cfg.lr;
            fc.tau = cfg.tau;
            fc.clip = (cfg.clip == "on") || (cfg.clip == "auto" && d == 1);
            fc.mode = (cfg.target_mode == "entropic") ? TargetMode::entropic : TargetMode::exact;
            fc.epsilon = cfg.epsilon;
            fc.seed = rep_seed;
            if (cfg.verbose) {
                fc.on_loss = [](int t, int g, double loss) {
                    std::fprintf(stderr, "fvi t=%d step=%d loss=%.6g\n", t, g, loss);
                };
            }
            out.estimate = fit_value_functions(mx, my, cost, fc).v0_estimate;
            break;
        }
    }
    return out;
}

std::string params_string(const ExperimentConfig& cfg, double sinkhorn_linear_mean) {
    switch (cfg.method) {
        case Method::oracle:
            return "-";
        case Method::tree_lp:
            return "S=" + std::to_string(cfg.tree_samples);
        case Method::adapted_sinkhorn:
            return "S=" + std::to_string(cfg.tree_samples) + ";eps=" + fmt6(cfg.epsilon) +
                   ";linear_mean=" + fmt6(sinkhorn_linear_mean);
        case Method::fvi: {
            bool clip_on = (cfg.clip == "on") || (cfg.clip == "auto" && cfg.dimension == 1);
            return "N=" + std::to_string(cfg.paths) + ";B=" + std::to_string(cfg.ot_samples) +
                   ";G=" + std::to_string(cfg.grad_steps) + ";batch=" + std::to_string(cfg.batch) +
                   ";lr=" + fmt6(cfg.lr) + ";tau=" + fmt6(cfg.tau) +
                   ";clip=" + (clip_on ? "on" : "off") + ";mode=" + cfg.target_mode +
                   (cfg.target_mode == "entropic" ? ";eps=" + fmt6(cfg.epsilon) : "");
        }
    }
    return "";
}

ReportRow run_cell(const ExperimentConfig& cfg, int T) {
    const int reps = (cfg.method == Method::oracle) ? 1 : cfg.reps;
    std::vector<MethodRun> results(reps);
    std::vector<double> times(reps, 0.0);
    std::vector<std::string> errors(reps);

    int workers = cfg.rep_workers;
    if (workers <= 0) {
        workers = (cfg.method == Method::fvi || cfg.method == Method::oracle)
                      ? 1
                      : static_cast<int>(std::thread::hardware_concurrency());
        if (workers < 1) workers = 1;
    }
    workers = std::min(workers, reps);

    Rng master(cfg.seed);
    std::atomic<int> next{0};
    auto work = [&]() {
        while (true) {
            int rep = next.fetch_add(1);
            if (rep >= reps) break;
            std::uint64_t rep_seed = master.split(static_cast<std::uint64_t>(rep)).seed();
            auto start = Clock::now();
            try {
                results[rep] = run_once(cfg, T, rep_seed);
            } catch (const std::exception& e) {
                errors[rep] = e.what();
            }
            times[rep] = std::chrono::duration<double>(Clock::now() - start).count();
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (const std::string& err : errors) {
        if (!err.empty()) throw std::runtime_error(err);
    }

    double mean = 0.0, time_mean = 0.0, linear_mean = 0.0;
    for (int r = 0; r < reps; ++r) {
        mean += results[r].estimate;
        linear_mean += results[r].linear;
        time_mean += times[r];
    }
    mean /= reps;
    linear_mean /= reps;
    time_mean /= reps;
    double sd = 0.0;
    if (reps > 1) {
        for (int r = 0; r < reps; ++r) {
            double dev = results[r].estimate - mean;
            sd += dev * dev;
        }
        sd = std::sqrt(sd / (reps - 1));
    }

    std::vector<double> x0(cfg.dimension, cfg.x0), y0(cfg.dimension, cfg.y0);
    double actual = exact_value(x0, y0, SpdMatrix::identity(cfg.dimension, cfg.sigma_x),
                                SpdMatrix::identity(cfg.dimension, cfg.sigma_y), T);

    ReportRow row;
    row.method = method_name(cfg.method);
    row.horizon = T;
    row.dimension = cfg.dimension;
    row.actual = actual;
    row.est_mean = (cfg.method == Method::oracle) ? actual : mean;
    row.est_sd = sd;
    row.avg_runtime_s = time_mean;
    row.reps = reps;
    row.seed = cfg.seed;
    row.params = params_string(cfg, linear_mean);
    return row;
}

} // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::oracle: return "oracle";
        case Method::tree_lp: return "tree-lp";
        case Method::adapted_sinkhorn: return "adapted-sinkhorn";
        case Method::fvi: return "fvi";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "oracle") return Method::oracle;
    if (name == "tree-lp") return Method::tree_lp;
    if (name == "adapted-sinkhorn") return Method::adapted_sinkhorn;
    if (name == "fvi") return Method::fvi;
    throw std::invalid_argument("config key 'method': unknown method '" + name +
                                "' (expected oracle, tree-lp, adapted-sinkhorn or fvi)");
}

void ExperimentConfig::validate() const {
    if ((method == Method::tree_lp || method == Method::adapted_sinkhorn) && dimension != 1) {
        throw std::invalid_argument("tree methods require d=1");
    }
    if (batch > paths) throw std::invalid_argument("config key 'batch': must be <= N");
    for (int h : horizons) {
        if (h < 1) throw std::invalid_argument("config key 'horizons': entries must be >= 1");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        line = text.substr(pos, nl - pos);
        pos = nl + 1;

        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // normalize "key = value" to "key=value" so both spellings tokenize
        std::string squeezed;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == ' ' || line[k] == '\t') {
                std::size_t fwd = line.find_first_not_of(" \t", k);
                if (fwd != std::string::npos && line[fwd] == '=') {
                    continue;
                }
                if (!squeezed.empty() && squeezed.back() == '=') {
                    continue;
                }
            }
            squeezed += line[k];
        }
        std::size_t tpos = 0;
        while (tpos < squeezed.size()) {
            std::size_t sp = squeezed.find_first_of(" \t", tpos);
            if (sp == std::string::npos) sp = squeezed.size();
            std::string token = trim(squeezed.substr(tpos, sp - tpos));
            tpos = sp + 1;
            if (token.empty()) continue;
            std::size_t eq = token.find('=');
            if (eq == std::string::npos || eq == 0) {
                throw std::invalid_argument("config line not in key=value form: '" + token + "'");
            }
            apply_key(cfg, token.substr(0, eq), token.substr(eq + 1));
        }
        if (nl == text.size()) break;
    }
    cfg.validate();
    return cfg;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    ExperimentReport report;
    if (config.horizons.empty()) {
        report.rows.push_back(run_cell(config, config.horizon));
    } else {
        for (int T : config.horizons) {
            report.rows.push_back(run_cell(config, T));
        }
    }
    return report;
}

std::string to_csv(const ExperimentReport& report) {
    std::string out = "method,horizon,dimension,actual,est_mean,est_sd,avg_runtime_s,reps,seed,params\n";
    for (const ReportRow& r : report.rows) {
        out += r.method;
        out += ',' + std::to_string(r.horizon);
        out += ',' + std::to_string(r.dimension);
        out += ',' + fmt6(r.actual);
        out += ',' + fmt6(r.est_mean);
        out += ',' + fmt6(r.est_sd);
        out += ',' + fmt6(r.avg_runtime_s);
        out += ',' + std::to_string(r.reps);
        out += ',' + std::to_string(r.seed);
        out += ',' + r.params;
        out += '\n';
    }
    return out;
}

void write_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_csv: cannot open '" + path + "' for writing");
    f << to_csv(report);
    f.flush();
    if (!f) throw std::runtime_error("write_csv: write failed for '" + path + "'");
}

} // namespace bcot
