#include "bcot/scenario_tree.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bcot {

namespace {

// History of node states from the root down to `node`, flattened for the
// conditional sampler.
void collect_history(const ScenarioTree& tree, int node, std::vector<double>& out) {
    out.clear();
    int cur = node;
    while (cur >= 0) {
        out.push_back(tree.nodes[cur].state);
        cur = tree.nodes[cur].parent;
    }
    std::reverse(out.begin(), out.end());
}

} // namespace

ScenarioTree build_tree(const ProcessModel& model, int T, std::size_t samples_per_node,
                        const Rng& rng) {
    if (model.dimension() != 1) {
        throw std::invalid_argument("build_tree: only scalar processes can be quantized (d = 1)");
    }
    if (T < 1) throw std::invalid_argument("build_tree: horizon must be >= 1");
    if (samples_per_node < 2) {
        throw std::invalid_argument("build_tree: samples_per_node must be >= 2");
    }

    ScenarioTree tree;
    tree.horizon = T;
    std::size_t total_nodes = (std::size_t{2} << T) - 1; // 2^(T+1) - 1
    tree.nodes.reserve(total_nodes);
    tree.level_offsets.assign(static_cast<std::size_t>(T) + 1, 0);

    TreeNode root;
    root.state = model.initial_state()[0];
    tree.nodes.push_back(root);

    std::vector<double> draws(samples_per_node);
    std::vector<double> history;
    for (int t = 0; t < T; ++t) {
        std::size_t begin = tree.level_offsets[t];
        std::size_t end = tree.nodes.size();
        tree.level_offsets[t + 1] = end;
        for (std::size_t idx = begin; idx < end; ++idx) {
            collect_history(tree, static_cast<int>(idx), history);
            Rng node_rng = rng.split(idx);
            model.sample_next(history, samples_per_node, node_rng, draws.data());

            double mean = 0.0;
            for (double x : draws) mean += x;
            mean /= static_cast<double>(samples_per_node);

            double lo_sum = 0.0, hi_sum = 0.0;
            std::size_t lo_count = 0, hi_count = 0;
            for (double x : draws) {
                if (x <= mean) {
                    lo_sum += x;
                    ++lo_count;
                } else {
                    hi_sum += x;
                    ++hi_count;
                }
            }

            double lo_state, hi_state, lo_prob, hi_prob;
            if (hi_count == 0) {
                // all draws identical: keep the binary shape
                lo_state = hi_state = mean;
                lo_prob = hi_prob = 0.5;
            } else {
                lo_state = lo_sum / static_cast<double>(lo_count);
                hi_state = hi_sum / static_cast<double>(hi_count);
                lo_prob = static_cast<double>(lo_count) / static_cast<double>(samples_per_node);
                hi_prob = static_cast<double>(hi_count) / static_cast<double>(samples_per_node);
            }

            int lo_idx = static_cast<int>(tree.nodes.size());
            TreeNode lo_node;
            lo_node.state = lo_state;
            lo_node.depth = t + 1;
            lo_node.parent = static_cast<int>(idx);
            tree.nodes.push_back(lo_node);
            TreeNode hi_node;
            hi_node.state = hi_state;
            hi_node.depth = t + 1;
            hi_node.parent = static_cast<int>(idx);
            tree.nodes.push_back(hi_node);
            tree.nodes[idx].children = {{lo_idx, lo_prob}, {lo_idx + 1, hi_prob}};
        }
    }
    return tree;
}

double tree_expectation(const ScenarioTree& tree,
                        const std::function<double(std::span<const double>)>& functional) {
    std::vector<double> path(static_cast<std::size_t>(tree.horizon) + 1);
    double acc = 0.0;
    // DFS with explicit stack of (node, probability so far)
    std::vector<std::pair<int, double>> stack{{0, 1.0}};
    while (!stack.empty()) {
        auto [node, prob] = stack.back();
        stack.pop_back();
        const TreeNode& nd = tree.nodes[node];
        path[nd.depth] = nd.state;
        if (nd.children.empty()) {
            acc += prob * functional(std::span<const double>(path.data(), nd.depth + 1));
        } else {
            for (auto [child, p] : nd.children) {
                // push children; DFS revisits path[] top-down so states stay valid
                stack.emplace_back(child, prob * p);
            }
        }
    }
    return acc;
}

std::string to_text(const ScenarioTree& tree) {
    std::string out;
    char buf[128];
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& nd = tree.nodes[i];
        std::snprintf(buf, sizeof(buf), "%zu %d %d %.17g", i, nd.depth, nd.parent, nd.state);
        out += buf;
        for (auto [child, p] : nd.children) {
            std::snprintf(buf, sizeof(buf), " %d:%.17g", child, p);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

} // namespace bcot
