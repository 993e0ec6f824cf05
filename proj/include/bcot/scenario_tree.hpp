#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bcot/process.hpp"
#include "bcot/rng.hpp"

namespace bcot {

struct TreeNode {
    double state = 0.0;
    int depth = 0;
    int parent = -1; // -1 for the root
    std::vector<std::pair<int, double>> children; // (node index, conditional probability)
};

// Non-recombining binary scenario tree for a scalar process: 2^t nodes at
// depth t, each non-leaf carrying two children with positive probabilities
// summing to 1. Nodes are stored level by level, root first.
struct ScenarioTree {
    int horizon = 0;
    std::vector<TreeNode> nodes;
    std::vector<std::size_t> level_offsets; // level_offsets[t] = index of first depth-t node

    std::size_t level_begin(int t) const { return level_offsets[t]; }
    std::size_t level_size(int t) const {
        std::size_t end = (t + 1 < static_cast<int>(level_offsets.size()))
                              ? level_offsets[t + 1]
                              : nodes.size();
        return end - level_offsets[t];
    }
};

// Quantizes a scalar process into a binary tree: at every node, draw
// `samples_per_node` conditional successors, split them at their empirical
// mean, and use each half's mean and frequency as the child state and
// probability. When all draws coincide both children take the common value
// with probability 1/2 each.
ScenarioTree build_tree(const ProcessModel& model, int T, std::size_t samples_per_node,
                        const Rng& rng);

// Expectation of a root-to-leaf path functional under the tree measure.
double tree_expectation(const ScenarioTree& tree,
                        const std::function<double(std::span<const double>)>& functional);

// Line-oriented debug dump: "index depth parent state child:prob child:prob".
std::string to_text(const ScenarioTree& tree);

} // namespace bcot
