#pragma once

#include <vector>

#include "bcot/process.hpp"
#include "bcot/scenario_tree.hpp"

namespace bcot {

// Value tables of the backward recursion between two trees: levels[t] is the
// row-major (n_t x n_t) matrix of values over depth-t node pairs, n_t =
// branching^t. levels[T] holds the terminal stage costs.
struct NodePairValueTable {
    std::vector<std::vector<double>> levels;
};

struct BackwardLpResult {
    double value = 0.0;
    NodePairValueTable table;
};

struct NestedSinkhornResult {
    double value = 0.0;        // entropic objective accumulated through the recursion
    double linear_value = 0.0; // expected stage cost of the induced plan, no KL term
    NodePairValueTable table;
};

// Exact bicausal value between two trees by backward induction: an exact OT
// over the child grid at every node pair. Horizons above kBackwardHorizonCap
// are refused (the pair tables grow as 4^T).
inline constexpr int kBackwardHorizonCap = 13;

BackwardLpResult backward_lp_value(const ScenarioTree& tree_x, const ScenarioTree& tree_y,
                                   const StageCost& cost, bool keep_tables = true);

// Same recursion with every node-pair subproblem solved entropically. A
// Sinkhorn solve that fails to converge aborts with the node coordinates.
NestedSinkhornResult nested_sinkhorn_value(const ScenarioTree& tree_x,
                                           const ScenarioTree& tree_y,
                                           const StageCost& cost, double epsilon,
                                           double tol = 1e-4, int max_iter = 10000,
                                           bool keep_tables = true);

} // namespace bcot
