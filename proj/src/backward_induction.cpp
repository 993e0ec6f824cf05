#include "bcot/backward_induction.hpp"

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "bcot/discrete_ot.hpp"

namespace bcot {

namespace {

void check_pair(const ScenarioTree& tx, const ScenarioTree& ty) {
    if (tx.horizon != ty.horizon) {
        throw std::invalid_argument("backward induction: tree horizons differ");
    }
    if (tx.horizon > kBackwardHorizonCap) {
        throw std::invalid_argument("backward induction: horizon " + std::to_string(tx.horizon) +
                                    " exceeds the cap of " + std::to_string(kBackwardHorizonCap) +
                                    " (pair tables grow as 4^T)");
    }
    auto check_branching = [](const ScenarioTree& t) {
        for (const TreeNode& nd : t.nodes) {
            if (!nd.children.empty() && nd.children.size() != 2) {
                throw std::invalid_argument("backward induction: trees must be binary");
            }
        }
    };
    check_branching(tx);
    check_branching(ty);
}

double stage_cost_scalar(const StageCost& cost, int t, double x, double y) {
    return cost(t, std::span<const double>(&x, 1), std::span<const double>(&y, 1));
}

// Terminal level: stage costs over the leaf grid.
std::vector<double> terminal_level(const ScenarioTree& tx, const ScenarioTree& ty,
                                   const StageCost& cost) {
    const int T = tx.horizon;
    const std::size_t nx = tx.level_size(T), ny = ty.level_size(T);
    const std::size_t bx = tx.level_begin(T), by = ty.level_begin(T);
    std::vector<double> level(nx * ny);
    for (std::size_t a = 0; a < nx; ++a) {
        double xs = tx.nodes[bx + a].state;
        for (std::size_t b = 0; b < ny; ++b) {
            level[a * ny + b] = stage_cost_scalar(cost, T, xs, ty.nodes[by + b].state);
        }
    }
    return level;
}

} // namespace

BackwardLpResult backward_lp_value(const ScenarioTree& tree_x, const ScenarioTree& tree_y,
                                   const StageCost& cost, bool keep_tables) {
    check_pair(tree_x, tree_y);
    const int T = tree_x.horizon;

    BackwardLpResult out;
    if (keep_tables) out.table.levels.resize(static_cast<std::size_t>(T) + 1);

    std::vector<double> next = terminal_level(tree_x, tree_y, cost);
    if (keep_tables) out.table.levels[T] = next;

    TransportWorkspace ws;
    std::vector<double> cell(4);
    std::vector<double> px(2), py(2);
    for (int t = T - 1; t >= 0; --t) {
        const std::size_t nx = tree_x.level_size(t), ny = tree_y.level_size(t);
        const std::size_t bx = tree_x.level_begin(t), by = tree_y.level_begin(t);
        const std::size_t ny_next = tree_y.level_size(t + 1);
        const std::size_t bx_next = tree_x.level_begin(t + 1);
        const std::size_t by_next = tree_y.level_begin(t + 1);
        std::vector<double> cur(nx * ny);
        for (std::size_t a = 0; a < nx; ++a) {
            const TreeNode& nxd = tree_x.nodes[bx + a];
            const std::size_t ca0 = nxd.children[0].first - bx_next;
            const std::size_t ca1 = nxd.children[1].first - bx_next;
            px[0] = nxd.children[0].second;
            px[1] = nxd.children[1].second;
            for (std::size_t b = 0; b < ny; ++b) {
                const TreeNode& nyd = tree_y.nodes[by + b];
                const std::size_t cb0 = nyd.children[0].first - by_next;
                const std::size_t cb1 = nyd.children[1].first - by_next;
                py[0] = nyd.children[0].second;
                py[1] = nyd.children[1].second;
                cell[0] = next[ca0 * ny_next + cb0];
                cell[1] = next[ca0 * ny_next + cb1];
                cell[2] = next[ca1 * ny_next + cb0];
                cell[3] = next[ca1 * ny_next + cb1];
                double v = exact_ot_value(cell.data(), 2, 2, px.data(), py.data(), ws);
                if (t >= 1) v += stage_cost_scalar(cost, t, nxd.state, nyd.state);
                cur[a * ny + b] = v;
            }
        }
        next = std::move(cur);
        if (keep_tables) out.table.levels[t] = next;
    }
    out.value = next[0];
    return out;
}

NestedSinkhornResult nested_sinkhorn_value(const ScenarioTree& tree_x,
                                           const ScenarioTree& tree_y,
                                           const StageCost& cost, double epsilon,
                                           double tol, int max_iter, bool keep_tables) {
    check_pair(tree_x, tree_y);
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("nested_sinkhorn_value: epsilon must be positive");
    }
    const int T = tree_x.horizon;

    NestedSinkhornResult out;
    if (keep_tables) out.table.levels.resize(static_cast<std::size_t>(T) + 1);

    std::vector<double> next = terminal_level(tree_x, tree_y, cost);
    std::vector<double> next_linear = next; // terminal linear part equals the stage cost
    if (keep_tables) out.table.levels[T] = next;

    for (int t = T - 1; t >= 0; --t) {
        const std::size_t nx = tree_x.level_size(t), ny = tree_y.level_size(t);
        const std::size_t bx = tree_x.level_begin(t), by = tree_y.level_begin(t);
        const std::size_t ny_next = tree_y.level_size(t + 1);
        const std::size_t bx_next = tree_x.level_begin(t + 1);
        const std::size_t by_next = tree_y.level_begin(t + 1);
        std::vector<double> cur(nx * ny), cur_linear(nx * ny);
        for (std::size_t a = 0; a < nx; ++a) {
            const TreeNode& nxd = tree_x.nodes[bx + a];
            const std::size_t ca0 = nxd.children[0].first - bx_next;
            const std::size_t ca1 = nxd.children[1].first - bx_next;
            DiscreteMeasure px({nxd.children[0].second, nxd.children[1].second});
            for (std::size_t b = 0; b < ny; ++b) {
                const TreeNode& nyd = tree_y.nodes[by + b];
                const std::size_t cb0 = nyd.children[0].first - by_next;
                const std::size_t cb1 = nyd.children[1].first - by_next;
                DiscreteMeasure py({nyd.children[0].second, nyd.children[1].second});
                CostMatrix cell(2, 2,
                                {next[ca0 * ny_next + cb0], next[ca0 * ny_next + cb1],
                                 next[ca1 * ny_next + cb0], next[ca1 * ny_next + cb1]});
                SinkhornResult sr = sinkhorn(cell, px, py, epsilon, tol, max_iter);
                if (!sr.converged) {
                    throw std::runtime_error(
                        "nested_sinkhorn_value: Sinkhorn did not converge at depth " +
                        std::to_string(t) + ", node pair (" + std::to_string(a) + "," +
                        std::to_string(b) + ")");
                }
                double stage = (t >= 1) ? stage_cost_scalar(cost, t, nxd.state, nyd.state) : 0.0;
                cur[a * ny + b] = stage + sr.value;
                // expected remaining stage cost of the induced plan
                double lin = stage;
                lin += sr.plan.plan(0, 0) * next_linear[ca0 * ny_next + cb0];
                lin += sr.plan.plan(0, 1) * next_linear[ca0 * ny_next + cb1];
                lin += sr.plan.plan(1, 0) * next_linear[ca1 * ny_next + cb0];
                lin += sr.plan.plan(1, 1) * next_linear[ca1 * ny_next + cb1];
                cur_linear[a * ny + b] = lin;
            }
        }
        next = std::move(cur);
        next_linear = std::move(cur_linear);
        if (keep_tables) out.table.levels[t] = next;
    }
    out.value = next[0];
    out.linear_value = next_linear[0];
    return out;
}

} // namespace bcot
