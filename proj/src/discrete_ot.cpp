#include "bcot/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bcot {

namespace {

constexpr double kSimplexPerturbation = 1e-12;

double checked_sum(const std::vector<double>& w) {
    double s = 0.0;
    for (double x : w) s += x;
    return s;
}

} // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw std::invalid_argument("DiscreteMeasure: empty weight vector");
    for (double x : w_) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
        }
    }
    if (std::abs(checked_sum(w_) - 1.0) > 1e-9) {
        throw std::invalid_argument("DiscreteMeasure: weights must sum to 1 within 1e-9");
    }
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t n) {
    if (n == 0) throw std::invalid_argument("DiscreteMeasure: empty support");
    return DiscreteMeasure(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), a_(std::move(entries)) {
    if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("CostMatrix: dimensions must be >= 1");
    if (a_.size() != rows_ * cols_) throw std::invalid_argument("CostMatrix: entry count mismatch");
    for (double x : a_) {
        if (!std::isfinite(x)) throw std::invalid_argument("CostMatrix: entries must be finite");
    }
}

CostMatrix::CostMatrix(Mat m) : CostMatrix(m.rows, m.cols, std::move(m.a)) {}

Coupling::Coupling(Mat plan_in, DiscreteMeasure row, DiscreteMeasure col)
    : plan(std::move(plan_in)), row_marginal(std::move(row)), col_marginal(std::move(col)) {
    const std::size_t n = row_marginal.size();
    const std::size_t m = col_marginal.size();
    if (plan.rows != n || plan.cols != m) throw std::invalid_argument("Coupling: plan shape mismatch");
    for (double x : plan.a) {
        if (!(x >= -1e-12) || !std::isfinite(x)) {
            throw std::invalid_argument("Coupling: plan entries must be finite and nonnegative");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += plan(i, j);
        if (std::abs(s - row_marginal[i]) > 1e-7) {
            throw std::invalid_argument("Coupling: row sums do not match row marginal within 1e-7");
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += plan(i, j);
        if (std::abs(s - col_marginal[j]) > 1e-7) {
            throw std::invalid_argument("Coupling: column sums do not match column marginal within 1e-7");
        }
    }
}

namespace {

// Transportation simplex over the bipartite graph with row nodes 0..n-1 and
// column nodes n..n+m-1. The basis is a spanning tree held in parent-pointer
// form with explicit child lists; each non-root node owns the arc to its
// parent. Marginals are perturbed by lexicographic machine-epsilon amounts
// to keep pivots nondegenerate; the reported flows and value are recomputed
// from the optimal basis with the unperturbed marginals.
class TransportSimplex {
public:
    TransportSimplex(const double* cost, std::size_t n, std::size_t m,
                     const double* p, const double* q, TransportWorkspace& ws)
        : c_(cost), n_(n), m_(m), p_(p), q_(q), ws_(ws) {}

    // Runs the solve; returns the optimal value. If plan_out is nonnull it
    // receives the dense optimal plan (row-major n x m, preallocated).
    double solve(double* plan_out) {
        prepare();
        northwest_corner();
        build_initial_tree();
        pivot_loop();
        return extract_solution(plan_out);
    }

private:
    std::size_t node_count() const { return n_ + m_; }

    void prepare() {
        const std::size_t nodes = node_count();
        ws_.supply.assign(n_, 0.0);
        ws_.demand.assign(m_, 0.0);
        ws_.parent.assign(nodes, -1);
        ws_.arc_row.assign(nodes, -1);
        ws_.arc_col.assign(nodes, -1);
        ws_.flow.assign(nodes, 0.0);
        ws_.depth.assign(nodes, 0);
        ws_.pot.assign(nodes, 0.0);
        if (ws_.children.size() < nodes) ws_.children.resize(nodes);
        for (std::size_t i = 0; i < nodes; ++i) ws_.children[i].clear();
        ws_.cells_i.clear();
        ws_.cells_j.clear();
        ws_.cells_f.clear();

        double sp = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            ws_.supply[i] = p_[i] + kSimplexPerturbation * static_cast<double>(i + 1);
            sp += ws_.supply[i];
        }
        for (std::size_t j = 0; j < m_; ++j) {
            ws_.demand[j] = q_[j] + kSimplexPerturbation * static_cast<double>(j + 1);
            sq += ws_.demand[j];
        }
        if (sp >= sq) {
            ws_.demand[m_ - 1] += sp - sq;
        } else {
            ws_.supply[n_ - 1] += sq - sp;
        }

        cost_scale_ = 1.0;
        const std::size_t total = n_ * m_;
        for (std::size_t a = 0; a < total; ++a) {
            cost_scale_ = std::max(cost_scale_, std::abs(c_[a]));
        }
        opt_eps_ = 1e-11 * cost_scale_;
    }

    void northwest_corner() {
        std::vector<double>& a = ws_.supply;
        std::vector<double>& b = ws_.demand;
        std::size_t i = 0, j = 0;
        while (true) {
            double f = std::min(a[i], b[j]);
            ws_.cells_i.push_back(static_cast<int>(i));
            ws_.cells_j.push_back(static_cast<int>(j));
            ws_.cells_f.push_back(f);
            a[i] -= f;
            b[j] -= f;
            if (i == n_ - 1 && j == m_ - 1) break;
            bool advance_i;
            if (i == n_ - 1) {
                advance_i = false;
            } else if (j == m_ - 1) {
                advance_i = true;
            } else {
                advance_i = (a[i] <= 0.0);
            }
            if (advance_i) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    // Every north-west-corner cell after the first introduces exactly one new
    // node, so the tree assembles in one pass over the cells.
    void build_initial_tree() {
        ws_.parent[0] = -1;
        int c0 = static_cast<int>(n_) + ws_.cells_j[0];
        link(c0, 0, ws_.cells_i[0], ws_.cells_j[0], ws_.cells_f[0]);
        int prev_i = ws_.cells_i[0], prev_j = ws_.cells_j[0];
        for (std::size_t k = 1; k < ws_.cells_f.size(); ++k) {
            int ci = ws_.cells_i[k], cj = ws_.cells_j[k];
            if (ci != prev_i) {
                link(ci, static_cast<int>(n_) + cj, ci, cj, ws_.cells_f[k]);
            } else {
                link(static_cast<int>(n_) + cj, ci, ci, cj, ws_.cells_f[k]);
            }
            prev_i = ci;
            prev_j = cj;
        }
    }

    void link(int child, int parent, int arc_i, int arc_j, double f) {
        ws_.parent[child] = parent;
        ws_.arc_row[child] = arc_i;
        ws_.arc_col[child] = arc_j;
        ws_.flow[child] = f;
        ws_.depth[child] = ws_.depth[parent] + 1;
        ws_.pot[child] = c_[static_cast<std::size_t>(arc_i) * m_ + arc_j] - ws_.pot[parent];
        ws_.children[parent].push_back(child);
    }

    void pivot_loop() {
        const std::size_t total = n_ * m_;
        const std::size_t block = std::max<std::size_t>(
            64, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
        std::size_t next_arc = 0;
        long pivots = 0;
        int degenerate_streak = 0;
        bool bland = false;
        const long pivot_cap = 400000 + 200L * static_cast<long>(n_ + m_);

        while (true) {
            std::size_t enter = total;
            if (bland) {
                for (std::size_t a = 0; a < total; ++a) {
                    std::size_t i = a / m_, j = a % m_;
                    if (c_[a] - ws_.pot[i] - ws_.pot[n_ + j] < -opt_eps_) {
                        enter = a;
                        break;
                    }
                }
            } else {
                std::size_t a = next_arc;
                std::size_t i = a / m_, j = a % m_;
                double row_pot = ws_.pot[i];
                std::size_t remaining = total;
                while (remaining > 0) {
                    std::size_t chunk = std::min(block, remaining);
                    double best_red = -opt_eps_;
                    std::size_t best = total;
                    for (std::size_t k = 0; k < chunk; ++k) {
                        double red = c_[a] - row_pot - ws_.pot[n_ + j];
                        if (red < best_red) {
                            best_red = red;
                            best = a;
                        }
                        ++a;
                        if (++j == m_) {
                            j = 0;
                            if (a == total) {
                                a = 0;
                                i = 0;
                            } else {
                                ++i;
                            }
                            row_pot = ws_.pot[i];
                        }
                    }
                    if (best != total) {
                        enter = best;
                        next_arc = a;
                        break;
                    }
                    remaining -= chunk;
                }
            }
            if (enter == total) break; // optimal

            double theta = do_pivot(enter);
            if (++pivots > pivot_cap) {
                throw std::runtime_error("exact_ot: transportation simplex exceeded pivot cap");
            }
            if (theta <= 1e-15) {
                if (++degenerate_streak > static_cast<int>(n_ + m_)) bland = true;
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
    }

    // Applies one pivot on entering arc `a`; returns the flow shift theta.
    double do_pivot(std::size_t a) {
        const int ei = static_cast<int>(a / m_);
        const int ej = static_cast<int>(a % m_);
        const int rnode = ei;
        const int cnode = static_cast<int>(n_) + ej;

        // Trace both tree paths to the common ancestor; arcs adjacent to the
        // entering arc carry -theta and signs alternate inward.
        double theta = std::numeric_limits<double>::infinity();
        int leave = -1;     // node owning the leaving arc
        bool leave_on_row_side = false;

        int x = rnode, y = cnode;
        int sx = -1, sy = -1;
        while (ws_.depth[x] > ws_.depth[y]) {
            if (sx < 0 && ws_.flow[x] < theta) {
                theta = ws_.flow[x];
                leave = x;
                leave_on_row_side = true;
            }
            x = ws_.parent[x];
            sx = -sx;
        }
        while (ws_.depth[y] > ws_.depth[x]) {
            if (sy < 0 && ws_.flow[y] < theta) {
                theta = ws_.flow[y];
                leave = y;
                leave_on_row_side = false;
            }
            y = ws_.parent[y];
            sy = -sy;
        }
        while (x != y) {
            if (sx < 0 && ws_.flow[x] < theta) {
                theta = ws_.flow[x];
                leave = x;
                leave_on_row_side = true;
            }
            if (sy < 0 && ws_.flow[y] < theta) {
                theta = ws_.flow[y];
                leave = y;
                leave_on_row_side = false;
            }
            x = ws_.parent[x];
            y = ws_.parent[y];
            sx = -sx;
            sy = -sy;
        }

        // Apply the flow shift along both paths up to the ancestor.
        x = rnode;
        y = cnode;
        sx = -1;
        sy = -1;
        const int lca = // recompute meeting point cheaply by replay
            [&] {
                int ax = rnode, ay = cnode;
                while (ws_.depth[ax] > ws_.depth[ay]) ax = ws_.parent[ax];
                while (ws_.depth[ay] > ws_.depth[ax]) ay = ws_.parent[ay];
                while (ax != ay) {
                    ax = ws_.parent[ax];
                    ay = ws_.parent[ay];
                }
                return ax;
            }();
        while (x != lca) {
            ws_.flow[x] += sx * theta;
            x = ws_.parent[x];
            sx = -sx;
        }
        while (y != lca) {
            ws_.flow[y] += sy * theta;
            y = ws_.parent[y];
            sy = -sy;
        }

        // Rehang: detaching the leaving arc frees the subtree containing one
        // endpoint of the entering arc; reverse the parent chain from that
        // endpoint up to the detached root and hook it under the other side.
        const int side = leave_on_row_side ? rnode : cnode;
        const int opp = leave_on_row_side ? cnode : rnode;

        int old_parent_of_leave = ws_.parent[leave];
        detach_child(old_parent_of_leave, leave);

        ws_.stack.clear();
        for (int cur = side;; cur = ws_.parent[cur]) {
            ws_.stack.push_back(cur);
            if (cur == leave) break;
        }

        int prev = opp;
        int prev_ai = ei, prev_aj = ej;
        double prev_f = theta;
        for (std::size_t idx = 0; idx < ws_.stack.size(); ++idx) {
            int w = ws_.stack[idx];
            int save_parent = ws_.parent[w];
            int save_ai = ws_.arc_row[w], save_aj = ws_.arc_col[w];
            double save_f = ws_.flow[w];
            if (idx > 0) detach_child(w, ws_.stack[idx - 1]);
            ws_.parent[w] = prev;
            ws_.arc_row[w] = prev_ai;
            ws_.arc_col[w] = prev_aj;
            ws_.flow[w] = prev_f;
            ws_.children[prev].push_back(w);
            prev = w;
            prev_ai = save_ai;
            prev_aj = save_aj;
            prev_f = save_f;
            (void)save_parent;
        }

        // Depths and potentials for the rehung subtree follow from the parent
        // relation directly.
        ws_.stack.clear();
        ws_.stack.push_back(side);
        ws_.depth[side] = ws_.depth[opp] + 1;
        ws_.pot[side] =
            c_[static_cast<std::size_t>(ws_.arc_row[side]) * m_ + ws_.arc_col[side]] -
            ws_.pot[opp];
        while (!ws_.stack.empty()) {
            int w = ws_.stack.back();
            ws_.stack.pop_back();
            for (int ch : ws_.children[w]) {
                ws_.depth[ch] = ws_.depth[w] + 1;
                ws_.pot[ch] =
                    c_[static_cast<std::size_t>(ws_.arc_row[ch]) * m_ + ws_.arc_col[ch]] -
                    ws_.pot[w];
                ws_.stack.push_back(ch);
            }
        }
        return theta;
    }

    void detach_child(int parent, int child) {
        auto& list = ws_.children[parent];
        for (std::size_t k = 0; k < list.size(); ++k) {
            if (list[k] == child) {
                list[k] = list.back();
                list.pop_back();
                return;
            }
        }
    }

    // Re-solves the tree flow equations with the unperturbed marginals and
    // sums the objective. The optimal basis does not depend on the
    // perturbation, so this is the exact unperturbed optimum.
    double extract_solution(double* plan_out) {
        const std::size_t nodes = node_count();
        ws_.residual.assign(nodes, 0.0);
        for (std::size_t i = 0; i < n_; ++i) ws_.residual[i] = p_[i];
        for (std::size_t j = 0; j < m_; ++j) ws_.residual[n_ + j] = q_[j];

        ws_.order.clear();
        ws_.stack.clear();
        ws_.stack.push_back(0);
        while (!ws_.stack.empty()) {
            int w = ws_.stack.back();
            ws_.stack.pop_back();
            ws_.order.push_back(w);
            for (int ch : ws_.children[w]) ws_.stack.push_back(ch);
        }

        if (plan_out != nullptr) {
            std::fill(plan_out, plan_out + n_ * m_, 0.0);
        }

        double value = 0.0;
        for (std::size_t k = ws_.order.size(); k-- > 1;) {
            int w = ws_.order[k];
            double f = ws_.residual[w];
            ws_.residual[ws_.parent[w]] -= f;
            std::size_t arc = static_cast<std::size_t>(ws_.arc_row[w]) * m_ + ws_.arc_col[w];
            value += f * c_[arc];
            if (plan_out != nullptr) plan_out[arc] = std::max(f, 0.0);
        }
        return value;
    }

    const double* c_;
    std::size_t n_, m_;
    const double* p_;
    const double* q_;
    TransportWorkspace& ws_;
    double cost_scale_ = 1.0;
    double opt_eps_ = 1e-11;
};

} // namespace

double exact_ot_value(const double* cost, std::size_t n, std::size_t m,
                      const double* p, const double* q, TransportWorkspace& ws) {
    TransportSimplex solver(cost, n, m, p, q, ws);
    return solver.solve(nullptr);
}

ExactOtResult exact_ot(const CostMatrix& cost, const DiscreteMeasure& p,
                       const DiscreteMeasure& q) {
    if (cost.rows() != p.size() || cost.cols() != q.size()) {
        throw std::invalid_argument("exact_ot: cost shape does not match marginals");
    }
    TransportWorkspace ws;
    Mat plan(cost.rows(), cost.cols());
    TransportSimplex solver(cost.entries().data(), cost.rows(), cost.cols(),
                            p.weights().data(), q.weights().data(), ws);
    double value = solver.solve(plan.a.data());
    return ExactOtResult{value, Coupling(std::move(plan), p, q)};
}

namespace {

// Scales the plan toward the marginals and spreads the residual as a rank-one
// correction; the result matches the marginals to machine precision.
void round_to_feasible(Mat& plan, const DiscreteMeasure& p, const DiscreteMeasure& q) {
    const std::size_t n = plan.rows, m = plan.cols;
    std::vector<double> row_sum(n, 0.0), col_sum(m, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) row_sum[i] += plan(i, j);
    for (std::size_t i = 0; i < n; ++i) {
        double s = row_sum[i] > 0.0 ? std::min(1.0, p[i] / row_sum[i]) : 0.0;
        for (std::size_t j = 0; j < m; ++j) plan(i, j) *= s;
    }
    for (std::size_t j = 0; j < m; ++j) {
        col_sum[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) col_sum[j] += plan(i, j);
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = col_sum[j] > 0.0 ? std::min(1.0, q[j] / col_sum[j]) : 0.0;
        for (std::size_t i = 0; i < n; ++i) plan(i, j) *= s;
    }
    std::vector<double> err_r(n, 0.0), err_c(m, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += plan(i, j);
        err_r[i] = p[i] - s;
        total += err_r[i];
    }
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += plan(i, j);
        err_c[j] = q[j] - s;
    }
    if (total > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            if (err_r[i] <= 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) {
                plan(i, j) += err_r[i] * err_c[j] / total;
            }
        }
    }
}

} // namespace

SinkhornResult sinkhorn(const CostMatrix& cost, const DiscreteMeasure& p,
                        const DiscreteMeasure& q, double epsilon, double tol,
                        int max_iter) {
    const std::size_t n = cost.rows(), m = cost.cols();
    if (p.size() != n || q.size() != m) {
        throw std::invalid_argument("sinkhorn: cost shape does not match marginals");
    }
    if (!(epsilon > 0.0)) throw std::invalid_argument("sinkhorn: epsilon must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("sinkhorn: tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("sinkhorn: max_iter must be >= 1");
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] <= 0.0) {
            throw std::invalid_argument("sinkhorn: marginal weights must be strictly positive");
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (q[j] <= 0.0) {
            throw std::invalid_argument("sinkhorn: marginal weights must be strictly positive");
        }
    }

    std::vector<double> log_p(n), log_q(m), f(n, 0.0), g(m, 0.0), term(std::max(n, m));
    for (std::size_t i = 0; i < n; ++i) log_p[i] = std::log(p[i]);
    for (std::size_t j = 0; j < m; ++j) log_q[j] = std::log(q[j]);

    const double* c = cost.entries().data();
    bool converged = false;
    int iters = 0;
    for (int iter = 1; iter <= max_iter; ++iter) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < m; ++j) {
                double t = log_q[j] + (g[j] - c[i * m + j]) / epsilon;
                term[j] = t;
                if (t > mx) mx = t;
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += std::exp(term[j] - mx);
            double fi = -epsilon * (mx + std::log(acc));
            delta = std::max(delta, std::abs(fi - f[i]));
            f[i] = fi;
        }
        for (std::size_t j = 0; j < m; ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                double t = log_p[i] + (f[i] - c[i * m + j]) / epsilon;
                term[i] = t;
                if (t > mx) mx = t;
            }
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += std::exp(term[i] - mx);
            double gj = -epsilon * (mx + std::log(acc));
            delta = std::max(delta, std::abs(gj - g[j]));
            g[j] = gj;
        }
        iters = iter;
        if (delta < tol) {
            converged = true;
            break;
        }
    }

    Mat plan(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            plan(i, j) = std::exp(log_p[i] + log_q[j] + (f[i] + g[j] - c[i * m + j]) / epsilon);
        }
    }
    round_to_feasible(plan, p, q);

    double linear = 0.0;
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double pi = plan(i, j);
            if (pi <= 0.0) continue;
            linear += pi * c[i * m + j];
            kl += pi * std::log(pi / (p[i] * q[j]));
        }
    }
    kl = std::max(kl, 0.0);

    SinkhornResult out{linear + epsilon * kl,
                       linear,
                       Coupling(std::move(plan), p, q),
                       std::move(f),
                       std::move(g),
                       converged,
                       iters};
    return out;
}

double kl_divergence(const Coupling& pi, const DiscreteMeasure& p, const DiscreteMeasure& q) {
    const std::size_t n = pi.plan.rows, m = pi.plan.cols;
    if (p.size() != n || q.size() != m) {
        throw std::invalid_argument("kl_divergence: marginal sizes do not match plan");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            double t = pi.plan(i, j);
            if (t <= 0.0) continue; // 0 ln 0 = 0
            double rho = p[i] * q[j];
            if (rho <= 0.0) {
                throw std::invalid_argument(
                    "kl_divergence: plan puts mass outside the product support at (" +
                    std::to_string(i) + "," + std::to_string(j) + ")");
            }
            acc += t * std::log(t / rho);
        }
    }
    return std::max(acc, 0.0);
}

double wasserstein_p_1d(std::vector<double> xs, std::vector<double> ys, double p) {
    if (xs.size() != ys.size()) throw std::invalid_argument("wasserstein_p_1d: sample count mismatch");
    if (xs.empty()) throw std::invalid_argument("wasserstein_p_1d: empty samples");
    if (!(p >= 1.0)) throw std::invalid_argument("wasserstein_p_1d: order must be >= 1");
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += std::pow(std::abs(xs[i] - ys[i]), p);
    }
    return std::pow(acc / static_cast<double>(xs.size()), 1.0 / p);
}

} // namespace bcot
