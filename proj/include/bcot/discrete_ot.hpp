#pragma once

#include <cstddef>
#include <vector>

#include "bcot/linalg.hpp"

namespace bcot {

// Probability weights on a finite support: nonnegative, summing to 1
// within 1e-9.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(std::vector<double> weights);
    static DiscreteMeasure uniform(std::size_t n);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

private:
    std::vector<double> w_;
};

// Finite cost matrix; construction rejects NaN/inf and empty shapes.
class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    explicit CostMatrix(Mat m);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    const std::vector<double>& entries() const { return a_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

// Transport plan together with the marginals it must match. Construction
// asserts feasibility: nonnegative entries, row/column sums within 1e-7 of
// the marginals.
struct Coupling {
    Mat plan;
    DiscreteMeasure row_marginal;
    DiscreteMeasure col_marginal;

    Coupling(Mat plan, DiscreteMeasure row, DiscreteMeasure col);
};

struct ExactOtResult {
    double value = 0.0;
    Coupling plan;
};

struct SinkhornResult {
    double value = 0.0;       // entropic objective <c,plan> + eps*KL(plan || p x q)
    double linear_part = 0.0; // <c,plan> alone
    Coupling plan;
    std::vector<double> log_u; // dual potentials, cost units (row side)
    std::vector<double> log_v; // dual potentials, cost units (column side)
    bool converged = false;
    int iterations = 0;
};

// Scratch space for the transportation simplex so hot loops (millions of
// small solves) do not allocate. One instance per thread.
struct TransportWorkspace {
    std::vector<double> supply, demand, residual, flow, pot;
    std::vector<int> parent, arc_row, arc_col, depth, order, stack, cells_i, cells_j;
    std::vector<double> cells_f;
    std::vector<std::vector<int>> children;
};

// Minimum-cost coupling by the transportation simplex: north-west-corner
// start, block Dantzig pricing, Bland fallback when degeneracy stalls.
// The value is the exact optimum (vertex solution), not an approximation.
ExactOtResult exact_ot(const CostMatrix& cost, const DiscreteMeasure& p,
                       const DiscreteMeasure& q);

// Value-only variant for hot paths; identical algorithm, no plan
// materialization. `cost` is row-major with shape n x m.
double exact_ot_value(const double* cost, std::size_t n, std::size_t m,
                      const double* p, const double* q, TransportWorkspace& ws);

// Entropic OT in the log domain. Minimizes <c,plan> + eps*KL(plan || p x q);
// the reported value is that objective evaluated on the returned plan. The
// plan is rounded to exact feasibility. Convergence: sup-norm change of the
// dual potentials below tol.
SinkhornResult sinkhorn(const CostMatrix& cost, const DiscreteMeasure& p,
                        const DiscreteMeasure& q, double epsilon,
                        double tol = 1e-4, int max_iter = 10000);

// KL(pi || p x q) with 0 ln 0 = 0. Throws if pi puts mass outside the
// support of the product measure.
double kl_divergence(const Coupling& pi, const DiscreteMeasure& p,
                     const DiscreteMeasure& q);

// Order-p Wasserstein distance between two equal-size empirical samples on
// the line (uniform weights): sorted matching.
double wasserstein_p_1d(std::vector<double> xs, std::vector<double> ys, double p);

} // namespace bcot
