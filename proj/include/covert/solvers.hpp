#pragma once

#include <cstddef>
#include <vector>

namespace covert::solvers {

// Small dense solvers shared by the capacity and scaling-constant modules.
// Sizes here are tiny (alphabets of a few symbols); robustness over speed.

struct LpResult {
    bool feasible = false;
    double value = 0.0;          // objective at optimum
    std::vector<double> x;
};

// maximize c'x  s.t.  A x = b, x >= 0   (two-phase dense simplex, Bland's rule).
// Infeasibility tolerance ~1e-9 on the phase-1 objective.
LpResult simplex_lp(const std::vector<std::vector<double>>& A,
                    const std::vector<double>& b,
                    const std::vector<double>& c);

struct QpHullResult {
    std::vector<double> weights;  // convex weights over the vertex list
    std::vector<double> point;    // sum_i weights[i] * V[i]
    double objective = 0.0;       // |M point - q|^2
    double gap = 0.0;             // Frank-Wolfe duality gap at the returned point
    int iterations = 0;
};

// minimize |M v - q|^2 over v in conv{V[0], ..., V[k-1]}.
// Away-step Frank-Wolfe with periodic exact re-solve on the active face;
// stops when the duality gap <= gap_tol or max_iter is hit.
QpHullResult qp_over_hull(const std::vector<std::vector<double>>& M,  // rows
                          const std::vector<double>& q,
                          const std::vector<std::vector<double>>& V,  // vertices
                          double gap_tol,
                          int max_iter = 200000);

struct NnlsResult {
    std::vector<double> x;        // x >= 0
    double residual_l2 = 0.0;
    double residual_linf = 0.0;
};

// minimize |A x - b|^2 subject to x >= 0 (Lawson-Hanson active set).
NnlsResult nnls(const std::vector<std::vector<double>>& A,  // rows
                const std::vector<double>& b);

// Solves the KKT system for min |A x - b|^2 s.t. sum x = 1 (no sign constraint).
// Returns empty vector when the system is singular.
std::vector<double> equality_ls(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b);

}  // namespace covert::solvers
