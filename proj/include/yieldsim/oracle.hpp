#pragma once

#include <vector>

#include "yieldsim/scenario.hpp"

namespace yieldsim {

// Optimal dual prices for the allocation program, plus the yield the induced
// allocation achieves. dual_objective is a certified upper bound on the yield
// of every feasible allocation (best bound seen over all iterates, full-yield
// units); alpha_star/beta_star/primal_yield come from the best primal iterate,
// so the pair is mutually consistent for slackness checks. gap =
// dual_objective - primal_yield >= 0 by weak duality.
struct DualSolution {
    std::vector<double> alpha_star;  // per contract, in [0, p_j]
    std::vector<double> beta_star;   // per impression, >= 0
    double dual_objective = 0.0;
    double primal_yield = 0.0;
    double gap = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Projected-subgradient minimization of the dual over alpha in prod_j [0,p_j]
// with diminishing steps and suffix averaging. Terminates early once
// dual_objective - primal_yield <= tol * |primal_yield|; otherwise returns
// the best iterates found, flagged converged = false.
DualSolution solve_dual(const Scenario& s, double tol = 1e-3, int max_iters = 5000);

// Upper bound on every feasible allocation's yield, at arbitrary alpha
// (full-yield units: reduction constant re-added).
double dual_objective_at(const Scenario& s, const std::vector<double>& alpha);

// Number of impressions each contract wins under the strict allocation rule
// at alpha; wins minus demand is the dual subgradient.
std::vector<long long> strict_win_counts(const Scenario& s, const std::vector<double>& alpha);

// An assignment maps each impression (by position) to a contract id, or 0
// for the open exchange.
struct BruteForceResult {
    std::vector<int> assignment;
    double yield = 0.0;
};

// Yield of an arbitrary assignment: contract revenue net of shortfall
// penalties, exchange revenue, and quality value.
double assignment_yield(const Scenario& s, const std::vector<int>& assignment);

// Exhaustive search over all (m+1)^n assignments. Throws budget_error when
// the enumeration would exceed `budget` leaves.
BruteForceResult brute_force_optimal(const Scenario& s, double budget = 1e7);

// Optimality certificate: primal/dual feasibility plus the two slackness
// families — every allocated impression's winning bid must meet its dual
// price exactly, and unallocated impressions must carry a zero dual price.
struct SlacknessReport {
    bool certified = false;
    int violations = 0;       // conditions breached beyond tol
    double worst = 0.0;       // largest breach magnitude
    int surplus_mismatches = 0;   // allocated impression: bid surplus != beta_i
    int unallocated_paid = 0;     // exchange impression with beta_i > tol
    int infeasibilities = 0;      // box / dual-constraint breaches
};

SlacknessReport verify_complementary_slackness(const Scenario& s,
                                               const std::vector<int>& assignment,
                                               const DualSolution& dual, double tol = 1e-6);

}  // namespace yieldsim
