#pragma once

#include <vector>

#include "yieldsim/report.hpp"
#include "yieldsim/scenario.hpp"

namespace yieldsim {

// Contract-First: allocate with fixed bid shifts until any contract's
// remaining demand exceeds risk_factor times the expected remaining supply
// (estimated from the arrival rate seen so far); from then on every
// impression is force-fed to the unfulfilled contract with the highest
// quality-value-plus-shift score, until all demands are met.
YieldReport run_contract_first(const Scenario& s, const std::vector<double>& alphas,
                               double risk_factor = 0.8);

// PID pacing controller. Gains are dimensionless: the error is the
// per-unit-demand delivery deficit against the setpoint curve, and the
// controller output is scaled by each contract's penalty before clamping
// into [0, p_j].
// Defaults were grid-tuned once for even pacing on a fixed generator seed
// and frozen; they are not scenario-specific.
struct PidGains {
    double kp = 2.0;
    double ki = 0.5;
    double kd = 0.2;
    // Cumulative target delivery fraction after each step (size T,
    // nondecreasing to 1). Empty means even pacing t/T.
    std::vector<double> setpoint_curve;
};

struct PidResult {
    YieldReport report;
    // alpha held during each step: [step-1][contract]. Useful for diagnostics.
    std::vector<std::vector<double>> alpha_trajectory;
};

PidResult run_pid(const Scenario& s, const PidGains& gains);

}  // namespace yieldsim
