#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace yieldsim {

// Final accounting of one simulated day. `yield` always equals
// R_GC + R_RTB + Q_GC when produced by the allocator; externally supplied
// rows may disagree, which the additivity validator flags.
struct YieldReport {
    double r_gc = 0.0;
    double r_rtb = 0.0;
    double q_gc = 0.0;
    double yield = 0.0;
    std::vector<long long> delivered;  // per contract
    std::vector<long long> shortfall;  // y_j = max(0, d_j - delivered_j)
    std::optional<double> r_star;      // oracle yield, when attached

    double r_over_rstar() const;  // requires r_star
};

struct LabeledReport {
    std::string method;
    std::string scenario;
    YieldReport report;
};

// Components summing to the printed yield within this many money units pass
// the additivity check; anything larger is flagged, never silently dropped.
inline constexpr double kAdditivityTolerance = 0.01;

// |r_gc + r_rtb + q_gc - yield| when it exceeds the tolerance, else nullopt.
std::optional<double> additivity_mismatch(const YieldReport& r);

// One row per scenario with one R/R* column per method, then an unweighted
// average row. Every report must carry r_star. Rows failing the additivity
// check are marked in the rendered table.
struct SummaryTable {
    std::vector<std::string> methods;
    std::vector<std::string> scenarios;
    std::vector<std::vector<double>> ratios;    // [scenario][method]
    std::vector<double> averages;               // per method
    std::vector<std::string> flagged;           // human-readable flags
};

SummaryTable summarize(const std::vector<LabeledReport>& reports);
std::string render_summary(const SummaryTable& table);

// Convergence curves (Fig-style CSV): one row per evaluation point and a
// trailing per-method average-seconds-per-episode summary line.
struct CurvePoint {
    int episode = 0;
    double seconds = 0.0;
    double r_over_rstar = 0.0;
};

struct MethodCurve {
    std::string method;
    std::vector<CurvePoint> points;
};

void emit_convergence_csv(const std::vector<MethodCurve>& curves, std::ostream& os);
void emit_convergence_csv(const std::vector<MethodCurve>& curves, const std::string& path);

// Key-value result record for one (method, scenario) run.
void save_result(const LabeledReport& r, const std::string& path);
LabeledReport load_result(const std::string& path);

}  // namespace yieldsim
