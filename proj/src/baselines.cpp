#include "yieldsim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "yieldsim/allocator.hpp"
#include "yieldsim/errors.hpp"

namespace yieldsim {

YieldReport run_contract_first(const Scenario& s, const std::vector<double>& alphas,
                               double risk_factor) {
    if (alphas.size() != s.contracts.size())
        throw config_error("contract-first: one alpha per contract required");
    if (risk_factor <= 0) throw config_error("contract-first: risk_factor must be > 0");

    const auto& contracts = s.contracts;
    const auto offsets = s.step_offsets();
    Ledger ledger(s);
    bool fallback = false;

    auto total_unmet = [&] {
        long long unmet = 0;
        for (const auto& c : contracts)
            unmet += std::max<long long>(0, c.demand - ledger.delivered(c.id));
        return unmet;
    };

    for (int t = 1; t <= s.horizon; ++t) {
        // Shortfall-risk detector: compare each contract's remaining demand
        // with the supply the observed arrival rate predicts for the rest of
        // the day.
        if (!fallback && t >= 2) {
            const double seen = static_cast<double>(offsets[static_cast<std::size_t>(t - 1)]);
            const double elapsed = static_cast<double>(t - 1);
            const double expected_remaining = seen / elapsed * static_cast<double>(s.horizon - (t - 1));
            for (const auto& c : contracts) {
                const long long remaining = c.demand - ledger.delivered(c.id);
                if (remaining > 0 &&
                    static_cast<double>(remaining) > risk_factor * expected_remaining) {
                    fallback = true;
                    break;
                }
            }
        }

        for (std::size_t i = offsets[static_cast<std::size_t>(t - 1)];
             i < offsets[static_cast<std::size_t>(t)]; ++i) {
            const auto& imp = s.impressions[i];
            if (fallback) {
                // Force-feed the highest-scoring unfulfilled contract,
                // exchange price ignored.
                int pick = 0;
                double best = 0.0;
                for (std::size_t j = 0; j < contracts.size(); ++j) {
                    if (ledger.delivered(contracts[j].id) >= contracts[j].demand) continue;
                    const double score = contract_bid(contracts[j], imp.quality[j], alphas[j]);
                    if (pick == 0 || score > best) {
                        best = score;
                        pick = contracts[j].id;
                    }
                }
                if (pick != 0) {
                    AllocationDecision d;
                    d.impression_id = imp.id;
                    d.contract_id = pick;
                    d.winning_bid = best;
                    d.rtb_second = imp.rtb_second;
                    ledger.settle(imp, d);
                    if (total_unmet() == 0) fallback = false;  // all demands met
                    continue;
                }
                fallback = false;  // nothing left unfulfilled
            }
            ledger.settle(imp, ledger.allocate(imp, alphas));
        }
    }
    return ledger.finalize();
}

PidResult run_pid(const Scenario& s, const PidGains& gains) {
    if (!std::isfinite(gains.kp) || !std::isfinite(gains.ki) || !std::isfinite(gains.kd))
        throw config_error("pid: gains must be finite");
    std::vector<double> curve = gains.setpoint_curve;
    if (curve.empty()) {
        curve.resize(static_cast<std::size_t>(s.horizon));
        for (int t = 1; t <= s.horizon; ++t)
            curve[static_cast<std::size_t>(t - 1)] =
                static_cast<double>(t) / static_cast<double>(s.horizon);
    }
    if (static_cast<int>(curve.size()) != s.horizon)
        throw config_error("pid: setpoint_curve must have T entries");
    double prev = 0.0;
    for (double v : curve) {
        if (v < prev - 1e-12 || v < 0.0 || v > 1.0 + 1e-12)
            throw config_error("pid: setpoint_curve must be nondecreasing within [0, 1]");
        prev = v;
    }

    const auto& contracts = s.contracts;
    const auto offsets = s.step_offsets();
    const std::size_t m = contracts.size();
    Ledger ledger(s);

    std::vector<double> alpha(m), integral(m, 0.0), prev_error(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) alpha[j] = contracts[j].alpha_init;

    PidResult out;
    out.alpha_trajectory.reserve(static_cast<std::size_t>(s.horizon));

    for (int t = 1; t <= s.horizon; ++t) {
        // Cumulative target after t-1 steps; at the first boundary the
        // target is zero and alpha holds its initial value.
        const double target_frac = t >= 2 ? curve[static_cast<std::size_t>(t - 2)] : 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double d = static_cast<double>(std::max<long long>(1, contracts[j].demand));
            const double target = target_frac * static_cast<double>(contracts[j].demand);
            const double error =
                (target - static_cast<double>(ledger.delivered(contracts[j].id))) / d;
            const double derivative = error - prev_error[j];
            prev_error[j] = error;

            // Conditional integration: keep the integral only while it does
            // not push the output further past the clamp.
            const double candidate = integral[j] + error;
            const double raw = contracts[j].alpha_init +
                               contracts[j].penalty *
                                   (gains.kp * error + gains.ki * candidate + gains.kd * derivative);
            if (raw >= 0.0 && raw <= contracts[j].penalty) {
                integral[j] = candidate;
                alpha[j] = raw;
            } else {
                const bool unwinding = (raw > contracts[j].penalty && error < 0.0) ||
                                       (raw < 0.0 && error > 0.0);
                if (unwinding) integral[j] = candidate;
                alpha[j] = std::clamp(raw, 0.0, contracts[j].penalty);
            }
        }
        out.alpha_trajectory.push_back(alpha);

        for (std::size_t i = offsets[static_cast<std::size_t>(t - 1)];
             i < offsets[static_cast<std::size_t>(t)]; ++i) {
            const auto& imp = s.impressions[i];
            ledger.settle(imp, ledger.allocate(imp, alpha));
        }
    }
    out.report = ledger.finalize();
    return out;
}

}  // namespace yieldsim
