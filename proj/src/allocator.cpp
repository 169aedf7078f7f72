#include "yieldsim/allocator.hpp"

#include <algorithm>
#include <string>

#include "yieldsim/errors.hpp"

namespace yieldsim {

double contract_bid(const Contract& c, double quality, double alpha) {
    double a = std::clamp(alpha, 0.0, c.penalty);
    return c.quality_weight * quality + a;
}

Ledger::Ledger(const Scenario& scenario) : scenario_(&scenario) {
    delivered_.assign(scenario.contracts.size(), 0);
    quality_sum_.assign(scenario.contracts.size(), 0.0);
}

AllocationDecision Ledger::allocate(const Impression& imp,
                                    const std::vector<double>& alpha) const {
    const auto& contracts = scenario_->contracts;
    if (alpha.size() != contracts.size())
        throw config_error("alpha has " + std::to_string(alpha.size()) + " entries for " +
                           std::to_string(contracts.size()) + " contracts");
    if (imp.quality.size() != contracts.size())
        throw config_error("impression " + std::to_string(imp.id) + " has " +
                           std::to_string(imp.quality.size()) + " quality scores for " +
                           std::to_string(contracts.size()) + " contracts");

    AllocationDecision out;
    out.impression_id = imp.id;
    out.rtb_second = imp.rtb_second;
    double best = 0.0;
    int best_id = 0;
    for (size_t j = 0; j < contracts.size(); ++j) {
        double b = contract_bid(contracts[j], imp.quality[j], alpha[j]);
        // Ties between contracts break to the lowest id: strict > only.
        if (best_id == 0 || b > best) {
            best = b;
            best_id = contracts[j].id;
        }
    }
    out.winning_bid = best;
    // The exchange keeps the impression unless a contract strictly outbids
    // the runner-up price it would fetch there.
    if (best_id != 0 && best > imp.rtb_second) out.contract_id = best_id;
    return out;
}

void Ledger::settle(const Impression& imp, const AllocationDecision& a) {
    if (finalized_) throw state_error("ledger already finalized");
    if (a.contract_id == 0) {
        r_rtb_ += imp.rtb_second;
        return;
    }
    size_t j = static_cast<size_t>(a.contract_id - 1);
    if (j >= delivered_.size())
        throw config_error("settle: unknown contract id " + std::to_string(a.contract_id));
    delivered_[j] += 1;
    quality_sum_[j] += imp.quality[j];
}

YieldReport Ledger::finalize() {
    if (finalized_) throw state_error("ledger already finalized");
    finalized_ = true;

    const auto& contracts = scenario_->contracts;
    YieldReport r;
    r.delivered = delivered_;
    r.shortfall.resize(contracts.size());
    r.r_rtb = r_rtb_;
    for (size_t j = 0; j < contracts.size(); ++j) {
        long long y = std::max<long long>(0, contracts[j].demand - delivered_[j]);
        r.shortfall[j] = y;
        r.r_gc += contracts[j].unit_price * static_cast<double>(contracts[j].demand) -
                  contracts[j].penalty * static_cast<double>(y);
        r.q_gc += contracts[j].quality_weight * quality_sum_[j];
    }
    r.yield = r.r_gc + r.r_rtb + r.q_gc;
    return r;
}

long long Ledger::delivered(int contract_id) const {
    size_t j = static_cast<size_t>(contract_id - 1);
    if (j >= delivered_.size())
        throw config_error("delivered: unknown contract id " + std::to_string(contract_id));
    return delivered_[j];
}

double Ledger::quality_sum(int contract_id) const {
    size_t j = static_cast<size_t>(contract_id - 1);
    if (j >= quality_sum_.size())
        throw config_error("quality_sum: unknown contract id " + std::to_string(contract_id));
    return quality_sum_[j];
}

YieldReport run_fixed_alpha(const Scenario& scenario, const std::vector<double>& alpha) {
    Ledger ledger(scenario);
    for (const auto& imp : scenario.impressions) ledger.settle(imp, ledger.allocate(imp, alpha));
    return ledger.finalize();
}

}  // namespace yieldsim
