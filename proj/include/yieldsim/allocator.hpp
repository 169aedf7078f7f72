#pragma once

#include <vector>

#include "yieldsim/report.hpp"
#include "yieldsim/scenario.hpp"

namespace yieldsim {

// Outcome of routing a single impression. contract_id == 0 means the
// impression goes to the open exchange; then winning_bid is the best contract
// bid that failed to beat rtb_second (0 with no contracts).
struct AllocationDecision {
    int impression_id = 0;
    int contract_id = 0;
    double winning_bid = 0.0;
    double rtb_second = 0.0;
};

// Bid contract j places on an impression with quality q and current dual
// price alpha: lambda_j * q + clamp(alpha, 0, p_j).
double contract_bid(const Contract& c, double quality, double alpha);

// Streaming accounting for one simulated day. allocate() routes impressions
// (strict-win rule against the exchange runner-up, ties between contracts to
// the lowest id), settle() books the chosen outcome, finalize() closes the
// books and freezes the ledger.
class Ledger {
public:
    explicit Ledger(const Scenario& scenario);

    // Pure decision: does not touch the books.
    AllocationDecision allocate(const Impression& imp, const std::vector<double>& alpha) const;

    void settle(const Impression& imp, const AllocationDecision& a);
    YieldReport finalize();

    bool finalized() const { return finalized_; }
    long long delivered(int contract_id) const;
    const std::vector<long long>& delivered_all() const { return delivered_; }
    double rtb_revenue() const { return r_rtb_; }
    double quality_sum(int contract_id) const;

private:
    const Scenario* scenario_;
    std::vector<long long> delivered_;
    std::vector<double> quality_sum_;
    double r_rtb_ = 0.0;
    bool finalized_ = false;
};

// Convenience: run a whole scenario under fixed dual prices.
YieldReport run_fixed_alpha(const Scenario& scenario, const std::vector<double>& alpha);

}  // namespace yieldsim
