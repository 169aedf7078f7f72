#include "yieldsim/marl_env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "yieldsim/errors.hpp"

namespace yieldsim {

AllocationEnv::AllocationEnv(const Scenario& scenario, std::vector<double> alpha_init,
                             double action_limit)
    : scenario_(&scenario),
      offsets_(scenario.step_offsets()),
      alpha_init_(std::move(alpha_init)),
      action_limit_(action_limit),
      ledger_(scenario) {
    if (alpha_init_.size() != scenario.contracts.size())
        throw config_error("env: one initial alpha per contract required");
    if (action_limit_ <= 0) throw config_error("env: action limit must be > 0");
    for (std::size_t j = 0; j < alpha_init_.size(); ++j) {
        if (alpha_init_[j] < 0 || alpha_init_[j] > scenario.contracts[j].penalty)
            throw config_error("env: initial alpha outside [0, penalty] for contract " +
                               std::to_string(j + 1));
    }
    reset();
}

std::vector<std::vector<double>> AllocationEnv::reset() {
    alpha_ = alpha_init_;
    ledger_ = Ledger(*scenario_);
    t_ = 0;
    done_ = false;
    prev_delivered_.assign(alpha_init_.size(), 0);
    last_step_delivered_.assign(alpha_init_.size(), 0);
    last_reward_ = 0.0;
    have_report_ = false;
    return observations();
}

AgentObservation AllocationEnv::observe(int agent) const {
    const auto& c = scenario_->contracts[static_cast<std::size_t>(agent)];
    const double d = static_cast<double>(std::max<long long>(1, c.demand));
    AgentObservation o;
    o.time_frac = static_cast<double>(t_) / static_cast<double>(scenario_->horizon);
    const double remaining = static_cast<double>(c.demand - ledger_.delivered(c.id)) / d;
    o.remaining_demand_frac = std::clamp(remaining, 0.0, 1.0);
    const double per_step_share = d / static_cast<double>(scenario_->horizon);
    o.delivery_rate = std::clamp(
        static_cast<double>(last_step_delivered_[static_cast<std::size_t>(agent)]) /
            per_step_share,
        0.0, 10.0);
    o.alpha_frac = alpha_[static_cast<std::size_t>(agent)] / c.penalty;
    o.last_reward_norm = reward_normalizer_ > 0.0
                             ? std::clamp(last_reward_ / reward_normalizer_, 0.0, 5.0)
                             : 0.0;
    return o;
}

std::vector<std::vector<double>> AllocationEnv::observations() const {
    std::vector<std::vector<double>> out;
    out.reserve(alpha_.size());
    for (std::size_t j = 0; j < alpha_.size(); ++j) {
        const auto a = observe(static_cast<int>(j)).as_array();
        out.emplace_back(a.begin(), a.end());
    }
    return out;
}

StepOutcome AllocationEnv::step(const std::vector<double>& actions) {
    if (done_) throw state_error("env: episode already finished");
    if (actions.size() != alpha_.size())
        throw config_error("env: one action per agent required");

    const auto& contracts = scenario_->contracts;
    for (std::size_t j = 0; j < alpha_.size(); ++j) {
        const double a = std::clamp(actions[j], -action_limit_, action_limit_);
        alpha_[j] = std::clamp(alpha_[j] * (1.0 + a), 0.0, contracts[j].penalty);
    }

    ++t_;
    double reward = 0.0;
    for (std::size_t i = offsets_[static_cast<std::size_t>(t_ - 1)];
         i < offsets_[static_cast<std::size_t>(t_)]; ++i) {
        const auto& imp = scenario_->impressions[i];
        const auto decision = ledger_.allocate(imp, alpha_);
        ledger_.settle(imp, decision);
        if (decision.contract_id == 0) {
            reward += imp.rtb_second;
        } else {
            const auto& c = contracts[static_cast<std::size_t>(decision.contract_id - 1)];
            reward += c.quality_weight * imp.quality[static_cast<std::size_t>(c.id - 1)];
            // Each unit of demand fulfilled is one penalty unit avoided.
            if (ledger_.delivered(c.id) <= c.demand) reward += c.penalty;
        }
    }

    for (std::size_t j = 0; j < alpha_.size(); ++j) {
        const long long now = ledger_.delivered(contracts[j].id);
        last_step_delivered_[j] = now - prev_delivered_[j];
        prev_delivered_[j] = now;
    }
    last_reward_ = reward;
    if (!normalizer_frozen_) reward_normalizer_ = std::max(reward_normalizer_, reward);

    StepOutcome out;
    out.reward = reward;
    out.done = t_ >= scenario_->horizon;
    if (out.done) {
        done_ = true;
        report_ = ledger_.finalize();
        have_report_ = true;
    }
    out.obs = observations();
    return out;
}

double AllocationEnv::final_value() const {
    if (!have_report_) throw state_error("env: episode not finished");
    return report_.yield;
}

const YieldReport& AllocationEnv::last_report() const {
    if (!have_report_) throw state_error("env: episode not finished");
    return report_;
}

double AllocationEnv::episode_constant() const {
    double c = 0.0;
    for (const auto& contract : scenario_->contracts)
        c += (contract.unit_price - contract.penalty) * static_cast<double>(contract.demand);
    return c;
}

double episode_return(const std::vector<double>& rewards) {
    double sum = 0.0;
    for (double r : rewards) sum += r;
    return sum;
}

}  // namespace yieldsim
