#pragma once

#include <array>
#include <vector>

#include "yieldsim/allocator.hpp"
#include "yieldsim/scenario.hpp"

namespace yieldsim {

// Local view one agent has of the episode. Dimension is fixed regardless of
// how many agents play.
struct AgentObservation {
    double time_frac = 0.0;              // t / T
    double remaining_demand_frac = 1.0;  // (d_j - delivered_j)/d_j, clipped to [0, 1]
    double delivery_rate = 0.0;          // last step's deliveries / (d_j / T), clipped
    double alpha_frac = 0.0;             // alpha_j / p_j
    double last_reward_norm = 0.0;       // previous reward / running normalizer

    static constexpr int dim = 5;
    std::array<double, dim> as_array() const {
        return {time_frac, remaining_demand_frac, delivery_rate, alpha_frac, last_reward_norm};
    }
};

struct StepOutcome {
    std::vector<std::vector<double>> obs;  // per agent
    double reward = 0.0;                   // shared by every agent
    bool done = false;
};

// One agent/step interaction record (rewards are common across agents).
struct Transition {
    std::vector<double> obs;
    double action = 0.0;
    double reward = 0.0;
    std::vector<double> next_obs;
    bool done = false;
    int episode = 0;
    int step = 0;
};

// Episodic multi-agent environment: one scalar action per agent per step.
class Env {
public:
    virtual ~Env() = default;
    virtual int num_agents() const = 0;
    virtual int obs_dim() const = 0;
    virtual int horizon() const = 0;
    virtual double action_limit() const = 0;
    virtual std::vector<std::vector<double>> reset() = 0;
    virtual StepOutcome step(const std::vector<double>& actions) = 0;
    // Domain value of the finished episode (the yield for allocation runs).
    virtual double final_value() const = 0;
    // Evaluation rollouts must not leak statistics into training state.
    virtual void begin_eval() {}
    virtual void end_eval() {}
};

// Wraps one scenario as a Markov game: agent j multiplicatively adjusts
// alpha_j at each step boundary, impressions of the step stream through the
// allocator, and the common reward is the step's yield increment. Over an
// episode the rewards sum to finalize().yield minus sum_j (c_j d_j - p_j d_j).
class AllocationEnv : public Env {
public:
    AllocationEnv(const Scenario& scenario, std::vector<double> alpha_init,
                  double action_limit = 0.1);

    int num_agents() const override { return static_cast<int>(alpha_init_.size()); }
    int obs_dim() const override { return AgentObservation::dim; }
    int horizon() const override { return scenario_->horizon; }
    double action_limit() const override { return action_limit_; }
    std::vector<std::vector<double>> reset() override;
    StepOutcome step(const std::vector<double>& actions) override;
    double final_value() const override;
    void begin_eval() override { normalizer_frozen_ = true; }
    void end_eval() override { normalizer_frozen_ = false; }

    AgentObservation observe(int agent) const;
    const std::vector<double>& alpha() const { return alpha_; }
    // Constant linking episode return to yield.
    double episode_constant() const;
    double reward_normalizer() const { return reward_normalizer_; }
    const YieldReport& last_report() const;

private:
    std::vector<std::vector<double>> observations() const;

    const Scenario* scenario_;
    std::vector<std::size_t> offsets_;
    std::vector<double> alpha_init_;
    double action_limit_;

    std::vector<double> alpha_;
    Ledger ledger_;
    int t_ = 0;
    bool done_ = false;
    std::vector<long long> prev_delivered_;
    std::vector<long long> last_step_delivered_;
    double last_reward_ = 0.0;
    double reward_normalizer_ = 0.0;
    bool normalizer_frozen_ = false;
    YieldReport report_;
    bool have_report_ = false;
};

// Sum of the common per-step rewards.
double episode_return(const std::vector<double>& rewards);

}  // namespace yieldsim
