#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace yieldsim {

// Deterministic finite cooperative game on a complete tree. Each step every
// agent picks one of `actions_per_agent` moves; the joint move selects the
// child node and pays a fixed common reward. All episodes start at the root
// (state 0) and last exactly `horizon` steps. Joint moves encode the agents'
// choices base `actions_per_agent`, agent 0 in the least significant digit.
struct ToyGame {
    int num_agents = 2;
    int actions_per_agent = 2;
    int horizon = 2;
    std::vector<double> rewards;  // [state * joint_moves() + joint move]

    int joint_moves() const;              // actions_per_agent ^ num_agents
    std::size_t internal_states() const;  // nodes of depth < horizon
    std::size_t child(std::size_t state, int joint_move) const;
    int digit(int joint_move, int agent) const;

    // Independent uniform(0, 1) rewards; ties occur with probability zero.
    static ToyGame random(int agents, int actions, int steps, std::mt19937_64& rng);
};

// Highest total episode return among trajectories passing through each
// (state, joint move): the fixed point an idealized tabular max-regression
// table reaches once every trajectory has been seen. Exhausts all action
// sequences; throws budget_error when the enumeration would be too large.
std::vector<double> exact_shaped_rewards(const ToyGame& g);

// Optimal joint move per internal state by backward induction. Throws
// config_error when any state has a tied optimum, since everything downstream
// assumes a unique optimal move per state.
std::vector<int> optimal_joint_actions(const ToyGame& g);

// True when, at every internal state, every agent's greedy move under its own
// marginal of the shaped-reward table matches its digit of the optimal joint
// move — i.e. the decentralized greedy policies reassemble the optimal joint
// policy.
bool theorem2_check(const ToyGame& g);

}  // namespace yieldsim
