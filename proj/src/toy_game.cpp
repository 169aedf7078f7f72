#include "yieldsim/toy_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "yieldsim/errors.hpp"

namespace yieldsim {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kEnumerationBudget = 1e8;  // trajectory count x steps

// Validates the shape before anything sized by it is computed or allocated.
void check_dimensions(int agents, int actions, int steps) {
    if (agents < 1) throw config_error("toy game: num_agents must be >= 1");
    if (actions < 1) throw config_error("toy game: actions_per_agent must be >= 1");
    if (steps < 1) throw config_error("toy game: horizon must be >= 1");
    const double joint = std::pow(static_cast<double>(actions), agents);
    if (joint > 1e6) throw config_error("toy game: joint move space too large");
    const double leaves = std::pow(joint, steps);
    if (leaves * steps > kEnumerationBudget)
        throw budget_error("toy game: trajectory enumeration exceeds budget");
}

void check_game(const ToyGame& g) {
    check_dimensions(g.num_agents, g.actions_per_agent, g.horizon);
    const std::size_t want = g.internal_states() * static_cast<std::size_t>(g.joint_moves());
    if (g.rewards.size() != want)
        throw config_error("toy game: rewards has " + std::to_string(g.rewards.size()) +
                           " entries, expected " + std::to_string(want));
    for (double r : g.rewards)
        if (!std::isfinite(r)) throw config_error("toy game: rewards must be finite");
}

}  // namespace

int ToyGame::joint_moves() const {
    long long j = 1;
    for (int k = 0; k < num_agents; ++k) j *= actions_per_agent;
    return static_cast<int>(j);
}

std::size_t ToyGame::internal_states() const {
    std::size_t total = 0, level = 1;
    for (int t = 0; t < horizon; ++t) {
        total += level;
        level *= static_cast<std::size_t>(joint_moves());
    }
    return total;
}

std::size_t ToyGame::child(std::size_t state, int joint_move) const {
    return state * static_cast<std::size_t>(joint_moves()) +
           static_cast<std::size_t>(joint_move) + 1;
}

int ToyGame::digit(int joint_move, int agent) const {
    int v = joint_move;
    for (int k = 0; k < agent; ++k) v /= actions_per_agent;
    return v % actions_per_agent;
}

ToyGame ToyGame::random(int agents, int actions, int steps, std::mt19937_64& rng) {
    check_dimensions(agents, actions, steps);
    ToyGame g;
    g.num_agents = agents;
    g.actions_per_agent = actions;
    g.horizon = steps;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    g.rewards.resize(g.internal_states() * static_cast<std::size_t>(g.joint_moves()));
    for (auto& r : g.rewards) r = u(rng);
    return g;
}

std::vector<double> exact_shaped_rewards(const ToyGame& g) {
    check_game(g);
    const int J = g.joint_moves();

    std::vector<double> table(g.rewards.size(), -std::numeric_limits<double>::infinity());
    std::vector<int> seq(static_cast<std::size_t>(g.horizon), 0);
    std::vector<std::size_t> path(static_cast<std::size_t>(g.horizon), 0);
    for (;;) {
        std::size_t s = 0;
        double total = 0.0;
        for (int t = 0; t < g.horizon; ++t) {
            path[static_cast<std::size_t>(t)] = s;
            total += g.rewards[s * static_cast<std::size_t>(J) +
                               static_cast<std::size_t>(seq[static_cast<std::size_t>(t)])];
            s = g.child(s, seq[static_cast<std::size_t>(t)]);
        }
        for (int t = 0; t < g.horizon; ++t) {
            auto& cell = table[path[static_cast<std::size_t>(t)] * static_cast<std::size_t>(J) +
                               static_cast<std::size_t>(seq[static_cast<std::size_t>(t)])];
            cell = std::max(cell, total);
        }
        int t = g.horizon - 1;  // odometer over action sequences
        while (t >= 0 && ++seq[static_cast<std::size_t>(t)] == J)
            seq[static_cast<std::size_t>(t--)] = 0;
        if (t < 0) break;
    }
    return table;
}

std::vector<int> optimal_joint_actions(const ToyGame& g) {
    check_game(g);
    const int J = g.joint_moves();
    const std::size_t internal = g.internal_states();
    const std::size_t leaves = internal * static_cast<std::size_t>(J) - internal + 1;

    std::vector<double> value(internal + leaves, 0.0);
    std::vector<int> best(internal, 0);
    for (std::size_t s = internal; s-- > 0;) {
        double best_q = -std::numeric_limits<double>::infinity();
        double runner_up = best_q;
        int best_a = 0;
        for (int a = 0; a < J; ++a) {
            const double q =
                g.rewards[s * static_cast<std::size_t>(J) + static_cast<std::size_t>(a)] +
                value[g.child(s, a)];
            if (q > best_q) {
                runner_up = best_q;
                best_q = q;
                best_a = a;
            } else if (q > runner_up) {
                runner_up = q;
            }
        }
        if (J > 1 && best_q - runner_up <= kTieTolerance)
            throw config_error("toy game: tied optimal joint move at state " + std::to_string(s));
        value[s] = best_q;
        best[s] = best_a;
    }
    return best;
}

bool theorem2_check(const ToyGame& g) {
    const auto optimal = optimal_joint_actions(g);
    const auto table = exact_shaped_rewards(g);
    const int J = g.joint_moves();
    const int A = g.actions_per_agent;

    std::vector<double> marginal(static_cast<std::size_t>(A));
    for (std::size_t s = 0; s < g.internal_states(); ++s) {
        for (int k = 0; k < g.num_agents; ++k) {
            std::fill(marginal.begin(), marginal.end(),
                      -std::numeric_limits<double>::infinity());
            for (int a = 0; a < J; ++a) {
                auto& cell = marginal[static_cast<std::size_t>(g.digit(a, k))];
                cell = std::max(cell,
                                table[s * static_cast<std::size_t>(J) + static_cast<std::size_t>(a)]);
            }
            int greedy = 0;
            for (int ak = 1; ak < A; ++ak)
                if (marginal[static_cast<std::size_t>(ak)] >
                    marginal[static_cast<std::size_t>(greedy)])
                    greedy = ak;
            int near_best = 0;  // an ambiguous greedy move cannot match a unique optimum
            for (int ak = 0; ak < A; ++ak)
                if (marginal[static_cast<std::size_t>(ak)] >=
                    marginal[static_cast<std::size_t>(greedy)] - kTieTolerance)
                    ++near_best;
            if (near_best != 1) return false;
            if (greedy != g.digit(optimal[s], k)) return false;
        }
    }
    return true;
}

}  // namespace yieldsim
