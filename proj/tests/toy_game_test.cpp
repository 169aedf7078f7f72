#include "yieldsim/toy_game.hpp"

#include <limits>
#include <random>

#include "doctest.h"
#include "yieldsim/errors.hpp"

using namespace yieldsim;

namespace {

// Two agents, two moves each, two steps: joint move = agent0 + 2 * agent1,
// states are heap-indexed (root 0, children 1..4). Every Q value is distinct,
// so the optimum is unique at all five internal states.
ToyGame engineered_game() {
    ToyGame g;
    g.num_agents = 2;
    g.actions_per_agent = 2;
    g.horizon = 2;
    g.rewards = {
        0.1, 0.9,  0.4,  0.2,   // state 0
        0.3, 0.1,  0.2,  0.05,  // state 1
        0.6, 0.2,  0.1,  0.3,   // state 2
        0.2, 0.25, 0.15, 0.1,   // state 3
        0.5, 0.45, 0.4,  0.35,  // state 4
    };
    return g;
}

}  // namespace

TEST_CASE("indexing helpers") {
    ToyGame g = engineered_game();
    CHECK(g.joint_moves() == 4);
    CHECK(g.internal_states() == 5);
    CHECK(g.child(0, 0) == 1);
    CHECK(g.child(0, 3) == 4);
    CHECK(g.child(2, 1) == 10);

    // Joint move 6 base 3 with two agents: digits (0, 2).
    ToyGame wide;
    wide.num_agents = 2;
    wide.actions_per_agent = 3;
    CHECK(wide.digit(6, 0) == 0);
    CHECK(wide.digit(6, 1) == 2);
    CHECK(wide.digit(5, 0) == 2);
    CHECK(wide.digit(5, 1) == 1);
}

TEST_CASE("backward induction finds the unique optimal joint policy") {
    const auto best = optimal_joint_actions(engineered_game());
    REQUIRE(best.size() == 5);
    CHECK(best[0] == 1);  // 0.9 + V(state 2) = 0.9 + 0.6 dominates
    CHECK(best[1] == 0);
    CHECK(best[2] == 0);
    CHECK(best[3] == 1);
    CHECK(best[4] == 0);
}

TEST_CASE("the exhaustive shaped-reward table holds max returns through each cell") {
    const auto table = exact_shaped_rewards(engineered_game());
    REQUIRE(table.size() == 20);
    // Root, move 1: best completion from state 2 is 0.6.
    CHECK(table[0 * 4 + 1] == doctest::Approx(1.5));
    // Root, move 0: prefix 0 + 0.1 + best from state 1 (0.3).
    CHECK(table[0 * 4 + 0] == doctest::Approx(0.4));
    // State 2 entries carry the 0.9 prefix of reaching state 2.
    CHECK(table[2 * 4 + 0] == doctest::Approx(1.5));
    CHECK(table[2 * 4 + 3] == doctest::Approx(1.2));
    // State 1 is reached with prefix 0.1 only.
    CHECK(table[1 * 4 + 0] == doctest::Approx(0.4));
    CHECK(table[1 * 4 + 3] == doctest::Approx(0.15));
    // Every (state, move) pair lies on some trajectory, so no cell is empty.
    for (double v : table) CHECK(v > -std::numeric_limits<double>::infinity());
}

TEST_CASE("decentralized greedy policies reassemble the optimal joint policy") {
    CHECK(theorem2_check(engineered_game()));
}

TEST_CASE("tied optimum violates the uniqueness hypothesis") {
    ToyGame g = engineered_game();
    g.rewards[1 * 4 + 0] = 0.2;  // state 1 now ties moves 0 and 2
    CHECK_THROWS_AS(optimal_joint_actions(g), config_error);
    CHECK_THROWS_AS(theorem2_check(g), config_error);

    // A tie at the root (0.9 + 0.6 vs 1.0 + 0.5 through state 4) as well.
    ToyGame r = engineered_game();
    r.rewards[0 * 4 + 3] = 1.0;
    CHECK_THROWS_AS(theorem2_check(r), config_error);
}

TEST_CASE("single agent, single step reduces to plain argmax") {
    ToyGame g;
    g.num_agents = 1;
    g.actions_per_agent = 3;
    g.horizon = 1;
    g.rewards = {0.2, 0.7, 0.5};

    const auto best = optimal_joint_actions(g);
    REQUIRE(best.size() == 1);
    CHECK(best[0] == 1);
    CHECK(exact_shaped_rewards(g) == g.rewards);
    CHECK(theorem2_check(g));

    // Degenerate single-move game: nothing to choose, trivially optimal.
    ToyGame one;
    one.num_agents = 1;
    one.actions_per_agent = 1;
    one.horizon = 2;
    one.rewards = {0.4, 0.6};
    CHECK(theorem2_check(one));
}

TEST_CASE("random games satisfy the theorem") {
    std::mt19937_64 rng(17);
    const int agents[] = {2, 3};
    const int actions[] = {2, 3};
    const int steps[] = {1, 2, 3};
    for (int a : agents)
        for (int k : actions)
            for (int t : steps)
                for (int rep = 0; rep < 3; ++rep) {
                    ToyGame g = ToyGame::random(a, k, t, rng);
                    CAPTURE(a);
                    CAPTURE(k);
                    CAPTURE(t);
                    CHECK(theorem2_check(g));
                }
}

TEST_CASE("shape validation and budget guards") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(ToyGame::random(0, 2, 2, rng), config_error);
    CHECK_THROWS_AS(ToyGame::random(2, 0, 2, rng), config_error);
    CHECK_THROWS_AS(ToyGame::random(2, 2, 0, rng), config_error);
    CHECK_THROWS_AS(ToyGame::random(30, 3, 2, rng), config_error);  // joint space blowup
    CHECK_THROWS_AS(ToyGame::random(1, 2, 30, rng), budget_error);  // 2^30 trajectories

    ToyGame g = engineered_game();
    g.rewards.pop_back();
    CHECK_THROWS_AS(theorem2_check(g), config_error);

    ToyGame nan_game = engineered_game();
    nan_game.rewards[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(theorem2_check(nan_game), config_error);
}
