#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "yieldsim/marl_env.hpp"
#include "yieldsim/mlp.hpp"
#include "yieldsim/replay.hpp"
#include "yieldsim/report.hpp"

namespace yieldsim {

struct TrainerConfig {
    int episodes = 500;
    double actor_lr = 1e-3;
    double critic_lr = 1e-4;
    double reward_model_lr = 1e-3;
    double tau = 0.02;
    double noise_sigma = 0.05;
    double noise_decay = 1.0;  // per-episode multiplier; 1 keeps the noise fixed
    int batch_size = 32;
    std::size_t replay_capacity = 100000;
    int updates_per_episode = 0;  // 0 means one update round per env step
    int eval_every = 10;
    std::uint64_t seed = 1;
    // Returns and rewards are divided by this before they reach any network;
    // positive scaling preserves every argmax. Usually the training oracle
    // yield.
    double return_scale = 1.0;
    // L2 decay on the shaped-reward model. The episodic-max target only ever
    // pulls predictions up, so regions the data stops supporting would stay
    // optimistic forever; a small decay lets them relax back down.
    double reward_model_decay = 0.0;
    // Pull of each actor's output toward the replayed action it is evaluated
    // at. Keeps the policy inside the region the value estimates were fitted
    // on instead of chasing extrapolated gradients past the data.
    double bc_weight = 0.0;
};

// All trained parameters of one method. Local-observation training keeps one
// critic per agent over (own obs, own action); the centralized variant's
// critics take every agent's observation and action. reward_models is empty
// for the centralized baseline.
struct PolicySet {
    std::string method;
    double action_limit = 0.1;
    std::vector<Mlp> actors;
    std::vector<Mlp> actor_targets;
    std::vector<Mlp> critics;
    std::vector<Mlp> critic_targets;
    std::vector<Mlp> reward_models;
};

struct TrainResult {
    PolicySet policies;
    MethodCurve curve;  // evaluation points: episode, elapsed seconds, R/R*
};

// One plain-gradient regression step of the episodic-max shaped reward: each
// (o, a) input is pulled toward max(current prediction, its episode's
// return), so predictions only move up toward the best observed return.
// weight_decay shrinks parameters toward zero alongside the data term.
// target_cap bounds every target: no state-action pair can be worth more
// than the best episode return seen anywhere, so predictions above the cap
// are pulled back down to it.
void shaped_reward_update(Mlp& model, const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& episode_returns, double lr,
                          double weight_decay = 0.0,
                          double target_cap = std::numeric_limits<double>::infinity());

// Local-observation actor-critic with the shaped reward as the critic's
// immediate regression target.
TrainResult train_mapolo(Env& env, const TrainerConfig& cfg, double r_star);

// Centralized-critic baseline trained on the raw per-step reward with
// bootstrapped targets.
TrainResult train_maddpg(Env& env, const TrainerConfig& cfg, double r_star);

// One noise-free rollout of the greedy policies; returns yield / r_star.
double evaluate_policy(Env& env, const PolicySet& policies, double r_star);

// Versioned structured-text checkpoint; round-trips parameters exactly.
void save_policies(const PolicySet& p, const std::string& path);
PolicySet load_policies(const std::string& path);

}  // namespace yieldsim
