#include "yieldsim/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "yieldsim/errors.hpp"
#include "yieldsim/text_io.hpp"

namespace yieldsim {

namespace {

void check_config(const TrainerConfig& cfg) {
    if (cfg.episodes < 1) throw config_error("trainer: episodes must be >= 1");
    if (cfg.actor_lr <= 0 || cfg.critic_lr <= 0 || cfg.reward_model_lr <= 0)
        throw config_error("trainer: learning rates must be > 0");
    if (cfg.tau <= 0 || cfg.tau > 1) throw config_error("trainer: tau must be in (0, 1]");
    if (cfg.noise_sigma < 0) throw config_error("trainer: noise_sigma must be >= 0");
    if (cfg.batch_size < 1) throw config_error("trainer: batch_size must be >= 1");
    if (cfg.return_scale <= 0) throw config_error("trainer: return_scale must be > 0");
    if (cfg.eval_every < 1) throw config_error("trainer: eval_every must be >= 1");
    if (cfg.reward_model_decay < 0)
        throw config_error("trainer: reward_model_decay must be >= 0");
    if (cfg.bc_weight < 0) throw config_error("trainer: bc_weight must be >= 0");
}

double greedy_rollout(Env& env, const std::vector<Mlp>& actors) {
    env.begin_eval();
    auto obs = env.reset();
    const int m = env.num_agents();
    std::vector<double> actions(static_cast<std::size_t>(m));
    bool done = false;
    while (!done) {
        for (int j = 0; j < m; ++j)
            actions[static_cast<std::size_t>(j)] =
                actors[static_cast<std::size_t>(j)].forward(obs[static_cast<std::size_t>(j)])[0];
        auto out = env.step(actions);
        obs = std::move(out.obs);
        done = out.done;
    }
    const double value = env.final_value();
    env.end_eval();
    return value;
}

std::vector<double> joint_critic_input(const JointTransition& t) {
    std::vector<double> x;
    for (const auto& o : t.obs) x.insert(x.end(), o.begin(), o.end());
    x.insert(x.end(), t.actions.begin(), t.actions.end());
    return x;
}

struct AgentNets {
    Adam critic_opt;
    std::vector<double> actor_grad, critic_grad;
};

// The actor takes plain gradient steps for the same reason the shaped-reward
// model does: once the fitted value surface flattens, its action gradient is
// noise, and a normalized-step optimizer would turn that noise into steady
// policy drift. A raw step keeps the policy still when the critic is flat.
void sgd_step(std::vector<double>& params, const std::vector<double>& grad, double lr) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
}

}  // namespace

void shaped_reward_update(Mlp& model, const std::vector<std::vector<double>>& inputs,
                          const std::vector<double>& episode_returns, double lr,
                          double weight_decay, double target_cap) {
    if (inputs.size() != episode_returns.size())
        throw config_error("shaped_reward_update: inputs and returns must have equal size");
    if (inputs.empty()) return;
    std::vector<double> grad(model.params().size(), 0.0);
    const double scale = 1.0 / static_cast<double>(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        Mlp::Workspace ws;
        const double pred = model.forward(inputs[i], ws)[0];
        // Episodic max: never regress toward anything below the best return
        // already observed through this point, but also never above the best
        // return observed anywhere — generalization across neighbouring
        // inputs can only inflate predictions, never correct them, so the
        // cap is the one source of downward pressure.
        const double target = std::min(std::max(pred, episode_returns[i]), target_cap);
        model.backward(ws, {2.0 * (pred - target) * scale}, grad);
    }
    // Plain gradient step: the pull decays with the residual, so predictions
    // approach the observed max from below instead of ratcheting past it the
    // way a normalized-step optimizer would on a one-sided target.
    auto& params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i)
        params[i] -= lr * (grad[i] + weight_decay * params[i]);
}

namespace {

TrainResult train_common(Env& env, const TrainerConfig& cfg, double r_star, bool local_critic) {
    check_config(cfg);
    if (r_star <= 0) throw config_error("trainer: r_star must be > 0");

    const int m = env.num_agents();
    const int obs_dim = env.obs_dim();
    const int horizon = env.horizon();
    const double act_limit = env.action_limit();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    MlpSpec actor_spec{obs_dim, {64, 64, 64}, 1, true, act_limit};
    const int critic_in = local_critic ? obs_dim + 1 : m * (obs_dim + 1);
    MlpSpec critic_spec{critic_in, {64, 64, 64}, 1, false, 1.0};
    MlpSpec reward_spec{obs_dim + 1, {64, 64, 64}, 1, false, 1.0};

    TrainResult result;
    PolicySet& nets = result.policies;
    nets.method = local_critic ? "mapolo" : "maddpg";
    nets.action_limit = act_limit;
    std::vector<AgentNets> state(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        nets.actors.emplace_back(actor_spec, rng);
        nets.critics.emplace_back(critic_spec, rng);
        nets.actor_targets.push_back(nets.actors.back());
        nets.critic_targets.push_back(nets.critics.back());
        if (local_critic) nets.reward_models.emplace_back(reward_spec, rng);
        auto& st = state[static_cast<std::size_t>(j)];
        st.critic_opt = Adam(nets.critics.back().params().size());
        st.actor_grad.assign(nets.actors.back().params().size(), 0.0);
        st.critic_grad.assign(nets.critics.back().params().size(), 0.0);
    }

    ReplayBuffer replay(cfg.replay_capacity);
    result.curve.method = nets.method;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    double sigma = cfg.noise_sigma;
    double best_return = -std::numeric_limits<double>::infinity();
    for (int ep = 1; ep <= cfg.episodes; ++ep) {
        // --- rollout with exploration noise ---
        auto obs = env.reset();
        std::vector<JointTransition> trajectory;
        trajectory.reserve(static_cast<std::size_t>(horizon));
        double ep_return = 0.0;
        bool done = false;
        int t = 0;
        while (!done) {
            ++t;
            JointTransition tr;
            tr.obs = obs;
            tr.actions.resize(static_cast<std::size_t>(m));
            for (int j = 0; j < m; ++j) {
                double a = nets.actors[static_cast<std::size_t>(j)]
                               .forward(obs[static_cast<std::size_t>(j)])[0] +
                           sigma * gauss(rng);
                tr.actions[static_cast<std::size_t>(j)] = std::clamp(a, -act_limit, act_limit);
            }
            auto out = env.step(tr.actions);
            tr.reward = out.reward / cfg.return_scale;
            tr.next_obs = out.obs;
            tr.done = out.done;
            tr.episode = ep;
            tr.step = t;
            ep_return += tr.reward;
            obs = std::move(out.obs);
            done = out.done;
            trajectory.push_back(std::move(tr));
        }

        for (auto& tr : trajectory) tr.episode_return = ep_return;
        best_return = std::max(best_return, ep_return);

        // --- episodic-max shaped reward fit along the trajectory ---
        if (local_critic) {
            const std::vector<double> returns(trajectory.size(), ep_return);
            for (int j = 0; j < m; ++j) {
                std::vector<std::vector<double>> inputs;
                inputs.reserve(trajectory.size());
                for (const auto& tr : trajectory) {
                    auto x = tr.obs[static_cast<std::size_t>(j)];
                    x.push_back(tr.actions[static_cast<std::size_t>(j)]);
                    inputs.push_back(std::move(x));
                }
                shaped_reward_update(nets.reward_models[static_cast<std::size_t>(j)], inputs,
                                     returns, cfg.reward_model_lr, cfg.reward_model_decay,
                                     best_return);
            }
        }
        for (auto& tr : trajectory) replay.push(std::move(tr));

        // --- minibatch updates ---
        const int rounds = cfg.updates_per_episode > 0 ? cfg.updates_per_episode : horizon;
        if (replay.ready(cfg.batch_size)) {
            for (int round = 0; round < rounds; ++round) {
                const auto batch = replay.sample(rng, cfg.batch_size);
                const double inv_b = 1.0 / static_cast<double>(batch.size());

                // Bootstrap pieces shared by all centralized critics.
                std::vector<std::vector<double>> next_joint;
                if (!local_critic) {
                    next_joint.reserve(batch.size());
                    for (const auto* tr : batch) {
                        std::vector<double> x;
                        for (const auto& o : tr->next_obs) x.insert(x.end(), o.begin(), o.end());
                        for (int j = 0; j < m; ++j)
                            x.push_back(nets.actor_targets[static_cast<std::size_t>(j)].forward(
                                tr->next_obs[static_cast<std::size_t>(j)])[0]);
                        next_joint.push_back(std::move(x));
                    }
                }

                for (int j = 0; j < m; ++j) {
                    auto& st = state[static_cast<std::size_t>(j)];
                    auto& critic = nets.critics[static_cast<std::size_t>(j)];
                    auto& actor = nets.actors[static_cast<std::size_t>(j)];

                    // Keep fitting the shaped-reward model on replayed
                    // trajectory points; each sample ratchets toward its own
                    // episode's return.
                    if (local_critic) {
                        std::vector<std::vector<double>> rm_inputs;
                        std::vector<double> rm_returns;
                        rm_inputs.reserve(batch.size());
                        rm_returns.reserve(batch.size());
                        for (const auto* tr : batch) {
                            auto x = tr->obs[static_cast<std::size_t>(j)];
                            x.push_back(tr->actions[static_cast<std::size_t>(j)]);
                            rm_inputs.push_back(std::move(x));
                            rm_returns.push_back(tr->episode_return);
                        }
                        shaped_reward_update(nets.reward_models[static_cast<std::size_t>(j)],
                                             rm_inputs, rm_returns, cfg.reward_model_lr,
                                             cfg.reward_model_decay, best_return);
                    }

                    // Critic regression.
                    std::fill(st.critic_grad.begin(), st.critic_grad.end(), 0.0);
                    double loss = 0.0;
                    for (std::size_t b = 0; b < batch.size(); ++b) {
                        const auto* tr = batch[b];
                        std::vector<double> x;
                        double target = 0.0;
                        if (local_critic) {
                            x = tr->obs[static_cast<std::size_t>(j)];
                            x.push_back(tr->actions[static_cast<std::size_t>(j)]);
                            // The exact shaped reward of a visited pair: with
                            // continuous actions each (o, a) belongs to one
                            // episode, so the max return through it is that
                            // episode's own return.
                            target = tr->episode_return;
                        } else {
                            x = joint_critic_input(*tr);
                            target = tr->reward;
                            if (!tr->done)
                                target += nets.critic_targets[static_cast<std::size_t>(j)].forward(
                                    next_joint[b])[0];
                        }
                        Mlp::Workspace ws;
                        const double pred = critic.forward(x, ws)[0];
                        const double err = pred - target;
                        loss += err * err * inv_b;
                        critic.backward(ws, {2.0 * err * inv_b}, st.critic_grad);
                    }
                    if (!std::isfinite(loss))
                        throw state_error("trainer: critic loss diverged (agent " +
                                          std::to_string(j + 1) + ")");
                    st.critic_opt.step(critic.params(), st.critic_grad, cfg.critic_lr);

                    // Deterministic policy gradient through the critic.
                    std::fill(st.actor_grad.begin(), st.actor_grad.end(), 0.0);
                    for (std::size_t b = 0; b < batch.size(); ++b) {
                        const auto* tr = batch[b];
                        const auto& own_obs = tr->obs[static_cast<std::size_t>(j)];
                        Mlp::Workspace actor_ws;
                        const double a = actor.forward(own_obs, actor_ws)[0];

                        std::vector<double> x;
                        std::size_t slot = 0;  // index of a_j inside the critic input
                        if (local_critic) {
                            x = own_obs;
                            x.push_back(a);
                            slot = x.size() - 1;
                        } else {
                            for (const auto& o : tr->obs) x.insert(x.end(), o.begin(), o.end());
                            slot = x.size() + static_cast<std::size_t>(j);
                            x.insert(x.end(), tr->actions.begin(), tr->actions.end());
                            x[slot] = a;
                        }
                        Mlp::Workspace critic_ws;
                        critic.forward(x, critic_ws);
                        std::vector<double> critic_grad_scratch(critic.params().size(), 0.0);
                        const auto dx = critic.backward(critic_ws, {-inv_b}, critic_grad_scratch);
                        // Ascend the critic, anchored to the replayed action so
                        // the policy stays where the value fit has data.
                        const double anchor =
                            2.0 * cfg.bc_weight *
                            (a - tr->actions[static_cast<std::size_t>(j)]) * inv_b;
                        actor.backward(actor_ws, {dx[slot] + anchor}, st.actor_grad);
                    }
                    sgd_step(actor.params(), st.actor_grad, cfg.actor_lr);

                    soft_update(nets.critic_targets[static_cast<std::size_t>(j)], critic, cfg.tau);
                    soft_update(nets.actor_targets[static_cast<std::size_t>(j)], actor, cfg.tau);
                }
            }
        }

        if (ep % cfg.eval_every == 0 || ep == cfg.episodes) {
            const double value = greedy_rollout(env, nets.actors);
            result.curve.points.push_back({ep, elapsed(), value / r_star});
        }
        sigma *= cfg.noise_decay;
    }
    return result;
}

}  // namespace

TrainResult train_mapolo(Env& env, const TrainerConfig& cfg, double r_star) {
    return train_common(env, cfg, r_star, true);
}

TrainResult train_maddpg(Env& env, const TrainerConfig& cfg, double r_star) {
    return train_common(env, cfg, r_star, false);
}

double evaluate_policy(Env& env, const PolicySet& policies, double r_star) {
    if (r_star <= 0) throw config_error("evaluate: r_star must be > 0");
    if (static_cast<int>(policies.actors.size()) != env.num_agents())
        throw config_error("evaluate: one actor per agent required");
    return greedy_rollout(env, policies.actors) / r_star;
}

namespace {

void save_group(std::ostream& os, const std::string& name, const std::vector<Mlp>& nets) {
    os << "group " << name << ' ' << nets.size() << '\n';
    for (const auto& net : nets) {
        const auto& sp = net.spec();
        os << "net " << sp.input << ' ' << sp.hidden.size();
        for (int h : sp.hidden) os << ' ' << h;
        os << ' ' << sp.output << ' ' << (sp.bounded_output ? 1 : 0) << ' '
           << format_double(sp.output_scale) << ' ' << net.params().size() << '\n';
        const auto& p = net.params();
        for (std::size_t k = 0; k < p.size(); ++k)
            os << format_double(p[k]) << ((k + 1) % 8 == 0 || k + 1 == p.size() ? '\n' : ' ');
    }
}

std::vector<Mlp> load_group(std::istream& is, const std::string& name) {
    std::string tok;
    std::size_t count = 0;
    if (!(is >> tok) || tok != "group") throw parse_error("checkpoint: expected group record");
    if (!(is >> tok) || tok != name)
        throw parse_error("checkpoint: expected group '" + name + "', got '" + tok + "'");
    if (!(is >> count)) throw parse_error("checkpoint: missing group size");
    std::vector<Mlp> nets;
    nets.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (!(is >> tok) || tok != "net") throw parse_error("checkpoint: expected net record");
        MlpSpec sp;
        std::size_t hidden = 0, nparams = 0;
        int bounded = 0;
        if (!(is >> sp.input >> hidden)) throw parse_error("checkpoint: bad net header");
        sp.hidden.resize(hidden);
        for (auto& h : sp.hidden)
            if (!(is >> h)) throw parse_error("checkpoint: bad hidden sizes");
        std::string scale;
        if (!(is >> sp.output >> bounded >> scale >> nparams))
            throw parse_error("checkpoint: bad net header");
        sp.bounded_output = bounded != 0;
        sp.output_scale = parse_double(scale, "checkpoint net scale");
        Mlp net(sp);
        if (net.params().size() != nparams)
            throw parse_error("checkpoint: parameter count mismatch");
        for (auto& p : net.params()) {
            if (!(is >> tok)) throw parse_error("checkpoint: truncated parameters");
            p = parse_double(tok, "checkpoint parameter");
        }
        nets.push_back(std::move(net));
    }
    return nets;
}

}  // namespace

void save_policies(const PolicySet& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    os << "policyset v1\n";
    os << "method " << p.method << '\n';
    os << "action_limit " << format_double(p.action_limit) << '\n';
    save_group(os, "actors", p.actors);
    save_group(os, "actor_targets", p.actor_targets);
    save_group(os, "critics", p.critics);
    save_group(os, "critic_targets", p.critic_targets);
    save_group(os, "reward_models", p.reward_models);
    if (!os) throw io_error("write to '" + path + "' failed");
}

PolicySet load_policies(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "'");
    std::string tok, version;
    if (!(is >> tok >> version) || tok != "policyset")
        throw parse_error("checkpoint: missing policyset header");
    if (version != "v1") throw parse_error("checkpoint: unsupported version '" + version + "'");
    PolicySet p;
    std::string scale;
    if (!(is >> tok >> p.method) || tok != "method")
        throw parse_error("checkpoint: missing method");
    if (!(is >> tok >> scale) || tok != "action_limit")
        throw parse_error("checkpoint: missing action_limit");
    p.action_limit = parse_double(scale, "checkpoint action_limit");
    p.actors = load_group(is, "actors");
    p.actor_targets = load_group(is, "actor_targets");
    p.critics = load_group(is, "critics");
    p.critic_targets = load_group(is, "critic_targets");
    p.reward_models = load_group(is, "reward_models");
    return p;
}

}  // namespace yieldsim
