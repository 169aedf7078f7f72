#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "yieldsim/allocator.hpp"
#include "yieldsim/baselines.hpp"
#include "yieldsim/errors.hpp"
#include "yieldsim/learner.hpp"
#include "yieldsim/marl_env.hpp"
#include "yieldsim/oracle.hpp"
#include "yieldsim/report.hpp"
#include "yieldsim/scenario.hpp"
#include "yieldsim/text_io.hpp"

namespace fs = std::filesystem;
using namespace yieldsim;

namespace {

// Everything a config file can set. Flags override these after the file is
// read, so a run is fully described by (config, flags, seed).
struct FileConfig {
    GeneratorSpec gen;
    TrainerConfig trainer;
    DriftSpec drift;
    double risk_factor = 0.8;
    PidGains pid;
};

std::vector<double> parse_double_list(const std::string& value, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_double(item, key));
    }
    return out;
}

void apply_key(FileConfig& c, const std::string& key, const std::string& value) {
    auto d = [&] { return parse_double(value, key); };
    auto i = [&] { return parse_int(value, key); };

    if (key == "num_contracts") c.gen.num_contracts = static_cast<int>(i());
    else if (key == "num_impressions") c.gen.num_impressions = i();
    else if (key == "horizon") c.gen.horizon = static_cast<int>(i());
    else if (key == "bid_log_mean") c.gen.bid_log_mean = d();
    else if (key == "bid_log_sigma") c.gen.bid_log_sigma = d();
    else if (key == "bidders_k") c.gen.bidders_k = static_cast<int>(i());
    else if (key == "demand_fractions") c.gen.demand_fractions = parse_double_list(value, key);
    else if (key == "total_demand_fraction") c.gen.total_demand_fraction = d();
    else if (key == "price_min") c.gen.price_min = d();
    else if (key == "price_max") c.gen.price_max = d();
    else if (key == "penalty_min") c.gen.penalty_min = d();
    else if (key == "penalty_max") c.gen.penalty_max = d();
    else if (key == "lambda_min") c.gen.lambda_min = d();
    else if (key == "lambda_max") c.gen.lambda_max = d();
    else if (key == "alpha_init_frac") c.gen.alpha_init_frac = d();
    else if (key == "quality_shape_min") c.gen.quality_shape_min = d();
    else if (key == "quality_shape_max") c.gen.quality_shape_max = d();
    else if (key == "arrival_weights") c.gen.arrival_weights = parse_double_list(value, key);
    else if (key == "episodes") c.trainer.episodes = static_cast<int>(i());
    else if (key == "actor_lr") c.trainer.actor_lr = d();
    else if (key == "critic_lr") c.trainer.critic_lr = d();
    else if (key == "reward_model_lr") c.trainer.reward_model_lr = d();
    else if (key == "tau") c.trainer.tau = d();
    else if (key == "noise_sigma") c.trainer.noise_sigma = d();
    else if (key == "noise_decay") c.trainer.noise_decay = d();
    else if (key == "batch_size") c.trainer.batch_size = static_cast<int>(i());
    else if (key == "replay_capacity") c.trainer.replay_capacity = static_cast<std::size_t>(i());
    else if (key == "updates_per_episode") c.trainer.updates_per_episode = static_cast<int>(i());
    else if (key == "eval_every") c.trainer.eval_every = static_cast<int>(i());
    else if (key == "seed") c.trainer.seed = static_cast<std::uint64_t>(i());
    else if (key == "return_scale") c.trainer.return_scale = d();
    else if (key == "volume_factor") c.drift.volume_factor = d();
    else if (key == "price_factor") c.drift.price_factor = d();
    else if (key == "quality_noise") c.drift.quality_noise = d();
    else if (key == "risk_factor") c.risk_factor = d();
    else if (key == "pid_kp") c.pid.kp = d();
    else if (key == "pid_ki") c.pid.ki = d();
    else if (key == "pid_kd") c.pid.kd = d();
    else if (key == "setpoint_curve") c.pid.setpoint_curve = parse_double_list(value, key);
    else throw config_error("config: unknown key '" + key + "'");
}

FileConfig read_config(const std::string& path) {
    FileConfig c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parse_error("config " + path + ":" + std::to_string(lineno) +
                              ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_key(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory '" + dir.string() + "'");
    return dir;
}

// ---- the solved-oracle file: alpha*, R*, and the certificate numbers ----

void save_optimal(const DualSolution& sol, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    os << "optimal v1\n";
    os << "alpha";
    for (double a : sol.alpha_star) os << ' ' << format_double(a);
    os << '\n';
    os << "r_star " << format_double(sol.dual_objective) << '\n';
    os << "primal_yield " << format_double(sol.primal_yield) << '\n';
    os << "gap " << format_double(sol.gap) << '\n';
    os << "iterations " << sol.iterations << '\n';
    os << "converged " << (sol.converged ? 1 : 0) << '\n';
    if (!os) throw io_error("write to '" + path + "' failed");
}

struct OptimalFile {
    std::vector<double> alpha;
    double r_star = 0.0;
};

OptimalFile load_optimal(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "'");
    std::string tok;
    if (!(is >> tok) || tok != "optimal") throw parse_error(path + ": not an optimal file");
    if (!(is >> tok) || tok != "v1") throw parse_error(path + ": unsupported version");
    OptimalFile out;
    if (!(is >> tok) || tok != "alpha") throw parse_error(path + ": expected alpha record");
    std::string line;
    std::getline(is, line);
    std::stringstream ss(line);
    while (ss >> tok) out.alpha.push_back(parse_double(tok, "alpha"));
    bool have_rstar = false;
    while (is >> tok) {
        std::string value;
        if (!(is >> value)) throw parse_error(path + ": missing value for '" + tok + "'");
        if (tok == "r_star") {
            out.r_star = parse_double(value, "r_star");
            have_rstar = true;
        }
    }
    if (out.alpha.empty() || !have_rstar) throw parse_error(path + ": incomplete optimal file");
    return out;
}

// Row label for summary tables: keep the parent directory so five runs that
// all produce "test.scn" stay distinguishable.
std::string scenario_label(const std::string& input) {
    const fs::path p(input);
    const std::string stem = p.stem().string();
    const std::string parent = p.parent_path().filename().string();
    return parent.empty() ? stem : parent + "/" + stem;
}

std::vector<double> starting_alpha(const Scenario& s, const std::string& optimal_path) {
    if (!optimal_path.empty()) {
        auto opt = load_optimal(optimal_path);
        if (opt.alpha.size() != static_cast<std::size_t>(s.num_contracts()))
            throw config_error("optimal file has " + std::to_string(opt.alpha.size()) +
                               " shifts for " + std::to_string(s.num_contracts()) + " contracts");
        return opt.alpha;
    }
    std::vector<double> alpha;
    alpha.reserve(s.contracts.size());
    for (const auto& c : s.contracts) alpha.push_back(c.alpha_init);
    return alpha;
}

void print_report(const YieldReport& r) {
    std::cout << "r_gc " << format_double(r.r_gc) << "\nr_rtb " << format_double(r.r_rtb)
              << "\nq_gc " << format_double(r.q_gc) << "\nyield " << format_double(r.yield)
              << '\n';
    if (r.r_star)
        std::cout << "r_star " << format_double(*r.r_star) << "\nr_over_rstar "
                  << format_double(r.r_over_rstar()) << '\n';
}

// ---- subcommand bodies (throwing; main maps exceptions to exit codes) ----

int cmd_generate(const FileConfig& cfg, std::uint64_t seed, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario s = generate_scenario(cfg.gen, seed);
    const fs::path path = dir / "train.scn";
    save_scenario(s, path.string());
    std::cout << "wrote " << path.string() << " (m=" << s.num_contracts()
              << " n=" << s.num_impressions() << " T=" << s.horizon << ")\n";
    return 0;
}

int cmd_drift(const FileConfig& cfg, const std::string& input, std::uint64_t seed,
              const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario train = load_scenario(input);
    const Scenario test = apply_drift(train, cfg.drift, seed);
    const fs::path path = dir / "test.scn";
    save_scenario(test, path.string());
    std::cout << "wrote " << path.string() << " (n " << train.num_impressions() << " -> "
              << test.num_impressions() << ", price x" << format_double(cfg.drift.price_factor)
              << ")\n";
    return 0;
}

int cmd_solve(const std::string& input, double tol, int max_iters, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario s = load_scenario(input);
    const DualSolution sol = solve_dual(s, tol, max_iters);
    std::cout << "alpha*";
    for (double a : sol.alpha_star) std::cout << ' ' << format_double(a);
    std::cout << "\nr_star " << format_double(sol.dual_objective) << "\ngap "
              << format_double(sol.gap) << "\niterations " << sol.iterations << "\nconverged "
              << (sol.converged ? "yes" : "no") << '\n';
    const fs::path path = dir / "optimal.txt";
    save_optimal(sol, path.string());
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_baseline(const FileConfig& cfg, const std::string& input, const std::string& method,
                 const std::string& optimal_path, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario s = load_scenario(input);
    const std::vector<double> alpha = starting_alpha(s, optimal_path);

    YieldReport report;
    if (method == "fixed") {
        report = run_fixed_alpha(s, alpha);
    } else if (method == "cf") {
        report = run_contract_first(s, alpha, cfg.risk_factor);
    } else if (method == "pid") {
        PidResult res = run_pid(s, cfg.pid);
        report = std::move(res.report);
        const fs::path traj = dir / "pid_alpha.csv";
        std::ofstream os(traj);
        if (!os) throw io_error("cannot open '" + traj.string() + "' for writing");
        os << "step,contract,alpha\n";
        for (std::size_t t = 0; t < res.alpha_trajectory.size(); ++t)
            for (std::size_t j = 0; j < res.alpha_trajectory[t].size(); ++j)
                os << (t + 1) << ',' << (j + 1) << ','
                   << format_double(res.alpha_trajectory[t][j]) << '\n';
        std::cout << "wrote " << traj.string() << '\n';
    } else {
        throw config_error("unknown baseline method '" + method +
                           "' (expected fixed, cf, or pid)");
    }
    if (!optimal_path.empty()) report.r_star = load_optimal(optimal_path).r_star;

    LabeledReport labeled{method, scenario_label(input), std::move(report)};
    const fs::path path = dir / ("result_" + method + ".txt");
    save_result(labeled, path.string());
    print_report(labeled.report);
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_train(FileConfig cfg, const std::string& input, const std::string& method,
              const std::string& optimal_path, double tol, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario s = load_scenario(input);

    double r_star = 0.0;
    if (!optimal_path.empty()) {
        r_star = load_optimal(optimal_path).r_star;
    } else {
        const DualSolution sol = solve_dual(s, tol);
        r_star = sol.dual_objective;
        std::cout << "solved oracle inline: r_star " << format_double(r_star) << " gap "
                  << format_double(sol.gap) << '\n';
    }

    std::vector<double> alpha;
    bool any_nonzero = false;
    for (const auto& c : s.contracts) {
        alpha.push_back(c.alpha_init);
        any_nonzero = any_nonzero || c.alpha_init > 0.0;
    }
    if (!any_nonzero)
        std::cout << "note: every starting bid shift is zero; the multiplicative action "
                     "rule cannot move a zero shift, so agents will not steer. Generate "
                     "with alpha_init_frac > 0.\n";
    AllocationEnv env(s, alpha);
    if (cfg.trainer.return_scale == 1.0) cfg.trainer.return_scale = r_star;

    TrainResult res;
    if (method == "mapolo") res = train_mapolo(env, cfg.trainer, r_star);
    else if (method == "maddpg") res = train_maddpg(env, cfg.trainer, r_star);
    else throw config_error("unknown training method '" + method + "'");

    const fs::path policy_path = dir / ("policies_" + method + ".txt");
    save_policies(res.policies, policy_path.string());
    const fs::path curve_path = dir / ("curve_" + method + ".csv");
    emit_convergence_csv({res.curve}, curve_path.string());

    YieldReport final_report = env.last_report();
    final_report.r_star = r_star;
    LabeledReport labeled{method, scenario_label(input), std::move(final_report)};
    save_result(labeled, (dir / ("result_" + method + ".txt")).string());

    std::cout << "final r_over_rstar " << format_double(res.curve.points.back().r_over_rstar)
              << '\n';
    std::cout << "wrote " << policy_path.string() << ' ' << curve_path.string() << '\n';
    return 0;
}

int cmd_evaluate(const std::string& input, const std::string& policy_path,
                 const std::string& optimal_path, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    const Scenario s = load_scenario(input);
    if (optimal_path.empty()) throw config_error("evaluate requires --optimal");
    const OptimalFile opt = load_optimal(optimal_path);
    const PolicySet policies = load_policies(policy_path);

    std::vector<double> alpha;
    for (const auto& c : s.contracts) alpha.push_back(c.alpha_init);
    AllocationEnv env(s, alpha, policies.action_limit);
    const double ratio = evaluate_policy(env, policies, opt.r_star);

    YieldReport report = env.last_report();
    report.r_star = opt.r_star;
    LabeledReport labeled{policies.method, scenario_label(input), std::move(report)};
    const fs::path path = dir / ("result_" + policies.method + "_eval.txt");
    save_result(labeled, path.string());

    std::cout << "r_over_rstar " << format_double(ratio) << '\n';
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    const fs::path dir = ensure_out_dir(out);
    std::vector<LabeledReport> reports;
    reports.reserve(inputs.size());
    for (const auto& path : inputs) reports.push_back(load_result(path));
    const SummaryTable table = summarize(reports);
    const std::string rendered = render_summary(table);
    std::cout << rendered;
    const fs::path path = dir / "summary.txt";
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path.string() + "' for writing");
    os << rendered;
    std::cout << "wrote " << path.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ad-yield simulator: scenarios, LP oracle, baselines, and MARL trainers"};
    app.require_subcommand(1);

    std::string config_path, out_dir, method = "fixed", optimal_path, input, policy_path;
    std::uint64_t seed = 1;
    double tol = 1e-3;
    int max_iters = 5000, episodes = 0;
    long long flag_n = 0;
    int flag_m = 0, flag_T = 0;
    double volume_factor = 0.0, price_factor = 0.0, quality_noise = -1.0;
    std::vector<std::string> report_inputs;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--out", out_dir, "output directory (created if missing)");
    };

    CLI::App* generate = app.add_subcommand("generate", "synthesize a training scenario");
    add_common(generate);
    generate->add_option("--seed", seed, "generator seed");
    generate->add_option("--m", flag_m, "number of contracts");
    generate->add_option("--n", flag_n, "number of impressions");
    generate->add_option("--T", flag_T, "steps in the day");

    CLI::App* drift = app.add_subcommand("drift", "derive a drifted test scenario");
    add_common(drift);
    drift->add_option("scenario", input, "training scenario file")->required();
    drift->add_option("--seed", seed, "resampling seed");
    drift->add_option("--volume-factor", volume_factor, "test/train impression volume ratio");
    drift->add_option("--price-factor", price_factor, "multiplier on RTB bids");
    drift->add_option("--quality-noise", quality_noise, "stddev of quality perturbation");

    CLI::App* solve = app.add_subcommand("solve-optimal", "solve the dual oracle");
    add_common(solve);
    solve->add_option("scenario", input, "scenario file")->required();
    solve->add_option("--tol", tol, "relative duality-gap tolerance");
    solve->add_option("--max-iters", max_iters, "subgradient iteration cap");

    CLI::App* baseline = app.add_subcommand("run-baseline", "run a static or pacing controller");
    add_common(baseline);
    baseline->add_option("scenario", input, "scenario file")->required();
    baseline->add_option("--method", method, "fixed | cf | pid");
    baseline->add_option("--optimal", optimal_path, "optimal file supplying alpha* and R*");

    CLI::App* train = app.add_subcommand("train", "train a policy set on a scenario");
    add_common(train);
    train->add_option("scenario", input, "training scenario file")->required();
    train->add_option("--method", method, "mapolo | maddpg")->required();
    train->add_option("--episodes", episodes, "training episodes");
    train->add_option("--seed", seed, "training seed");
    train->add_option("--optimal", optimal_path, "optimal file supplying R*");
    train->add_option("--tol", tol, "oracle tolerance when solving inline");

    CLI::App* evaluate = app.add_subcommand("evaluate", "greedy rollout of saved policies");
    add_common(evaluate);
    evaluate->add_option("scenario", input, "scenario file")->required();
    evaluate->add_option("--policies", policy_path, "policy checkpoint")->required();
    evaluate->add_option("--optimal", optimal_path, "optimal file supplying R*")->required();

    CLI::App* report = app.add_subcommand("report", "summarize result files into a table");
    add_common(report);
    report->add_option("results", report_inputs, "result files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        FileConfig cfg = read_config(config_path);
        if (generate->parsed()) {
            if (generate->count("--seed") == 0) seed = cfg.trainer.seed;
            if (flag_m > 0) cfg.gen.num_contracts = flag_m;
            if (flag_n > 0) cfg.gen.num_impressions = flag_n;
            if (flag_T > 0) cfg.gen.horizon = flag_T;
            return cmd_generate(cfg, seed, out_dir);
        }
        if (drift->parsed()) {
            if (drift->count("--seed") == 0) seed = cfg.trainer.seed;
            if (drift->count("--volume-factor")) cfg.drift.volume_factor = volume_factor;
            if (drift->count("--price-factor")) cfg.drift.price_factor = price_factor;
            if (drift->count("--quality-noise")) cfg.drift.quality_noise = quality_noise;
            return cmd_drift(cfg, input, seed, out_dir);
        }
        if (solve->parsed()) return cmd_solve(input, tol, max_iters, out_dir);
        if (baseline->parsed()) return cmd_baseline(cfg, input, method, optimal_path, out_dir);
        if (train->parsed()) {
            if (train->count("--seed")) cfg.trainer.seed = seed;
            if (episodes > 0) cfg.trainer.episodes = episodes;
            return cmd_train(std::move(cfg), input, method, optimal_path, tol, out_dir);
        }
        if (evaluate->parsed()) return cmd_evaluate(input, policy_path, optimal_path, out_dir);
        if (report->parsed()) return cmd_report(report_inputs, out_dir);
        return 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 3;
    } catch (const io_error& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 4;
    } catch (const state_error& e) {
        std::cerr << "state error: " << e.what() << '\n';
        return 5;
    } catch (const budget_error& e) {
        std::cerr << "budget error: " << e.what() << '\n';
        return 6;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 7;
    }
}
