#include "yieldsim/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "yieldsim/allocator.hpp"
#include "yieldsim/errors.hpp"

namespace yieldsim {

namespace {

// Fixed-cost part of the yield: prepaid contract revenue plus the exchange
// revenue forgone by any allocation choice is handled per-impression, so the
// only constant is sum_j c_j d_j.
double contract_revenue_base(const Scenario& s) {
    double base = 0.0;
    for (const auto& c : s.contracts) {
        base += c.unit_price * static_cast<double>(c.demand);
    }
    return base;
}

struct PassResult {
    double reduced_dual = 0.0;  // sum_i beta_i(alpha) - sum_j alpha_j d_j
    double yield = 0.0;         // full yield of the strict allocation at alpha
    std::vector<long long> wins;
};

// One fused sweep: evaluates the dual objective at alpha, the yield of the
// induced strict allocation, and the per-contract win counts whose excess
// over demand is the dual subgradient.
PassResult evaluate_alpha(const Scenario& s, const std::vector<double>& alpha) {
    const auto& contracts = s.contracts;
    PassResult r;
    r.wins.assign(contracts.size(), 0);

    double beta_sum = 0.0;
    double rtb = 0.0;
    double quality_value = 0.0;
    for (const auto& imp : s.impressions) {
        double best = 0.0;
        int best_j = -1;
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const double b = contract_bid(contracts[j], imp.quality[j], alpha[j]);
            if (best_j < 0 || b > best) {
                best = b;
                best_j = static_cast<int>(j);
            }
        }
        const double surplus = best - imp.rtb_second;
        if (best_j >= 0 && surplus > 0.0) {
            beta_sum += surplus;
            r.wins[static_cast<std::size_t>(best_j)] += 1;
            quality_value +=
                contracts[static_cast<std::size_t>(best_j)].quality_weight *
                imp.quality[static_cast<std::size_t>(best_j)];
        } else {
            rtb += imp.rtb_second;
        }
    }

    double alpha_demand = 0.0;
    double penalty = 0.0;
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        alpha_demand += alpha[j] * static_cast<double>(contracts[j].demand);
        const long long short_j = std::max<long long>(0, contracts[j].demand - r.wins[j]);
        penalty += contracts[j].penalty * static_cast<double>(short_j);
    }
    r.reduced_dual = beta_sum - alpha_demand;
    r.yield = contract_revenue_base(s) - penalty + rtb + quality_value;
    return r;
}

std::vector<double> betas_at(const Scenario& s, const std::vector<double>& alpha) {
    std::vector<double> beta(s.impressions.size(), 0.0);
    for (std::size_t i = 0; i < s.impressions.size(); ++i) {
        const auto& imp = s.impressions[i];
        double best = 0.0;
        for (std::size_t j = 0; j < s.contracts.size(); ++j) {
            best = std::max(best,
                            contract_bid(s.contracts[j], imp.quality[j], alpha[j]) -
                                imp.rtb_second);
        }
        beta[i] = best;
    }
    return beta;
}

}  // namespace

DualSolution solve_dual(const Scenario& s, double tol, int max_iters) {
    if (tol <= 0) throw config_error("solve_dual: tol must be > 0");
    if (max_iters < 1) throw config_error("solve_dual: max_iters must be >= 1");

    const auto& contracts = s.contracts;
    const std::size_t m = contracts.size();
    double exchange_total = 0.0;
    for (const auto& imp : s.impressions) exchange_total += imp.rtb_second;
    // Constant dropped in the dual reduction; re-added so bounds are in full
    // yield units.
    const double constant = exchange_total + contract_revenue_base(s);

    std::vector<double> alpha(m);
    for (std::size_t j = 0; j < m; ++j) alpha[j] = 0.5 * contracts[j].penalty;

    DualSolution out;
    out.alpha_star = alpha;
    double best_dual = std::numeric_limits<double>::infinity();
    double best_primal = -std::numeric_limits<double>::infinity();

    const double step_scale = 0.5;
    std::vector<double> avg_sum(m, 0.0);
    int window_len = 0, window_cap = 8;

    auto absorb = [&](const std::vector<double>& a, const PassResult& r) {
        best_dual = std::min(best_dual, constant + r.reduced_dual);
        if (r.yield > best_primal) {
            best_primal = r.yield;
            out.alpha_star = a;
        }
    };
    auto gap_closed = [&] {
        return best_dual - best_primal <= tol * std::fabs(best_primal) + 1e-12;
    };

    int k = 0;
    while (k < max_iters) {
        ++k;
        const PassResult r = evaluate_alpha(s, alpha);
        absorb(alpha, r);
        if (gap_closed()) break;

        const double step = step_scale / std::sqrt(static_cast<double>(k));
        for (std::size_t j = 0; j < m; ++j) {
            const double d = static_cast<double>(contracts[j].demand);
            double g = (static_cast<double>(r.wins[j]) - d) / std::max(1.0, d);
            g = std::clamp(g, -1.0, 1.0);
            alpha[j] = std::clamp(alpha[j] - step * contracts[j].penalty * g, 0.0,
                                  contracts[j].penalty);
            avg_sum[j] += alpha[j];
        }
        ++window_len;

        // Suffix averaging over doubling windows smooths the oscillation the
        // diminishing step leaves near the optimal face.
        if (window_len == window_cap) {
            std::vector<double> avg(m);
            for (std::size_t j = 0; j < m; ++j) avg[j] = avg_sum[j] / window_len;
            absorb(avg, evaluate_alpha(s, avg));
            std::fill(avg_sum.begin(), avg_sum.end(), 0.0);
            window_len = 0;
            window_cap *= 2;
            if (gap_closed()) break;
        }
    }

    out.iterations = k;
    out.converged = gap_closed();
    out.primal_yield = best_primal;
    out.dual_objective = best_dual;
    out.gap = best_dual - best_primal;
    out.beta_star = betas_at(s, out.alpha_star);
    return out;
}

double dual_objective_at(const Scenario& s, const std::vector<double>& alpha) {
    if (alpha.size() != s.contracts.size())
        throw config_error("dual_objective_at: one alpha per contract required");
    double exchange_total = 0.0;
    for (const auto& imp : s.impressions) exchange_total += imp.rtb_second;
    return exchange_total + contract_revenue_base(s) + evaluate_alpha(s, alpha).reduced_dual;
}

std::vector<long long> strict_win_counts(const Scenario& s, const std::vector<double>& alpha) {
    if (alpha.size() != s.contracts.size())
        throw config_error("strict_win_counts: one alpha per contract required");
    return evaluate_alpha(s, alpha).wins;
}

double assignment_yield(const Scenario& s, const std::vector<int>& assignment) {
    if (assignment.size() != s.impressions.size())
        throw config_error("assignment_yield: one entry per impression required");
    const auto& contracts = s.contracts;
    std::vector<long long> delivered(contracts.size(), 0);
    double rtb = 0.0, quality_value = 0.0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        const int pick = assignment[i];
        if (pick == 0) {
            rtb += s.impressions[i].rtb_second;
            continue;
        }
        const std::size_t j = static_cast<std::size_t>(pick - 1);
        if (j >= contracts.size())
            throw config_error("assignment_yield: unknown contract id " + std::to_string(pick));
        delivered[j] += 1;
        quality_value += contracts[j].quality_weight * s.impressions[i].quality[j];
    }
    double penalty = 0.0;
    for (std::size_t j = 0; j < contracts.size(); ++j) {
        penalty += contracts[j].penalty *
                   static_cast<double>(std::max<long long>(0, contracts[j].demand - delivered[j]));
    }
    return contract_revenue_base(s) - penalty + rtb + quality_value;
}

namespace {

struct BruteForceState {
    const Scenario* s = nullptr;
    std::vector<int> pick;            // current assignment under construction
    std::vector<long long> delivered;
    double value = 0.0;               // running rtb + quality value
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_pick;

    void search(std::size_t i) {
        const auto& contracts = s->contracts;
        if (i == s->impressions.size()) {
            double penalty = 0.0;
            for (std::size_t j = 0; j < contracts.size(); ++j) {
                penalty += contracts[j].penalty *
                           static_cast<double>(
                               std::max<long long>(0, contracts[j].demand - delivered[j]));
            }
            const double total = contract_revenue_base(*s) - penalty + value;
            if (total > best) {
                best = total;
                best_pick = pick;
            }
            return;
        }
        const auto& imp = s->impressions[i];
        pick[i] = 0;
        value += imp.rtb_second;
        search(i + 1);
        value -= imp.rtb_second;
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const double gain = contracts[j].quality_weight * imp.quality[j];
            pick[i] = contracts[j].id;
            delivered[j] += 1;
            value += gain;
            search(i + 1);
            value -= gain;
            delivered[j] -= 1;
        }
        pick[i] = 0;
    }
};

}  // namespace

BruteForceResult brute_force_optimal(const Scenario& s, double budget) {
    const double leaves =
        std::pow(static_cast<double>(s.contracts.size()) + 1.0,
                 static_cast<double>(s.impressions.size()));
    if (leaves > budget)
        throw budget_error("brute force needs " + std::to_string(leaves) +
                           " evaluations, budget is " + std::to_string(budget));

    BruteForceState st;
    st.s = &s;
    st.pick.assign(s.impressions.size(), 0);
    st.delivered.assign(s.contracts.size(), 0);
    st.search(0);

    BruteForceResult out;
    out.assignment = st.best_pick;
    out.yield = st.best;
    return out;
}

SlacknessReport verify_complementary_slackness(const Scenario& s,
                                               const std::vector<int>& assignment,
                                               const DualSolution& dual, double tol) {
    const auto& contracts = s.contracts;
    if (assignment.size() != s.impressions.size())
        throw config_error("slackness: one assignment entry per impression required");
    if (dual.alpha_star.size() != contracts.size())
        throw config_error("slackness: alpha_star must have one entry per contract");
    if (dual.beta_star.size() != s.impressions.size())
        throw config_error("slackness: beta_star must have one entry per impression");

    SlacknessReport rep;
    auto breach = [&](int& counter, double magnitude) {
        ++counter;
        ++rep.violations;
        rep.worst = std::max(rep.worst, magnitude);
    };

    for (std::size_t j = 0; j < contracts.size(); ++j) {
        const double a = dual.alpha_star[j];
        if (a < -tol) breach(rep.infeasibilities, -a);
        if (a > contracts[j].penalty + tol) breach(rep.infeasibilities, a - contracts[j].penalty);
    }

    for (std::size_t i = 0; i < s.impressions.size(); ++i) {
        const auto& imp = s.impressions[i];
        const double beta = dual.beta_star[i];
        if (beta < -tol) breach(rep.infeasibilities, -beta);
        for (std::size_t j = 0; j < contracts.size(); ++j) {
            const double surplus =
                contract_bid(contracts[j], imp.quality[j], dual.alpha_star[j]) - imp.rtb_second;
            if (surplus - beta > tol) breach(rep.infeasibilities, surplus - beta);
        }
        const int pick = assignment[i];
        if (pick == 0) {
            // Unallocated impressions must not carry a positive dual price.
            if (beta > tol) breach(rep.unallocated_paid, beta);
        } else {
            const std::size_t j = static_cast<std::size_t>(pick - 1);
            if (j >= contracts.size())
                throw config_error("slackness: unknown contract id " + std::to_string(pick));
            const double surplus =
                contract_bid(contracts[j], imp.quality[j], dual.alpha_star[j]) - imp.rtb_second;
            if (std::fabs(surplus - beta) > tol)
                breach(rep.surplus_mismatches, std::fabs(surplus - beta));
        }
    }

    rep.certified = rep.violations == 0;
    return rep;
}

}  // namespace yieldsim
