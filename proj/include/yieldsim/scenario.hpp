#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace yieldsim {

// One guaranteed delivery contract. The publisher owes `demand` impressions,
// was paid `unit_price` per impression up front, pays `penalty` per
// undelivered impression, and values impression quality at `quality_weight`
// money per quality unit. `alpha_init` is the starting bid shift.
struct Contract {
    int id = 0;  // dense, 1..m
    long long demand = 0;
    double unit_price = 0.0;
    double penalty = 0.0;
    double quality_weight = 0.0;
    double alpha_init = 0.0;

    bool operator==(const Contract&) const = default;
};

// One impression opportunity. `rtb_first`/`rtb_second` are the top two RTB
// bids; `quality[j-1]` is the impression's quality for contract j.
struct Impression {
    int id = 0;
    int step = 1;  // arrival bucket in [1, T]
    double rtb_first = 0.0;
    double rtb_second = 0.0;
    std::vector<double> quality;

    bool operator==(const Impression&) const = default;
};

struct Scenario {
    std::vector<Contract> contracts;
    std::vector<Impression> impressions;  // ordered by step
    int horizon = 1;                      // T

    int num_contracts() const { return static_cast<int>(contracts.size()); }
    long long num_impressions() const { return static_cast<long long>(impressions.size()); }

    // Index of the first impression of each step plus a final sentinel,
    // so step t's impressions are [offsets[t-1], offsets[t]).
    std::vector<std::size_t> step_offsets() const;

    bool operator==(const Scenario&) const = default;
};

// Train-to-test environment change.
struct DriftSpec {
    double volume_factor = 1.0;   // test impression count / train count
    double price_factor = 1.0;    // multiplier on RTB bids
    double quality_noise = 0.0;   // stddev of multiplicative quality perturbation
};

// Parameters for synthetic scenario generation. RTB bid pairs are the top two
// order statistics of `bidders_k` i.i.d. log-normal draws; per-contract
// quality comes from a Beta distribution with per-contract shape parameters.
struct GeneratorSpec {
    int num_contracts = 5;       // m
    long long num_impressions = 10000;  // n
    int horizon = 24;            // T

    double bid_log_mean = 0.0;   // location of ln(bid)
    double bid_log_sigma = 0.5;  // scale of ln(bid)
    int bidders_k = 5;

    // Per-contract demand as a fraction of n. Empty: total_demand_fraction
    // split evenly. A single entry is replicated for all contracts.
    std::vector<double> demand_fractions;
    double total_demand_fraction = 0.6;

    double price_min = 0.5, price_max = 1.5;       // c_j
    double penalty_min = 1.0, penalty_max = 3.0;   // p_j
    double lambda_min = 0.0, lambda_max = 2.0;     // quality weight
    double alpha_init_frac = 0.0;                  // alpha0 = frac * p_j

    double quality_shape_min = 1.5, quality_shape_max = 6.0;  // Beta(a_j, b_j) ranges

    // Relative arrival weight per step; empty means uniform.
    std::vector<double> arrival_weights;
};

// Pure function of (spec, seed): identical inputs give bit-identical output.
Scenario generate_scenario(const GeneratorSpec& spec, std::uint64_t seed);

// Resamples impressions (bootstrap) to round(n * volume_factor), rescales
// RTB bids by price_factor, and perturbs qualities multiplicatively.
// Contract terms are never touched.
Scenario apply_drift(const Scenario& train, const DriftSpec& drift, std::uint64_t seed);

// Checks every type invariant; throws parse_error naming the first violation.
void validate_scenario(const Scenario& s);

// Line-delimited text format:
//   H m n T
//   C j d c p lambda alpha0
//   I i step b1 b2 q_1 ... q_m
// Numbers are decimal text; round-trip is field-exact.
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

void write_scenario(const Scenario& s, std::ostream& os);
Scenario read_scenario(std::istream& is);

}  // namespace yieldsim
