#include "yieldsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "yieldsim/errors.hpp"
#include "yieldsim/text_io.hpp"

namespace yieldsim {

std::vector<std::size_t> Scenario::step_offsets() const {
    std::vector<std::size_t> offsets(static_cast<std::size_t>(horizon) + 1, 0);
    for (const auto& imp : impressions) {
        offsets[static_cast<std::size_t>(imp.step)]++;
    }
    for (std::size_t t = 1; t < offsets.size(); ++t) offsets[t] += offsets[t - 1];
    return offsets;
}

namespace {

std::vector<double> resolve_demand_fractions(const GeneratorSpec& spec) {
    const int m = spec.num_contracts;
    if (spec.demand_fractions.empty()) {
        return std::vector<double>(m, spec.total_demand_fraction / m);
    }
    if (spec.demand_fractions.size() == 1) {
        return std::vector<double>(m, spec.demand_fractions[0]);
    }
    if (static_cast<int>(spec.demand_fractions.size()) != m) {
        throw config_error("demand_fractions must have 0, 1 or m entries");
    }
    return spec.demand_fractions;
}

double draw_beta(std::mt19937_64& rng, double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x / (x + y);
}

}  // namespace

Scenario generate_scenario(const GeneratorSpec& spec, std::uint64_t seed) {
    if (spec.num_contracts <= 0) throw config_error("generator: m must be >= 1");
    if (spec.num_impressions <= 0) throw config_error("generator: n must be >= 1");
    if (spec.horizon <= 0) throw config_error("generator: T must be >= 1");
    if (spec.bidders_k < 2) throw config_error("generator: bidders_k must be >= 2");
    if (spec.bid_log_sigma < 0) throw config_error("generator: bid_log_sigma must be >= 0");
    if (!spec.arrival_weights.empty() &&
        static_cast<int>(spec.arrival_weights.size()) != spec.horizon) {
        throw config_error("generator: arrival_weights must have T entries");
    }

    const auto fractions = resolve_demand_fractions(spec);
    std::mt19937_64 rng(seed);

    Scenario s;
    s.horizon = spec.horizon;

    std::uniform_real_distribution<double> price_dist(spec.price_min, spec.price_max);
    std::uniform_real_distribution<double> penalty_dist(spec.penalty_min, spec.penalty_max);
    std::uniform_real_distribution<double> lambda_dist(spec.lambda_min, spec.lambda_max);
    std::uniform_real_distribution<double> shape_dist(spec.quality_shape_min,
                                                      spec.quality_shape_max);

    long long total_demand = 0;
    std::vector<std::pair<double, double>> quality_shapes;
    for (int j = 1; j <= spec.num_contracts; ++j) {
        Contract c;
        c.id = j;
        c.demand = std::max<long long>(
            1, std::llround(fractions[static_cast<std::size_t>(j - 1)] *
                            static_cast<double>(spec.num_impressions)));
        c.unit_price = price_dist(rng);
        c.penalty = penalty_dist(rng);
        if (c.penalty <= 0) throw config_error("generator: penalty range must be positive");
        c.quality_weight = lambda_dist(rng);
        c.alpha_init = spec.alpha_init_frac * c.penalty;
        total_demand += c.demand;
        quality_shapes.emplace_back(shape_dist(rng), shape_dist(rng));
        s.contracts.push_back(c);
    }
    if (total_demand > spec.num_impressions) {
        throw config_error("generator: total demand " + std::to_string(total_demand) +
                           " exceeds supply " + std::to_string(spec.num_impressions));
    }

    std::vector<double> weights = spec.arrival_weights;
    if (weights.empty()) weights.assign(static_cast<std::size_t>(spec.horizon), 1.0);
    std::discrete_distribution<int> step_dist(weights.begin(), weights.end());
    // sigma == 0 bypasses the distribution entirely (see loop below).
    std::lognormal_distribution<double> bid_dist(
        spec.bid_log_mean, spec.bid_log_sigma > 0 ? spec.bid_log_sigma : 1.0);

    s.impressions.reserve(static_cast<std::size_t>(spec.num_impressions));
    for (long long i = 0; i < spec.num_impressions; ++i) {
        Impression imp;
        imp.step = step_dist(rng) + 1;
        double top1 = 0.0, top2 = 0.0;
        if (spec.bid_log_sigma == 0.0) {
            // Degenerate landscape: every bidder offers exp(mean).
            top1 = top2 = std::exp(spec.bid_log_mean);
        } else {
            for (int k = 0; k < spec.bidders_k; ++k) {
                const double b = bid_dist(rng);
                if (b > top1) {
                    top2 = top1;
                    top1 = b;
                } else if (b > top2) {
                    top2 = b;
                }
            }
        }
        imp.rtb_first = top1;
        imp.rtb_second = top2;
        imp.quality.resize(static_cast<std::size_t>(spec.num_contracts));
        for (int j = 0; j < spec.num_contracts; ++j) {
            const auto& [a, b] = quality_shapes[static_cast<std::size_t>(j)];
            imp.quality[static_cast<std::size_t>(j)] = draw_beta(rng, a, b);
        }
        s.impressions.push_back(std::move(imp));
    }

    std::stable_sort(s.impressions.begin(), s.impressions.end(),
                     [](const Impression& a, const Impression& b) { return a.step < b.step; });
    int next_id = 1;
    for (auto& imp : s.impressions) imp.id = next_id++;

    validate_scenario(s);
    return s;
}

Scenario apply_drift(const Scenario& train, const DriftSpec& drift, std::uint64_t seed) {
    if (drift.volume_factor <= 0) throw config_error("drift: volume_factor must be > 0");
    if (drift.price_factor <= 0) throw config_error("drift: price_factor must be > 0");
    if (drift.quality_noise < 0) throw config_error("drift: quality_noise must be >= 0");
    if (train.impressions.empty()) throw config_error("drift: train scenario has no impressions");

    const long long n_test =
        std::llround(drift.volume_factor * static_cast<double>(train.num_impressions()));

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, train.impressions.size() - 1);
    std::normal_distribution<double> noise(0.0, 1.0);

    Scenario test;
    test.contracts = train.contracts;
    test.horizon = train.horizon;
    test.impressions.reserve(static_cast<std::size_t>(n_test));
    for (long long i = 0; i < n_test; ++i) {
        Impression imp = train.impressions[pick(rng)];
        imp.rtb_first *= drift.price_factor;
        imp.rtb_second *= drift.price_factor;
        if (drift.quality_noise > 0) {
            for (double& q : imp.quality) {
                q *= std::max(0.0, 1.0 + drift.quality_noise * noise(rng));
            }
        }
        test.impressions.push_back(std::move(imp));
    }
    std::stable_sort(test.impressions.begin(), test.impressions.end(),
                     [](const Impression& a, const Impression& b) { return a.step < b.step; });
    int next_id = 1;
    for (auto& imp : test.impressions) imp.id = next_id++;
    return test;
}

void validate_scenario(const Scenario& s) {
    if (s.horizon < 1) throw parse_error("scenario: horizon must be >= 1");
    const int m = s.num_contracts();
    for (int j = 0; j < m; ++j) {
        const auto& c = s.contracts[static_cast<std::size_t>(j)];
        const std::string where = "contract " + std::to_string(c.id);
        if (c.id != j + 1) throw parse_error(where + ": ids must be dense 1..m");
        if (c.demand < 1) throw parse_error(where + ": demand must be >= 1");
        if (c.unit_price < 0) throw parse_error(where + ": unit_price must be >= 0");
        if (c.penalty <= 0) throw parse_error(where + ": penalty must be > 0");
        if (c.quality_weight < 0) throw parse_error(where + ": quality_weight must be >= 0");
        if (c.alpha_init < 0 || c.alpha_init > c.penalty) {
            throw parse_error(where + ": alpha_init must lie in [0, penalty]");
        }
    }
    std::unordered_set<int> seen_ids;
    int prev_step = 1;
    for (const auto& imp : s.impressions) {
        const std::string where = "impression " + std::to_string(imp.id);
        if (!seen_ids.insert(imp.id).second) throw parse_error(where + ": duplicate id");
        if (imp.step < 1 || imp.step > s.horizon) {
            throw parse_error(where + ": step outside [1, T]");
        }
        if (imp.step < prev_step) throw parse_error(where + ": impressions not ordered by step");
        prev_step = imp.step;
        if (imp.rtb_second < 0 || imp.rtb_first < imp.rtb_second) {
            throw parse_error(where + ": requires b1 >= b2 >= 0");
        }
        if (static_cast<int>(imp.quality.size()) != m) {
            throw parse_error(where + ": quality entries do not match contract count");
        }
        for (double q : imp.quality) {
            if (!(q >= 0)) throw parse_error(where + ": quality must be >= 0");
        }
    }
}

void write_scenario(const Scenario& s, std::ostream& os) {
    os << "H " << s.num_contracts() << ' ' << s.num_impressions() << ' ' << s.horizon << '\n';
    for (const auto& c : s.contracts) {
        os << "C " << c.id << ' ' << c.demand << ' ' << format_double(c.unit_price) << ' '
           << format_double(c.penalty) << ' ' << format_double(c.quality_weight) << ' '
           << format_double(c.alpha_init) << '\n';
    }
    for (const auto& imp : s.impressions) {
        os << "I " << imp.id << ' ' << imp.step << ' ' << format_double(imp.rtb_first) << ' '
           << format_double(imp.rtb_second);
        for (double q : imp.quality) os << ' ' << format_double(q);
        os << '\n';
    }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) fields.push_back(tok);
    return fields;
}

}  // namespace

Scenario read_scenario(std::istream& is) {
    Scenario s;
    std::string line;
    long long line_no = 0;
    long long declared_m = -1, declared_n = -1;
    bool header_seen = false;

    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::string where = "line " + std::to_string(line_no);
        const auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields[0] == "H") {
            if (header_seen) throw parse_error(where + ": duplicate header");
            if (fields.size() != 4) throw parse_error(where + ": header needs m n T");
            declared_m = parse_int(fields[1], where);
            declared_n = parse_int(fields[2], where);
            s.horizon = static_cast<int>(parse_int(fields[3], where));
            header_seen = true;
        } else if (fields[0] == "C") {
            if (!header_seen) throw parse_error(where + ": contract before header");
            if (fields.size() != 7) throw parse_error(where + ": contract needs 6 fields");
            Contract c;
            c.id = static_cast<int>(parse_int(fields[1], where));
            c.demand = parse_int(fields[2], where);
            c.unit_price = parse_double(fields[3], where);
            c.penalty = parse_double(fields[4], where);
            c.quality_weight = parse_double(fields[5], where);
            c.alpha_init = parse_double(fields[6], where);
            s.contracts.push_back(c);
        } else if (fields[0] == "I") {
            if (!header_seen) throw parse_error(where + ": impression before header");
            if (static_cast<long long>(fields.size()) != 5 + declared_m) {
                throw parse_error(where + ": impression needs 4 fields plus " +
                                  std::to_string(declared_m) + " qualities");
            }
            Impression imp;
            imp.id = static_cast<int>(parse_int(fields[1], where));
            imp.step = static_cast<int>(parse_int(fields[2], where));
            imp.rtb_first = parse_double(fields[3], where);
            imp.rtb_second = parse_double(fields[4], where);
            imp.quality.reserve(static_cast<std::size_t>(declared_m));
            for (long long q = 0; q < declared_m; ++q) {
                imp.quality.push_back(parse_double(fields[static_cast<std::size_t>(5 + q)], where));
            }
            s.impressions.push_back(std::move(imp));
        } else {
            throw parse_error(where + ": unknown record type '" + fields[0] + "'");
        }
    }
    if (!header_seen) throw parse_error("scenario file: missing header record");
    if (declared_m != s.num_contracts()) {
        throw parse_error("scenario file: header declares " + std::to_string(declared_m) +
                          " contracts, found " + std::to_string(s.num_contracts()));
    }
    if (declared_n != s.num_impressions()) {
        throw parse_error("scenario file: header declares " + std::to_string(declared_n) +
                          " impressions, found " + std::to_string(s.num_impressions()));
    }
    validate_scenario(s);
    return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    write_scenario(s, os);
    if (!os) throw io_error("write failed for '" + path + "'");
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "' for reading");
    return read_scenario(is);
}

}  // namespace yieldsim
