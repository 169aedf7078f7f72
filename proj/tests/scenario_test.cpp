#include "yieldsim/scenario.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "yieldsim/errors.hpp"

using namespace yieldsim;

namespace {

GeneratorSpec small_spec() {
    GeneratorSpec g;
    g.num_contracts = 3;
    g.num_impressions = 200;
    g.horizon = 4;
    return g;
}

}  // namespace

TEST_CASE("degenerate single-impression scenario") {
    GeneratorSpec g;
    g.num_contracts = 1;
    g.num_impressions = 1;
    g.horizon = 1;
    g.bid_log_sigma = 0.0;  // every bidder offers exp(0) = 1.0
    g.demand_fractions = {1.0};
    const Scenario s = generate_scenario(g, 7);
    REQUIRE(s.num_contracts() == 1);
    REQUIRE(s.num_impressions() == 1);
    CHECK(s.impressions[0].rtb_first == 1.0);
    CHECK(s.impressions[0].rtb_second == 1.0);
    CHECK(s.contracts[0].demand == 1);
}

TEST_CASE("generation is a pure function of spec and seed") {
    const auto g = small_spec();
    const Scenario a = generate_scenario(g, 7);
    const Scenario b = generate_scenario(g, 7);
    const Scenario c = generate_scenario(g, 8);
    CHECK(a == b);
    CHECK(a.impressions != c.impressions);
}

TEST_CASE("explicit demand fractions control total demand") {
    GeneratorSpec g;
    g.num_contracts = 3;
    g.num_impressions = 1000;
    g.horizon = 4;
    g.demand_fractions = {0.2, 0.2, 0.2};
    const Scenario s = generate_scenario(g, 3);
    long long total = 0;
    for (const auto& c : s.contracts) total += c.demand;
    CHECK(total == 600);
}

TEST_CASE("generator rejects infeasible or degenerate parameters") {
    GeneratorSpec g = small_spec();
    g.num_contracts = 0;
    CHECK_THROWS_AS(generate_scenario(g, 1), config_error);
    g = small_spec();
    g.num_impressions = 0;
    CHECK_THROWS_AS(generate_scenario(g, 1), config_error);
    g = small_spec();
    g.horizon = 0;
    CHECK_THROWS_AS(generate_scenario(g, 1), config_error);
    g = small_spec();
    g.demand_fractions = {0.5, 0.5, 0.5};  // total 1.5n > n
    CHECK_THROWS_AS(generate_scenario(g, 1), config_error);
    g = small_spec();
    g.demand_fractions = {0.1, 0.1};  // neither 1 nor m entries
    CHECK_THROWS_AS(generate_scenario(g, 1), config_error);
}

TEST_CASE("generated scenarios satisfy all type invariants") {
    const Scenario s = generate_scenario(small_spec(), 11);
    CHECK_NOTHROW(validate_scenario(s));
    for (const auto& imp : s.impressions) {
        CHECK(imp.rtb_first >= imp.rtb_second);
        CHECK(imp.rtb_second >= 0.0);
        for (double q : imp.quality) {
            CHECK(q >= 0.0);
            CHECK(q <= 1.0);
        }
    }
    const auto offsets = s.step_offsets();
    REQUIRE(offsets.size() == 5);
    CHECK(offsets.back() == s.impressions.size());
    for (std::size_t t = 1; t < offsets.size(); ++t) {
        for (std::size_t i = offsets[t - 1]; i < offsets[t]; ++i) {
            CHECK(s.impressions[i].step == static_cast<int>(t));
        }
    }
}

TEST_CASE("volume drift resizes the impression list") {
    GeneratorSpec g = small_spec();
    g.num_impressions = 1000;
    const Scenario train = generate_scenario(g, 5);
    // Publisher-3-style drift: -15.5% volume, +52.5% price.
    const Scenario test = apply_drift(train, {0.845, 1.525, 0.0}, 17);
    CHECK(test.num_impressions() == 845);
    CHECK(test.contracts == train.contracts);
    CHECK(test.horizon == train.horizon);
    CHECK_NOTHROW(validate_scenario(test));
}

TEST_CASE("identity drift preserves shape") {
    const Scenario train = generate_scenario(small_spec(), 5);
    const Scenario test = apply_drift(train, {1.0, 1.0, 0.0}, 17);
    CHECK(test.num_impressions() == train.num_impressions());
    CHECK(test.contracts == train.contracts);
}

TEST_CASE("price drift doubles the mean second price") {
    GeneratorSpec g;
    g.num_contracts = 1;
    g.num_impressions = 100000;
    g.horizon = 4;
    g.demand_fractions = {0.1};
    const Scenario train = generate_scenario(g, 21);
    const Scenario test = apply_drift(train, {1.0, 2.0, 0.0}, 22);
    auto mean_b2 = [](const Scenario& s) {
        double sum = 0.0;
        for (const auto& imp : s.impressions) sum += imp.rtb_second;
        return sum / static_cast<double>(s.num_impressions());
    };
    const double ratio = mean_b2(test) / mean_b2(train);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("quality noise perturbs qualities but keeps them nonnegative") {
    const Scenario train = generate_scenario(small_spec(), 5);
    const Scenario test = apply_drift(train, {1.0, 1.0, 0.4}, 23);
    CHECK_NOTHROW(validate_scenario(test));
    std::set<double> train_qualities;
    for (const auto& imp : train.impressions)
        for (double q : imp.quality) train_qualities.insert(q);
    int fresh = 0;
    for (const auto& imp : test.impressions) {
        for (double q : imp.quality) {
            CHECK(q >= 0.0);
            if (!train_qualities.count(q)) ++fresh;
        }
    }
    CHECK(fresh > 0);  // noise produced quality values absent from the train set
}

TEST_CASE("drift validates its parameters") {
    const Scenario train = generate_scenario(small_spec(), 5);
    CHECK_THROWS_AS(apply_drift(train, {0.0, 1.0, 0.0}, 1), config_error);
    CHECK_THROWS_AS(apply_drift(train, {1.0, -1.0, 0.0}, 1), config_error);
    CHECK_THROWS_AS(apply_drift(train, {1.0, 1.0, -0.1}, 1), config_error);
}

TEST_CASE("serialization round-trips exactly") {
    const Scenario s = generate_scenario(small_spec(), 13);
    std::stringstream buf;
    write_scenario(s, buf);
    const Scenario back = read_scenario(buf);
    CHECK(back == s);
}

TEST_CASE("reader enforces invariants with line numbers") {
    SUBCASE("b2 greater than b1") {
        std::stringstream buf("H 1 1 1\nC 1 1 1.0 1.0 0.5 0\nI 1 1 0.5 0.9 0.3\n");
        CHECK_THROWS_AS(read_scenario(buf), parse_error);
    }
    SUBCASE("duplicate impression id") {
        std::stringstream buf(
            "H 1 2 1\nC 1 1 1.0 1.0 0.5 0\nI 1 1 1.0 0.5 0.3\nI 1 1 1.0 0.5 0.3\n");
        CHECK_THROWS_AS(read_scenario(buf), parse_error);
    }
    SUBCASE("missing quality entry") {
        std::stringstream buf("H 2 1 1\nC 1 1 1.0 1.0 0.5 0\nC 2 1 1.0 1.0 0.5 0\nI 1 1 1.0 0.5 0.3\n");
        CHECK_THROWS_AS(read_scenario(buf), parse_error);
    }
    SUBCASE("header count mismatch") {
        std::stringstream buf("H 1 2 1\nC 1 1 1.0 1.0 0.5 0\nI 1 1 1.0 0.5 0.3\n");
        CHECK_THROWS_AS(read_scenario(buf), parse_error);
    }
    SUBCASE("error message names the offending line") {
        std::stringstream buf("H 1 1 1\nC 1 1 1.0 1.0 0.5 0\nI 1 1 oops 0.5 0.3\n");
        try {
            read_scenario(buf);
            FAIL("expected parse_error");
        } catch (const parse_error& e) {
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("comments and blank lines are skipped") {
        std::stringstream buf("# comment\n\nH 1 1 1\nC 1 1 1.0 1.0 0.5 0\nI 1 1 1.0 0.5 0.3\n");
        CHECK_NOTHROW(read_scenario(buf));
    }
}

TEST_CASE("arrival weights shape the step distribution") {
    GeneratorSpec g = small_spec();
    g.num_impressions = 10000;
    g.arrival_weights = {1.0, 0.0, 0.0, 1.0};
    const Scenario s = generate_scenario(g, 2);
    const auto offsets = s.step_offsets();
    CHECK(offsets[2] == offsets[1]);  // step 2 empty
    CHECK(offsets[3] == offsets[2]);  // step 3 empty
    CHECK(offsets[1] > 0);
    CHECK(offsets[4] > offsets[3]);
}
