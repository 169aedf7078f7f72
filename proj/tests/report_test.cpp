#include "yieldsim/report.hpp"

#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "yieldsim/errors.hpp"

using namespace yieldsim;

namespace {

LabeledReport ratio_report(const std::string& method, const std::string& scenario,
                           double ratio) {
    LabeledReport lr;
    lr.method = method;
    lr.scenario = scenario;
    lr.report.r_gc = ratio;
    lr.report.yield = ratio;
    lr.report.r_star = 1.0;
    return lr;
}

}  // namespace

TEST_CASE("five-row column averages to 0.87 at printed precision") {
    const double rows[] = {0.92, 0.86, 0.79, 0.88, 0.89};
    std::vector<LabeledReport> reports;
    for (int i = 0; i < 5; ++i)
        reports.push_back(ratio_report("cf", "pub-" + std::to_string(i + 1), rows[i]));
    const SummaryTable t = summarize(reports);
    REQUIRE(t.methods == std::vector<std::string>{"cf"});
    REQUIRE(t.averages.size() == 1);
    CHECK(t.averages[0] == doctest::Approx(0.868).epsilon(1e-12));
    const std::string rendered = render_summary(t);
    CHECK(rendered.find("average\t0.87") != std::string::npos);
    CHECK(t.flagged.empty());
}

TEST_CASE("single row averages to itself") {
    const SummaryTable t = summarize({ratio_report("pid", "only", 0.5)});
    CHECK(t.averages[0] == doctest::Approx(0.5));
}

TEST_CASE("inconsistent decomposition is flagged, consistent is not") {
    LabeledReport optimal_pub3;
    optimal_pub3.method = "optimal";
    optimal_pub3.scenario = "pub-3";
    optimal_pub3.report.r_gc = 6701.31;
    optimal_pub3.report.r_rtb = 11796.01;
    optimal_pub3.report.q_gc = 2694.98;
    optimal_pub3.report.yield = 21192.30;
    optimal_pub3.report.r_star = 21192.30;
    CHECK(!additivity_mismatch(optimal_pub3.report));

    LabeledReport optimal_pub4;
    optimal_pub4.method = "optimal";
    optimal_pub4.scenario = "pub-4";
    optimal_pub4.report.r_gc = 5473.19;
    optimal_pub4.report.r_rtb = 10609.10;
    optimal_pub4.report.q_gc = 1243.20;
    optimal_pub4.report.yield = 17325.71;  // printed total disagrees with the parts
    optimal_pub4.report.r_star = 17325.71;
    const auto gap = additivity_mismatch(optimal_pub4.report);
    REQUIRE(gap.has_value());
    CHECK(*gap == doctest::Approx(0.22).epsilon(0.03));

    const SummaryTable t = summarize({optimal_pub3, optimal_pub4});
    REQUIRE(t.flagged.size() == 1);
    CHECK(t.flagged[0].find("pub-4") != std::string::npos);
}

TEST_CASE("summarize requires an oracle on every row") {
    LabeledReport lr = ratio_report("cf", "x", 0.9);
    lr.report.r_star.reset();
    CHECK_THROWS_AS(summarize({lr}), config_error);
    CHECK_THROWS_AS(summarize({}), config_error);
    CHECK_THROWS_AS(
        summarize({ratio_report("cf", "x", 0.9), ratio_report("cf", "x", 0.8)}),
        config_error);  // duplicate cell
}

TEST_CASE("missing cells render as dashes") {
    const SummaryTable t =
        summarize({ratio_report("cf", "a", 0.9), ratio_report("pid", "b", 0.8)});
    const std::string rendered = render_summary(t);
    CHECK(rendered.find('-') != std::string::npos);
    CHECK(t.averages[0] == doctest::Approx(0.9));
    CHECK(t.averages[1] == doctest::Approx(0.8));
}

TEST_CASE("convergence CSV layout") {
    SUBCASE("no curves gives a header-only file") {
        std::ostringstream os;
        emit_convergence_csv({}, os);
        CHECK(os.str() == "method,seconds,episode,r_over_rstar\n");
    }
    SUBCASE("points and per-method averages") {
        MethodCurve a{"mapolo", {{10, 1.5, 0.8}, {20, 3.0, 0.9}}};
        MethodCurve b{"maddpg", {{10, 2.0, 0.7}, {20, 4.5, 0.8}}};
        std::ostringstream os;
        emit_convergence_csv({a, b}, os);
        const std::string csv = os.str();
        CHECK(csv.find("mapolo,1.5,10,0.8") != std::string::npos);
        CHECK(csv.find("maddpg,4.5,20,0.8") != std::string::npos);
        CHECK(csv.find("# avg_seconds_per_episode,mapolo,0.15") != std::string::npos);
        CHECK(csv.find("# avg_seconds_per_episode,maddpg,0.225") != std::string::npos);
    }
}

TEST_CASE("result records round-trip through disk") {
    LabeledReport lr;
    lr.method = "cf";
    lr.scenario = "pub-1";
    lr.report.r_gc = 1.25;
    lr.report.r_rtb = 3.5;
    lr.report.q_gc = 0.25;
    lr.report.yield = 5.0;
    lr.report.r_star = 5.5;
    lr.report.delivered = {3, 4};
    lr.report.shortfall = {0, 1};

    const auto path = std::filesystem::temp_directory_path() / "yieldsim_report_test.txt";
    save_result(lr, path.string());
    const LabeledReport back = load_result(path.string());
    std::filesystem::remove(path);

    CHECK(back.method == lr.method);
    CHECK(back.scenario == lr.scenario);
    CHECK(back.report.r_gc == lr.report.r_gc);
    CHECK(back.report.r_rtb == lr.report.r_rtb);
    CHECK(back.report.q_gc == lr.report.q_gc);
    CHECK(back.report.yield == lr.report.yield);
    CHECK(back.report.r_star == lr.report.r_star);
    CHECK(back.report.delivered == lr.report.delivered);
    CHECK(back.report.shortfall == lr.report.shortfall);
}

TEST_CASE("ratio accessor guards its preconditions") {
    YieldReport r;
    r.yield = 1.0;
    CHECK_THROWS_AS(r.r_over_rstar(), state_error);
    r.r_star = 0.0;
    CHECK_THROWS_AS(r.r_over_rstar(), state_error);
    r.r_star = 2.0;
    CHECK(r.r_over_rstar() == doctest::Approx(0.5));
}
