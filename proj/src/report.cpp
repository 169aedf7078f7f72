#include "yieldsim/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "yieldsim/errors.hpp"
#include "yieldsim/text_io.hpp"

namespace yieldsim {

double YieldReport::r_over_rstar() const {
    if (!r_star) throw state_error("report carries no reference yield");
    if (*r_star == 0.0) throw state_error("reference yield is zero");
    return yield / *r_star;
}

std::optional<double> additivity_mismatch(const YieldReport& r) {
    double gap = std::fabs(r.r_gc + r.r_rtb + r.q_gc - r.yield);
    if (gap > kAdditivityTolerance) return gap;
    return std::nullopt;
}

SummaryTable summarize(const std::vector<LabeledReport>& reports) {
    if (reports.empty()) throw config_error("no reports to summarize");

    SummaryTable table;
    // Preserve first-seen order for both axes.
    auto index_of = [](std::vector<std::string>& names, const std::string& name) {
        for (size_t k = 0; k < names.size(); ++k)
            if (names[k] == name) return k;
        names.push_back(name);
        return names.size() - 1;
    };

    std::map<std::pair<size_t, size_t>, double> cells;
    for (const auto& lr : reports) {
        if (!lr.report.r_star)
            throw config_error("report '" + lr.method + "/" + lr.scenario +
                               "' carries no reference yield");
        size_t mi = index_of(table.methods, lr.method);
        size_t si = index_of(table.scenarios, lr.scenario);
        auto key = std::make_pair(si, mi);
        if (cells.count(key))
            throw config_error("duplicate report for '" + lr.method + "/" + lr.scenario + "'");
        cells[key] = lr.report.r_over_rstar();
        if (auto gap = additivity_mismatch(lr.report))
            table.flagged.push_back(lr.method + "/" + lr.scenario +
                                    ": components disagree with yield by " + format_double(*gap));
    }

    table.ratios.assign(table.scenarios.size(),
                        std::vector<double>(table.methods.size(),
                                            std::numeric_limits<double>::quiet_NaN()));
    for (const auto& [key, v] : cells) table.ratios[key.first][key.second] = v;

    table.averages.assign(table.methods.size(), 0.0);
    for (size_t mi = 0; mi < table.methods.size(); ++mi) {
        double sum = 0.0;
        size_t count = 0;
        for (size_t si = 0; si < table.scenarios.size(); ++si) {
            double v = table.ratios[si][mi];
            if (!std::isnan(v)) {
                sum += v;
                ++count;
            }
        }
        if (count == 0) throw state_error("method '" + table.methods[mi] + "' has no rows");
        table.averages[mi] = sum / static_cast<double>(count);
    }
    return table;
}

std::string render_summary(const SummaryTable& table) {
    std::ostringstream os;
    os << "scenario";
    for (const auto& m : table.methods) os << '\t' << m;
    os << '\n';
    // Ratios render at 2 decimals; internal arithmetic stays full precision.
    auto cell = [](double v) {
        if (std::isnan(v)) return std::string("-");
        std::ostringstream c;
        c.setf(std::ios::fixed);
        c.precision(2);
        c << v;
        return c.str();
    };
    for (size_t si = 0; si < table.scenarios.size(); ++si) {
        os << table.scenarios[si];
        for (size_t mi = 0; mi < table.methods.size(); ++mi)
            os << '\t' << cell(table.ratios[si][mi]);
        os << '\n';
    }
    os << "average";
    for (double v : table.averages) os << '\t' << cell(v);
    os << '\n';
    for (const auto& f : table.flagged) os << "# flagged " << f << '\n';
    return os.str();
}

void emit_convergence_csv(const std::vector<MethodCurve>& curves, std::ostream& os) {
    os << "method,seconds,episode,r_over_rstar\n";
    for (const auto& curve : curves)
        for (const auto& p : curve.points)
            os << curve.method << ',' << format_double(p.seconds) << ',' << p.episode << ','
               << format_double(p.r_over_rstar) << '\n';
    for (const auto& curve : curves) {
        if (curve.points.empty()) continue;
        const auto& last = curve.points.back();
        if (last.episode <= 0) continue;
        double per_ep = last.seconds / static_cast<double>(last.episode);
        os << "# avg_seconds_per_episode," << curve.method << ',' << format_double(per_ep) << '\n';
    }
}

void emit_convergence_csv(const std::vector<MethodCurve>& curves, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    emit_convergence_csv(curves, os);
    if (!os) throw io_error("write to '" + path + "' failed");
}

void save_result(const LabeledReport& r, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    os << "method " << r.method << '\n';
    os << "scenario " << r.scenario << '\n';
    os << "r_gc " << format_double(r.report.r_gc) << '\n';
    os << "r_rtb " << format_double(r.report.r_rtb) << '\n';
    os << "q_gc " << format_double(r.report.q_gc) << '\n';
    os << "yield " << format_double(r.report.yield) << '\n';
    if (r.report.r_star) os << "r_star " << format_double(*r.report.r_star) << '\n';
    os << "delivered";
    for (long long v : r.report.delivered) os << ' ' << v;
    os << '\n';
    os << "shortfall";
    for (long long v : r.report.shortfall) os << ' ' << v;
    os << '\n';
    if (!os) throw io_error("write to '" + path + "' failed");
}

LabeledReport load_result(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "'");
    LabeledReport out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        std::string where = path + " line " + std::to_string(lineno);
        auto rest_tokens = [&] {
            std::vector<std::string> toks;
            std::string t;
            while (ls >> t) toks.push_back(t);
            return toks;
        };
        if (key == "method" || key == "scenario") {
            std::string v;
            if (!(ls >> v)) throw parse_error(where + ": missing value for " + key);
            (key == "method" ? out.method : out.scenario) = v;
        } else if (key == "r_gc" || key == "r_rtb" || key == "q_gc" || key == "yield" ||
                   key == "r_star") {
            std::string v;
            if (!(ls >> v)) throw parse_error(where + ": missing value for " + key);
            double d = parse_double(v, where);
            if (key == "r_gc") out.report.r_gc = d;
            else if (key == "r_rtb") out.report.r_rtb = d;
            else if (key == "q_gc") out.report.q_gc = d;
            else if (key == "yield") out.report.yield = d;
            else out.report.r_star = d;
        } else if (key == "delivered" || key == "shortfall") {
            auto& dst = key == "delivered" ? out.report.delivered : out.report.shortfall;
            dst.clear();
            for (const auto& t : rest_tokens()) dst.push_back(parse_int(t, where));
        } else {
            throw parse_error(where + ": unknown key '" + key + "'");
        }
    }
    if (out.method.empty()) throw parse_error(path + ": missing method");
    return out;
}

}  // namespace yieldsim
