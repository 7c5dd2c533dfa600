#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "sizecalc/cli.hpp"

namespace sizecalc::cli {

using nlohmann::json;

std::string csv_field(const std::string& value)
{
    if (value.find_first_of(",\"\r\n") == std::string::npos)
        return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"')
            quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string csv_number(double value)
{
    if (!std::isfinite(value))
        return "";
    std::ostringstream s;
    s << std::setprecision(10) << value;
    return s.str();
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out << ',';
        out << csv_field(fields[i]);
    }
    out << "\r\n";
}

json to_json(const TrueModelSpec& spec)
{
    return {{"prevalence", spec.prevalence}, {"c_stat", spec.c_stat}, {"n_predictors", spec.n_predictors}};
}

json to_json(const AnalyticResult& r)
{
    return {{"n", r.n},
            {"n_real", r.n_real},
            {"expected_slope", r.expected_slope},
            {"slope_sd", r.slope_sd},
            {"prap", r.prap},
            {"r2_cs", r.r2_cs},
            {"c_formula", r.used_c},
            {"c_variance", r.used_c_variance},
            {"adjusted", r.adjusted}};
}

json to_json(const SampleSizeSearchResult& r)
{
    json probes = json::array();
    for (const auto& [n, v] : r.iterations)
        probes.push_back({{"n", n}, {"achieved", v}});
    return {{"n", r.n},
            {"target", r.target},
            {"achieved", r.achieved},
            {"mcse", r.mcse},
            {"analytic_seed_n", r.analytic_seed_n},
            {"probes", probes}};
}

json to_json(const PerformanceSummary& s)
{
    return {{"mean", s.mean},
            {"sd", s.sd},
            {"prap", s.prap},
            {"mcse_mean", s.mcse_mean},
            {"mcse_prap", s.mcse_prap},
            {"q025", s.q025},
            {"q50", s.q50},
            {"q975", s.q975},
            {"count", s.count}};
}

json to_json(const DgmDerived& d)
{
    json j = {{"r2_cs", d.r2_cs}, {"mc_size", d.mc_size}};
    if (d.has_adjustment) {
        j["c_adj"] = d.c_adj;
        j["c_adj_single"] = d.c_adj_single;
        j["r2_cs_adj"] = d.r2_cs_adj;
    }
    return j;
}

json make_report(json inputs, json result, json diagnostics, std::uint64_t seed)
{
    json report = json::object();
    report["inputs"] = std::move(inputs);
    report["result"] = std::move(result);
    report["diagnostics"] = std::move(diagnostics);
    report["seed"] = seed;
    report["version"] = kVersion;
    return report;
}

namespace {

void print_value(std::ostream& out, const std::string& key, const json& value, int depth)
{
    const std::string indent(std::size_t(2 * depth), ' ');
    if (value.is_object()) {
        out << indent << key << ":\n";
        for (const auto& [k, v] : value.items())
            print_value(out, k, v, depth + 1);
    } else if (value.is_array()) {
        out << indent << key << ":";
        bool flat = true;
        for (const auto& v : value)
            flat = flat && !v.is_structured();
        if (flat) {
            for (const auto& v : value)
                out << ' ' << v.dump();
            out << '\n';
        } else {
            out << '\n';
            for (const auto& v : value) {
                out << indent << "  -";
                for (const auto& [k, x] : v.items())
                    out << ' ' << k << '=' << x.dump();
                out << '\n';
            }
        }
    } else if (value.is_number_float()) {
        out << indent << key << ": " << std::setprecision(6) << value.get<double>() << '\n';
    } else if (value.is_string()) {
        out << indent << key << ": " << value.get<std::string>() << '\n';
    } else {
        out << indent << key << ": " << value.dump() << '\n';
    }
}

} // namespace

void print_text(std::ostream& out, const json& report)
{
    for (const char* section : {"result", "diagnostics", "inputs"}) {
        if (report.contains(section) && !report[section].empty())
            print_value(out, section, report[section], 0);
    }
    out << "seed: " << report.value("seed", std::uint64_t(0)) << '\n';
}

} // namespace sizecalc::cli
