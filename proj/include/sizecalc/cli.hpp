#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sizecalc/analytic.hpp"
#include "sizecalc/montecarlo.hpp"
#include "sizecalc/reproduce.hpp"

namespace sizecalc::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitComputation = 3,
    kExitQuality = 4,
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation failure tagged with the pipeline stage that raised it.
struct StageError : std::runtime_error {
    StageError(std::string stage_name, const Error& error)
        : std::runtime_error(stage_name + " failed: " + error.what()), stage(std::move(stage_name)), kind(error.kind())
    {
    }
    std::string stage;
    ErrorKind kind;
};

// key = value lines, '#' comments. Duplicate keys and malformed lines throw UsageError.
std::map<std::string, std::string> read_scenario_file(const std::string& path);
std::map<std::string, std::string> parse_scenario(std::istream& in, const std::string& origin);

// CSV helpers (RFC 4180: CRLF, fields quoted when needed).
std::string csv_field(const std::string& value);
std::string csv_number(double value);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

nlohmann::json to_json(const TrueModelSpec& spec);
nlohmann::json to_json(const AnalyticResult& r);
nlohmann::json to_json(const SampleSizeSearchResult& r);
nlohmann::json to_json(const PerformanceSummary& s);
nlohmann::json to_json(const DgmDerived& d);

// Top-level report object: {inputs, result, diagnostics, seed, version}.
nlohmann::json make_report(nlohmann::json inputs, nlohmann::json result, nlohmann::json diagnostics,
                           std::uint64_t seed);

// Indented "key: value" rendering of a report for terminals.
void print_text(std::ostream& out, const nlohmann::json& report);

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sizecalc::cli
