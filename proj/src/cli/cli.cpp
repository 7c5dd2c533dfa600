#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include <CLI11.hpp>

#include "sizecalc/cli.hpp"

namespace sizecalc::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    double prev = 0.1;
    double cstat = 0.7;
    int predictors = 10;
    double target_slope = 0.9;
    double target_prap = 0.8;
    double lower = 0.85;
    double upper = 1.15;
    std::string method = "analytic";
    std::string adjust = "auto";
    std::string fit = "mle";
    std::uint64_t seed = kDefaultSeed;
    bool json_out = false;
    int workers = 0;
    Index mc_size = kDefaultMcSize;
    Index n_sim = 0;
    Index n_val = 50'000;
    Index n = 0;
    int lsf_bootstraps = 200;
    bool fast = false;
    bool shared_validation = false;
    std::string dump;
    std::string config;
    std::string what;
    std::string out_dir;
    std::string budget = "quick";
};

template <typename F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument)
            throw;
        throw StageError(name, e);
    }
}

Adjustment parse_adjust(const std::string& s)
{
    if (s == "on")
        return Adjustment::On;
    if (s == "off")
        return Adjustment::Off;
    return Adjustment::Auto;
}

void add_scenario(CLI::App* sub, Options& o)
{
    sub->add_option("--prev", o.prev, "outcome prevalence in (0,1)")->capture_default_str();
    sub->add_option("--cstat", o.cstat, "C-statistic of the true model in (0.5,1)")->capture_default_str();
    sub->add_option("--predictors", o.predictors, "number of candidate predictors")->capture_default_str();
}

void add_common(CLI::App* sub, Options& o)
{
    sub->add_option("--seed", o.seed, "master seed (fallback: SIZECALC_SEED, then 12345)");
    sub->add_flag("--json", o.json_out, "emit a JSON report");
    sub->add_option("--workers", o.workers, "worker threads, 0 = all cores")->capture_default_str();
    sub->add_option("--mc-size", o.mc_size, "Monte Carlo size for R^2_CS and adjusted C")->capture_default_str();
    sub->add_option("--config", o.config, "scenario file of key = value lines; flags override it");
}

void add_simulation(CLI::App* sub, Options& o)
{
    sub->add_option("--n-sim", o.n_sim, "training replicates (default 3000 for p <= 6, else 2000)");
    sub->add_option("--n-val", o.n_val, "validation rows per replicate")->capture_default_str();
    sub->add_option("--fit", o.fit, "fitting method")
        ->check(CLI::IsMember({"mle", "mle-lsf"}))
        ->capture_default_str();
    sub->add_option("--lsf-bootstraps", o.lsf_bootstraps, "bootstraps per LSF estimate")->capture_default_str();
    sub->add_flag("--fast-coefficients", o.fast, "draw coefficients from the large-sample normal law");
    sub->add_flag("--shared-validation", o.shared_validation, "one validation set for every replicate");
}

void add_interval(CLI::App* sub, Options& o)
{
    sub->add_option("--lower", o.lower, "lower end of the acceptable slope range")->capture_default_str();
    sub->add_option("--upper", o.upper, "upper end of the acceptable slope range")->capture_default_str();
}

void add_method(CLI::App* sub, Options& o)
{
    sub->add_option("--method", o.method, "calculation track")
        ->check(CLI::IsMember({"analytic", "simulation", "both"}))
        ->capture_default_str();
    sub->add_option("--adjust", o.adjust, "adjusted-C correction (auto: when C >= 0.8)")
        ->check(CLI::IsMember({"auto", "on", "off"}))
        ->capture_default_str();
}

// Fills options the command line left unset from the scenario file.
void apply_scenario(CLI::App* sub, const std::map<std::string, std::string>& values)
{
    for (const auto& [key, value] : values) {
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
        if (!opt)
            throw UsageError("unknown key '" + key + "' in scenario file for " + sub->get_name());
        if (opt->count() > 0)
            continue;
        try {
            opt->add_result(value);
            opt->run_callback();
        } catch (const CLI::Error& e) {
            throw UsageError("scenario key '" + key + "': " + e.what());
        }
    }
}

std::uint64_t seed_from_env(std::uint64_t fallback)
{
    const char* env = std::getenv("SIZECALC_SEED");
    if (!env || !*env)
        return fallback;
    try {
        std::size_t used = 0;
        const std::string s(env);
        const unsigned long long v = std::stoull(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("SIZECALC_SEED is not an unsigned integer: ") + env);
    }
}

TrueModelSpec spec_of(const Options& o)
{
    TrueModelSpec spec{o.prev, o.cstat, o.predictors};
    spec.validate();
    return spec;
}

AcceptanceInterval interval_of(const Options& o)
{
    AcceptanceInterval interval{o.lower, o.upper};
    interval.validate();
    return interval;
}

SimulationConfig config_of(const Options& o)
{
    SimulationConfig c = SimulationConfig::defaults_for(o.predictors);
    if (o.n_sim > 0)
        c.n_sim = o.n_sim;
    c.n_val = o.n_val;
    c.seed = o.seed;
    c.workers = o.workers;
    c.mc_size = o.mc_size;
    c.fit_method = o.fit == "mle-lsf" ? FitMethod::MLE_LSF : FitMethod::MLE;
    c.lsf_bootstraps = o.lsf_bootstraps;
    c.fast_coefficients = o.fast;
    c.shared_validation = o.shared_validation;
    c.validate();
    require(o.workers >= 0, "workers must be non-negative");
    return c;
}

json simulation_inputs(const SimulationConfig& c)
{
    return {{"n_sim", c.n_sim},
            {"n_val", c.n_val},
            {"fit", to_string(c.fit_method)},
            {"fast_coefficients", c.fast_coefficients},
            {"shared_validation", c.shared_validation}};
}

void emit(std::ostream& out, const Options& o, const json& report)
{
    if (o.json_out)
        out << report.dump(2) << '\n';
    else
        print_text(out, report);
}

enum class Target { ExpectedSlope, Prap };

int cmd_sizing(const Options& o, Target target, std::ostream& out)
{
    const TrueModelSpec spec = spec_of(o);
    const AcceptanceInterval interval = interval_of(o);
    const Adjustment mode = parse_adjust(o.adjust);
    const bool want_sim = o.method != "analytic";
    const double goal = target == Target::Prap ? o.target_prap : o.target_slope;
    if (target == Target::Prap)
        require(goal > 0.0 && goal < 1.0, "target PrAP must be in (0,1)");
    else
        require(goal > 0.5 && goal < 1.0, "target expected slope must be in (0.5,1)");
    require(o.mc_size >= 100'000, "mc-size must be at least 100000");
    SimulationConfig config;
    if (want_sim)
        config = config_of(o);

    json inputs = to_json(spec);
    inputs[target == Target::Prap ? "target_prap" : "target_slope"] = goal;
    inputs["interval"] = {interval.lower, interval.upper};
    inputs["method"] = o.method;
    inputs["adjust"] = o.adjust;
    inputs["mc_size"] = o.mc_size;
    if (want_sim)
        inputs["simulation"] = simulation_inputs(config);

    const DgmDerived derived = stage("derive", [&] {
        return derive(spec, adjustment_active(mode, spec.c_stat), o.mc_size, o.seed);
    });
    const AnalyticResult analytic = stage("analytic", [&] {
        return target == Target::Prap ? analytic_n_for_prap(spec, interval, goal, derived, mode)
                                      : analytic_n_for_expected(spec, goal, derived, mode, interval);
    });

    json result = json::object();
    json diagnostics = json::object();
    diagnostics["dgm"] = to_json(derived);
    if (o.method != "simulation")
        result["analytic"] = to_json(analytic);

    if (want_sim) {
        const SampleSizeSearchResult search = stage("search", [&] {
            return target == Target::Prap ? find_n_prap(spec, interval, goal, config, analytic.n)
                                          : find_n_expected(spec, goal, config, analytic.n);
        });
        const PerformanceDistribution dist =
            stage("simulation", [&] { return simulate_performance(spec, search.n, config); });
        const PerformanceSummary s = summarize(dist, Measure::CalSlope, interval);
        json sim = to_json(search);
        sim["expected_slope"] = s.mean;
        sim["slope_sd"] = s.sd;
        sim["prap"] = s.prap;
        result["simulation"] = sim;
        diagnostics["simulation"] = {{"n_failed", dist.n_failed}, {"replicates_kept", dist.size()}};
    }
    emit(out, o, make_report(inputs, result, diagnostics, o.seed));
    return kExitOk;
}

int cmd_performance(const Options& o, std::ostream& out)
{
    const TrueModelSpec spec = spec_of(o);
    const AcceptanceInterval interval = interval_of(o);
    const SimulationConfig config = config_of(o);
    require(o.n > spec.n_predictors + 1, "--n must exceed predictors + 1");

    std::ofstream dump;
    if (!o.dump.empty()) {
        dump.open(o.dump, std::ios::binary);
        if (!dump)
            throw StageError("output", Error(ErrorKind::InvalidArgument, "cannot open " + o.dump));
    }

    const PerformanceDistribution dist =
        stage("simulation", [&] { return simulate_performance(spec, o.n, config); });

    json inputs = to_json(spec);
    inputs["n"] = o.n;
    inputs["interval"] = {interval.lower, interval.upper};
    inputs["simulation"] = simulation_inputs(config);

    json measures = json::object();
    for (Measure m : {Measure::CalSlope, Measure::CStat, Measure::Brier, Measure::Mape, Measure::CalInLarge})
        measures[to_string(m)] = to_json(summarize(dist, m, interval));
    json result = {{"n", dist.n}, {"measures", measures}};
    json diagnostics = {{"n_sim", dist.n_sim}, {"n_failed", dist.n_failed}};
    if (!dist.lsf.empty()) {
        const PerformanceSummary lsf = summarize(dist.lsf);
        Index above = 0;
        for (double l : dist.lsf)
            above += l > 1.0 ? 1 : 0;
        result["lsf"] = {{"mean", lsf.mean}, {"sd", lsf.sd}, {"above_one", above}};
    }
    if (dump.is_open()) {
        write_replicates_csv(dump, dist);
        dump.close();
        if (!dump)
            throw StageError("output", Error(ErrorKind::InvalidArgument, "failed writing " + o.dump));
        diagnostics["replicates_csv"] = o.dump;
    }
    emit(out, o, make_report(inputs, result, diagnostics, o.seed));
    return kExitOk;
}

int cmd_adjust_c(const Options& o, std::ostream& out)
{
    const TrueModelSpec spec = spec_of(o);
    require(o.mc_size >= 100'000, "mc-size must be at least 100000");
    const DgmDerived d = stage("adjusted-c", [&] { return derive(spec, true, o.mc_size, o.seed); });
    json inputs = to_json(spec);
    inputs["mc_size"] = o.mc_size;
    json result = {{"c_adj", d.c_adj},
                   {"c_adj_single", d.c_adj_single},
                   {"r2_cs", d.r2_cs},
                   {"r2_cs_adj", d.r2_cs_adj}};
    json diagnostics = {{"active_by_default", adjustment_active(Adjustment::Auto, spec.c_stat)},
                        {"small_sample_warning", o.mc_size < kDefaultMcSize}};
    emit(out, o, make_report(inputs, result, diagnostics, o.seed));
    return kExitOk;
}

// Collects output files so a failed run leaves nothing behind.
class OutputDir {
public:
    explicit OutputDir(const fs::path& dir) : dir_(dir)
    {
        std::error_code ec;
        created_ = fs::create_directories(dir_, ec);
        if (ec)
            throw StageError("output", Error(ErrorKind::InvalidArgument, "cannot create " + dir_.string()));
    }

    std::ofstream open(const std::string& name)
    {
        const fs::path path = dir_ / name;
        written_.push_back(path);
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw StageError("output", Error(ErrorKind::InvalidArgument, "cannot open " + path.string()));
        return f;
    }

    void rollback() noexcept
    {
        std::error_code ec;
        for (const fs::path& p : written_)
            fs::remove(p, ec);
        if (created_ && fs::is_empty(dir_, ec))
            fs::remove(dir_, ec);
    }

    std::vector<std::string> names() const
    {
        std::vector<std::string> out;
        for (const fs::path& p : written_)
            out.push_back(p.filename().string());
        return out;
    }

private:
    fs::path dir_;
    bool created_ = false;
    std::vector<fs::path> written_;
};

json tolerances_for(const std::string& what, const Budget& b)
{
    const double w = b.tolerance_widening;
    const bool quick = b.name == "quick";
    if (what == "table2")
        return {{"n_relative", 0.03}, {"c_adj_abs", 0.005}, {"expected_slope_abs", 0.02}};
    if (what == "table3")
        return {{"ratio_band", quick ? json{0.93, 1.07} : json{0.95, 1.05}}};
    if (what == "fig1")
        return {{"prap_abs", quick ? 0.07 : 0.05}};
    if (what == "fig2")
        return {{"ratio_abs", quick ? 0.15 : 0.1}};
    if (what == "fig4")
        return {{"prap_abs", 0.05 * w}};
    if (what == "case-study")
        return {{"analytic_relative", 0.02}, {"simulation_relative", 0.05}};
    return {{"mcse_widening", w}};
}

void write_outputs(const std::string& what, const Budget& budget, OutputDir& dir, json& notes)
{
    auto num = [](double v) { return csv_number(v); };
    auto cnt = [](Index v) { return std::to_string(v); };

    if (what == "table2") {
        const auto rows = stage("table2", [&] { return reproduce_table2(budget); });
        auto f = dir.open("table2.csv");
        write_csv_row(f, {"actual_c", "adjusted_c", "n_original", "n_adjusted", "es_original", "es_adjusted",
                          "median_original", "median_adjusted"});
        for (const auto& r : rows)
            write_csv_row(f, {num(r.c_stat), num(r.c_adj), cnt(r.n_original), cnt(r.n_adjusted),
                              num(r.es_original), num(r.es_adjusted), num(r.median_original),
                              num(r.median_adjusted)});
    } else if (what == "table3") {
        const auto rows = stage("table3", [&] { return reproduce_table3(budget); });
        auto f = dir.open("table3.csv");
        write_csv_row(f, {"p", "prevalence", "size", "n", "es_sim", "sd_sim", "sd_approx", "ratio"});
        for (const auto& r : rows)
            write_csv_row(f, {std::to_string(r.p), num(r.prevalence), r.size_label, cnt(r.n), num(r.es_sim),
                              num(r.sd_sim), num(r.sd_approx), num(r.ratio)});
        notes["validation_rows"] = kTable3ValidationSize;
        notes["n_source"] = "analytic PrAP = 0.8 sample size";
    } else if (what == "fig1") {
        const auto rows =
            stage("fig1", [&] { return reproduce_fig1(budget, default_predictor_grid(what, budget)); });
        auto f = dir.open("fig1.csv");
        write_csv_row(f, {"p", "n", "mean_slope", "sd_slope", "lower95", "upper95", "prap"});
        for (const auto& r : rows)
            write_csv_row(f, {std::to_string(r.p), cnt(r.n), num(r.mean_slope), num(r.sd_slope), num(r.lower95),
                              num(r.upper95), num(r.prap)});
    } else if (what == "fig2") {
        const auto rows =
            stage("fig2", [&] { return reproduce_fig2(budget, default_predictor_grid(what, budget)); });
        auto f = dir.open("fig2.csv");
        write_csv_row(f, {"p", "n_standard", "n_new", "ratio", "mean_slope_new", "lower95_new", "upper95_new",
                          "prap_new"});
        for (const auto& r : rows)
            write_csv_row(f, {std::to_string(r.p), cnt(r.n_standard), cnt(r.n_new), num(r.ratio),
                              num(r.mean_slope_new), num(r.lower95_new), num(r.upper95_new), num(r.prap_new)});
    } else if (what == "fig3") {
        const auto rows =
            stage("fig3", [&] { return reproduce_fig3(budget, default_predictor_grid(what, budget)); });
        auto f = dir.open("fig3.csv");
        write_csv_row(f, {"p", "n_simulation", "n_analytic", "prap_at_simulation_n", "prap_at_analytic_n"});
        for (const auto& r : rows)
            write_csv_row(f, {std::to_string(r.p), cnt(r.n_simulation), cnt(r.n_analytic),
                              num(r.prap_at_simulation_n), num(r.prap_at_analytic_n)});
    } else if (what == "fig4") {
        const auto rows =
            stage("fig4", [&] { return reproduce_fig4(budget, default_predictor_grid(what, budget)); });
        auto f = dir.open("fig4.csv");
        write_csv_row(f, {"p", "label", "n", "method", "mean_slope", "sd_slope", "prap", "n_failed",
                          "lsf_above_one"});
        for (const auto& r : rows)
            write_csv_row(f, {std::to_string(r.p), r.row.label, cnt(r.row.n), to_string(r.row.method),
                              num(r.row.slope.mean), num(r.row.slope.sd), num(r.row.slope.prap),
                              cnt(r.row.n_failed), cnt(r.row.lsf_above_one)});
    } else {
        const CaseStudy cs = stage("case-study", [&] { return reproduce_case_study(budget); });
        auto f = dir.open("case_study.csv");
        write_csv_row(f, {"prevalence", "c_stat", "n_predictors", "n_standard_analytic", "n_new_analytic",
                          "n_standard_simulation", "n_new_simulation"});
        write_csv_row(f, {num(cs.spec.prevalence), num(cs.spec.c_stat), std::to_string(cs.spec.n_predictors),
                          cnt(cs.n_standard_analytic), cnt(cs.n_new_analytic), cnt(cs.n_standard_simulation),
                          cnt(cs.n_new_simulation)});
        notes["prevalence_discrepancy"] = {
            {"used", kCaseStudyPrevalence},
            {"alternative", 0.6973},
            {"resolution", "prevalence is quoted both as 6.973% and as 0.6973; the percentage reading is used"}};
    }
}

int cmd_reproduce(const Options& o, std::ostream& out)
{
    Budget budget = Budget::named(o.budget);
    budget.seed = o.seed;
    require(o.workers >= 0, "workers must be non-negative");
    budget.workers = o.workers;

    OutputDir dir(o.out_dir);
    json notes = json::object();
    try {
        write_outputs(o.what, budget, dir, notes);
        json meta = {{"what", o.what},
                     {"version", kVersion},
                     {"seed", budget.seed},
                     {"budget",
                      {{"name", budget.name},
                       {"n_sim", budget.n_sim > 0 ? json(budget.n_sim) : json("3000 for p <= 6, else 2000")},
                       {"n_val", budget.n_val},
                       {"mc_size", budget.mc_size},
                       {"tolerance_widening", budget.tolerance_widening}}},
                     {"tolerances", tolerances_for(o.what, budget)},
                     {"notes", notes}};
        meta["files"] = dir.names();
        auto f = dir.open("meta.json");
        f << meta.dump(2) << '\n';
        if (!f)
            throw StageError("output", Error(ErrorKind::InvalidArgument, "failed writing meta.json"));
    } catch (...) {
        dir.rollback();
        throw;
    }

    json result = {{"out", o.out_dir}, {"files", dir.names()}};
    emit(out, o, make_report({{"what", o.what}, {"budget", budget.name}}, result, json::object(), o.seed));
    return kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Sample size for binary-outcome prediction models, targeting the expected "
                 "calibration slope or the probability of acceptable calibration."};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CLI::App* expected = app.add_subcommand("expected", "sample size for a target expected calibration slope");
    add_scenario(expected, o);
    expected->add_option("--target-slope", o.target_slope, "target E(s_n)")->capture_default_str();
    add_interval(expected, o);
    add_method(expected, o);
    add_simulation(expected, o);
    add_common(expected, o);

    CLI::App* prap = app.add_subcommand("prap", "sample size for a target probability of acceptable calibration");
    add_scenario(prap, o);
    prap->add_option("--target-prap", o.target_prap, "target P(lower <= s_n <= upper)")->capture_default_str();
    add_interval(prap, o);
    add_method(prap, o);
    add_simulation(prap, o);
    add_common(prap, o);

    CLI::App* performance = app.add_subcommand("performance", "simulated performance distribution at a given n");
    add_scenario(performance, o);
    performance->add_option("--n", o.n, "development sample size")->required();
    performance->add_option("--dump-replicates", o.dump, "write one CSV row per replicate");
    add_interval(performance, o);
    add_simulation(performance, o);
    add_common(performance, o);

    CLI::App* adjust = app.add_subcommand("adjust-c", "adjusted C-statistic and R^2_CS at both C values");
    add_scenario(adjust, o);
    add_common(adjust, o);

    CLI::App* reproduce = app.add_subcommand("reproduce", "regenerate the reference tables and figure series as CSV");
    reproduce->add_option("--what", o.what, "artifact to regenerate")
        ->required()
        ->check(CLI::IsMember({"table2", "table3", "fig1", "fig2", "fig3", "fig4", "case-study"}));
    reproduce->add_option("--out", o.out_dir, "output directory")->required();
    reproduce->add_option("--budget", o.budget, "simulation budget")
        ->check(CLI::IsMember({"quick", "paper"}))
        ->capture_default_str();
    reproduce->add_option("--seed", o.seed, "master seed (fallback: SIZECALC_SEED, then 12345)");
    reproduce->add_option("--workers", o.workers, "worker threads, 0 = all cores")->capture_default_str();
    reproduce->add_flag("--json", o.json_out, "emit a JSON report");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        if (!o.config.empty())
            apply_scenario(sub, read_scenario_file(o.config));
        if (sub->get_option("--seed")->count() == 0)
            o.seed = seed_from_env(kDefaultSeed);

        if (sub == expected)
            return cmd_sizing(o, Target::ExpectedSlope, out);
        if (sub == prap)
            return cmd_sizing(o, Target::Prap, out);
        if (sub == performance)
            return cmd_performance(o, out);
        if (sub == adjust)
            return cmd_adjust_c(o, out);
        return cmd_reproduce(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const StageError& e) {
        err << "error: " << e.what() << '\n';
        return e.kind == ErrorKind::ExcessiveFailures ? kExitQuality : kExitComputation;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        if (e.kind() == ErrorKind::InvalidArgument)
            return kExitUsage;
        return e.kind() == ErrorKind::ExcessiveFailures ? kExitQuality : kExitComputation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitComputation;
    }
}

} // namespace sizecalc::cli
