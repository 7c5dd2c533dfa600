#include "sizecalc/reproduce.hpp"

#include <cmath>

namespace sizecalc {

namespace {

constexpr double kPhi = 0.1;
constexpr double kC = 0.7;
constexpr double kTargetSlope = 0.9;
constexpr double kTargetPrap = 0.8;

DgmDerived derived_for(const TrueModelSpec& spec, const Budget& budget, bool force_adjustment = false)
{
    const bool adjust = force_adjustment || adjustment_active(Adjustment::Auto, spec.c_stat);
    return derive(spec, adjust, budget.mc_size, budget.seed);
}

SimulationConfig config_with_mc(const Budget& budget, int p)
{
    SimulationConfig c = budget.config_for(p);
    c.mc_size = budget.mc_size;
    return c;
}

} // namespace

Budget Budget::quick()
{
    Budget b;
    b.name = "quick";
    b.n_sim = 500;
    b.n_val = 20'000;
    b.mc_size = 200'000;
    // MC standard errors scale with 1/sqrt(n_sim): sqrt(2000 / 500).
    b.tolerance_widening = 2.0;
    return b;
}

Budget Budget::paper()
{
    return Budget{};
}

Budget Budget::named(const std::string& name)
{
    if (name == "quick")
        return quick();
    if (name == "paper")
        return paper();
    fail(ErrorKind::InvalidArgument, "budget must be quick or paper");
}

SimulationConfig Budget::config_for(int p) const
{
    SimulationConfig c = SimulationConfig::defaults_for(p);
    if (n_sim > 0)
        c.n_sim = n_sim;
    c.n_val = n_val;
    c.seed = seed;
    c.workers = workers;
    c.mc_size = mc_size;
    return c;
}

std::vector<Table2Row> reproduce_table2(const Budget& budget, const std::vector<double>& c_values)
{
    std::vector<Table2Row> rows;
    const SimulationConfig config = config_with_mc(budget, 10);
    for (double c : c_values) {
        const TrueModelSpec spec{kPhi, c, 10};
        const DgmDerived d = derived_for(spec, budget, true);
        Table2Row row;
        row.c_stat = c;
        row.c_adj = d.c_adj;
        row.n_original = analytic_n_for_expected(spec, kTargetSlope, d, Adjustment::Off).n;
        row.n_adjusted = analytic_n_for_expected(spec, kTargetSlope, d, Adjustment::On).n;
        const PerformanceSummary orig = summarize(simulate_performance(spec, row.n_original, config), Measure::CalSlope);
        const PerformanceSummary adj = summarize(simulate_performance(spec, row.n_adjusted, config), Measure::CalSlope);
        row.es_original = orig.mean;
        row.median_original = orig.q50;
        row.es_adjusted = adj.mean;
        row.median_adjusted = adj.q50;
        rows.push_back(row);
    }
    return rows;
}

std::vector<Table3Row> reproduce_table3(const Budget& budget, const std::vector<int>& predictors,
                                        const std::vector<double>& prevalences, bool all_sizes)
{
    std::vector<Table3Row> rows;
    for (int p : predictors) {
        SimulationConfig config = config_with_mc(budget, p);
        config.n_val = kTable3ValidationSize;
        for (double phi : prevalences) {
            const TrueModelSpec spec{phi, kC, p};
            const LinearPredictorParams params = calibrate_linear_predictor(spec);
            const Index big_n = analytic_n_for_prap(spec, {}, kTargetPrap, derived_for(spec, budget)).n;

            std::vector<std::pair<std::string, Index>> sizes{{"N", big_n}};
            if (all_sizes) {
                sizes.emplace_back("3N/4", Index(std::ceil(0.75 * double(big_n))));
                sizes.emplace_back("N/2", Index(std::ceil(0.5 * double(big_n))));
            }
            for (const auto& [label, n] : sizes) {
                const PerformanceSummary s = summarize(simulate_performance(params, n, config), Measure::CalSlope);
                Table3Row row;
                row.p = p;
                row.prevalence = phi;
                row.size_label = label;
                row.n = n;
                row.es_sim = s.mean;
                row.sd_sim = s.sd;
                row.sd_approx = std::sqrt(slope_variance(s.mean, phi, kC, double(n)));
                row.ratio = row.sd_sim / row.sd_approx;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

std::vector<Fig1Row> reproduce_fig1(const Budget& budget, const std::vector<int>& predictors)
{
    std::vector<Fig1Row> rows;
    for (int p : predictors) {
        const TrueModelSpec spec{kPhi, kC, p};
        const SimulationConfig config = config_with_mc(budget, p);
        const Index n = find_n_expected(spec, kTargetSlope, config).n;
        const PerformanceSummary s = summarize(simulate_performance(spec, n, config), Measure::CalSlope);
        rows.push_back({p, n, s.mean, s.sd, s.mean - 1.96 * s.sd, s.mean + 1.96 * s.sd, s.prap});
    }
    return rows;
}

std::vector<Fig2Row> reproduce_fig2(const Budget& budget, const std::vector<int>& predictors)
{
    std::vector<Fig2Row> rows;
    for (int p : predictors) {
        const TrueModelSpec spec{kPhi, kC, p};
        const SimulationConfig config = config_with_mc(budget, p);
        Fig2Row row;
        row.p = p;
        row.n_standard = find_n_expected(spec, kTargetSlope, config).n;
        row.n_new = find_n_prap(spec, {}, kTargetPrap, config).n;
        row.ratio = double(row.n_new) / double(row.n_standard);
        const PerformanceSummary s = summarize(simulate_performance(spec, row.n_new, config), Measure::CalSlope);
        row.mean_slope_new = s.mean;
        row.lower95_new = s.mean - 1.96 * s.sd;
        row.upper95_new = s.mean + 1.96 * s.sd;
        row.prap_new = s.prap;
        rows.push_back(row);
    }
    return rows;
}

std::vector<Fig3Row> reproduce_fig3(const Budget& budget, const std::vector<int>& predictors)
{
    std::vector<Fig3Row> rows;
    for (int p : predictors) {
        const TrueModelSpec spec{kPhi, kC, p};
        const SimulationConfig config = config_with_mc(budget, p);
        Fig3Row row;
        row.p = p;
        row.n_simulation = find_n_prap(spec, {}, kTargetPrap, config).n;
        row.n_analytic = analytic_n_for_prap(spec, {}, kTargetPrap, derived_for(spec, budget)).n;
        row.prap_at_simulation_n =
            summarize(simulate_performance(spec, row.n_simulation, config), Measure::CalSlope).prap;
        row.prap_at_analytic_n =
            summarize(simulate_performance(spec, row.n_analytic, config), Measure::CalSlope).prap;
        rows.push_back(row);
    }
    return rows;
}

std::vector<Fig4Row> reproduce_fig4(const Budget& budget, const std::vector<int>& predictors)
{
    std::vector<Fig4Row> rows;
    for (int p : predictors) {
        const TrueModelSpec spec{kPhi, kC, p};
        const ShrinkageComparison cmp = shrinkage_experiment(spec, config_with_mc(budget, p));
        for (const ShrinkageRow& r : cmp.rows)
            rows.push_back({p, r});
    }
    return rows;
}

CaseStudy reproduce_case_study(const Budget& budget)
{
    CaseStudy cs;
    cs.spec = TrueModelSpec{kCaseStudyPrevalence, kCaseStudyCStat, kCaseStudyPredictors};
    const DgmDerived d = derived_for(cs.spec, budget);
    cs.n_standard_analytic = analytic_n_for_expected(cs.spec, kTargetSlope, d).n;
    cs.n_new_analytic = analytic_n_for_prap(cs.spec, {}, kTargetPrap, d).n;
    const SimulationConfig config = config_with_mc(budget, kCaseStudyPredictors);
    cs.n_standard_simulation = find_n_expected(cs.spec, kTargetSlope, config, cs.n_standard_analytic).n;
    cs.n_new_simulation = find_n_prap(cs.spec, {}, kTargetPrap, config, cs.n_new_analytic).n;
    return cs;
}

std::vector<int> default_predictor_grid(const std::string& what, const Budget& budget)
{
    const bool quick = budget.name == "quick";
    if (what == "fig4")
        return quick ? std::vector<int>{6, 10} : std::vector<int>{4, 6, 10, 16, 28};
    if (what == "fig1")
        return quick ? std::vector<int>{5, 8, 12, 20} : std::vector<int>{4, 5, 6, 8, 10, 12, 16, 20, 28};
    return quick ? std::vector<int>{5, 6, 10, 20} : std::vector<int>{4, 5, 6, 8, 10, 12, 16, 20, 28};
}

} // namespace sizecalc
