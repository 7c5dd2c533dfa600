#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sizecalc/analytic.hpp"
#include "sizecalc/montecarlo.hpp"
#include "sizecalc/shrinkage.hpp"

namespace sizecalc {

// Simulation budget behind the reproduction runners.
struct Budget {
    std::string name = "paper";
    Index n_sim = 0;  // 0: SimulationConfig::defaults_for(p)
    Index n_val = 50'000;
    Index mc_size = kDefaultMcSize;
    std::uint64_t seed = kDefaultSeed;
    int workers = 0;
    // Multiplier applied to Monte Carlo tolerances relative to the full budget.
    double tolerance_widening = 1.0;

    static Budget quick();
    static Budget paper();
    static Budget named(const std::string& name);

    SimulationConfig config_for(int p) const;
};

struct Table2Row {
    double c_stat = 0.0;
    double c_adj = 0.0;
    Index n_original = 0;
    Index n_adjusted = 0;
    double es_original = 0.0;
    double es_adjusted = 0.0;
    double median_original = 0.0;
    double median_adjusted = 0.0;
};

std::vector<Table2Row> reproduce_table2(const Budget& budget,
                                        const std::vector<double>& c_values = {0.65, 0.7, 0.75, 0.8, 0.85, 0.9});

struct Table3Row {
    int p = 0;
    double prevalence = 0.0;
    std::string size_label;  // "N", "3N/4", "N/2"
    Index n = 0;
    double es_sim = 0.0;
    double sd_sim = 0.0;
    double sd_approx = 0.0;
    double ratio = 0.0;
};

// N is the analytic PrAP = 0.8 size; validation sets use this many rows.
inline constexpr Index kTable3ValidationSize = 100'000;

std::vector<Table3Row> reproduce_table3(const Budget& budget, const std::vector<int>& predictors = {5, 10, 20},
                                        const std::vector<double>& prevalences = {0.1, 0.3, 0.5},
                                        bool all_sizes = true);

struct Fig1Row {
    int p = 0;
    Index n = 0;
    double mean_slope = 0.0;
    double sd_slope = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
    double prap = 0.0;
};

std::vector<Fig1Row> reproduce_fig1(const Budget& budget, const std::vector<int>& predictors);

struct Fig2Row {
    int p = 0;
    Index n_standard = 0;
    Index n_new = 0;
    double ratio = 0.0;
    double mean_slope_new = 0.0;
    double lower95_new = 0.0;
    double upper95_new = 0.0;
    double prap_new = 0.0;
};

std::vector<Fig2Row> reproduce_fig2(const Budget& budget, const std::vector<int>& predictors);

struct Fig3Row {
    int p = 0;
    Index n_simulation = 0;
    Index n_analytic = 0;
    double prap_at_simulation_n = 0.0;
    double prap_at_analytic_n = 0.0;
};

std::vector<Fig3Row> reproduce_fig3(const Budget& budget, const std::vector<int>& predictors);

struct Fig4Row {
    int p = 0;
    ShrinkageRow row;
};

std::vector<Fig4Row> reproduce_fig4(const Budget& budget, const std::vector<int>& predictors);

struct CaseStudy {
    TrueModelSpec spec;
    Index n_standard_analytic = 0;
    Index n_new_analytic = 0;
    Index n_standard_simulation = 0;
    Index n_new_simulation = 0;
};

inline constexpr double kCaseStudyPrevalence = 0.06973;
inline constexpr double kCaseStudyCStat = 0.731;
inline constexpr int kCaseStudyPredictors = 11;

CaseStudy reproduce_case_study(const Budget& budget);

std::vector<int> default_predictor_grid(const std::string& what, const Budget& budget);

} // namespace sizecalc
