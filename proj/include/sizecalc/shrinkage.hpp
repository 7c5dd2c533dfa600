#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sizecalc/logistic.hpp"
#include "sizecalc/montecarlo.hpp"

namespace sizecalc {

struct ShrunkModel {
    double lsf = 1.0;
    VectorXd slopes;
    double intercept = 0.0;
    FittedLogistic base;
    int bootstraps_used = 0;
    int bootstrap_failures = 0;

    VectorXd coefficients() const
    {
        VectorXd beta(slopes.size() + 1);
        beta << intercept, slopes;
        return beta;
    }
};

struct LsfEstimate {
    double lsf = 1.0;
    int bootstraps_used = 0;
    int bootstrap_failures = 0;
    std::vector<double> slopes;  // per successful bootstrap, in index order
};

// Mean over bootstrap refits of the calibration slope of each refit's linear
// predictor on the original sample. `start` warm-starts the refits.
LsfEstimate bootstrap_lsf_detail(const Dataset& data, int bootstraps, std::uint64_t seed,
                                 const std::optional<VectorXd>& start = std::nullopt, int workers = 1);
double bootstrap_lsf(const Dataset& data, int bootstraps, std::uint64_t seed);

// Shrinks slopes by lsf and refits the intercept with the shrunk linear
// predictor as offset.
ShrunkModel apply_lsf(const FittedLogistic& base, double lsf, const Dataset& data);

struct ShrinkageRow {
    std::string label;   // "Standard", "Standard+LSF", "New", "New+LSF"
    Index n = 0;
    FitMethod method = FitMethod::MLE;
    PerformanceSummary slope;
    Index n_failed = 0;
    Index lsf_above_one = 0;
};

struct ShrinkageComparison {
    Index n_standard = 0;
    Index n_new = 0;
    std::vector<ShrinkageRow> rows;
};

// MLE vs MLE+LSF at the expected-slope and PrAP sample
// sizes, sharing training and validation streams across methods. Sizes are
// searched by simulation unless supplied.
ShrinkageComparison shrinkage_experiment(const TrueModelSpec& spec, const SimulationConfig& config,
                                         const AcceptanceInterval& interval = {},
                                         std::optional<Index> n_standard = std::nullopt,
                                         std::optional<Index> n_new = std::nullopt,
                                         double target_es = 0.9, double target_prap = 0.8);

} // namespace sizecalc
