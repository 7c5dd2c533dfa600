#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sizecalc/analytic.hpp"
#include "sizecalc/dgm.hpp"
#include "sizecalc/logistic.hpp"
#include "sizecalc/measures.hpp"

namespace sizecalc {

enum class FitMethod { MLE, MLE_LSF };

enum class Measure { CalSlope, CStat, Brier, Mape, CalInLarge };

const char* to_string(FitMethod method);
const char* to_string(Measure measure);

struct SimulationConfig {
    Index n_sim = 2000;
    Index n_val = 50'000;
    std::uint64_t seed = kDefaultSeed;
    int workers = 0;  // 0: hardware concurrency
    FitMethod fit_method = FitMethod::MLE;
    bool fast_coefficients = false;
    int lsf_bootstraps = 200;
    // Size N of the reference fit behind the fast coefficient path.
    Index reference_size = 200'000;
    // One validation set reused by every replicate instead of a fresh one each.
    bool shared_validation = false;
    // Monte Carlo size for R^2_CS / adjusted C when seeding searches.
    Index mc_size = kDefaultMcSize;

    // n_sim = 3000 for p <= 6, 2000 otherwise.
    static SimulationConfig defaults_for(int p);

    void validate() const;
};

struct PerformanceDistribution {
    std::vector<Index> replicate;
    std::vector<double> cal_slope;
    std::vector<double> c_stat;
    std::vector<double> brier;
    std::vector<double> mape;
    std::vector<double> cal_in_large;
    // LSF per kept replicate (MLE_LSF only).
    std::vector<double> lsf;
    Index n = 0;
    Index n_sim = 0;
    Index n_failed = 0;
    std::uint64_t seed = 0;

    std::size_t size() const { return replicate.size(); }
    const std::vector<double>& values(Measure measure) const;
};

struct PerformanceSummary {
    double mean = 0.0;
    double sd = 0.0;
    double prap = 0.0;
    double mcse_mean = 0.0;
    double mcse_prap = 0.0;
    double q025 = 0.0;
    double q50 = 0.0;
    double q975 = 0.0;
    Index count = 0;
};

struct SampleSizeSearchResult {
    Index n = 0;
    double target = 0.0;
    double achieved = 0.0;
    double mcse = 0.0;
    std::vector<std::pair<Index, double>> iterations;
    Index analytic_seed_n = 0;
};

// Large-sample fit used by the fast coefficient path.
struct ReferenceFit {
    FittedLogistic fit;
    Index size = 0;
};

ReferenceFit build_reference_fit(const LinearPredictorParams& params, Index size, std::uint64_t seed);

// beta_n ~ N(beta, (N / n) Sigma_N) with beta the true coefficients.
VectorXd draw_coefficients_fast(const LinearPredictorParams& params, Index n, const ReferenceFit& reference,
                                std::uint64_t seed);

PerformanceDistribution simulate_performance(const TrueModelSpec& spec, Index n, const SimulationConfig& config);
PerformanceDistribution simulate_performance(const LinearPredictorParams& params, Index n,
                                             const SimulationConfig& config);

PerformanceSummary summarize(const PerformanceDistribution& dist, Measure measure,
                             const AcceptanceInterval& interval = {});
PerformanceSummary summarize(const std::vector<double>& values, const AcceptanceInterval& interval = {});

// Linear-interpolation (type 7) sample quantile of sorted values.
double sample_quantile(const std::vector<double>& sorted, double prob);

SampleSizeSearchResult find_n_expected(const TrueModelSpec& spec, double target_es, const SimulationConfig& config,
                                       std::optional<Index> seed_n = std::nullopt);

SampleSizeSearchResult find_n_prap(const TrueModelSpec& spec, const AcceptanceInterval& interval, double target,
                                   const SimulationConfig& config, std::optional<Index> seed_n = std::nullopt);

// CSV with header replicate_index,cal_slope,c_stat,brier,mape,cal_in_large.
void write_replicates_csv(std::ostream& out, const PerformanceDistribution& dist);

} // namespace sizecalc
