#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "sizecalc/dataset.hpp"
#include "sizecalc/rng.hpp"

namespace sizecalc {

inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr Index kDefaultMcSize = 1'000'000;

// Assumed true model: outcome prevalence, C-statistic and predictor count.
struct TrueModelSpec {
    double prevalence = 0.1;
    double c_stat = 0.7;
    int n_predictors = 10;

    void validate() const;
};

// eta ~ N(mu, sigma^2) realized as beta0 + beta * sum_j X_j with X ~ N(0, I_p).
struct LinearPredictorParams {
    double mu = 0.0;
    double sigma = 0.0;
    double beta0 = 0.0;
    double beta = 0.0;
    int p = 1;

    static LinearPredictorParams from_moments(double mu, double sigma, int p);

    // (beta0, beta, ..., beta)
    VectorXd coefficients() const;
};

struct DgmDerived {
    double r2_cs = 0.0;           // Cox-Snell R^2 at the actual C
    double c_adj = 0.0;           // adjusted C with p predictors
    double c_adj_single = 0.0;    // adjusted C with one predictor (variance formula)
    double r2_cs_adj = 0.0;       // Cox-Snell R^2 at c_adj
    bool has_adjustment = false;
    Index mc_size = 0;
    std::uint64_t seed = 0;
};

struct CalibrationCheck {
    double prevalence = 0.0;
    double c_stat = 0.0;
};

// Model prevalence and C-statistic of eta ~ N(mu, sigma^2) by quadrature.
CalibrationCheck implied_performance(double mu, double sigma);

// Intercept mu so that E[expit(mu + sigma Z)] = prevalence.
double solve_intercept(double prevalence, double sigma);

// (mu, sigma) matching the spec's prevalence and C within tol.
LinearPredictorParams calibrate_linear_predictor(const TrueModelSpec& spec, double tol = 1e-4);

// Per-row covariate generator for non-normal predictor distributions.
using RowSampler = std::function<void(Rng&, Eigen::Ref<Eigen::RowVectorXd>)>;

// Rows are drawn in order (covariates then outcome), so the first k rows of
// a size-n draw equal a size-k draw from the same stream.
Dataset generate_dataset(const LinearPredictorParams& params, Index n, Rng& rng,
                         const RowSampler& sampler = {});
Dataset generate_dataset(const LinearPredictorParams& params, Index n, std::uint64_t seed,
                         const RowSampler& sampler = {});

double cox_snell_r2(const LinearPredictorParams& params, Index mc_size, std::uint64_t seed);
double cox_snell_r2(const TrueModelSpec& spec, Index mc_size = kDefaultMcSize, std::uint64_t seed = kDefaultSeed);

struct AdjustedC {
    double c_adj = 0.0;
    VectorXd lda_log_odds;   // per-covariate delta_j
    double lda_sigma = 0.0;  // sd of sum_j delta_j X_j
    bool small_sample_warning = false;
};

// Per-covariate LDA log-odds ratios (mean difference over pooled variance).
VectorXd lda_log_odds(const Dataset& data);

AdjustedC adjusted_c_detail(const TrueModelSpec& spec, Index mc_size = kDefaultMcSize,
                            std::uint64_t seed = kDefaultSeed);
double adjusted_c(const TrueModelSpec& spec, Index mc_size = kDefaultMcSize, std::uint64_t seed = kDefaultSeed);

// R^2 at the actual C, plus the adjusted values when with_adjustment is set.
DgmDerived derive(const TrueModelSpec& spec, bool with_adjustment, Index mc_size = kDefaultMcSize,
                  std::uint64_t seed = kDefaultSeed);

} // namespace sizecalc
