#include "sizecalc/dgm.hpp"

#include <cmath>
#include <string>

#include "sizecalc/errors.hpp"
#include "sizecalc/normal.hpp"
#include "sizecalc/quadrature.hpp"
#include "sizecalc/roots.hpp"

namespace sizecalc {

namespace {

constexpr double kSigmaMax = 30.0;

// One row of the standard DGM: covariates into `row`, returns the outcome.
inline double draw_row(const LinearPredictorParams& params, Rng& rng, NormalSource& normal,
                       Eigen::Ref<Eigen::RowVectorXd> row, const RowSampler& sampler, double& prob)
{
    if (sampler) {
        sampler(rng, row);
    } else {
        for (Index j = 0; j < row.size(); ++j)
            row[j] = normal(rng);
    }
    const double eta = params.beta0 + params.beta * row.sum();
    prob = expit(eta);
    return uniform01(rng) < prob ? 1.0 : 0.0;
}

} // namespace

void TrueModelSpec::validate() const
{
    require(prevalence > 0.0 && prevalence < 1.0, "prevalence must be in (0,1)");
    require(c_stat > 0.5 && c_stat < 1.0, "C-statistic must be in (0.5,1)");
    require(n_predictors >= 1, "number of predictors must be at least 1");
}

LinearPredictorParams LinearPredictorParams::from_moments(double mu, double sigma, int p)
{
    require(p >= 1, "number of predictors must be at least 1");
    require(sigma >= 0.0, "sigma must be non-negative");
    LinearPredictorParams params;
    params.mu = mu;
    params.sigma = sigma;
    params.beta0 = mu;
    params.beta = sigma / std::sqrt(double(p));
    params.p = p;
    return params;
}

VectorXd LinearPredictorParams::coefficients() const
{
    VectorXd beta_all = VectorXd::Constant(p + 1, beta);
    beta_all[0] = beta0;
    return beta_all;
}

CalibrationCheck implied_performance(double mu, double sigma)
{
    return {logistic_normal_mean(mu, sigma), logistic_normal_concordance(mu, sigma)};
}

double solve_intercept(double prevalence, double sigma)
{
    require(prevalence > 0.0 && prevalence < 1.0, "prevalence must be in (0,1)");
    return brent([&](double mu) { return logistic_normal_mean(mu, sigma) - prevalence; }, -60.0, 60.0, 1e-13);
}

LinearPredictorParams calibrate_linear_predictor(const TrueModelSpec& spec, double tol)
{
    spec.validate();
    require(tol > 0.0, "calibration tolerance must be positive");

    auto c_at = [&](double sigma) {
        return logistic_normal_concordance(solve_intercept(spec.prevalence, sigma), sigma);
    };
    const double c_max = c_at(kSigmaMax);
    if (spec.c_stat >= c_max - tol)
        fail(ErrorKind::NoSolution, "C-statistic " + std::to_string(spec.c_stat)
                                        + " is too close to 1 for this prevalence");

    const double sigma = brent([&](double s) { return c_at(s) - spec.c_stat; }, 0.0, kSigmaMax, 1e-12);
    const double mu = solve_intercept(spec.prevalence, sigma);

    const CalibrationCheck achieved = implied_performance(mu, sigma);
    if (std::fabs(achieved.prevalence - spec.prevalence) > tol || std::fabs(achieved.c_stat - spec.c_stat) > tol)
        fail(ErrorKind::NoSolution, "calibration did not reach the target within tolerance");
    return LinearPredictorParams::from_moments(mu, sigma, spec.n_predictors);
}

Dataset generate_dataset(const LinearPredictorParams& params, Index n, Rng& rng, const RowSampler& sampler)
{
    require(n >= 1, "dataset size must be at least 1");
    Dataset data;
    data.outcomes.resize(n);
    data.covariates.resize(n, params.p);
    VectorXd probs(n);
    NormalSource normal;
    Eigen::RowVectorXd row(params.p);
    for (Index i = 0; i < n; ++i) {
        double prob = 0.0;
        data.outcomes[i] = draw_row(params, rng, normal, row, sampler, prob);
        data.covariates.row(i) = row;
        probs[i] = prob;
    }
    data.true_probs = std::move(probs);
    return data;
}

Dataset generate_dataset(const LinearPredictorParams& params, Index n, std::uint64_t seed, const RowSampler& sampler)
{
    Rng rng = make_stream(seed, 0, StreamTag::Train);
    return generate_dataset(params, n, rng, sampler);
}

double cox_snell_r2(const LinearPredictorParams& params, Index mc_size, std::uint64_t seed)
{
    require(mc_size >= 100'000, "Cox-Snell R^2 needs mc_size >= 1e5");
    Rng rng = make_stream(seed, 0, StreamTag::CoxSnell);
    NormalSource normal;
    double loglik_true = 0.0;
    double events = 0.0;
    for (Index i = 0; i < mc_size; ++i) {
        const double eta = params.mu + params.sigma * normal(rng);
        const double prob = clamp_prob(expit(eta));
        const bool y = uniform01(rng) < prob;
        loglik_true += y ? std::log(prob) : std::log1p(-prob);
        events += y ? 1.0 : 0.0;
    }
    const double n = double(mc_size);
    const double rate = clamp_prob(events / n);
    const double loglik_null = events * std::log(rate) + (n - events) * std::log1p(-rate);
    return 1.0 - std::exp(2.0 * (loglik_null - loglik_true) / n);
}

double cox_snell_r2(const TrueModelSpec& spec, Index mc_size, std::uint64_t seed)
{
    return cox_snell_r2(calibrate_linear_predictor(spec), mc_size, seed);
}

VectorXd lda_log_odds(const Dataset& data)
{
    data.validate();
    const Index p = data.n_predictors();
    VectorXd sum1 = VectorXd::Zero(p), sum0 = VectorXd::Zero(p);
    VectorXd sq1 = VectorXd::Zero(p), sq0 = VectorXd::Zero(p);
    double n1 = 0, n0 = 0;
    for (Index i = 0; i < data.size(); ++i) {
        const auto row = data.covariates.row(i).transpose();
        if (data.outcomes[i] != 0) {
            sum1 += row;
            sq1 += row.cwiseAbs2();
            n1 += 1;
        } else {
            sum0 += row;
            sq0 += row.cwiseAbs2();
            n0 += 1;
        }
    }
    if (n1 < 2 || n0 < 2)
        fail(ErrorKind::DegenerateOutcome, "LDA log-odds need at least two rows per class");
    const VectorXd mean1 = sum1 / n1, mean0 = sum0 / n0;
    const VectorXd ss1 = sq1 - n1 * mean1.cwiseAbs2();
    const VectorXd ss0 = sq0 - n0 * mean0.cwiseAbs2();
    const VectorXd pooled = (ss1 + ss0) / (n1 + n0 - 2.0);
    return (mean1 - mean0).cwiseQuotient(pooled);
}

AdjustedC adjusted_c_detail(const TrueModelSpec& spec, Index mc_size, std::uint64_t seed)
{
    require(mc_size >= 1000, "adjusted C needs mc_size >= 1000");
    const LinearPredictorParams params = calibrate_linear_predictor(spec);

    // Same draws as generate_dataset on this stream, accumulated without
    // materializing the mc_size x p matrix.
    Rng rng = make_stream(seed, 0, StreamTag::AdjustedC);
    NormalSource normal;
    const Index p = params.p;
    Eigen::RowVectorXd row(p);
    Eigen::RowVectorXd sum1 = Eigen::RowVectorXd::Zero(p), sum0 = Eigen::RowVectorXd::Zero(p);
    Eigen::RowVectorXd sq1 = Eigen::RowVectorXd::Zero(p), sq0 = Eigen::RowVectorXd::Zero(p);
    double n1 = 0, n0 = 0;
    for (Index i = 0; i < mc_size; ++i) {
        double prob = 0.0;
        if (draw_row(params, rng, normal, row, {}, prob) != 0) {
            sum1 += row;
            sq1 += row.cwiseAbs2();
            n1 += 1;
        } else {
            sum0 += row;
            sq0 += row.cwiseAbs2();
            n0 += 1;
        }
    }
    if (n1 < 2 || n0 < 2)
        fail(ErrorKind::DegenerateOutcome, "simulated dataset lacks events or non-events");
    const Eigen::RowVectorXd mean1 = sum1 / n1, mean0 = sum0 / n0;
    const Eigen::RowVectorXd pooled =
        ((sq1 - n1 * mean1.cwiseAbs2()) + (sq0 - n0 * mean0.cwiseAbs2())) / (n1 + n0 - 2.0);

    AdjustedC out;
    out.lda_log_odds = (mean1 - mean0).cwiseQuotient(pooled).transpose();
    // X ~ N(0, I) marginally, so sum_j delta_j X_j has sd ||delta||. The
    // marginal logistic model on that predictor gets its own intercept to
    // keep the prevalence.
    out.lda_sigma = out.lda_log_odds.norm();
    const double mu = solve_intercept(spec.prevalence, out.lda_sigma);
    out.c_adj = logistic_normal_concordance(mu, out.lda_sigma);
    out.small_sample_warning = mc_size < 1'000'000;
    return out;
}

double adjusted_c(const TrueModelSpec& spec, Index mc_size, std::uint64_t seed)
{
    return adjusted_c_detail(spec, mc_size, seed).c_adj;
}

DgmDerived derive(const TrueModelSpec& spec, bool with_adjustment, Index mc_size, std::uint64_t seed)
{
    spec.validate();
    DgmDerived d;
    d.mc_size = mc_size;
    d.seed = seed;
    d.r2_cs = cox_snell_r2(spec, mc_size, seed);
    d.c_adj = spec.c_stat;
    d.c_adj_single = spec.c_stat;
    d.r2_cs_adj = d.r2_cs;
    if (with_adjustment) {
        d.c_adj = adjusted_c(spec, mc_size, seed);
        TrueModelSpec single = spec;
        single.n_predictors = 1;
        d.c_adj_single = adjusted_c(single, mc_size, seed);
        TrueModelSpec at_adjusted = spec;
        at_adjusted.c_stat = d.c_adj;
        d.r2_cs_adj = cox_snell_r2(at_adjusted, mc_size, seed);
        d.has_adjustment = true;
    }
    return d;
}

} // namespace sizecalc
