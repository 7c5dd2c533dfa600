#include "sizecalc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sizecalc/normal.hpp"
#include "sizecalc/parallel.hpp"
#include "sizecalc/rng.hpp"
#include "sizecalc/shrinkage.hpp"

namespace sizecalc {

const char* to_string(FitMethod method)
{
    return method == FitMethod::MLE ? "mle" : "mle-lsf";
}

const char* to_string(Measure measure)
{
    switch (measure) {
    case Measure::CalSlope:   return "cal_slope";
    case Measure::CStat:      return "c_stat";
    case Measure::Brier:      return "brier";
    case Measure::Mape:       return "mape";
    case Measure::CalInLarge: return "cal_in_large";
    }
    return "unknown";
}

SimulationConfig SimulationConfig::defaults_for(int p)
{
    SimulationConfig config;
    config.n_sim = p <= 6 ? 3000 : 2000;
    return config;
}

void SimulationConfig::validate() const
{
    require(n_sim >= 100, "n_sim must be at least 100");
    require(n_val >= 10'000, "n_val must be at least 10000");
    require(lsf_bootstraps >= 50, "lsf_bootstraps must be at least 50");
    require(reference_size >= 1000, "reference_size must be at least 1000");
}

const std::vector<double>& PerformanceDistribution::values(Measure measure) const
{
    switch (measure) {
    case Measure::CalSlope:   return cal_slope;
    case Measure::CStat:      return c_stat;
    case Measure::Brier:      return brier;
    case Measure::Mape:       return mape;
    case Measure::CalInLarge: return cal_in_large;
    }
    return cal_slope;
}

ReferenceFit build_reference_fit(const LinearPredictorParams& params, Index size, std::uint64_t seed)
{
    Rng rng = make_stream(seed, 0, StreamTag::Reference);
    const Dataset data = generate_dataset(params, size, rng);
    return {fit_logistic(data), size};
}

VectorXd draw_coefficients_fast(const LinearPredictorParams& params, Index n, const ReferenceFit& reference,
                                std::uint64_t seed)
{
    require(n >= 1, "sample size must be at least 1");
    const MatrixXd& cov = reference.fit.covariance;
    require(cov.rows() == params.p + 1 && cov.cols() == params.p + 1,
            "reference covariance has the wrong dimension");
    const MatrixXd scaled = cov * (double(reference.size) / double(n));
    Eigen::LLT<MatrixXd> llt(scaled);
    if (llt.info() != Eigen::Success)
        fail(ErrorKind::NonPositiveDefinite, "reference coefficient covariance is not positive definite");

    Rng rng = make_stream(seed, 0, StreamTag::Coefficients);
    NormalSource normal;
    VectorXd z(params.p + 1);
    for (Index j = 0; j < z.size(); ++j)
        z[j] = normal(rng);
    return params.coefficients() + llt.matrixL() * z;
}

namespace {

bool is_replicate_failure(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::NonConvergence:
    case ErrorKind::DegenerateOutcome:
    case ErrorKind::ConstantPredictor:
    case ErrorKind::ExcessiveFailures:
        return true;
    default:
        return false;
    }
}

// Validation rows for X ~ N(0, I_p) reduced to the two linear predictors that
// matter: true eta = mu + sigma Z1 and fitted b0 + b'X = b0 + c1 Z1 + c2 Z2,
// with c1 = b'a / |a| and c2 = |b - c1 a / |a||. Same joint law as drawing
// full rows, at two normals per row.
// Searches only read the calibration slope; the other measures are left NaN.
MeasureSet score(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const VectorXd>& lp,
                 const Eigen::Ref<const VectorXd>& truth, bool slope_only)
{
    if (!slope_only)
        return measure_predictions(y, lp, truth);
    const double nan = std::nan("");
    MeasureSet m;
    m.cal_slope = fit_calibration(y, lp).slope;
    m.cal_in_large = m.c_stat = m.brier = nan;
    return m;
}

MeasureSet validate_projected(const LinearPredictorParams& params, const VectorXd& coef, Index n_val, Rng& rng,
                              bool slope_only)
{
    const VectorXd slopes = coef.tail(params.p);
    const double slope_norm_sq = slopes.squaredNorm();
    double c1 = 0.0;
    if (params.sigma > 0.0)
        c1 = params.beta * slopes.sum() / params.sigma;
    const double c2 = std::sqrt(std::max(slope_norm_sq - c1 * c1, 0.0));

    VectorXd y(n_val), lp(n_val), truth(n_val);
    NormalSource normal;
    for (Index i = 0; i < n_val; ++i) {
        const double z1 = normal(rng);
        const double z2 = normal(rng);
        const double prob = expit(params.mu + params.sigma * z1);
        y[i] = uniform01(rng) < prob ? 1.0 : 0.0;
        lp[i] = coef[0] + c1 * z1 + c2 * z2;
        truth[i] = prob;
    }
    return score(y, lp, truth, slope_only);
}

MeasureSet validate_shared(const Dataset& validation, const VectorXd& coef, bool slope_only)
{
    const VectorXd lp = (validation.covariates * coef.tail(coef.size() - 1)).array() + coef[0];
    return score(validation.outcomes, lp, *validation.true_probs, slope_only);
}

struct ReplicateOutcome {
    bool ok = false;
    MeasureSet measures;
    double lsf = 1.0;
};

PerformanceDistribution simulate(const LinearPredictorParams& params, Index n, const SimulationConfig& config,
                                 bool slope_only)
{
    config.validate();
    require(n > params.p + 1, "training size must exceed p + 1");

    std::optional<ReferenceFit> reference;
    if (config.fast_coefficients)
        reference = build_reference_fit(params, config.reference_size, config.seed);

    std::optional<Dataset> shared;
    if (config.shared_validation) {
        Rng rng = make_stream(config.seed, 0, StreamTag::Validate);
        shared = generate_dataset(params, config.n_val, rng);
    }

    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(config.n_sim));
    parallel_for(outcomes.size(), config.workers, [&](std::size_t j) {
        ReplicateOutcome& out = outcomes[j];
        try {
            VectorXd coef;
            if (reference) {
                coef = draw_coefficients_fast(params, n, *reference,
                                              stream_seed(config.seed, j, StreamTag::Coefficients));
            } else {
                Rng train_rng = make_stream(config.seed, j, StreamTag::Train);
                const Dataset train = generate_dataset(params, n, train_rng);
                const FittedLogistic fit = fit_logistic(train);
                if (config.fit_method == FitMethod::MLE_LSF) {
                    const LsfEstimate est = bootstrap_lsf_detail(
                        train, config.lsf_bootstraps, stream_seed(config.seed, j, StreamTag::Bootstrap),
                        fit.coefficients());
                    const ShrunkModel shrunk = apply_lsf(fit, est.lsf, train);
                    coef = shrunk.coefficients();
                    out.lsf = est.lsf;
                } else {
                    coef = fit.coefficients();
                }
            }
            if (shared) {
                out.measures = validate_shared(*shared, coef, slope_only);
            } else {
                Rng val_rng = make_stream(config.seed, j, StreamTag::Validate);
                out.measures = validate_projected(params, coef, config.n_val, val_rng, slope_only);
            }
            out.ok = true;
        } catch (const Error& e) {
            if (!is_replicate_failure(e))
                throw;
            out.ok = false;
        }
    });

    PerformanceDistribution dist;
    dist.n = n;
    dist.n_sim = config.n_sim;
    dist.seed = config.seed;
    for (std::size_t j = 0; j < outcomes.size(); ++j) {
        const ReplicateOutcome& o = outcomes[j];
        if (!o.ok) {
            ++dist.n_failed;
            continue;
        }
        dist.replicate.push_back(Index(j));
        dist.cal_slope.push_back(o.measures.cal_slope);
        dist.c_stat.push_back(o.measures.c_stat);
        dist.brier.push_back(o.measures.brier);
        dist.mape.push_back(o.measures.mape.value_or(std::nan("")));
        dist.cal_in_large.push_back(o.measures.cal_in_large);
        if (config.fit_method == FitMethod::MLE_LSF && !config.fast_coefficients)
            dist.lsf.push_back(o.lsf);
    }
    if (double(dist.n_failed) > 0.05 * double(config.n_sim)) {
        std::ostringstream msg;
        msg << dist.n_failed << " of " << config.n_sim << " replicates failed at n = " << n;
        fail(ErrorKind::ExcessiveFailures, msg.str());
    }
    return dist;
}

} // namespace

PerformanceDistribution simulate_performance(const LinearPredictorParams& params, Index n,
                                             const SimulationConfig& config)
{
    return simulate(params, n, config, false);
}

PerformanceDistribution simulate_performance(const TrueModelSpec& spec, Index n, const SimulationConfig& config)
{
    LinearPredictorParams params;
    try {
        params = calibrate_linear_predictor(spec);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument)
            throw;
        fail(ErrorKind::CalibrationFailure, e.what());
    }
    return simulate_performance(params, n, config);
}

double sample_quantile(const std::vector<double>& sorted, double prob)
{
    require(!sorted.empty(), "quantile of an empty sample");
    const double h = (double(sorted.size()) - 1.0) * prob;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

PerformanceSummary summarize(const std::vector<double>& values, const AcceptanceInterval& interval)
{
    if (values.empty())
        fail(ErrorKind::EmptyDistribution, "no replicates to summarize");
    PerformanceSummary s;
    const double count = double(values.size());
    s.count = Index(values.size());
    double sum = 0.0;
    std::size_t inside = 0;
    for (double v : values) {
        sum += v;
        if (interval.contains(v))
            ++inside;
    }
    s.mean = sum / count;
    double ss = 0.0;
    for (double v : values)
        ss += (v - s.mean) * (v - s.mean);
    s.sd = values.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    s.prap = double(inside) / count;
    s.mcse_mean = s.sd / std::sqrt(count);
    s.mcse_prap = std::sqrt(s.prap * (1.0 - s.prap) / count);

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    s.q025 = sample_quantile(sorted, 0.025);
    s.q50 = sample_quantile(sorted, 0.5);
    s.q975 = sample_quantile(sorted, 0.975);
    return s;
}

PerformanceSummary summarize(const PerformanceDistribution& dist, Measure measure, const AcceptanceInterval& interval)
{
    return summarize(dist.values(measure), interval);
}

namespace {

struct Probe {
    double achieved = 0.0;
    double mcse = 0.0;
};

// Stochastic root search over n with every probe sharing replicate seeds.
// The estimand is treated as locally linear in 1/n for interpolation inside
// the bracket [0.6 n0, 1.8 n0].
template <typename Evaluate>
SampleSizeSearchResult search_sample_size(Evaluate&& evaluate, double target, Index n0, Index min_n)
{
    SampleSizeSearchResult result;
    result.target = target;
    result.analytic_seed_n = n0;

    auto tolerance = [](const Probe& p) { return std::max(0.005, 2.0 * p.mcse); };
    auto probe = [&](Index n) {
        const Probe p = evaluate(n);
        result.iterations.emplace_back(n, p.achieved);
        return p;
    };
    auto done = [&](Index n, const Probe& p) {
        result.n = n;
        result.achieved = p.achieved;
        result.mcse = p.mcse;
        return result;
    };
    auto bracket_failure = [&](const std::string& why) {
        std::ostringstream msg;
        msg << why << "; probes:";
        for (const auto& [n, v] : result.iterations)
            msg << " (" << n << ", " << v << ")";
        fail(ErrorKind::BracketFailure, msg.str());
    };

    n0 = std::max(n0, min_n);
    const Probe p0 = probe(n0);
    if (std::fabs(p0.achieved - target) < tolerance(p0))
        return done(n0, p0);

    Index lo, hi;
    Probe f_lo, f_hi;
    if (p0.achieved < target) {
        lo = n0;
        f_lo = p0;
        hi = Index(std::ceil(1.8 * double(n0)));
        f_hi = probe(hi);
        if (std::fabs(f_hi.achieved - target) < tolerance(f_hi))
            return done(hi, f_hi);
        if (f_hi.achieved < target)
            bracket_failure("target not reached at the upper bracket end");
    } else {
        hi = n0;
        f_hi = p0;
        lo = std::max(min_n, Index(std::floor(0.6 * double(n0))));
        f_lo = probe(lo);
        if (std::fabs(f_lo.achieved - target) < tolerance(f_lo))
            return done(lo, f_lo);
        if (f_lo.achieved > target)
            bracket_failure("target exceeded at the lower bracket end");
    }

    int same_side = 0;
    int last_side = 0;
    for (int iter = 0; iter < 40; ++iter) {
        if (hi - lo <= 1)
            break;
        Index next;
        const double denom = f_hi.achieved - f_lo.achieved;
        if (same_side >= 2 || !(denom > 0.0)) {
            next = lo + (hi - lo) / 2;
        } else {
            const double x_lo = 1.0 / double(lo), x_hi = 1.0 / double(hi);
            const double t = (target - f_lo.achieved) / denom;
            next = Index(std::llround(1.0 / (x_lo + t * (x_hi - x_lo))));
        }
        next = std::clamp(next, lo + 1, hi - 1);
        const Probe p = probe(next);
        if (std::fabs(p.achieved - target) < tolerance(p))
            return done(next, p);
        const int side = p.achieved < target ? -1 : 1;
        same_side = side == last_side ? same_side + 1 : 1;
        last_side = side;
        if (side < 0) {
            lo = next;
            f_lo = p;
        } else {
            hi = next;
            f_hi = p;
        }
    }
    // Bracket collapsed without a probe inside tolerance: report the closer end.
    if (std::fabs(f_lo.achieved - target) <= std::fabs(f_hi.achieved - target))
        return done(lo, f_lo);
    return done(hi, f_hi);
}

DgmDerived derive_for_search(const TrueModelSpec& spec, const SimulationConfig& config)
{
    return derive(spec, adjustment_active(Adjustment::Auto, spec.c_stat), config.mc_size, config.seed);
}

} // namespace

SampleSizeSearchResult find_n_expected(const TrueModelSpec& spec, double target_es, const SimulationConfig& config,
                                       std::optional<Index> seed_n)
{
    require(target_es > 0.5 && target_es < 1.0, "target expected slope must be in (0.5,1)");
    const LinearPredictorParams params = calibrate_linear_predictor(spec);
    const Index n0 = seed_n ? *seed_n
                            : analytic_n_for_expected(spec, target_es, derive_for_search(spec, config)).n;
    auto evaluate = [&](Index n) {
        const PerformanceSummary s = summarize(simulate(params, n, config, true), Measure::CalSlope);
        return Probe{s.mean, s.mcse_mean};
    };
    return search_sample_size(evaluate, target_es, n0, spec.n_predictors + 10);
}

SampleSizeSearchResult find_n_prap(const TrueModelSpec& spec, const AcceptanceInterval& interval, double target,
                                   const SimulationConfig& config, std::optional<Index> seed_n)
{
    require(target > 0.0 && target < 1.0, "target PrAP must be in (0,1)");
    interval.validate();
    const LinearPredictorParams params = calibrate_linear_predictor(spec);
    Index n0 = 0;
    if (seed_n) {
        n0 = *seed_n;
    } else {
        try {
            n0 = analytic_n_for_prap(spec, interval, target, derive_for_search(spec, config)).n;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NoSolution)
                throw;
            fail(ErrorKind::BracketFailure, std::string("no analytic seed: ") + e.what());
        }
    }
    auto evaluate = [&](Index n) {
        const PerformanceSummary s = summarize(simulate(params, n, config, true), Measure::CalSlope, interval);
        return Probe{s.prap, s.mcse_prap};
    };
    return search_sample_size(evaluate, target, n0, spec.n_predictors + 10);
}

void write_replicates_csv(std::ostream& out, const PerformanceDistribution& dist)
{
    out << "replicate_index,cal_slope,c_stat,brier,mape,cal_in_large\r\n";
    out.precision(17);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out << dist.replicate[i] << ',' << dist.cal_slope[i] << ',' << dist.c_stat[i] << ',' << dist.brier[i]
            << ',';
        if (std::isfinite(dist.mape[i]))
            out << dist.mape[i];
        out << ',' << dist.cal_in_large[i] << "\r\n";
    }
}

} // namespace sizecalc
