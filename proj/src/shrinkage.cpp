#include "sizecalc/shrinkage.hpp"

#include <cmath>
#include <sstream>

#include "sizecalc/parallel.hpp"
#include "sizecalc/rng.hpp"

namespace sizecalc {

namespace {

// Resample with replacement; false when the draw has a single class.
bool draw_resample(const Dataset& data, Rng& rng, Dataset& out)
{
    const Index n = data.size();
    out.outcomes.resize(n);
    out.covariates.resize(n, data.n_predictors());
    double events = 0;
    for (Index i = 0; i < n; ++i) {
        const Index k = std::min<Index>(Index(uniform01(rng) * double(n)), n - 1);
        out.outcomes[i] = data.outcomes[k];
        out.covariates.row(i) = data.covariates.row(k);
        events += data.outcomes[k];
    }
    return events > 0 && events < double(n);
}

struct BootOutcome {
    bool ok = false;
    double slope = 0.0;
};

} // namespace

LsfEstimate bootstrap_lsf_detail(const Dataset& data, int bootstraps, std::uint64_t seed,
                                 const std::optional<VectorXd>& start, int workers)
{
    require(bootstraps >= 50, "at least 50 bootstraps are required");
    data.validate();

    std::vector<BootOutcome> results(static_cast<std::size_t>(bootstraps));
    parallel_for(results.size(), workers, [&](std::size_t k) {
        Rng rng = make_stream(seed, k, StreamTag::Bootstrap);
        Dataset boot;
        if (!draw_resample(data, rng, boot) && !draw_resample(data, rng, boot))
            return;
        try {
            FitOptions opts;
            opts.start = start;
            const FittedLogistic fit = fit_logistic(boot, opts);
            const VectorXd lp = fit.linear_predictor(data.covariates);
            results[k].slope = fit_calibration(data.outcomes, lp).slope;
            results[k].ok = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NonConvergence && e.kind() != ErrorKind::DegenerateOutcome
                && e.kind() != ErrorKind::ConstantPredictor)
                throw;
        }
    });

    LsfEstimate est;
    double sum = 0.0;
    for (const BootOutcome& r : results) {
        if (!r.ok) {
            ++est.bootstrap_failures;
            continue;
        }
        est.slopes.push_back(r.slope);
        sum += r.slope;
    }
    est.bootstraps_used = int(est.slopes.size());
    if (double(est.bootstrap_failures) > 0.2 * double(bootstraps)) {
        std::ostringstream msg;
        msg << est.bootstrap_failures << " of " << bootstraps << " bootstrap fits failed";
        fail(ErrorKind::ExcessiveFailures, msg.str());
    }
    est.lsf = sum / double(est.bootstraps_used);
    return est;
}

double bootstrap_lsf(const Dataset& data, int bootstraps, std::uint64_t seed)
{
    return bootstrap_lsf_detail(data, bootstraps, seed).lsf;
}

ShrunkModel apply_lsf(const FittedLogistic& base, double lsf, const Dataset& data)
{
    require(lsf >= 0.0, "lsf must be non-negative");
    require(std::isfinite(lsf), "lsf must be finite");
    require(base.slopes.size() == data.n_predictors(), "model and data predictor counts differ");
    ShrunkModel out;
    out.lsf = lsf;
    out.base = base;
    out.slopes = lsf * base.slopes;
    const VectorXd offset = data.covariates * out.slopes;
    out.intercept = fit_intercept_with_offset(data.outcomes, offset);
    return out;
}

ShrinkageComparison shrinkage_experiment(const TrueModelSpec& spec, const SimulationConfig& config,
                                         const AcceptanceInterval& interval, std::optional<Index> n_standard,
                                         std::optional<Index> n_new, double target_es, double target_prap)
{
    interval.validate();
    ShrinkageComparison cmp;
    SimulationConfig mle = config;
    mle.fit_method = FitMethod::MLE;
    cmp.n_standard = n_standard ? *n_standard : find_n_expected(spec, target_es, mle).n;
    cmp.n_new = n_new ? *n_new : find_n_prap(spec, interval, target_prap, mle).n;

    const LinearPredictorParams params = calibrate_linear_predictor(spec);
    auto run = [&](const std::string& label, Index n, FitMethod method) {
        SimulationConfig c = config;
        c.fit_method = method;
        const PerformanceDistribution dist = simulate_performance(params, n, c);
        ShrinkageRow row;
        row.label = label;
        row.n = n;
        row.method = method;
        row.slope = summarize(dist, Measure::CalSlope, interval);
        row.n_failed = dist.n_failed;
        for (double l : dist.lsf)
            if (l > 1.0)
                ++row.lsf_above_one;
        cmp.rows.push_back(row);
    };
    run("Standard", cmp.n_standard, FitMethod::MLE);
    run("Standard+LSF", cmp.n_standard, FitMethod::MLE_LSF);
    run("New", cmp.n_new, FitMethod::MLE);
    run("New+LSF", cmp.n_new, FitMethod::MLE_LSF);
    return cmp;
}

} // namespace sizecalc
