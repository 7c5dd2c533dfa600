#include "sizecalc/analytic.hpp"

#include <cmath>
#include <string>

#include "sizecalc/errors.hpp"
#include "sizecalc/normal.hpp"
#include "sizecalc/roots.hpp"

namespace sizecalc {

double n_for_expected_slope(int p, double r2_cs, double target_es)
{
    require(p >= 1, "number of predictors must be at least 1");
    require(target_es > 0.0 && target_es < 1.0, "target expected slope must be in (0,1)");
    require(r2_cs > 0.0, "R^2_CS must be positive");
    const double arg = 1.0 - r2_cs / target_es;
    if (!(arg > 0.0))
        fail(ErrorKind::DomainError, "R^2_CS must be below the target expected slope");
    return double(p) / ((target_es - 1.0) * std::log(arg));
}

double expected_slope_at_n(int p, double r2_cs, double n)
{
    require(r2_cs > 0.0 && r2_cs < 1.0, "R^2_CS must be in (0,1)");
    if (!(n > p))
        fail(ErrorKind::NoRoot, "sample size must exceed the number of predictors");
    // n_for_expected_slope increases from 0 (E -> r2) to infinity (E -> 1).
    auto excess = [&](double e) { return n_for_expected_slope(p, r2_cs, e) - n; };
    double lo = r2_cs * (1.0 + 1e-12) + 1e-300;
    double hi = 1.0 - 1e-15;
    if (!(excess(lo) < 0.0) || !(excess(hi) > 0.0))
        fail(ErrorKind::NoRoot, "no expected slope reproduces n = " + std::to_string(n));
    return bisect(excess, lo, hi, 1e-14);
}

double slope_variance(double expected_slope, double phi, double c_for_variance, double n)
{
    require(phi > 0.0 && phi < 1.0, "prevalence must be in (0,1)");
    require(c_for_variance > 0.5 && c_for_variance < 1.0,
            "C for the variance formula must be in (0.5,1)");
    require(n >= 1.0, "sample size must be at least 1");
    const double z = normal_quantile(c_for_variance);
    const double e2 = expected_slope * expected_slope;
    return e2 / (2.0 * phi * (1.0 - phi) * n * z * z) + 2.0 * e2 / n;
}

double prap_normal(double expected_slope, double variance, const AcceptanceInterval& interval)
{
    require(variance > 0.0, "variance must be positive");
    const double sd = std::sqrt(variance);
    return 1.0 - (normal_cdf((interval.lower - expected_slope) / sd)
                  + normal_cdf((expected_slope - interval.upper) / sd));
}

namespace {

struct FormulaInputs {
    double r2 = 0.0;
    double c_formula = 0.0;
    double c_variance = 0.0;
    bool adjusted = false;
};

FormulaInputs select_inputs(const TrueModelSpec& spec, const DgmDerived& derived, Adjustment mode)
{
    FormulaInputs in;
    in.adjusted = adjustment_active(mode, spec.c_stat);
    if (in.adjusted) {
        if (!derived.has_adjustment)
            fail(ErrorKind::InvalidArgument, "adjusted C requested but not supplied in DgmDerived");
        in.r2 = derived.r2_cs_adj;
        in.c_formula = derived.c_adj;
        in.c_variance = derived.c_adj_single;
    } else {
        in.r2 = derived.r2_cs;
        in.c_formula = spec.c_stat;
        in.c_variance = spec.c_stat;
    }
    return in;
}

} // namespace

AnalyticResult analytic_n_for_prap(const TrueModelSpec& spec, const AcceptanceInterval& interval,
                                   double target_prap, const DgmDerived& derived, Adjustment mode)
{
    spec.validate();
    interval.validate();
    require(target_prap > 0.0 && target_prap < 1.0, "target PrAP must be in (0,1)");
    const FormulaInputs in = select_inputs(spec, derived, mode);

    int evaluations = 0;
    auto prap_at = [&](double e) {
        ++evaluations;
        const double n = n_for_expected_slope(spec.n_predictors, in.r2, e);
        return prap_normal(e, slope_variance(e, spec.prevalence, in.c_variance, n), interval);
    };

    // PrAP rises with E(s_n): larger E means larger n and smaller variance.
    const double lo = std::max(in.r2, 0.5) + 1e-9;
    const double hi = 0.9999;
    const double f_lo = prap_at(lo) - target_prap;
    const double f_hi = prap_at(hi) - target_prap;
    if (!(f_lo < 0.0 && f_hi > 0.0))
        fail(ErrorKind::NoSolution, "target PrAP not bracketed for E(s_n) in [" + std::to_string(lo) + ", "
                                        + std::to_string(hi) + "]");
    const double e = brent([&](double x) { return prap_at(x) - target_prap; }, lo, hi, 1e-13);

    AnalyticResult r;
    r.n_real = n_for_expected_slope(spec.n_predictors, in.r2, e);
    r.n = static_cast<Index>(std::ceil(r.n_real));
    r.expected_slope = e;
    r.slope_sd = std::sqrt(slope_variance(e, spec.prevalence, in.c_variance, r.n_real));
    r.prap = prap_normal(e, r.slope_sd * r.slope_sd, interval);
    if (std::fabs(r.prap - target_prap) >= 1e-4)
        fail(ErrorKind::NonConvergence, "PrAP search stopped at " + std::to_string(r.prap));
    r.used_c = in.c_formula;
    r.used_c_variance = in.c_variance;
    r.r2_cs = in.r2;
    r.adjusted = in.adjusted;
    r.iterations = evaluations;
    return r;
}

AnalyticResult analytic_n_for_expected(const TrueModelSpec& spec, double target_es, const DgmDerived& derived,
                                       Adjustment mode, const AcceptanceInterval& interval)
{
    spec.validate();
    interval.validate();
    const FormulaInputs in = select_inputs(spec, derived, mode);
    AnalyticResult r;
    r.n_real = n_for_expected_slope(spec.n_predictors, in.r2, target_es);
    r.n = static_cast<Index>(std::ceil(r.n_real));
    r.expected_slope = target_es;
    r.slope_sd = std::sqrt(slope_variance(target_es, spec.prevalence, in.c_variance, r.n_real));
    r.prap = prap_normal(target_es, r.slope_sd * r.slope_sd, interval);
    r.used_c = in.c_formula;
    r.used_c_variance = in.c_variance;
    r.r2_cs = in.r2;
    r.adjusted = in.adjusted;
    return r;
}

} // namespace sizecalc
