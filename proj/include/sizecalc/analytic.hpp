#pragma once

#include "sizecalc/dgm.hpp"

namespace sizecalc {

// Acceptable calibration slope range [lower, upper].
struct AcceptanceInterval {
    double lower = 0.85;
    double upper = 1.15;

    void validate() const { require(lower < upper, "lower must be < upper"); }
    bool contains(double value) const { return value >= lower && value <= upper; }
};

enum class Adjustment { Auto, On, Off };

inline constexpr double kAdjustmentThreshold = 0.8;

inline bool adjustment_active(Adjustment mode, double c_stat)
{
    return mode == Adjustment::On || (mode == Adjustment::Auto && c_stat >= kAdjustmentThreshold);
}

struct AnalyticResult {
    Index n = 0;                 // ceiling of n_real
    double n_real = 0.0;
    double expected_slope = 0.0;
    double slope_sd = 0.0;
    double prap = 0.0;
    double used_c = 0.0;         // C behind the R^2 fed to the sample-size formula
    double used_c_variance = 0.0;
    double r2_cs = 0.0;
    bool adjusted = false;
    int iterations = 0;
};

// Minimum n for a target expected calibration slope (unrounded).
double n_for_expected_slope(int p, double r2_cs, double target_es);

// Expected calibration slope at sample size n: inverse of n_for_expected_slope in E.
double expected_slope_at_n(int p, double r2_cs, double n);

// Approximate var(s_n) across development samples of size n.
double slope_variance(double expected_slope, double phi, double c_for_variance, double n);

// Normal approximation to P(lower <= s_n <= upper).
double prap_normal(double expected_slope, double variance, const AcceptanceInterval& interval);

AnalyticResult analytic_n_for_prap(const TrueModelSpec& spec, const AcceptanceInterval& interval,
                                   double target_prap, const DgmDerived& derived,
                                   Adjustment mode = Adjustment::Auto);

AnalyticResult analytic_n_for_expected(const TrueModelSpec& spec, double target_es, const DgmDerived& derived,
                                       Adjustment mode = Adjustment::Auto,
                                       const AcceptanceInterval& interval = {});

} // namespace sizecalc
