#pragma once

#include <cmath>
#include <limits>

#include "sizecalc/errors.hpp"

namespace sizecalc {

// Standard normal distribution helpers. The CDF goes through erfc, which
// keeps full relative accuracy in the lower tail.
template <typename Scalar>
Scalar normal_pdf(Scalar x)
{
    constexpr Scalar inv_sqrt_2pi = Scalar(0.398942280401432677939946059934);
    return inv_sqrt_2pi * std::exp(Scalar(-0.5) * x * x);
}

template <typename Scalar>
Scalar normal_cdf(Scalar x)
{
    constexpr Scalar inv_sqrt2 = Scalar(0.707106781186547524400844362105);
    return Scalar(0.5) * std::erfc(-x * inv_sqrt2);
}

// Wichura's AS241 (PPND16) rational approximation, about 1e-16 relative
// accuracy over the whole open unit interval.
template <typename Scalar>
Scalar normal_quantile(Scalar p)
{
    if (!(p > Scalar(0) && p < Scalar(1)))
        fail(ErrorKind::DomainError, "normal quantile requires p in (0,1)");

    const double q = double(p) - 0.5;
    double r;
    double value;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        value = q * (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r
                        + 67265.770927008700853) * r + 45921.953931549871457) * r
                        + 13731.693765509461125) * r + 1971.5909503065514427) * r
                        + 133.14166789178437745) * r + 3.387132872796366608)
              / (((((((r * 5226.495278852545925 + 28729.085735721942674) * r
                        + 39307.89580009271061) * r + 21213.794301586595867) * r
                        + 5394.1960214247511077) * r + 687.1870074920579083) * r
                        + 42.313330701600911252) * r + 1.0);
        return Scalar(value);
    }

    r = q < 0 ? double(p) : 1.0 - double(p);
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r
                        + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                        + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                        + 4.6303378461565452959) * r + 1.42343711074968357734)
              / (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r
                        + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                        + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                        + 2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r
                        + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                        + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                        + 5.4637849111641143699) * r + 6.6579046435011037772)
              / (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r
                        + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                        + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                        + 0.59983220655588793769) * r + 1.0);
    }
    return Scalar(q < 0 ? -value : value);
}

inline constexpr double kProbClamp = 1e-12;

template <typename Scalar>
Scalar clamp_prob(Scalar p)
{
    return std::min(std::max(p, Scalar(kProbClamp)), Scalar(1 - kProbClamp));
}

template <typename Scalar>
Scalar expit(Scalar x)
{
    if (x >= Scalar(0)) {
        const Scalar e = std::exp(-x);
        return Scalar(1) / (Scalar(1) + e);
    }
    const Scalar e = std::exp(x);
    return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar logit(Scalar p)
{
    p = clamp_prob(p);
    return std::log(p / (Scalar(1) - p));
}

} // namespace sizecalc
