#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sizecalc/dgm.hpp"
#include "sizecalc/measures.hpp"
#include "sizecalc/normal.hpp"
#include "sizecalc/quadrature.hpp"

using namespace sizecalc;

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Composite Simpson on [a, b] with m (even) panels.
template <typename F>
double simpson(F&& f, double a, double b, int m)
{
    const double h = (b - a) / m;
    double s = f(a) + f(b);
    for (int i = 1; i < m; ++i)
        s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

double phi_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double oracle_prevalence(double mu, double sigma)
{
    return simpson([&](double z) { return phi_pdf(z) * expit(mu + sigma * z); }, -12.0, 12.0, 6000);
}

// P(eta1 > eta0) = int f1(a) F0(a) da, F0 accumulated by the trapezoid rule on
// a grid unrelated to the library's.
double oracle_concordance(double mu, double sigma)
{
    const int m = 12000;
    const double lo = -11.0, hi = 11.0, h = (hi - lo) / m;
    const double prev = oracle_prevalence(mu, sigma);
    double c = 0.0, cdf0 = 0.0;
    double prev_f0 = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double z = lo + i * h;
        const double p = expit(mu + sigma * z);
        const double f1 = phi_pdf(z) * p / prev;
        const double f0 = phi_pdf(z) * (1.0 - p) / (1.0 - prev);
        if (i > 0)
            cdf0 += 0.5 * (f0 + prev_f0) * h;
        c += f1 * cdf0 * h;
        prev_f0 = f0;
    }
    return c;
}

// Rao-Blackwellized MC concordance of eta ~ N(mu, sigma^2): outcomes integrated out.
double mc_concordance(double mu, double sigma, Index draws, std::uint64_t seed)
{
    Rng rng = make_stream(seed, 0, StreamTag::Calibration);
    NormalSource normal;
    std::vector<double> eta(static_cast<std::size_t>(draws));
    for (double& e : eta)
        e = mu + sigma * normal(rng);
    std::sort(eta.begin(), eta.end());
    double num = 0.0, below0 = 0.0, sum1 = 0.0, sum0 = 0.0;
    for (double e : eta) {
        const double p = expit(e);
        num += p * below0;
        below0 += 1.0 - p;
        sum1 += p;
        sum0 += 1.0 - p;
    }
    return num / (sum1 * sum0);
}

double oracle_r2(double mu, double sigma)
{
    const double prev = oracle_prevalence(mu, sigma);
    const double l1 = simpson(
        [&](double z) {
            const double p = expit(mu + sigma * z);
            return phi_pdf(z) * (p * std::log(p) + (1 - p) * std::log1p(-p));
        },
        -12.0, 12.0, 6000);
    const double l0 = prev * std::log(prev) + (1 - prev) * std::log1p(-prev);
    return 1.0 - std::exp(2.0 * (l0 - l1));
}

// Large-sample delta_j: X_j = k (eta - mu) + e with k = beta / sigma^2, var(e) = 1 - 1/p.
double oracle_adjusted_c(const TrueModelSpec& spec)
{
    const LinearPredictorParams params = calibrate_linear_predictor(spec);
    const double mu = params.mu, sigma = params.sigma;
    auto moment = [&](int power, bool event) {
        return simpson(
            [&](double z) {
                const double p = expit(mu + sigma * z);
                return phi_pdf(z) * std::pow(sigma * z, power) * (event ? p : 1 - p);
            },
            -12.0, 12.0, 6000);
    };
    const double phi = moment(0, true), one_minus = moment(0, false);
    const double m1 = moment(1, true) / phi, m0 = moment(1, false) / one_minus;
    const double v1 = moment(2, true) / phi - m1 * m1, v0 = moment(2, false) / one_minus - m0 * m0;
    const double k = params.beta / (sigma * sigma);
    const double pooled = k * k * (phi * v1 + (1 - phi) * v0) + 1.0 - 1.0 / spec.n_predictors;
    const double delta = k * (m1 - m0) / pooled;
    const double lda_sigma = delta * std::sqrt(double(spec.n_predictors));
    return logistic_normal_concordance(solve_intercept(spec.prevalence, lda_sigma), lda_sigma);
}

} // namespace

TEST_SUITE("dgm") {

TEST_CASE("Gauss-Hermite rule integrates normal moments")
{
    const GaussHermite& gh = gauss_hermite();
    CHECK(gh.nodes.size() == 96);
    CHECK(gh.weights.sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::fabs(gh.weights.dot(gh.nodes)) < 1e-13);
    CHECK(gh.weights.dot(gh.nodes.array().square().matrix()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gh.weights.dot(gh.nodes.array().pow(4).matrix()) == doctest::Approx(3.0).epsilon(1e-11));
    const GaussHermite small = make_gauss_hermite(5);
    CHECK(small.weights.dot(small.nodes.array().pow(8).matrix()) == doctest::Approx(105.0).epsilon(1e-10));
}

TEST_CASE("logistic-normal mean and concordance agree with independent quadrature")
{
    for (double mu : {-3.0, -1.0, 0.0, 0.7})
        for (double sigma : {0.0, 0.4, 1.2, 2.5}) {
            CHECK(logistic_normal_mean(mu, sigma) == doctest::Approx(oracle_prevalence(mu, sigma)).epsilon(1e-9));
            if (sigma > 0)
                CHECK(std::fabs(logistic_normal_concordance(mu, sigma) - oracle_concordance(mu, sigma)) < 2e-5);
        }
    CHECK(logistic_normal_concordance(-1.0, 0.0) == 0.5);
}

TEST_CASE("quadrature concordance matches a fixed-seed 2e6-draw Monte Carlo within 5e-4")
{
    for (double sigma : {0.76, 1.5, 2.6}) {
        const double mu = solve_intercept(0.1, sigma);
        CHECK(std::fabs(logistic_normal_concordance(mu, sigma) - mc_concordance(mu, sigma, 2'000'000, 99)) < 5e-4);
    }
}

TEST_CASE("calibration limits at C near 0.5")
{
    const LinearPredictorParams half = calibrate_linear_predictor({0.5, 0.5000001, 3});
    CHECK(std::fabs(half.mu) < 1e-6);
    CHECK(half.sigma < 1e-3);
    const LinearPredictorParams thirty = calibrate_linear_predictor({0.3, 0.5000001, 3});
    CHECK(thirty.mu == doctest::Approx(-0.8473).epsilon(1e-4));
}

TEST_CASE("calibration hits prevalence and C; parameters frozen")
{
    const LinearPredictorParams params = calibrate_linear_predictor({0.1, 0.7, 10});
    const CalibrationCheck achieved = implied_performance(params.mu, params.sigma);
    CHECK(std::fabs(achieved.prevalence - 0.1) < 1e-10);
    CHECK(std::fabs(achieved.c_stat - 0.7) < 1e-10);
    CHECK(params.sigma * params.sigma == doctest::Approx(10 * params.beta * params.beta).epsilon(1e-12));
    CHECK(params.beta0 == params.mu);
    // frozen from the oracle quadratures above
    CHECK(params.mu == doctest::Approx(-2.41808).epsilon(2e-6));
    CHECK(params.sigma == doctest::Approx(0.762451).epsilon(2e-6));
}

TEST_CASE("calibration round trip on simulated rows")
{
    const TrueModelSpec spec{0.1, 0.7, 10};
    const LinearPredictorParams params = calibrate_linear_predictor(spec);
    const Index n = 1'000'000;
    const Dataset data = generate_dataset(params, n, std::uint64_t(4242));
    const VectorXd eta = (data.covariates * VectorXd::Constant(10, params.beta)).array() + params.beta0;
    CHECK(std::fabs(data.event_rate() - 0.1) < 3.0 * std::sqrt(0.09 / double(n)));
    CHECK(std::fabs(concordance(data.outcomes, eta) - 0.7) < 0.002);
}

TEST_CASE("calibration errors")
{
    CHECK_THROWS_AS(calibrate_linear_predictor({1.5, 0.7, 10}), Error);
    CHECK_THROWS_AS(calibrate_linear_predictor({0.1, 0.5, 10}), Error);
    CHECK_THROWS_AS(calibrate_linear_predictor({0.1, 0.7, 0}), Error);
    try {
        calibrate_linear_predictor({0.1, 0.9999, 10});
        FAIL("expected NoSolution");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoSolution);
    }
}

TEST_CASE("generate_dataset: determinism, nesting and degenerate model")
{
    const LinearPredictorParams params = calibrate_linear_predictor({0.2, 0.75, 4});
    const Dataset a = generate_dataset(params, 500, std::uint64_t(7));
    const Dataset b = generate_dataset(params, 500, std::uint64_t(7));
    const Dataset big = generate_dataset(params, 900, std::uint64_t(7));
    CHECK(a.outcomes == b.outcomes);
    CHECK(a.covariates == b.covariates);
    CHECK(big.covariates.topRows(500) == a.covariates);
    CHECK(big.outcomes.head(500) == a.outcomes);
    REQUIRE(a.true_probs.has_value());
    a.validate();

    const LinearPredictorParams flat = LinearPredictorParams::from_moments(0.0, 0.0, 3);
    const Dataset d = generate_dataset(flat, 100, std::uint64_t(1));
    CHECK((d.true_probs->array() == 0.5).all());
}

TEST_CASE("generate_dataset uses a caller row sampler")
{
    const LinearPredictorParams params = LinearPredictorParams::from_moments(-1.0, 1.0, 2);
    RowSampler ones = [](Rng&, Eigen::Ref<Eigen::RowVectorXd> row) { row.setOnes(); };
    const Dataset d = generate_dataset(params, 50, std::uint64_t(3), ones);
    CHECK((d.covariates.array() == 1.0).all());
    CHECK((d.true_probs->array() - expit(-1.0 + 2.0 * params.beta)).abs().maxCoeff() < 1e-15);
}

TEST_CASE("Cox-Snell R^2 against quadrature")
{
    const LinearPredictorParams params = calibrate_linear_predictor({0.1, 0.7, 10});
    const double quad = oracle_r2(params.mu, params.sigma);
    CHECK(quad == doctest::Approx(0.04692).epsilon(2e-3));
    CHECK(std::fabs(cox_snell_r2(params, 1'000'000, kDefaultSeed) - quad) < 1.5e-3);
    // values implied by a target-0.9, p=10 calculation
    CHECK(std::fabs(cox_snell_r2(TrueModelSpec{0.1, 0.7, 10}) - 0.0466) < 1e-3);
    CHECK(std::fabs(cox_snell_r2(TrueModelSpec{0.1, 0.65, 10}) - 0.0256) < 1e-3);
    const LinearPredictorParams null_model = LinearPredictorParams::from_moments(-2.0, 0.0, 1);
    CHECK(std::fabs(cox_snell_r2(null_model, 200'000, 1)) < 1e-4);
    CHECK_THROWS_AS(cox_snell_r2(params, 1000, 1), Error);
}

TEST_CASE("Cox-Snell R^2 increases with C")
{
    double last = 0.0;
    for (double c : {0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9}) {
        const double r2 = cox_snell_r2(TrueModelSpec{0.2, c, 5}, 200'000, 5);
        CHECK(r2 > last + 2e-3);
        last = r2;
    }
}

TEST_CASE("adjusted C matches the large-sample LDA oracle")
{
    for (double c : {0.65, 0.8, 0.9}) {
        const TrueModelSpec spec{0.1, c, 10};
        CHECK(std::fabs(adjusted_c(spec) - oracle_adjusted_c(spec)) < 2e-3);
        TrueModelSpec single = spec;
        single.n_predictors = 1;
        CHECK(std::fabs(adjusted_c(single) - oracle_adjusted_c(single)) < 2e-3);
    }
}

TEST_CASE("adjusted C stays below C and the gap grows with C and prevalence")
{
    for (double phi : {0.1, 0.3, 0.5}) {
        double last_gap = -1.0;
        for (double c : {0.65, 0.7, 0.75, 0.8, 0.85, 0.9}) {
            const double gap = c - adjusted_c(TrueModelSpec{phi, c, 10});
            CHECK(gap > -2e-3);
            CHECK(gap > last_gap - 2e-3);
            last_gap = gap;
        }
    }
    for (double c : {0.75, 0.85}) {
        const double g1 = c - adjusted_c(TrueModelSpec{0.1, c, 10});
        const double g5 = c - adjusted_c(TrueModelSpec{0.5, c, 10});
        CHECK(g5 > g1 - 2e-3);
    }
}

TEST_CASE("adjusted C detail and LDA helper")
{
    const AdjustedC small = adjusted_c_detail(TrueModelSpec{0.1, 0.8, 4}, 100'000, 3);
    CHECK(small.small_sample_warning);
    CHECK(small.lda_log_odds.size() == 4);
    CHECK(small.lda_sigma == doctest::Approx(small.lda_log_odds.norm()));

    const LinearPredictorParams params = calibrate_linear_predictor({0.3, 0.75, 3});
    const Dataset d = generate_dataset(params, 200'000, std::uint64_t(8));
    const VectorXd delta = lda_log_odds(d);
    CHECK(delta.size() == 3);
    CHECK((delta.array() > 0).all());
    CHECK((delta.array() - delta.mean()).abs().maxCoeff() < 0.03);
}

TEST_CASE("derive fills adjusted values only on request")
{
    const DgmDerived off = derive(TrueModelSpec{0.1, 0.7, 10}, false, 200'000, 1);
    CHECK_FALSE(off.has_adjustment);
    CHECK(off.c_adj == 0.7);
    const DgmDerived on = derive(TrueModelSpec{0.1, 0.85, 10}, true, 200'000, 1);
    CHECK(on.has_adjustment);
    CHECK(on.c_adj < 0.85);
    CHECK(on.c_adj_single > on.c_adj);
    CHECK(on.r2_cs_adj < on.r2_cs);
    CHECK(on.r2_cs > 0.0);
    CHECK(on.r2_cs < 1.0);
}

}
