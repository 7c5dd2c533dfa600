#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "sizecalc/montecarlo.hpp"

using namespace sizecalc;

namespace {

SimulationConfig small_config(Index n_sim = 100, std::uint64_t seed = 7)
{
    SimulationConfig c;
    c.n_sim = n_sim;
    c.n_val = 10'000;
    c.seed = seed;
    c.workers = 1;
    c.mc_size = 200'000;
    return c;
}

// Type-7 quantile written from the definition, for cross-checking.
double quantile_oracle(std::vector<double> v, double prob)
{
    std::sort(v.begin(), v.end());
    const double pos = 1.0 + (double(v.size()) - 1.0) * prob;
    const std::size_t j = std::size_t(pos);
    if (j >= v.size())
        return v.back();
    return v[j - 1] + (pos - double(j)) * (v[j] - v[j - 1]);
}

} // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("summarize small example")
{
    const PerformanceSummary s = summarize(std::vector<double>{0.8, 0.9, 1.0});
    CHECK(s.mean == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(s.sd == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(s.prap == doctest::Approx(2.0 / 3.0));
    CHECK(s.q50 == doctest::Approx(0.9));
    CHECK(s.q025 == doctest::Approx(0.805));
    CHECK(s.q975 == doctest::Approx(0.995));
    CHECK(s.count == 3);
    CHECK(s.mcse_mean == doctest::Approx(0.1 / std::sqrt(3.0)));
    CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
    try {
        summarize(std::vector<double>{});
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyDistribution);
    }
}

TEST_CASE("sample quantile matches the type 7 definition")
{
    Rng rng(5);
    for (int k = 0; k < 50; ++k) {
        std::vector<double> v(1 + std::size_t(uniform01(rng) * 40));
        for (double& x : v)
            x = uniform01(rng);
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        for (double prob : {0.0, 0.025, 0.3, 0.5, 0.975, 1.0})
            CHECK(sample_quantile(sorted, prob) == doctest::Approx(quantile_oracle(v, prob)).epsilon(1e-14));
    }
}

TEST_CASE("configuration checks")
{
    CHECK(SimulationConfig::defaults_for(6).n_sim == 3000);
    CHECK(SimulationConfig::defaults_for(10).n_sim == 2000);
    SimulationConfig c = small_config();
    c.n_sim = 99;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.n_val = 9999;
    CHECK_THROWS_AS(c.validate(), Error);
    c = small_config();
    c.lsf_bootstraps = 49;
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK_THROWS_AS(simulate_performance(TrueModelSpec{0.1, 0.7, 10}, 11, small_config()), Error);
}

TEST_CASE("results do not depend on the worker count")
{
    const TrueModelSpec specs[] = {{0.1, 0.7, 5}, {0.3, 0.8, 3}, {0.05, 0.75, 8}};
    for (const TrueModelSpec& spec : specs) {
        SimulationConfig one = small_config(100, 99);
        SimulationConfig many = one;
        many.workers = 4;
        const PerformanceDistribution a = simulate_performance(spec, 400, one);
        const PerformanceDistribution b = simulate_performance(spec, 400, many);
        REQUIRE(a.size() == b.size());
        CHECK(a.cal_slope == b.cal_slope);
        CHECK(a.c_stat == b.c_stat);
        CHECK(a.brier == b.brier);
        CHECK(a.replicate == b.replicate);
    }
}

TEST_CASE("large development samples recover the true model")
{
    const TrueModelSpec spec{0.3, 0.75, 4};
    const PerformanceDistribution d = simulate_performance(spec, 20'000, small_config(100));
    CHECK(std::fabs(summarize(d, Measure::CalSlope).mean - 1.0) < 0.01);
    CHECK(std::fabs(summarize(d, Measure::CStat).mean - 0.75) < 0.01);
    CHECK(std::fabs(summarize(d, Measure::CalInLarge).mean) < 0.02);
    CHECK(summarize(d, Measure::Mape).mean < 0.01);
}

TEST_CASE("fast coefficient draws scale the reference covariance by N / n")
{
    const LinearPredictorParams params = calibrate_linear_predictor(TrueModelSpec{0.2, 0.75, 3});
    const ReferenceFit ref = build_reference_fit(params, 40'000, 3);
    REQUIRE(ref.fit.covariance.rows() == 4);
    for (Index n : {Index(40'000), Index(10'000)}) {
        const int draws = 4000;
        const VectorXd truth = params.coefficients();
        MatrixXd sum = MatrixXd::Zero(4, 4);
        VectorXd mean = VectorXd::Zero(4);
        for (int k = 0; k < draws; ++k) {
            const VectorXd d = draw_coefficients_fast(params, n, ref, stream_seed(1, k, StreamTag::Coefficients));
            mean += d;
            sum += (d - truth) * (d - truth).transpose();
        }
        mean /= draws;
        const MatrixXd cov = sum / draws;
        const MatrixXd expected = ref.fit.covariance * (40'000.0 / double(n));
        for (Index j = 0; j < 4; ++j) {
            CHECK(cov(j, j) == doctest::Approx(expected(j, j)).epsilon(0.08));
            CHECK(std::fabs(mean[j] - truth[j]) < 4.0 * std::sqrt(expected(j, j) / draws));
        }
    }
}

TEST_CASE("fast and full coefficient paths agree on the slope distribution")
{
    const TrueModelSpec spec{0.2, 0.75, 5};
    SimulationConfig full = small_config(400, 21);
    SimulationConfig fast = full;
    fast.fast_coefficients = true;
    fast.reference_size = 100'000;
    const PerformanceSummary a = summarize(simulate_performance(spec, 3000, full), Measure::CalSlope);
    const PerformanceSummary b = summarize(simulate_performance(spec, 3000, fast), Measure::CalSlope);
    CHECK(std::fabs(a.mean - b.mean) < 0.015);
    CHECK(b.sd == doctest::Approx(a.sd).epsilon(0.15));
}

TEST_CASE("mean slope rises with n under common random numbers")
{
    const TrueModelSpec spec{0.1, 0.7, 6};
    const SimulationConfig c = small_config(150, 4);
    double previous = 0.0;
    for (Index n : {400, 800, 1600, 3200}) {
        const double m = summarize(simulate_performance(spec, n, c), Measure::CalSlope).mean;
        CHECK(m > previous);
        previous = m;
    }
}

TEST_CASE("doubling the validation size changes little")
{
    const TrueModelSpec spec{0.1, 0.7, 6};
    SimulationConfig a = small_config(200, 8);
    SimulationConfig b = a;
    b.n_val = 20'000;
    const double ma = summarize(simulate_performance(spec, 1000, a), Measure::CalSlope).mean;
    const double mb = summarize(simulate_performance(spec, 1000, b), Measure::CalSlope).mean;
    CHECK(std::fabs(ma - mb) < 0.01);
}

TEST_CASE("shared validation set option runs and stays close")
{
    const TrueModelSpec spec{0.2, 0.75, 4};
    // one shared set shifts every replicate alike, so it needs to be large
    SimulationConfig a = small_config(100, 12);
    a.n_val = 100'000;
    SimulationConfig b = a;
    b.shared_validation = true;
    const double ma = summarize(simulate_performance(spec, 1500, a), Measure::CalSlope).mean;
    const double mb = summarize(simulate_performance(spec, 1500, b), Measure::CalSlope).mean;
    CHECK(std::fabs(ma - mb) < 0.03);
}

TEST_CASE("tiny development samples raise ExcessiveFailures")
{
    try {
        simulate_performance(TrueModelSpec{0.1, 0.7, 10}, 14, small_config(100));
        FAIL("expected ExcessiveFailures");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ExcessiveFailures);
    }
}

TEST_CASE("searches fail loudly when the bracket misses")
{
    const TrueModelSpec spec{0.3, 0.75, 2};
    try {
        find_n_expected(spec, 0.9, small_config(100), Index(30'000));
        FAIL("expected BracketFailure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BracketFailure);
    }
}

TEST_CASE("expected-slope search lands on the target")
{
    const TrueModelSpec spec{0.3, 0.75, 4};
    const SimulationConfig c = small_config(300, 17);
    const SampleSizeSearchResult r = find_n_expected(spec, 0.9, c);
    CHECK(std::fabs(r.achieved - 0.9) < std::max(0.005, 2.0 * r.mcse) + 1e-12);
    CHECK(!r.iterations.empty());
    CHECK(r.analytic_seed_n > 0);
    const SampleSizeSearchResult higher = find_n_expected(spec, 0.95, c);
    CHECK(higher.n > r.n);
}

TEST_CASE("replicate CSV layout")
{
    const PerformanceDistribution d = simulate_performance(TrueModelSpec{0.3, 0.75, 3}, 300, small_config(100));
    std::ostringstream out;
    write_replicates_csv(out, d);
    const std::string text = out.str();
    CHECK(text.rfind("replicate_index,cal_slope,c_stat,brier,mape,cal_in_large\r\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == std::ptrdiff_t(d.size() + 1));
}

// Reference simulation values, p = 10, C = 0.7, 10% prevalence.
TEST_CASE("reference slope mean at n = 1881")
{
    const PerformanceDistribution d =
        simulate_performance(TrueModelSpec{0.1, 0.7, 10}, 1881, SimulationConfig::defaults_for(10));
    CHECK(summarize(d, Measure::CalSlope).mean == doctest::Approx(0.895).epsilon(0.01 / 0.895));
}

TEST_CASE("reference slope spread at n = 2529")
{
    const PerformanceDistribution d =
        simulate_performance(TrueModelSpec{0.1, 0.7, 10}, 2529, SimulationConfig::defaults_for(10));
    CHECK(summarize(d, Measure::CalSlope).sd == doctest::Approx(0.0895).epsilon(0.004 / 0.0895));
}

}
