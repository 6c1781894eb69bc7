#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/binomial.hpp>

#include "oracles.hpp"
#include "spuf/gbin.hpp"
#include "spuf/noise_model.hpp"
#include "spuf/quadrature.hpp"

using namespace spuf;
using namespace spuf::model;

TEST_CASE("scaled beta basics") {
    const auto sb = ScaledBeta::make(0.0, 0.5, 2.0, 3.0);
    CHECK(sb.mean() == doctest::Approx(0.2));
    // Var = (b-a)^2 ab / ((a+b)^2 (a+b+1))
    CHECK(sb.variance() == doctest::Approx(0.25 * 6.0 / (25.0 * 6.0)));
    CHECK(sb.pdf(0.6) == 0.0);
    CHECK(sb.pdf(-0.1) == 0.0);
    const double integral = oracle::adaptive_simpson([&](double x) { return sb.pdf(x); }, 0.0, 0.5, 1e-12);
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(sb.cdf(sb.quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK_THROWS_AS(ScaledBeta::make(0.5, 0.5, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(ScaledBeta::make(0.0, 0.5, 0, 1), std::invalid_argument);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(DeviceParams::make(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(DeviceParams::make(0.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(DeviceParams::make(0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(HyperParams::make(1, 1, 1, -1), std::invalid_argument);
    CHECK_THROWS_AS(HyperParams::make(1, 1, INFINITY, 1), std::invalid_argument);
    const auto h = HyperParams::make(9378.324, 81409.79, 7166.669, 3965.296);
    CHECK(h.expected_k() == doctest::Approx(1.8073).epsilon(1e-4));
    CHECK(h.expected_delta() == doctest::Approx(0.0516467).epsilon(1e-5));
}

TEST_CASE("device cell law has mean delta") {
    for (double delta : {0.001, 0.05, 0.2, 0.4999}) {
        for (double k : {0.01, 1.8, 250.0}) {
            const auto sb = device_cell_distribution(DeviceParams::make(delta, k));
            CHECK(std::fabs(sb.mean() - delta) <= 1e-15);
        }
    }
}

TEST_CASE("samplers match their laws") {
    Rng rng(21);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = sample_gamma(3.0, 2.0, rng);
        s += g;
        s2 += g * g;
    }
    const double mean = s / n;
    CHECK(mean == doctest::Approx(1.5).epsilon(0.01));
    CHECK(s2 / n - mean * mean == doctest::Approx(0.75).epsilon(0.03));

    s = 0.0;
    const auto sb = ScaledBeta::make(0.0, 0.5, 2.0, 3.0);
    for (int i = 0; i < n; ++i) {
        const double v = sample_scaled_beta(sb, rng);
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 0.5);
        s += v;
    }
    const double se = std::sqrt(sb.variance() / n);
    CHECK(std::fabs(s / n - 0.2) <= 4 * se);
}

TEST_CASE("compound theorem: pooled draws are binomial") {
    const auto sb = ScaledBeta::make(0.0, 0.5, 2.0, 3.0);
    Rng rng(22);
    const int reps = 100000;
    std::vector<double> hist(9, 0.0);
    std::vector<double> p(8);
    for (int r = 0; r < reps; ++r) {
        for (auto& v : p) v = sample_scaled_beta(sb, rng);
        ++hist[gbin::sample(gbin::GeneralizedBinomial(p), rng)];
    }
    const auto law = compound_binomial(8, sb.mean());
    CHECK(law.p == doctest::Approx(0.2));
    const auto bin = gbin::binomial_pmf(8, law.p);
    double tv = 0.0;
    for (int k = 0; k <= 8; ++k) tv += std::fabs(hist[k] / reps - bin[k]);
    CHECK(0.5 * tv < 0.01);
    CHECK_THROWS_AS(compound_binomial(8, 1.2), std::invalid_argument);
}

TEST_CASE("failure probability against boost") {
    for (std::size_t n : {10u, 100u, 1953u}) {
        for (double p : {0.001, 0.05, 0.3}) {
            for (std::size_t t : {std::size_t{0}, n / 10, n / 2}) {
                const boost::math::binomial_distribution<double> bin(double(n), p);
                const double ref = boost::math::cdf(boost::math::complement(bin, double(t)));
                const double got = failure_probability(n, t, p);
                if (ref > 1e-300) CHECK(got == doctest::Approx(ref).epsilon(1e-10));
            }
        }
    }
    CHECK(failure_probability(2, 0, 0.5) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(failure_probability(5, 5, 0.3) == 0.0);
    CHECK(std::isinf(log_failure_probability(5, 5, 0.3)));
    CHECK(failure_probability(5, 2, 0.0) == 0.0);
    CHECK(failure_probability(5, 2, 1.0) == 1.0);
    CHECK_THROWS_AS(failure_probability(5, 6, 0.3), std::invalid_argument);
    CHECK_THROWS_AS(failure_probability(5, 1, -0.1), std::invalid_argument);
}

TEST_CASE("failure probability monotonicity") {
    const std::size_t n = 200;
    for (double p = 0.0; p <= 0.5; p += 0.05) {
        double prev = 2.0;
        for (std::size_t t = 0; t <= n; t += 5) {
            const double v = failure_probability(n, t, p);
            CHECK(v <= prev);
            prev = v;
        }
    }
    for (std::size_t t = 0; t <= n; t += 20) {
        double prev = -INFINITY;
        for (double p = 0.0; p <= 1.0; p += 0.02) {
            const double v = log_failure_probability(n, t, p);
            CHECK((std::isinf(v) || v >= prev - 1e-12));
            if (!std::isinf(v)) prev = v;
        }
    }
}

TEST_CASE("tiny failure probabilities stay certified in log space") {
    const double pbar = 101.3101 / 1953.0;
    const double lf = log_failure_probability(1953, 239, pbar);
    CHECK(lf < std::log(1e-20));
    // the summed tail is dominated by its first term
    const double first = std::lgamma(1954.0) - std::lgamma(241.0) - std::lgamma(1714.0) + 240 * std::log(pbar) +
                         1713 * std::log1p(-pbar);
    CHECK(lf >= first);
    CHECK(lf <= first + std::log(2.0));
}

TEST_CASE("population round trip") {
    const auto h = HyperParams::make(100, 900, 800, 900);
    Rng rng(23);
    const auto pop = sample_population(h, 30, 1000, rng);
    REQUIRE(pop.size() == 30);
    double errors = 0.0, trials = 0.0;
    for (const auto& dev : pop) {
        REQUIRE(dev.probs.size() == 1000);
        for (double p : dev.probs) REQUIRE((p >= 0.0 && p <= 0.5));
        const auto x = simulate_measurements(dev, 100, rng);
        for (auto v : x) errors += v;
        trials += 100.0 * dev.probs.size();
    }
    const double freq = errors / trials;
    // variance dominated by the 30 device means
    const double sd_delta = std::sqrt(h.delta_distribution().variance());
    CHECK(std::fabs(freq - h.expected_delta()) <= 3 * sd_delta / std::sqrt(30.0));
}

TEST_CASE("seeded population is reproducible and independent of device count") {
    const auto h = HyperParams::make(100, 900, 800, 900);
    const auto a = sample_population_seeded(h, 3, 50, 99);
    const auto b = sample_population_seeded(h, 5, 50, 99);
    for (std::size_t d = 0; d < 3; ++d) CHECK(a[d].probs == b[d].probs);
}

TEST_CASE("posterior predictive density") {
    const auto h = HyperParams::make(9378.324, 81409.79, 7166.669, 3965.296);
    const PosteriorPredictiveDensity dens(h);
    CHECK(dens(0.6) == 0.0);
    CHECK(dens(0.0) == 0.0);
    CHECK(dens(0.5) == 0.0);

    // p = t^8 / 2 absorbs the p^{a-1} singularity at 0 for shapes a > 1/8
    const auto rule = quad::gauss_legendre(400, 0.0, 1.0);
    double mass = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = rule.nodes[i];
        const double p = 0.5 * std::pow(t, 8);
        const double w = rule.weights[i] * 4.0 * std::pow(t, 7) * dens(p);
        mass += w;
        mean += w * p;
    }
    CHECK(std::fabs(mass - 1.0) < 1e-3);

    Rng rng(24);
    const auto draws = posterior_predictive_sample(h, 100000, rng);
    double s = 0.0, s2 = 0.0;
    for (double p : draws) {
        REQUIRE((p > 0.0 && p < 0.5));
        s += p;
        s2 += p * p;
    }
    const double m = s / draws.size();
    const double se = std::sqrt((s2 / draws.size() - m * m) / draws.size());
    CHECK(std::fabs(mean - m) <= 3 * se);
    CHECK(m == doctest::Approx(h.expected_delta()).epsilon(0.02));
}
