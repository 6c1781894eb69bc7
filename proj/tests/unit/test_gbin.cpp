#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spuf/gbin.hpp"

using namespace spuf;
using namespace spuf::gbin;

namespace {

std::vector<double> random_probs(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(n);
    for (auto& v : p) v = u(rng);
    return p;
}

}  // namespace

TEST_CASE("small tables") {
    const auto single = pmf(GeneralizedBinomial({0.7}));
    REQUIRE(single.size() == 2);
    CHECK(single[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(single[1] == doctest::Approx(0.7).epsilon(1e-15));

    const auto three = pmf(GeneralizedBinomial({0.1, 0.2, 0.3}));
    // hand expansion of (0.9+0.1z)(0.8+0.2z)(0.7+0.3z)
    const double want[] = {0.504, 0.398, 0.092, 0.006};
    for (int k = 0; k < 4; ++k) CHECK(three[k] == doctest::Approx(want[k]).epsilon(1e-14));

    const auto half = pmf(GeneralizedBinomial({0.5, 0.5, 0.5, 0.5}));
    const double bin4[] = {1 / 16.0, 4 / 16.0, 6 / 16.0, 4 / 16.0, 1 / 16.0};
    for (int k = 0; k < 5; ++k) CHECK(half[k] == doctest::Approx(bin4[k]).epsilon(1e-15));
}

TEST_CASE("zero and one probabilities need no special casing") {
    const auto t = pmf(GeneralizedBinomial({0.0, 1.0, 1.0, 0.0}));
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 0.0);
    CHECK(t[2] == 1.0);
    CHECK(t[3] == 0.0);
    CHECK(t[4] == 0.0);
}

TEST_CASE("invalid input") {
    CHECK_THROWS_AS(GeneralizedBinomial({}), std::invalid_argument);
    CHECK_THROWS_AS(GeneralizedBinomial({0.2, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(GeneralizedBinomial({-0.1}), std::invalid_argument);
    CHECK_THROWS_AS(GeneralizedBinomial({std::nan("")}), std::invalid_argument);
    const GeneralizedBinomial d({0.2, 0.4});
    CHECK_THROWS_AS(cdf(d, -1), std::out_of_range);
    CHECK_THROWS_AS(cdf(d, 3), std::out_of_range);
    CHECK_THROWS_AS(brute_force_pmf(std::vector<double>(21, 0.1)), std::invalid_argument);
}

TEST_CASE("recursion agrees with subset enumeration for n <= 12") {
    Rng rng(11);
    std::uniform_int_distribution<std::size_t> size(1, 12);
    for (int trial = 0; trial < 300; ++trial) {
        const auto p = random_probs(rng, size(rng));
        const auto fast = pmf(GeneralizedBinomial(p));
        const auto slow = brute_force_pmf(p);
        REQUIRE(fast.size() == slow.size());
        for (std::size_t k = 0; k < fast.size(); ++k) CHECK(std::fabs(fast[k] - slow[k]) <= 1e-12);
    }
}

TEST_CASE("pmf is nonnegative and normalized up to n = 2^16") {
    Rng rng(12);
    for (std::size_t n : {1u, 7u, 100u, 4096u, 65536u}) {
        const auto t = pmf(GeneralizedBinomial(random_probs(rng, n)));
        double s = 0.0;
        for (double v : t.values) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(std::fabs(s - 1.0) <= 1e-12);
    }
}

TEST_CASE("moments from the table match mean_var") {
    Rng rng(13);
    for (std::size_t n : {3u, 40u, 500u}) {
        const GeneralizedBinomial d(random_probs(rng, n));
        const auto t = pmf(d);
        double m1 = 0.0, m2 = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            m1 += k * t[k];
            m2 += double(k) * k * t[k];
        }
        const auto [mean, var] = mean_var(d);
        CHECK(std::fabs(m1 - mean) <= 1e-9 * n);
        CHECK(std::fabs(m2 - m1 * m1 - var) <= 1e-9 * n);
    }
}

TEST_CASE("variance gap") {
    Rng rng(14);
    for (int trial = 0; trial < 200; ++trial) {
        const auto p = random_probs(rng, 1 + trial % 30);
        const auto a = binomial_approx(GeneralizedBinomial(p));
        CHECK(a.variance_gap >= -1e-12);
        if (a.variance_gap <= 1e-12) {
            const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
            CHECK(*hi - *lo <= 1e-6);
        }
    }
    const auto eq = binomial_approx(GeneralizedBinomial(std::vector<double>(20, 0.3)));
    CHECK(std::fabs(eq.variance_gap) <= 1e-12);
    CHECK(eq.p_bar == doctest::Approx(0.3));
    const auto spread = binomial_approx(GeneralizedBinomial({0.0, 1.0}));
    CHECK(spread.variance_gap == doctest::Approx(0.5));
}

TEST_CASE("characteristic function equals the Fourier sum of the pmf") {
    Rng rng(15);
    for (std::size_t n : {1u, 10u, 100u}) {
        const GeneralizedBinomial d(random_probs(rng, n));
        const auto t = pmf(d);
        for (double x = -3.0; x <= 3.0; x += 0.37) {
            std::complex<double> sum = 0.0;
            for (std::size_t k = 0; k < t.size(); ++k) sum += t[k] * std::polar(1.0, x * static_cast<double>(k));
            CHECK(std::abs(char_function(d, x) - sum) <= 1e-10);
        }
    }
}

TEST_CASE("complementing every probability mirrors the pmf") {
    Rng rng(16);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = random_probs(rng, 1 + trial);
        const auto a = pmf(GeneralizedBinomial(p));
        for (auto& v : p) v = 1.0 - v;
        const auto b = pmf(GeneralizedBinomial(p));
        const std::size_t n = a.size() - 1;
        for (std::size_t k = 0; k <= n; ++k) CHECK(std::fabs(a[k] - b[n - k]) <= 1e-12);
    }
}

TEST_CASE("cdf and sup distance") {
    const GeneralizedBinomial d({0.1, 0.2, 0.3});
    CHECK(cdf(d, 0) == doctest::Approx(0.504));
    CHECK(cdf(d, 1) == doctest::Approx(0.902));
    CHECK(cdf(d, 3) == doctest::Approx(1.0));

    // brute-force sup distance against the binomial computed independently
    const auto approx = binomial_approx(d);
    const double pb = approx.p_bar;
    const double bin[] = {std::pow(1 - pb, 3), 3 * pb * (1 - pb) * (1 - pb), 3 * pb * pb * (1 - pb), pb * pb * pb};
    const double gbi[] = {0.504, 0.398, 0.092, 0.006};
    double fa = 0.0, fb = 0.0, sup = 0.0;
    for (int k = 0; k < 4; ++k) {
        fa += gbi[k];
        fb += bin[k];
        sup = std::max(sup, std::fabs(fa - fb));
    }
    CHECK(max_cdf_distance(d, approx) == doctest::Approx(sup).epsilon(1e-12));

    const GeneralizedBinomial flat(std::vector<double>(30, 0.25));
    CHECK(max_cdf_distance(flat, binomial_approx(flat)) <= 1e-13);
}

TEST_CASE("binomial pmf in log space") {
    const auto t = binomial_pmf(10, 0.3);
    const auto ref = pmf(GeneralizedBinomial(std::vector<double>(10, 0.3)));
    for (std::size_t k = 0; k <= 10; ++k) CHECK(t[k] == doctest::Approx(ref[k]).epsilon(1e-12));
    const auto edge = binomial_pmf(5, 0.0);
    CHECK(edge[0] == 1.0);
    CHECK(edge[5] == 0.0);
}

TEST_CASE("sampling matches the pmf") {
    const GeneralizedBinomial d({0.1, 0.5, 0.9, 0.3});
    const auto t = pmf(d);
    Rng rng(17);
    const int draws = 200000;
    std::vector<int> hist(5, 0);
    for (int i = 0; i < draws; ++i) ++hist[sample(d, rng)];
    for (int k = 0; k < 5; ++k) {
        const double se = std::sqrt(t[k] * (1 - t[k]) / draws);
        CHECK(std::fabs(hist[k] / double(draws) - t[k]) <= 4 * se + 1e-12);
    }
}

TEST_CASE("pmf_into reuses the buffer") {
    std::vector<double> buf(3, 42.0);
    const std::vector<double> p{0.2, 0.4, 0.6, 0.8};
    pmf_into(p, buf);
    const auto ref = pmf(GeneralizedBinomial(p));
    REQUIRE(buf.size() == 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(buf[k] == ref[k]);
}
