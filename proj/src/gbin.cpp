#include "spuf/gbin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace spuf::gbin {

GeneralizedBinomial::GeneralizedBinomial(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw std::invalid_argument("generalized binomial: empty probability vector");
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        const double p = probs_[j];
        // written so that NaN fails the check
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("generalized binomial: probability " + std::to_string(j) +
                                        " outside [0,1]");
        }
    }
}

void pmf_into(std::span<const double> probs, std::vector<double>& table) {
    const std::size_t n = probs.size();
    table.assign(n + 1, 0.0);
    table[0] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = probs[j];
        const double q = 1.0 - p;
        // descending k so that table[k-1] still holds T_{j-1}
        table[j + 1] = p * table[j];
        for (std::size_t k = j; k > 0; --k) table[k] = p * table[k - 1] + q * table[k];
        table[0] *= q;
    }
}

PmfTable pmf(const GeneralizedBinomial& dist) {
    PmfTable out;
    pmf_into(dist.probs(), out.values);
    return out;
}

std::vector<double> cdf_table(const PmfTable& table) {
    std::vector<double> out(table.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < table.size(); ++k) {
        acc += table[k];
        out[k] = std::min(acc, 1.0);
    }
    return out;
}

double cdf(const GeneralizedBinomial& dist, long k) {
    if (k < 0 || static_cast<std::size_t>(k) > dist.n()) {
        throw std::out_of_range("cdf: k outside [0, n]");
    }
    return cdf_table(pmf(dist))[static_cast<std::size_t>(k)];
}

std::pair<double, double> mean_var(const GeneralizedBinomial& dist) {
    double mean = 0.0;
    double var = 0.0;
    for (double p : dist.probs()) {
        mean += p;
        var += p * (1.0 - p);
    }
    return {mean, var};
}

std::complex<double> char_function(const GeneralizedBinomial& dist, double t) {
    const std::complex<double> e = std::polar(1.0, t);
    std::complex<double> acc{1.0, 0.0};
    for (double p : dist.probs()) acc *= (1.0 - p) + p * e;
    return acc;
}

std::size_t sample(const GeneralizedBinomial& dist, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t count = 0;
    for (double p : dist.probs()) {
        if (unif(rng) < p) ++count;
    }
    return count;
}

BinomialApprox binomial_approx(const GeneralizedBinomial& dist) {
    const auto [mean, var] = mean_var(dist);
    const double n = static_cast<double>(dist.n());
    BinomialApprox out;
    out.n = dist.n();
    out.p_bar = mean / n;
    out.variance_gap = n * out.p_bar * (1.0 - out.p_bar) - var;
    return out;
}

std::vector<double> binomial_pmf(std::size_t n, double p) {
    std::vector<double> out(n + 1, 0.0);
    if (p <= 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (p >= 1.0) {
        out[n] = 1.0;
        return out;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t k = 0; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double nk = static_cast<double>(n - k);
        out[k] = std::exp(lgn - std::lgamma(kk + 1.0) - std::lgamma(nk + 1.0) + kk * lp + nk * lq);
    }
    return out;
}

double max_cdf_distance(const GeneralizedBinomial& dist, const BinomialApprox& approx) {
    const auto f_gbi = cdf_table(pmf(dist));
    const auto f_bi = cdf_table(PmfTable{binomial_pmf(approx.n, approx.p_bar)});
    double sup = 0.0;
    for (std::size_t k = 0; k < f_gbi.size() && k < f_bi.size(); ++k) {
        sup = std::max(sup, std::abs(f_gbi[k] - f_bi[k]));
    }
    return sup;
}

PmfTable brute_force_pmf(std::span<const double> probs) {
    const std::size_t n = probs.size();
    if (n > 20) throw std::invalid_argument("brute_force_pmf: n > 20");
    PmfTable out;
    out.values.assign(n + 1, 0.0);
    const std::uint32_t subsets = 1u << n;
    for (std::uint32_t mask = 0; mask < subsets; ++mask) {
        double prod = 1.0;
        std::size_t k = 0;
        for (std::size_t s = 0; s < n; ++s) {
            if (mask & (1u << s)) {
                prod *= probs[s];
                ++k;
            } else {
                prod *= 1.0 - probs[s];
            }
        }
        out.values[k] += prod;
    }
    return out;
}

}  // namespace spuf::gbin
