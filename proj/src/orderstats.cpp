#include "spuf/orderstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>


namespace spuf::os {

OrderStatSpec OrderStatSpec::make(std::size_t k, std::size_t n) {
    if (k < 1 || k > n) throw std::invalid_argument("order statistic: need 1 <= k <= n");
    return OrderStatSpec{k, n};
}

long MaskPolicy::effective_capacity() const noexcept {
    if (capacity_decrement_per == 0) return static_cast<long>(base_capacity);
    return static_cast<long>(base_capacity) - static_cast<long>(ignored / capacity_decrement_per);
}

void MaskPolicy::validate() const {
    if (response_len == 0) throw std::invalid_argument("mask policy: empty response");
    if (ignored >= response_len) throw std::invalid_argument("mask policy: must keep at least one cell");
    if (capacity_decrement_per == 0) throw std::invalid_argument("mask policy: capacity decrement must be positive");
    if (effective_capacity() < 0) throw std::invalid_argument("mask policy: negative effective capacity");
}

double orderstat_pdf(const Cdf& cdf, const Pdf& pdf, const OrderStatSpec& spec, double x) {
    const double f = pdf(x);
    if (!(f > 0.0)) return 0.0;
    const double big_f = std::clamp(cdf(x), 0.0, 1.0);
    const double below = static_cast<double>(spec.k - 1);
    const double above = static_cast<double>(spec.n - spec.k);
    if ((below > 0 && big_f == 0.0) || (above > 0 && big_f == 1.0)) return 0.0;

    double lv = std::lgamma(static_cast<double>(spec.n) + 1.0) - std::lgamma(below + 1.0) - std::lgamma(above + 1.0) +
                std::log(f);
    if (below > 0) lv += below * std::log(big_f);
    if (above > 0) lv += above * std::log1p(-big_f);
    return std::exp(lv);
}

double expected_orderstat_scaled_beta_alpha1(double a, double b, double alpha, const OrderStatSpec& spec) {
    if (!(alpha > 0.0)) throw std::invalid_argument("order statistic: alpha must be positive");
    if (spec.k < 1 || spec.k > spec.n) throw std::invalid_argument("order statistic: need 1 <= k <= n");
    const double k = static_cast<double>(spec.k);
    const double n = static_cast<double>(spec.n);
    const double inv = 1.0 / alpha;
    // B(k + 1/alpha, n - k + 1) / B(k, n - k + 1)
    const double log_ratio = std::lgamma(k + inv) - std::lgamma(n + 1.0 + inv) - std::lgamma(k) + std::lgamma(n + 1.0);
    return a + (b - a) * std::exp(log_ratio);
}

double expected_orderstat_scaled_beta_beta1(double a, double b, double beta, const OrderStatSpec& spec) {
    if (spec.k < 1 || spec.k > spec.n) throw std::invalid_argument("order statistic: need 1 <= k <= n");
    return a + b - expected_orderstat_scaled_beta_alpha1(a, b, beta, OrderStatSpec{spec.n - spec.k + 1, spec.n});
}

McEstimate expected_orderstat_mc(const model::CellSampler& sampler, const OrderStatSpec& spec, std::size_t replicates,
                                 Rng& rng) {
    if (replicates < 100) throw std::invalid_argument("order statistic MC: need at least 100 replicates");
    if (spec.k < 1 || spec.k > spec.n) throw std::invalid_argument("order statistic: need 1 <= k <= n");
    std::vector<double> draws(spec.n);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < replicates; ++r) {
        for (auto& d : draws) d = sampler(rng);
        auto kth = draws.begin() + static_cast<std::ptrdiff_t>(spec.k - 1);
        std::nth_element(draws.begin(), kth, draws.end());
        sum += *kth;
        sum_sq += *kth * *kth;
    }
    const double nrep = static_cast<double>(replicates);
    const double mean = sum / nrep;
    const double var = std::max(0.0, (sum_sq - nrep * mean * mean) / (nrep - 1.0));
    return McEstimate{mean, std::sqrt(var / nrep)};
}

namespace {

// Draws one replicate into `sorted` (ascending, ties by draw index).
void draw_sorted(const model::CellSampler& sampler, Rng& rng, std::vector<double>& raw, std::vector<std::size_t>& idx,
                 std::vector<double>& sorted) {
    for (auto& p : raw) p = sampler(rng);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return raw[a] < raw[b]; });
    for (std::size_t i = 0; i < idx.size(); ++i) sorted[i] = raw[idx[i]];
}

}  // namespace

std::vector<MaskReport> mask_table(const MaskPolicy& base, std::size_t r_max, const model::CellSampler& sampler,
                                   std::size_t replicates, Rng& rng) {
    if (replicates == 0) throw std::invalid_argument("mask analysis: need at least one replicate");
    const std::size_t len = base.response_len;
    std::vector<MaskReport> rows(r_max + 1);
    for (std::size_t r = 0; r <= r_max; ++r) {
        MaskPolicy p = base;
        p.ignored = r;
        p.validate();
        rows[r].ignored = r;
        rows[r].capacity = p.effective_capacity();
        rows[r].replicates = replicates;
    }

    const std::uint64_t base_seed = rng();
    std::vector<double> raw(len), sorted(len), table;
    std::vector<std::size_t> idx(len);
    std::vector<double> sums(r_max + 1, 0.0), maxes(r_max + 1, 0.0), rates(r_max + 1, 0.0);

    for (std::size_t rep = 0; rep < replicates; ++rep) {
        Rng local(derive_seed(base_seed, rep));
        draw_sorted(sampler, local, raw, idx, sorted);

        // T_j after the j smallest probabilities; keep the tails we need
        table.assign(len + 1, 0.0);
        table[0] = 1.0;
        double prefix = 0.0;
        for (std::size_t j = 0; j < len; ++j) {
            const double p = sorted[j];
            const double q = 1.0 - p;
            table[j + 1] = p * table[j];
            for (std::size_t k = j; k > 0; --k) table[k] = p * table[k - 1] + q * table[k];
            table[0] *= q;
            prefix += p;

            const std::size_t kept = j + 1;
            if (kept + r_max < len) continue;
            const std::size_t r = len - kept;
            const auto cap = static_cast<std::size_t>(rows[r].capacity);
            double tail = 0.0;
            for (std::size_t k = cap + 1; k <= kept; ++k) tail += table[k];
            tail = std::min(tail, 1.0);
            sums[r] += tail;
            maxes[r] = std::max(maxes[r], tail);
            rates[r] += prefix / static_cast<double>(kept);
        }
    }
    const double nrep = static_cast<double>(replicates);
    for (std::size_t r = 0; r <= r_max; ++r) {
        rows[r].avg_failure_prob = sums[r] / nrep;
        rows[r].max_failure_prob = maxes[r];
        rows[r].mean_error_rate_after_mask = rates[r] / nrep;
    }
    return rows;
}

MaskReport mask_analysis(const MaskPolicy& policy, const model::CellSampler& sampler, std::size_t replicates,
                         Rng& rng) {
    policy.validate();
    // rows below `ignored` are computed on the same draws but discarded
    MaskPolicy base = policy;
    base.ignored = 0;
    const std::size_t r = policy.ignored;
    // lower r may be infeasible only if capacity increases with r, which it never does
    auto rows = mask_table(base, r, sampler, replicates, rng);
    return rows.back();
}

std::vector<double> mask_curve(std::size_t response_len, std::size_t r_max, const model::CellSampler& sampler,
                               std::size_t replicates, Rng& rng) {
    if (r_max >= response_len) throw std::invalid_argument("mask curve: r_max must be below the response length");
    if (replicates == 0) throw std::invalid_argument("mask curve: need at least one replicate");
    const std::uint64_t base_seed = rng();
    std::vector<double> raw(response_len), sorted(response_len);
    std::vector<std::size_t> idx(response_len);
    std::vector<double> acc(r_max + 1, 0.0);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
        Rng local(derive_seed(base_seed, rep));
        draw_sorted(sampler, local, raw, idx, sorted);
        double prefix = 0.0;
        for (std::size_t j = 0; j < response_len; ++j) {
            prefix += sorted[j];
            const std::size_t kept = j + 1;
            if (kept + r_max >= response_len) acc[response_len - kept] += prefix / static_cast<double>(kept);
        }
    }
    for (auto& v : acc) v /= static_cast<double>(replicates);
    return acc;
}

}  // namespace spuf::os
