#pragma once

// Order statistics of iid flip probabilities and the bit-masking analysis
// built on them (dropping the r most unstable cells of a response).

#include <cstddef>
#include <functional>
#include <vector>

#include "spuf/common.hpp"
#include "spuf/noise_model.hpp"

namespace spuf::os {

/// k-th smallest of n draws (1-based).
struct OrderStatSpec {
    std::size_t k = 1;
    std::size_t n = 1;

    /// Throws std::invalid_argument unless 1 <= k <= n.
    static OrderStatSpec make(std::size_t k, std::size_t n);
};

struct MaskPolicy {
    std::size_t response_len = 16;
    std::size_t ignored = 0;
    std::size_t base_capacity = 3;
    /// One unit of correction capacity is lost per this many ignored cells.
    std::size_t capacity_decrement_per = 2;

    /// base_capacity - floor(ignored / capacity_decrement_per); negative when
    /// the policy is infeasible.
    long effective_capacity() const noexcept;
    /// Throws std::invalid_argument for r >= l, a zero decrement, or a negative capacity.
    void validate() const;
};

struct MaskReport {
    std::size_t ignored = 0;
    long capacity = 0;
    double mean_error_rate_after_mask = 0.0;
    double avg_failure_prob = 0.0;
    double max_failure_prob = 0.0;
    std::size_t replicates = 0;
};

using Cdf = std::function<double(double)>;
using Pdf = std::function<double(double)>;

/// n! / ((k-1)! (n-k)!) F(x)^{k-1} (1 - F(x))^{n-k} f(x), evaluated in log space.
double orderstat_pdf(const Cdf& cdf, const Pdf& pdf, const OrderStatSpec& spec, double x);

/// E of the k-th smallest of n iid Be_[a,b](alpha, 1) draws:
///   a + (b - a) B(k + 1/alpha, n - k + 1) / B(k, n - k + 1).
double expected_orderstat_scaled_beta_alpha1(double a, double b, double alpha, const OrderStatSpec& spec);

/// Same for Be_[a,b](1, beta) via the mirror Y = a + b - X.
double expected_orderstat_scaled_beta_beta1(double a, double b, double beta, const OrderStatSpec& spec);

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// Monte Carlo mean of the k-th smallest of n draws; N >= 100.
McEstimate expected_orderstat_mc(const model::CellSampler& sampler, const OrderStatSpec& spec, std::size_t replicates,
                                 Rng& rng);

/// Per replicate: draw l probabilities, drop the r largest (stable sort), then
/// record the mean of the rest and the exact GBi probability of more than
/// `capacity` errors among them. Reports the across-replicate mean of the
/// former and the mean and max of the latter.
MaskReport mask_analysis(const MaskPolicy& policy, const model::CellSampler& sampler, std::size_t replicates,
                         Rng& rng);

/// mask_analysis for r = 0..r_max on shared replicate draws.
std::vector<MaskReport> mask_table(const MaskPolicy& base, std::size_t r_max, const model::CellSampler& sampler,
                                   std::size_t replicates, Rng& rng);

/// Mean flip probability of the surviving cells for r = 0..r_max.
std::vector<double> mask_curve(std::size_t response_len, std::size_t r_max, const model::CellSampler& sampler,
                               std::size_t replicates, Rng& rng);

}  // namespace spuf::os
