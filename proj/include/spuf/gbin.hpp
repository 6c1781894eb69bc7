#pragma once

// Generalized (Poisson) binomial distribution: the law of X = sum_j X_j for
// independent X_j ~ Bernoulli(p_j).

#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "spuf/common.hpp"

namespace spuf::gbin {

/// P(X = k) for k = 0..n.
struct PmfTable {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
};

/// Binomial Bi(n, p_bar) matched in mean to a GeneralizedBinomial.
struct BinomialApprox {
    std::size_t n = 0;
    double p_bar = 0.0;
    /// n p_bar (1 - p_bar) - sum_j p_j (1 - p_j); never negative in exact arithmetic.
    double variance_gap = 0.0;
};

class GeneralizedBinomial {
public:
    /// Throws std::invalid_argument for an empty vector or an entry outside [0,1] (NaN included).
    explicit GeneralizedBinomial(std::vector<double> probs);

    std::size_t n() const noexcept { return probs_.size(); }
    std::span<const double> probs() const noexcept { return probs_; }

private:
    std::vector<double> probs_;
};

/// Exact PMF by adding one trial at a time:
///   T_j(k) = p_j T_{j-1}(k-1) + (1 - p_j) T_{j-1}(k),  T_0 = (1).
/// O(n^2) time, one buffer of length n+1.
PmfTable pmf(const GeneralizedBinomial& dist);

/// In-place form of the recursion for hot loops; `table` is resized to n+1.
void pmf_into(std::span<const double> probs, std::vector<double>& table);

/// P(X <= k). Throws std::out_of_range unless 0 <= k <= n.
double cdf(const GeneralizedBinomial& dist, long k);

/// Prefix sums of a PMF table, clamped to at most 1.
std::vector<double> cdf_table(const PmfTable& table);

/// (sum p_j, sum p_j (1 - p_j)).
std::pair<double, double> mean_var(const GeneralizedBinomial& dist);

/// prod_j (1 - p_j + p_j e^{it}).
std::complex<double> char_function(const GeneralizedBinomial& dist, double t);

/// One draw as a sum of independent Bernoulli trials.
std::size_t sample(const GeneralizedBinomial& dist, Rng& rng);

BinomialApprox binomial_approx(const GeneralizedBinomial& dist);

/// sup_k |F_GBi(k) - F_Bi(k)| over every support point 0..n.
double max_cdf_distance(const GeneralizedBinomial& dist, const BinomialApprox& approx);

/// Subset-sum evaluation of the PMF over all 2^n outcomes. Intended as an
/// independent oracle; throws std::invalid_argument for n > 20.
PmfTable brute_force_pmf(std::span<const double> probs);

/// Binomial(n, p) PMF computed in log space.
std::vector<double> binomial_pmf(std::size_t n, double p);

}  // namespace spuf::gbin
