#pragma once

// Hierarchical noise model for SRAM-PUF cells:
//
//   x_ij | p_ij        ~ Bi(m_i, p_ij)
//   p_ij | delta_i,K_i ~ Be_[0,1/2](2 delta_i K_i, (1 - 2 delta_i) K_i)
//   delta_i | a, b     ~ Be_[0,1/2](alpha, beta)
//   K_i | kappa, lam   ~ Gamma(kappa, rate lambda)

#include <cstdint>
#include <functional>
#include <vector>

#include "spuf/common.hpp"

namespace spuf::model {

/// Q = a + (b - a) P with P ~ Beta(alpha, beta).
struct ScaledBeta {
    double a = 0.0;
    double b = 0.5;
    double alpha = 1.0;
    double beta = 1.0;

    /// Throws std::invalid_argument unless a < b and both shapes are positive.
    static ScaledBeta make(double a, double b, double alpha, double beta);

    double mean() const noexcept { return a + (b - a) * alpha / (alpha + beta); }
    double variance() const noexcept;
    double log_pdf(double x) const;
    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double prob) const;
};

/// Device-level parameters: mean flip probability and shape.
struct DeviceParams {
    double delta = 0.05;
    double k_shape = 1.0;

    /// Throws std::invalid_argument unless 0 < delta < 1/2 and k_shape > 0.
    static DeviceParams make(double delta, double k_shape);
};

/// Population-level parameters of the delta and K laws.
struct HyperParams {
    double alpha = 1.0;
    double beta = 1.0;
    double kappa = 1.0;
    double lambda = 1.0;

    /// Throws std::invalid_argument unless all four are finite and positive.
    static HyperParams make(double alpha, double beta, double kappa, double lambda);

    double expected_delta() const noexcept { return 0.5 * alpha / (alpha + beta); }
    double expected_k() const noexcept { return kappa / lambda; }
    ScaledBeta delta_distribution() const { return ScaledBeta::make(0.0, 0.5, alpha, beta); }
};

struct SimulatedDevice {
    DeviceParams params;
    std::vector<double> probs;
};

using CellSampler = std::function<double(Rng&)>;

double sample_gamma(double shape, double rate, Rng& rng);
/// Beta(alpha, beta) via X / (X + Y) with X ~ Ga(alpha), Y ~ Ga(beta).
double sample_beta(double alpha, double beta, Rng& rng);
double sample_scaled_beta(const ScaledBeta& sb, Rng& rng);

/// Be_[0,1/2](2 delta K, (1 - 2 delta) K); its mean is delta.
ScaledBeta device_cell_distribution(const DeviceParams& params);

/// Draws m_dev devices. Device i uses its own generator seeded with
/// derive_seed(base, i), where base is one draw from `rng`.
std::vector<SimulatedDevice> sample_population(const HyperParams& h, std::size_t m_dev,
                                               std::size_t cells, Rng& rng);

/// Same as above with an explicit base seed instead of a draw from a generator.
std::vector<SimulatedDevice> sample_population_seeded(const HyperParams& h, std::size_t m_dev,
                                                      std::size_t cells, std::uint64_t base_seed);

/// x_j ~ Bi(trials, p_j), independent per cell.
std::vector<std::uint32_t> simulate_measurements(const SimulatedDevice& dev, std::uint32_t trials,
                                                 Rng& rng);

/// Compound law of GBi(pi_1..pi_n) for iid pi with mean pi_mean: Bi(n, pi_mean).
struct CompoundBinomial {
    std::size_t n = 0;
    double p = 0.0;

    double mean() const noexcept { return static_cast<double>(n) * p; }
    double variance() const noexcept { return static_cast<double>(n) * p * (1.0 - p); }
};

/// Throws std::invalid_argument unless pi_mean is in [0,1].
CompoundBinomial compound_binomial(std::size_t n, double pi_mean);

/// log P(Bi(n, p) > capacity). -inf when the event is impossible.
/// Terms are accumulated with log-sum-exp outward from the largest one and the
/// scan stops once a term falls 60 nats below the running sum.
/// Throws std::invalid_argument when capacity > n or p is outside [0,1].
double log_failure_probability(std::size_t n, std::size_t capacity, double p);

/// P(Bi(n, p) > capacity).
double failure_probability(std::size_t n, std::size_t capacity, double p);

/// Composition sampler for the posterior-predictive flip probability:
/// delta, then K, then p.
double posterior_predictive_draw(const HyperParams& h, Rng& rng);
std::vector<double> posterior_predictive_sample(const HyperParams& h, std::size_t count, Rng& rng);
CellSampler posterior_predictive_sampler(const HyperParams& h);

struct DensityGrid {
    std::size_t delta_nodes = 200;
    std::size_t k_nodes = 200;
    /// Total probability left out of each integration range (split evenly between tails).
    double tail_mass = 1e-8;
};

/// Posterior-predictive density of a single flip probability, integrated over
/// delta and K on a fixed Gauss-Legendre tensor grid spanning the central
/// quantile ranges of the two population laws.
class PosteriorPredictiveDensity {
public:
    explicit PosteriorPredictiveDensity(const HyperParams& h, const DensityGrid& grid = {});

    /// 0 outside the open interval (0, 1/2).
    double operator()(double p) const;

private:
    struct Node {
        double log_norm;  // log weight - log B(a, b) + log 2
        double a_minus_1;
        double b_minus_1;
    };
    std::vector<Node> nodes_;
};

double posterior_predictive_density(const HyperParams& h, double p, const DensityGrid& grid = {});

}  // namespace spuf::model
