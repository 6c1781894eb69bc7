#pragma once

// Three-layer empirical-Bayes estimation: flip probabilities per cell, (delta, K)
// per device, and (alpha, beta, kappa, lambda) for the population. Each layer
// offers interchangeable estimators that can be combined freely.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spuf/nelder_mead.hpp"
#include "spuf/noise_model.hpp"

namespace spuf::est {

enum class CellMethod { Moments, Jeffreys };
enum class DeviceMethod { Moments, MLE, BayesMode };
enum class HyperMethod { Moments, MLE };

struct MethodSelection {
    CellMethod cell = CellMethod::Jeffreys;
    DeviceMethod device = DeviceMethod::BayesMode;
    HyperMethod hyper = HyperMethod::MLE;

    auto operator<=>(const MethodSelection&) const = default;
};

/// "Moments/Moments/Moments", "Jeffreys/BayesMode/MLE", ...
std::string to_string(const MethodSelection& sel);
/// Accepts the to_string form; names are case-insensitive and "Bayes" is an
/// alias for Jeffreys (cell layer) or BayesMode (device layer).
/// Throws ConfigError on anything else.
MethodSelection parse_method_selection(const std::string& text);

/// The eight combinations compared in the estimator study, in table order.
std::vector<MethodSelection> study_methods();

struct CellCounts {
    std::uint32_t x = 0;  // observed error states
    std::uint32_t m = 0;  // trials
};

struct Budget {
    opt::NelderMeadOptions nelder_mead{};
    int newton_max_iter = 100;
    /// Cell estimates are clamped into [eps, 1/2 - eps] before any log-density evaluation.
    double clamp_eps = 1e-6;
    std::size_t jeffreys_nodes = 512;
};

// ---- cell layer ----------------------------------------------------------

/// x / m clamped into [0, 1/2]. Throws std::invalid_argument for m == 0 or x > m.
double estimate_p_moments(const CellCounts& c);
/// True when x / m exceeds 1/2, i.e. the stable state looks misassigned.
bool is_misassigned(const CellCounts& c) noexcept;

/// Posterior mean of p under the Be_[0,1/2](1/2, 1/2) prior and a Bi(m, p)
/// likelihood. With u = 2p the prior singularities become the Chebyshev
/// weight u^{-1/2} (1 - u)^{-1/2}, so numerator and normalizer are both
/// evaluated by `nodes`-point Gauss-Chebyshev quadrature.
/// m == 0 is allowed and yields the prior mean 1/4.
double estimate_p_jeffreys(const CellCounts& c, std::size_t nodes = 512);

/// Memoizes Jeffreys estimates for every x at a given m.
class JeffreysCache {
public:
    explicit JeffreysCache(std::size_t nodes = 512) : nodes_(nodes) {}
    double operator()(const CellCounts& c);

private:
    std::size_t nodes_;
    std::map<std::uint32_t, std::vector<double>> tables_;
};

// ---- device layer --------------------------------------------------------

struct DeviceFit {
    model::DeviceParams params;
    double log_objective = 0.0;  // maximized log-likelihood (+ log prior for the mode)
    int evals = 0;
    bool converged = true;
};

/// delta = mean, K = 2 delta (1 - 2 delta) / (4/(c-1) sum (p - delta)^2) - 1.
/// Throws EstimationError on fewer than two cells, zero variance, delta outside
/// (0, 1/2) or K <= 0.
model::DeviceParams estimate_device_moments(std::span<const double> p_hats);

/// Maximizes the Be_[0,1/2](2 delta K, (1 - 2 delta) K) log-likelihood over
/// (logit 2delta, log K). Starts from the moments estimate when it is valid,
/// otherwise from (0.05, 1). Throws ConvergenceError if the budget runs out.
DeviceFit estimate_device_mle(std::span<const double> p_hats, const Budget& budget = {});

/// As estimate_device_mle, adding the log of the prior
/// p(delta, K) ~ 1 / (K sqrt(2 delta (1 - 2 delta))).
DeviceFit estimate_device_bayes_mode(std::span<const double> p_hats, const Budget& budget = {});

/// Log-likelihood and log-posterior used by the two estimators above, exposed
/// for grid-search checks. p_hats are clamped the same way.
double device_log_likelihood(std::span<const double> p_hats, double delta, double k_shape,
                             double clamp_eps = 1e-6);
double device_log_posterior(std::span<const double> p_hats, double delta, double k_shape,
                            double clamp_eps = 1e-6);

// ---- hyper layer ---------------------------------------------------------

struct HyperFit {
    model::HyperParams params;
    double beta_log_likelihood = 0.0;  // of the deltas under Be_[0,1/2](alpha, beta)
    int evals = 0;
    int newton_iters = 0;
};

/// Moment matching of Be_[0,1/2](alpha, beta) to the deltas and
/// Gamma(kappa, rate lambda) to the shapes (sample variances, n - 1).
/// Throws EstimationError when a variance is not positive or the beta
/// moment factor 2d(1-2d)/(4v) does not exceed 1.
model::HyperParams estimate_hyper_moments(std::span<const double> deltas, std::span<const double> ks);

/// Beta MLE by Nelder-Mead over (log alpha, log beta); gamma MLE by Newton on
/// log kappa - digamma(kappa) = log(mean K) - mean(log K), lambda = kappa / mean K.
HyperFit estimate_hyper_mle(std::span<const double> deltas, std::span<const double> ks,
                            const Budget& budget = {});

/// Gamma shape/rate MLE alone. Throws EstimationError on zero dispersion.
std::pair<double, double> gamma_mle(std::span<const double> ks, int max_iter = 100,
                                    int* iterations = nullptr);

// ---- full pipeline -------------------------------------------------------

struct DeviceCounts {
    std::string device_id;
    std::vector<CellCounts> cells;
};

struct FitDiagnostics {
    std::size_t flagged_cells = 0;  // moments cell estimates clamped from above 1/2
    std::vector<bool> device_converged;
    std::vector<double> device_objective;
    int hyper_evals = 0;
};

struct FitResult {
    std::vector<std::vector<double>> cell_probs;
    std::vector<model::DeviceParams> device_params;
    model::HyperParams hyper;
    FitDiagnostics diagnostics;
};

/// Runs the three layers in order. Needs at least two devices with at least
/// two cells each. Layer errors are rethrown with the failing device named.
FitResult fit(std::span<const DeviceCounts> data, const MethodSelection& sel, const Budget& budget = {});

/// Cell layer only, for reuse across method combinations.
std::vector<double> estimate_cells(std::span<const CellCounts> cells, CellMethod method,
                                   JeffreysCache& cache, std::size_t* flagged = nullptr);
/// Device layer only.
DeviceFit estimate_device(std::span<const double> p_hats, DeviceMethod method, const Budget& budget);
/// Hyper layer only.
HyperFit estimate_hyper(std::span<const double> deltas, std::span<const double> ks, HyperMethod method,
                        const Budget& budget);

}  // namespace spuf::est
