#pragma once

// Reproducible experiments: the estimator comparison study and the
// binomial-approximation diagnostic.
//
// Study config files are plain "key = value" lines; '#' starts a comment.
//
//   alpha, beta, kappa, lambda   true hyperparameters (required)
//   m_dev, cells, trials         population dimensions (required)
//   replications                 number of simulated populations (required)
//   master_seed                  default 1
//   method                       one layer triple per line, e.g. Jeffreys/BayesMode/MLE;
//                                repeatable. "methods = all" adds the eight standard rows.
//   threads                      worker threads, default 1; results do not depend on it

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "spuf/estimators.hpp"
#include "spuf/noise_model.hpp"

namespace spuf::studies {

struct StudyConfig {
    model::HyperParams true_hyper{100, 900, 800, 900};
    std::size_t m_dev = 20;
    std::size_t cells = 2000;
    std::uint32_t trials = 100;
    std::size_t replications = 200;
    std::vector<est::MethodSelection> methods;
    std::uint64_t master_seed = 1;
    std::size_t threads = 1;
    est::Budget budget{};

    /// Throws ConfigError on non-positive dimensions or an empty method list.
    void validate() const;
};

/// Throws ConfigError with the offending line number.
StudyConfig parse_study_config(std::istream& in);

struct LossRow {
    est::MethodSelection method;
    double mean_loss_ab = 0.0;  // ||(alpha, beta) - estimate||^2
    double mean_loss_kl = 0.0;  // ||(kappa, lambda) - estimate||^2
    double mean_edelta = 0.0;   // mean of alpha_hat / (2 (alpha_hat + beta_hat))
    std::size_t succeeded = 0;
    std::size_t excluded = 0;   // replications whose fit threw
};

double quadratic_loss(std::pair<double, double> theta, std::pair<double, double> theta_hat);

/// Per-device simulated counts for one replication.
/// Device d draws delta, K and the cell probabilities from derive_seed(seed, d)
/// and its measurements from derive_seed(seed, d, 1).
std::vector<est::DeviceCounts> simulate_dataset(const model::HyperParams& h, std::size_t m_dev, std::size_t cells,
                                                std::uint32_t trials, std::uint64_t seed);

/// Replication i uses simulate_dataset(..., derive_seed(master_seed, i)).
/// Failed fits are excluded from that method's means and counted.
std::vector<LossRow> run_estimation_study(const StudyConfig& cfg);

void write_loss_csv(std::ostream& out, std::span<const LossRow> rows);

struct DiagnosticBatch {
    std::vector<std::pair<double, double>> pairs;  // (variance gap, max CDF distance)
    /// Pearson correlation; empty when either coordinate has zero variance.
    std::optional<double> correlation;
};

using ParamSampler = model::CellSampler;

/// N freshly sampled GBi(p_1..p_n) with p_j drawn from `param_sampler`.
DiagnosticBatch approx_diagnostic_batch(std::size_t count, std::size_t n, const ParamSampler& param_sampler, Rng& rng);

std::optional<double> pearson(std::span<const std::pair<double, double>> pairs);

}  // namespace spuf::studies
