#pragma once

#include <iosfwd>
#include <string>

#include "spuf/noise_model.hpp"

namespace spuf::cli {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Entry point of the `spuf` tool. Never throws; returns one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Key-value file with alpha, beta, kappa, lambda ('#' comments).
model::HyperParams parse_hyper_config(std::istream& in);

/// "scaled-beta:a,b,alpha,beta" or "posterior:alpha,beta,kappa,lambda".
/// Numbers may be written as fractions ("1/9"). Throws ConfigError.
model::CellSampler parse_sampler(const std::string& spec);

}  // namespace spuf::cli
