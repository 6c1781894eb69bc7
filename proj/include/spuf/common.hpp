#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace spuf {

// All samplers draw from caller-owned generators of this type.
using Rng = std::mt19937_64;

// Input text that does not follow one of the documented file formats.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// An estimator whose preconditions are not met by the data (zero variance,
// negative shape estimate, ...).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An iterative solver that ran out of budget.
class ConvergenceError : public EstimationError {
public:
    using EstimationError::EstimationError;
};

// Malformed study/run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Counter-style seed derivation used everywhere a parallel unit of work
/// needs its own stream:
///   s = mix64(master); s = mix64(s ^ (a + C)); s = mix64(s ^ (b + 2C))
/// with C = 0x9E3779B97F4A7C15. Stable across releases.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) noexcept;

/// Shortest decimal representation that round-trips to the same double.
/// Locale independent.
std::string format_double(double v);

}  // namespace spuf
