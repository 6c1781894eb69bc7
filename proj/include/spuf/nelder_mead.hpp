#pragma once

#include <functional>
#include <vector>

namespace spuf::opt {

struct NelderMeadOptions {
    int max_evals = 10000;
    /// Converged once the largest vertex distance from the best vertex drops below this.
    double simplex_tol = 1e-10;
    double initial_step = 0.1;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;  // objective at x (minimized)
    int evals = 0;
    bool converged = false;
};

/// Unconstrained minimization with the standard reflection / expansion /
/// contraction / shrink coefficients (1, 2, 1/2, 1/2). Non-finite objective
/// values are treated as +inf.
OptimResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                        std::vector<double> start, const NelderMeadOptions& opts = {});

}  // namespace spuf::opt
