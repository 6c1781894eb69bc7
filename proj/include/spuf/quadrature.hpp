#pragma once

#include <cstddef>
#include <vector>

namespace spuf::quad {

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// n-point Gauss-Chebyshev rule (first kind) for the weight
/// (u - a)^{-1/2} (b - u)^{-1/2} on [a, b]: equal weights pi/n.
Rule chebyshev_gauss(std::size_t n, double a = -1.0, double b = 1.0);

}  // namespace spuf::quad
