#include "spuf/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spuf::quad {

Rule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) throw std::invalid_argument("gauss_legendre: n == 0");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = mid - half * x;
        rule.nodes[n - 1 - i] = mid + half * x;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    return rule;
}

Rule chebyshev_gauss(std::size_t n, double a, double b) {
    if (n == 0) throw std::invalid_argument("chebyshev_gauss: n == 0");
    Rule rule;
    rule.nodes.resize(n);
    rule.weights.assign(n, std::numbers::pi / static_cast<double>(n));
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (std::size_t i = 0; i < n; ++i) {
        const double theta =
            std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(n));
        rule.nodes[i] = mid + half * std::cos(theta);
    }
    return rule;
}

}  // namespace spuf::quad
