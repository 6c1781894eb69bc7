#include "spuf/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/gamma.hpp>

#include "spuf/quadrature.hpp"

namespace spuf::model {

namespace {

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_choose(std::size_t n, std::size_t k) {
    return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_add(double x, double y) {
    if (x == -std::numeric_limits<double>::infinity()) return y;
    if (y == -std::numeric_limits<double>::infinity()) return x;
    const double hi = std::max(x, y);
    const double lo = std::min(x, y);
    return hi + std::log1p(std::exp(lo - hi));
}

}  // namespace

ScaledBeta ScaledBeta::make(double a, double b, double alpha, double beta) {
    if (!(a < b)) throw std::invalid_argument("scaled beta: requires a < b");
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("scaled beta: shapes must be positive and finite");
    }
    return ScaledBeta{a, b, alpha, beta};
}

double ScaledBeta::variance() const noexcept {
    const double s = alpha + beta;
    const double w = b - a;
    return w * w * alpha * beta / (s * s * (s + 1.0));
}

double ScaledBeta::log_pdf(double x) const {
    if (!(x > a && x < b)) return -std::numeric_limits<double>::infinity();
    const double w = b - a;
    const double u = (x - a) / w;
    return (alpha - 1.0) * std::log(u) + (beta - 1.0) * std::log1p(-u) - log_beta_fn(alpha, beta) -
           std::log(w);
}

double ScaledBeta::pdf(double x) const { return std::exp(log_pdf(x)); }

double ScaledBeta::cdf(double x) const {
    if (x <= a) return 0.0;
    if (x >= b) return 1.0;
    return boost::math::cdf(boost::math::beta_distribution<double>(alpha, beta), (x - a) / (b - a));
}

double ScaledBeta::quantile(double prob) const {
    return a + (b - a) * boost::math::quantile(boost::math::beta_distribution<double>(alpha, beta), prob);
}

DeviceParams DeviceParams::make(double delta, double k_shape) {
    if (!(delta > 0.0 && delta < 0.5)) throw std::invalid_argument("device params: delta outside (0, 1/2)");
    if (!(k_shape > 0.0) || !std::isfinite(k_shape)) {
        throw std::invalid_argument("device params: K must be positive and finite");
    }
    return DeviceParams{delta, k_shape};
}

HyperParams HyperParams::make(double alpha, double beta, double kappa, double lambda) {
    for (double v : {alpha, beta, kappa, lambda}) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument("hyperparameters must be positive and finite");
        }
    }
    return HyperParams{alpha, beta, kappa, lambda};
}

double sample_gamma(double shape, double rate, Rng& rng) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

double sample_beta(double alpha, double beta, Rng& rng) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    while (true) {
        const double x = ga(rng);
        const double y = gb(rng);
        const double s = x + y;
        if (s > 0.0) return x / s;
    }
}

double sample_scaled_beta(const ScaledBeta& sb, Rng& rng) {
    return sb.a + (sb.b - sb.a) * sample_beta(sb.alpha, sb.beta, rng);
}

ScaledBeta device_cell_distribution(const DeviceParams& params) {
    const double d2 = 2.0 * params.delta;
    return ScaledBeta::make(0.0, 0.5, d2 * params.k_shape, (1.0 - d2) * params.k_shape);
}

std::vector<SimulatedDevice> sample_population_seeded(const HyperParams& h, std::size_t m_dev,
                                                      std::size_t cells, std::uint64_t base_seed) {
    if (m_dev == 0) throw std::invalid_argument("sample_population: m_dev must be >= 1");
    if (cells == 0) throw std::invalid_argument("sample_population: cells must be >= 1");
    const ScaledBeta delta_law = h.delta_distribution();
    std::vector<SimulatedDevice> out(m_dev);
    for (std::size_t i = 0; i < m_dev; ++i) {
        Rng rng(derive_seed(base_seed, i));
        auto& dev = out[i];
        // a draw can land on the closed boundary only through underflow
        double delta = 0.0;
        do {
            delta = sample_scaled_beta(delta_law, rng);
        } while (!(delta > 0.0 && delta < 0.5));
        double k = 0.0;
        do {
            k = sample_gamma(h.kappa, h.lambda, rng);
        } while (!(k > 0.0));
        dev.params = DeviceParams::make(delta, k);
        const ScaledBeta cell_law = device_cell_distribution(dev.params);
        dev.probs.resize(cells);
        for (auto& p : dev.probs) p = sample_scaled_beta(cell_law, rng);
    }
    return out;
}

std::vector<SimulatedDevice> sample_population(const HyperParams& h, std::size_t m_dev,
                                               std::size_t cells, Rng& rng) {
    return sample_population_seeded(h, m_dev, cells, rng());
}

std::vector<std::uint32_t> simulate_measurements(const SimulatedDevice& dev, std::uint32_t trials,
                                                 Rng& rng) {
    if (trials == 0) throw std::invalid_argument("simulate_measurements: trials must be >= 1");
    std::vector<std::uint32_t> out(dev.probs.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const double p = dev.probs[j];
        if (p <= 0.0) {
            out[j] = 0;
            continue;
        }
        std::binomial_distribution<std::uint32_t> bin(trials, std::min(p, 1.0));
        out[j] = bin(rng);
    }
    return out;
}

CompoundBinomial compound_binomial(std::size_t n, double pi_mean) {
    if (!(pi_mean >= 0.0 && pi_mean <= 1.0)) {
        throw std::invalid_argument("compound_binomial: mean probability outside [0,1]");
    }
    return CompoundBinomial{n, pi_mean};
}

double log_failure_probability(std::size_t n, std::size_t capacity, double p) {
    if (capacity > n) throw std::invalid_argument("failure probability: capacity exceeds n");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("failure probability: p outside [0,1]");
    constexpr double kNegInf = -std::numeric_limits<double>::infinity();
    if (capacity == n || p == 0.0) return kNegInf;
    if (p == 1.0) return 0.0;

    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    auto term = [&](std::size_t k) {
        return log_choose(n, k) + static_cast<double>(k) * lp + static_cast<double>(n - k) * lq;
    };
    constexpr double kCutoff = 60.0;

    // the binomial terms are unimodal; start at the mode restricted to the tail
    const std::size_t first = capacity + 1;
    const auto mode = static_cast<std::size_t>(std::floor(static_cast<double>(n + 1) * p));
    const std::size_t start = std::clamp(mode, first, n);

    double acc = term(start);
    for (std::size_t k = start + 1; k <= n; ++k) {
        const double t = term(k);
        acc = log_add(acc, t);
        if (t < acc - kCutoff) break;
    }
    for (std::size_t k = start; k > first; --k) {
        const double t = term(k - 1);
        acc = log_add(acc, t);
        if (t < acc - kCutoff) break;
    }
    return std::min(acc, 0.0);
}

double failure_probability(std::size_t n, std::size_t capacity, double p) {
    return std::exp(log_failure_probability(n, capacity, p));
}

double posterior_predictive_draw(const HyperParams& h, Rng& rng) {
    const ScaledBeta delta_law = h.delta_distribution();
    while (true) {
        const double delta = sample_scaled_beta(delta_law, rng);
        const double k = sample_gamma(h.kappa, h.lambda, rng);
        if (!(delta > 0.0 && delta < 0.5) || !(k > 0.0)) continue;
        const double d2 = 2.0 * delta;
        const double p = 0.5 * sample_beta(d2 * k, (1.0 - d2) * k, rng);
        if (p > 0.0 && p < 0.5) return p;
    }
}

std::vector<double> posterior_predictive_sample(const HyperParams& h, std::size_t count, Rng& rng) {
    if (count == 0) throw std::invalid_argument("posterior_predictive_sample: count must be >= 1");
    std::vector<double> out(count);
    for (auto& p : out) p = posterior_predictive_draw(h, rng);
    return out;
}

CellSampler posterior_predictive_sampler(const HyperParams& h) {
    return [h](Rng& rng) { return posterior_predictive_draw(h, rng); };
}

PosteriorPredictiveDensity::PosteriorPredictiveDensity(const HyperParams& h, const DensityGrid& grid) {
    const double lo = 0.5 * grid.tail_mass;
    const double hi = 1.0 - 0.5 * grid.tail_mass;

    const ScaledBeta delta_law = h.delta_distribution();
    const quad::Rule dq =
        quad::gauss_legendre(grid.delta_nodes, delta_law.quantile(lo), delta_law.quantile(hi));
    const boost::math::gamma_distribution<double> k_law(h.kappa, 1.0 / h.lambda);
    const quad::Rule kq = quad::gauss_legendre(grid.k_nodes, boost::math::quantile(k_law, lo),
                                               boost::math::quantile(k_law, hi));

    // renormalize each marginal so the truncated grid carries unit mass
    std::vector<double> dw(dq.nodes.size());
    double dsum = 0.0;
    for (std::size_t i = 0; i < dw.size(); ++i) {
        dw[i] = dq.weights[i] * delta_law.pdf(dq.nodes[i]);
        dsum += dw[i];
    }
    std::vector<double> kw(kq.nodes.size());
    double ksum = 0.0;
    for (std::size_t i = 0; i < kw.size(); ++i) {
        kw[i] = kq.weights[i] * boost::math::pdf(k_law, kq.nodes[i]);
        ksum += kw[i];
    }

    nodes_.reserve(dw.size() * kw.size());
    for (std::size_t i = 0; i < dw.size(); ++i) {
        const double d2 = 2.0 * dq.nodes[i];
        for (std::size_t j = 0; j < kw.size(); ++j) {
            const double w = (dw[i] / dsum) * (kw[j] / ksum);
            if (!(w > 0.0)) continue;
            const double a = d2 * kq.nodes[j];
            const double b = (1.0 - d2) * kq.nodes[j];
            nodes_.push_back({std::log(w) - log_beta_fn(a, b) + std::log(2.0), a - 1.0, b - 1.0});
        }
    }
}

double PosteriorPredictiveDensity::operator()(double p) const {
    if (!(p > 0.0 && p < 0.5)) return 0.0;
    const double l1 = std::log(2.0 * p);
    const double l2 = std::log1p(-2.0 * p);
    double acc = 0.0;
    for (const auto& n : nodes_) acc += std::exp(n.log_norm + n.a_minus_1 * l1 + n.b_minus_1 * l2);
    return acc;
}

double posterior_predictive_density(const HyperParams& h, double p, const DensityGrid& grid) {
    if (!(p > 0.0 && p < 0.5)) return 0.0;
    return PosteriorPredictiveDensity(h, grid)(p);
}

}  // namespace spuf::model
