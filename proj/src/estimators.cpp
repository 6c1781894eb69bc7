#include "spuf/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "spuf/quadrature.hpp"

namespace spuf::est {

namespace {

double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double sigmoid(double t) { return t >= 0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t)); }
double logit(double u) { return std::log(u) - std::log1p(-u); }

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v, double mean) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

// Sufficient statistics of a Be_[0,1/2] sample: sum log(2p), sum log(1 - 2p).
struct HalfBetaStats {
    double n = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
};

HalfBetaStats half_beta_stats(std::span<const double> p, double eps) {
    HalfBetaStats st;
    st.n = static_cast<double>(p.size());
    for (double v : p) {
        const double c = std::clamp(v, eps, 0.5 - eps);
        st.s1 += std::log(2.0 * c);
        st.s2 += std::log1p(-2.0 * c);
    }
    return st;
}

// log-likelihood of Be_[0,1/2](a, b), dropping the constant n log 2
double half_beta_loglik(const HalfBetaStats& st, double a, double b) {
    return (a - 1.0) * st.s1 + (b - 1.0) * st.s2 - st.n * log_beta_fn(a, b);
}

double device_loglik(const HalfBetaStats& st, double delta, double k) {
    const double d2 = 2.0 * delta;
    return half_beta_loglik(st, d2 * k, (1.0 - d2) * k);
}

double device_log_prior(double delta, double k) {
    const double d2 = 2.0 * delta;
    return -std::log(k) - 0.5 * std::log(d2) - 0.5 * std::log1p(-d2);
}

DeviceFit optimize_device(std::span<const double> p_hats, bool with_prior, const Budget& budget) {
    if (p_hats.empty()) throw EstimationError("device estimate: no cell estimates");
    const HalfBetaStats st = half_beta_stats(p_hats, budget.clamp_eps);

    model::DeviceParams start{0.05, 1.0};
    if (p_hats.size() >= 2) {
        try {
            start = estimate_device_moments(p_hats);
        } catch (const EstimationError&) {
        }
    }

    auto objective = [&](const std::vector<double>& th) {
        const double delta = 0.5 * sigmoid(th[0]);
        const double k = std::exp(th[1]);
        double v = device_loglik(st, delta, k);
        if (with_prior) v += device_log_prior(delta, k);
        return -v;
    };
    const auto res =
        opt::nelder_mead(objective, {logit(2.0 * start.delta), std::log(start.k_shape)}, budget.nelder_mead);
    const double delta = 0.5 * sigmoid(res.x[0]);
    const double k = std::exp(res.x[1]);
    if (!res.converged) {
        throw ConvergenceError("device estimate: optimizer did not converge within " +
                               std::to_string(budget.nelder_mead.max_evals) + " evaluations");
    }
    if (!(delta > 0.0 && delta < 0.5) || !(k > 0.0) || !std::isfinite(k)) {
        throw EstimationError("device estimate: optimum left the parameter domain");
    }
    return DeviceFit{model::DeviceParams{delta, k}, -res.value, res.evals, true};
}

}  // namespace

std::string to_string(const MethodSelection& sel) {
    std::string out = sel.cell == CellMethod::Moments ? "Moments" : "Jeffreys";
    out += '/';
    switch (sel.device) {
        case DeviceMethod::Moments: out += "Moments"; break;
        case DeviceMethod::MLE: out += "MLE"; break;
        case DeviceMethod::BayesMode: out += "BayesMode"; break;
    }
    out += '/';
    out += sel.hyper == HyperMethod::Moments ? "Moments" : "MLE";
    return out;
}

MethodSelection parse_method_selection(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == '/' || ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3) throw ConfigError("method selection needs three layers: '" + text + "'");

    MethodSelection sel;
    const std::string c = lower(parts[0]);
    if (c == "moments" || c == "mle") sel.cell = CellMethod::Moments;
    else if (c == "jeffreys" || c == "bayes") sel.cell = CellMethod::Jeffreys;
    else throw ConfigError("unknown cell method '" + parts[0] + "'");

    const std::string d = lower(parts[1]);
    if (d == "moments") sel.device = DeviceMethod::Moments;
    else if (d == "mle") sel.device = DeviceMethod::MLE;
    else if (d == "bayesmode" || d == "bayes") sel.device = DeviceMethod::BayesMode;
    else throw ConfigError("unknown device method '" + parts[1] + "'");

    const std::string h = lower(parts[2]);
    if (h == "moments") sel.hyper = HyperMethod::Moments;
    else if (h == "mle") sel.hyper = HyperMethod::MLE;
    else throw ConfigError("unknown hyperparameter method '" + parts[2] + "'");
    return sel;
}

std::vector<MethodSelection> study_methods() {
    using C = CellMethod;
    using D = DeviceMethod;
    using H = HyperMethod;
    return {
        {C::Moments, D::Moments, H::Moments},    {C::Moments, D::MLE, H::MLE},
        {C::Jeffreys, D::Moments, H::Moments},   {C::Jeffreys, D::Moments, H::MLE},
        {C::Jeffreys, D::MLE, H::Moments},       {C::Jeffreys, D::MLE, H::MLE},
        {C::Jeffreys, D::BayesMode, H::Moments}, {C::Jeffreys, D::BayesMode, H::MLE},
    };
}

// ---- cell layer ----------------------------------------------------------

double estimate_p_moments(const CellCounts& c) {
    if (c.m == 0) throw std::invalid_argument("cell estimate: zero trials");
    if (c.x > c.m) throw std::invalid_argument("cell estimate: more errors than trials");
    return std::min(static_cast<double>(c.x) / static_cast<double>(c.m), 0.5);
}

bool is_misassigned(const CellCounts& c) noexcept { return 2ull * c.x > c.m; }

double estimate_p_jeffreys(const CellCounts& c, std::size_t nodes) {
    if (c.x > c.m) throw std::invalid_argument("cell estimate: more errors than trials");
    const quad::Rule rule = quad::chebyshev_gauss(nodes, 0.0, 1.0);
    const double x = c.x;
    const double fails = static_cast<double>(c.m) - x;

    std::vector<double> lg(nodes);
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
        const double p = 0.5 * rule.nodes[i];
        double v = 0.0;
        if (c.x > 0) v += x * std::log(p);
        if (fails > 0) v += fails * std::log1p(-p);
        lg[i] = v;
        lmax = std::max(lmax, v);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < nodes; ++i) {
        const double g = rule.weights[i] * std::exp(lg[i] - lmax);
        den += g;
        num += g * 0.5 * rule.nodes[i];
    }
    const double est = num / den;
    if (!std::isfinite(est)) throw EstimationError("Jeffreys estimate: non-finite quadrature result");
    return est;
}

double JeffreysCache::operator()(const CellCounts& c) {
    auto it = tables_.find(c.m);
    if (it == tables_.end()) {
        std::vector<double> table(c.m + 1);
        for (std::uint32_t x = 0; x <= c.m; ++x) table[x] = estimate_p_jeffreys({x, c.m}, nodes_);
        it = tables_.emplace(c.m, std::move(table)).first;
    }
    if (c.x > c.m) throw std::invalid_argument("cell estimate: more errors than trials");
    return it->second[c.x];
}

std::vector<double> estimate_cells(std::span<const CellCounts> cells, CellMethod method, JeffreysCache& cache,
                                   std::size_t* flagged) {
    std::vector<double> out(cells.size());
    std::size_t nflag = 0;
    for (std::size_t j = 0; j < cells.size(); ++j) {
        if (method == CellMethod::Moments) {
            out[j] = estimate_p_moments(cells[j]);
            if (is_misassigned(cells[j])) ++nflag;
        } else {
            out[j] = cache(cells[j]);
        }
    }
    if (flagged) *flagged += nflag;
    return out;
}

// ---- device layer --------------------------------------------------------

namespace {

// Rounding in the mean can leave a tiny positive variance for identical values.
bool all_equal(std::span<const double> v) {
    return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

}  // namespace

model::DeviceParams estimate_device_moments(std::span<const double> p_hats) {
    if (p_hats.size() < 2) throw EstimationError("device moments: need at least two cells");
    const double delta = mean_of(p_hats);
    if (!(delta > 0.0 && delta < 0.5)) throw EstimationError("device moments: mean outside (0, 1/2)");
    if (all_equal(p_hats)) {
        throw EstimationError("device moments: zero variance, K undefined");
    }
    double ss = 0.0;
    for (double p : p_hats) ss += (p - delta) * (p - delta);
    const double denom = 4.0 / static_cast<double>(p_hats.size() - 1) * ss;
    if (!(denom > 0.0)) throw EstimationError("device moments: zero variance, K undefined");
    const double k = 2.0 * delta * (1.0 - 2.0 * delta) / denom - 1.0;
    if (!(k > 0.0)) throw EstimationError("device moments: non-positive K estimate (over-dispersed cells)");
    return model::DeviceParams{delta, k};
}

DeviceFit estimate_device_mle(std::span<const double> p_hats, const Budget& budget) {
    return optimize_device(p_hats, false, budget);
}

DeviceFit estimate_device_bayes_mode(std::span<const double> p_hats, const Budget& budget) {
    return optimize_device(p_hats, true, budget);
}

double device_log_likelihood(std::span<const double> p_hats, double delta, double k_shape, double clamp_eps) {
    return device_loglik(half_beta_stats(p_hats, clamp_eps), delta, k_shape);
}

double device_log_posterior(std::span<const double> p_hats, double delta, double k_shape, double clamp_eps) {
    return device_log_likelihood(p_hats, delta, k_shape, clamp_eps) + device_log_prior(delta, k_shape);
}

DeviceFit estimate_device(std::span<const double> p_hats, DeviceMethod method, const Budget& budget) {
    switch (method) {
        case DeviceMethod::Moments: {
            DeviceFit f;
            f.params = estimate_device_moments(p_hats);
            f.log_objective = device_log_likelihood(p_hats, f.params.delta, f.params.k_shape, budget.clamp_eps);
            return f;
        }
        case DeviceMethod::MLE: return estimate_device_mle(p_hats, budget);
        case DeviceMethod::BayesMode: return estimate_device_bayes_mode(p_hats, budget);
    }
    throw std::logic_error("unreachable");
}

// ---- hyper layer ---------------------------------------------------------

model::HyperParams estimate_hyper_moments(std::span<const double> deltas, std::span<const double> ks) {
    if (deltas.size() < 2 || ks.size() < 2) throw EstimationError("hyper moments: need at least two devices");
    const double dbar = mean_of(deltas);
    const double vd = sample_variance(deltas, dbar);
    const double kbar = mean_of(ks);
    const double vk = sample_variance(ks, kbar);
    if (all_equal(deltas) || !(vd > 0.0)) throw EstimationError("hyper moments: zero variance of device means");
    if (all_equal(ks) || !(vk > 0.0)) throw EstimationError("hyper moments: zero variance of device shapes");
    const double d2 = 2.0 * dbar;
    const double factor = d2 * (1.0 - d2) / (4.0 * vd) - 1.0;
    if (!(factor > 0.0)) throw EstimationError("hyper moments: device means too dispersed for a beta fit");
    if (!(kbar > 0.0)) throw EstimationError("hyper moments: non-positive mean shape");
    return model::HyperParams{d2 * factor, (1.0 - d2) * factor, kbar * kbar / vk, kbar / vk};
}

std::pair<double, double> gamma_mle(std::span<const double> ks, int max_iter, int* iterations) {
    if (ks.size() < 2) throw EstimationError("gamma MLE: need at least two values");
    double sum_log = 0.0;
    for (double k : ks) {
        if (!(k > 0.0)) throw EstimationError("gamma MLE: non-positive value");
        sum_log += std::log(k);
    }
    const double kbar = mean_of(ks);
    const double s = std::log(kbar) - sum_log / static_cast<double>(ks.size());
    if (!(s > 0.0)) throw EstimationError("gamma MLE: zero dispersion, shape diverges");

    const double vk = sample_variance(ks, kbar);
    double kappa = vk > 0.0 ? kbar * kbar / vk : 1.0 / (2.0 * s);
    for (int it = 1; it <= max_iter; ++it) {
        const double f = std::log(kappa) - boost::math::digamma(kappa) - s;
        const double fp = 1.0 / kappa - boost::math::trigamma(kappa);
        double next = kappa - f / fp;
        if (!(next > 0.0)) next = 0.5 * kappa;
        const bool done = std::abs(next - kappa) <= 1e-12 * kappa;
        kappa = next;
        if (done) {
            if (iterations) *iterations = it;
            return {kappa, kappa / kbar};
        }
    }
    throw ConvergenceError("gamma MLE: Newton iteration did not converge");
}

HyperFit estimate_hyper_mle(std::span<const double> deltas, std::span<const double> ks, const Budget& budget) {
    if (deltas.size() < 2 || ks.size() < 2) throw EstimationError("hyper MLE: need at least two devices");
    for (double d : deltas) {
        if (!(d > 0.0 && d < 0.5)) throw EstimationError("hyper MLE: device mean outside (0, 1/2)");
    }
    HalfBetaStats st;
    st.n = static_cast<double>(deltas.size());
    for (double d : deltas) {
        st.s1 += std::log(2.0 * d);
        st.s2 += std::log1p(-2.0 * d);
    }

    // start from the moment-matched beta when it exists
    double a0 = 1.0;
    double b0 = 1.0;
    {
        const double dbar = mean_of(deltas);
        const double vd = sample_variance(deltas, dbar);
        const double d2 = 2.0 * dbar;
        const double factor = vd > 0.0 ? d2 * (1.0 - d2) / (4.0 * vd) - 1.0 : 0.0;
        if (factor > 0.0) {
            a0 = d2 * factor;
            b0 = (1.0 - d2) * factor;
        }
    }
    auto objective = [&](const std::vector<double>& th) {
        return -half_beta_loglik(st, std::exp(th[0]), std::exp(th[1]));
    };
    const auto res = opt::nelder_mead(objective, {std::log(a0), std::log(b0)}, budget.nelder_mead);
    if (!res.converged) throw ConvergenceError("hyper MLE: beta optimizer did not converge");

    HyperFit out;
    out.params.alpha = std::exp(res.x[0]);
    out.params.beta = std::exp(res.x[1]);
    // density of the scaled law on [0, 1/2] carries an extra factor 2 per device
    out.beta_log_likelihood = -res.value + st.n * std::log(2.0);
    out.evals = res.evals;
    const auto [kappa, lambda] = gamma_mle(ks, budget.newton_max_iter, &out.newton_iters);
    out.params.kappa = kappa;
    out.params.lambda = lambda;
    if (!std::isfinite(out.params.alpha) || !std::isfinite(out.params.beta)) {
        throw EstimationError("hyper MLE: beta shapes diverged");
    }
    return out;
}

HyperFit estimate_hyper(std::span<const double> deltas, std::span<const double> ks, HyperMethod method,
                        const Budget& budget) {
    if (method == HyperMethod::MLE) return estimate_hyper_mle(deltas, ks, budget);
    HyperFit f;
    f.params = estimate_hyper_moments(deltas, ks);
    return f;
}

// ---- full pipeline -------------------------------------------------------

FitResult fit(std::span<const DeviceCounts> data, const MethodSelection& sel, const Budget& budget) {
    if (data.size() < 2) throw EstimationError("fit: need at least two devices for the hyperparameter layer");
    FitResult out;
    JeffreysCache cache(budget.jeffreys_nodes);

    out.cell_probs.reserve(data.size());
    for (const auto& dev : data) {
        if (dev.cells.size() < 2) throw EstimationError("fit: device '" + dev.device_id + "' has fewer than two cells");
        out.cell_probs.push_back(estimate_cells(dev.cells, sel.cell, cache, &out.diagnostics.flagged_cells));
    }

    std::vector<double> deltas, ks;
    for (std::size_t i = 0; i < data.size(); ++i) {
        try {
            const DeviceFit f = estimate_device(out.cell_probs[i], sel.device, budget);
            out.device_params.push_back(f.params);
            out.diagnostics.device_converged.push_back(f.converged);
            out.diagnostics.device_objective.push_back(f.log_objective);
            deltas.push_back(f.params.delta);
            ks.push_back(f.params.k_shape);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("device '" + data[i].device_id + "': " + e.what());
        } catch (const EstimationError& e) {
            throw EstimationError("device '" + data[i].device_id + "': " + e.what());
        }
    }

    const HyperFit h = estimate_hyper(deltas, ks, sel.hyper, budget);
    out.hyper = h.params;
    out.diagnostics.hyper_evals = h.evals;
    return out;
}

}  // namespace spuf::est
