#include "spuf/studies.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>

#include "spuf/gbin.hpp"

namespace spuf::studies {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, std::size_t lineno) {
    double out = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("line " + std::to_string(lineno) + ": not a number: '" + v + "'");
    }
    return out;
}

std::uint64_t to_uint(const std::string& v, std::size_t lineno) {
    std::uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
        throw ConfigError("line " + std::to_string(lineno) + ": not a non-negative integer: '" + v + "'");
    }
    return out;
}

// Outcome of one replication for one method.
struct Outcome {
    bool ok = false;
    double loss_ab = 0.0;
    double loss_kl = 0.0;
    double edelta = 0.0;
};

std::vector<Outcome> run_replication(const StudyConfig& cfg, std::size_t rep) {
    const auto data = simulate_dataset(cfg.true_hyper, cfg.m_dev, cfg.cells, cfg.trials,
                                       derive_seed(cfg.master_seed, rep));
    const auto& h = cfg.true_hyper;
    est::JeffreysCache cache(cfg.budget.jeffreys_nodes);

    // layers shared between method rows are computed once
    std::map<est::CellMethod, std::vector<std::vector<double>>> cells;
    std::map<std::pair<est::CellMethod, est::DeviceMethod>, std::optional<std::pair<std::vector<double>, std::vector<double>>>>
        devices;

    std::vector<Outcome> out(cfg.methods.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& sel = cfg.methods[mi];
        auto cit = cells.find(sel.cell);
        if (cit == cells.end()) {
            std::vector<std::vector<double>> est_cells;
            for (const auto& dev : data) est_cells.push_back(est::estimate_cells(dev.cells, sel.cell, cache));
            cit = cells.emplace(sel.cell, std::move(est_cells)).first;
        }
        const auto key = std::make_pair(sel.cell, sel.device);
        auto dit = devices.find(key);
        if (dit == devices.end()) {
            std::optional<std::pair<std::vector<double>, std::vector<double>>> layer;
            try {
                std::vector<double> deltas, ks;
                for (const auto& p : cit->second) {
                    const auto f = est::estimate_device(p, sel.device, cfg.budget);
                    deltas.push_back(f.params.delta);
                    ks.push_back(f.params.k_shape);
                }
                layer.emplace(std::move(deltas), std::move(ks));
            } catch (const EstimationError&) {
            }
            dit = devices.emplace(key, std::move(layer)).first;
        }
        if (!dit->second) continue;
        try {
            const auto hf = est::estimate_hyper(dit->second->first, dit->second->second, sel.hyper, cfg.budget);
            Outcome& o = out[mi];
            o.ok = true;
            o.loss_ab = quadratic_loss({h.alpha, h.beta}, {hf.params.alpha, hf.params.beta});
            o.loss_kl = quadratic_loss({h.kappa, h.lambda}, {hf.params.kappa, hf.params.lambda});
            o.edelta = hf.params.expected_delta();
        } catch (const EstimationError&) {
        }
    }
    return out;
}

}  // namespace

void StudyConfig::validate() const {
    if (m_dev < 2) throw ConfigError("study: m_dev must be at least 2");
    if (cells < 2) throw ConfigError("study: cells must be at least 2");
    if (trials == 0) throw ConfigError("study: trials must be positive");
    if (replications == 0) throw ConfigError("study: replications must be positive");
    if (methods.empty()) throw ConfigError("study: no estimation methods listed");
    if (threads == 0) throw ConfigError("study: threads must be positive");
}

StudyConfig parse_study_config(std::istream& in) {
    StudyConfig cfg;
    cfg.methods.clear();
    std::map<std::string, bool> seen;
    std::string line;
    std::size_t lineno = 0;
    double alpha = 0, beta = 0, kappa = 0, lambda = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key != "method" && seen[key]) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        seen[key] = true;

        if (key == "alpha") alpha = to_double(value, lineno);
        else if (key == "beta") beta = to_double(value, lineno);
        else if (key == "kappa") kappa = to_double(value, lineno);
        else if (key == "lambda") lambda = to_double(value, lineno);
        else if (key == "m_dev") cfg.m_dev = to_uint(value, lineno);
        else if (key == "cells") cfg.cells = to_uint(value, lineno);
        else if (key == "trials") cfg.trials = static_cast<std::uint32_t>(to_uint(value, lineno));
        else if (key == "replications") cfg.replications = to_uint(value, lineno);
        else if (key == "master_seed") cfg.master_seed = to_uint(value, lineno);
        else if (key == "threads") cfg.threads = to_uint(value, lineno);
        else if (key == "method") {
            try {
                cfg.methods.push_back(est::parse_method_selection(value));
            } catch (const ConfigError& e) {
                throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
            }
        } else if (key == "methods") {
            if (value != "all") throw ConfigError("line " + std::to_string(lineno) + ": 'methods' only accepts 'all'");
            const auto all = est::study_methods();
            cfg.methods.insert(cfg.methods.end(), all.begin(), all.end());
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    for (const char* req : {"alpha", "beta", "kappa", "lambda", "m_dev", "cells", "trials", "replications"}) {
        if (!seen[req]) throw ConfigError(std::string("study config: missing key '") + req + "'");
    }
    try {
        cfg.true_hyper = model::HyperParams::make(alpha, beta, kappa, lambda);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("study config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

double quadratic_loss(std::pair<double, double> theta, std::pair<double, double> theta_hat) {
    const double d1 = theta.first - theta_hat.first;
    const double d2 = theta.second - theta_hat.second;
    return d1 * d1 + d2 * d2;
}

std::vector<est::DeviceCounts> simulate_dataset(const model::HyperParams& h, std::size_t m_dev, std::size_t cells,
                                                std::uint32_t trials, std::uint64_t seed) {
    const auto population = model::sample_population_seeded(h, m_dev, cells, seed);
    std::vector<est::DeviceCounts> out(m_dev);
    for (std::size_t d = 0; d < m_dev; ++d) {
        Rng rng(derive_seed(seed, d, 1));
        const auto counts = model::simulate_measurements(population[d], trials, rng);
        out[d].device_id = "dev" + std::to_string(d);
        out[d].cells.reserve(cells);
        for (auto x : counts) out[d].cells.push_back({x, trials});
    }
    return out;
}

std::vector<LossRow> run_estimation_study(const StudyConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<Outcome>> results(cfg.replications);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t rep = next++; rep < cfg.replications; rep = next++) results[rep] = run_replication(cfg, rep);
    };
    const std::size_t nthreads = std::min(cfg.threads, cfg.replications);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // reduce in replication order so the sums do not depend on scheduling
    std::vector<LossRow> rows(cfg.methods.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        LossRow& row = rows[mi];
        row.method = cfg.methods[mi];
        for (const auto& rep : results) {
            const Outcome& o = rep[mi];
            if (!o.ok) {
                ++row.excluded;
                continue;
            }
            ++row.succeeded;
            row.mean_loss_ab += o.loss_ab;
            row.mean_loss_kl += o.loss_kl;
            row.mean_edelta += o.edelta;
        }
        if (row.succeeded > 0) {
            const double n = static_cast<double>(row.succeeded);
            row.mean_loss_ab /= n;
            row.mean_loss_kl /= n;
            row.mean_edelta /= n;
        } else {
            row.mean_loss_ab = row.mean_loss_kl = row.mean_edelta = std::nan("");
        }
    }
    return rows;
}

void write_loss_csv(std::ostream& out, std::span<const LossRow> rows) {
    out << "cell_method,device_method,hyper_method,mean_loss_ab,mean_loss_kl,mean_edelta,succeeded,excluded\n";
    for (const auto& r : rows) {
        const std::string name = est::to_string(r.method);
        const auto s1 = name.find('/');
        const auto s2 = name.find('/', s1 + 1);
        out << name.substr(0, s1) << ',' << name.substr(s1 + 1, s2 - s1 - 1) << ',' << name.substr(s2 + 1) << ','
            << format_double(r.mean_loss_ab) << ',' << format_double(r.mean_loss_kl) << ','
            << format_double(r.mean_edelta) << ',' << r.succeeded << ',' << r.excluded << '\n';
    }
}

std::optional<double> pearson(std::span<const std::pair<double, double>> pairs) {
    if (pairs.size() < 2) return std::nullopt;
    const double n = static_cast<double>(pairs.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pairs) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pairs) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

DiagnosticBatch approx_diagnostic_batch(std::size_t count, std::size_t n, const ParamSampler& param_sampler, Rng& rng) {
    if (count < 2) throw std::invalid_argument("approx diagnostic: need at least two distributions");
    if (n == 0) throw std::invalid_argument("approx diagnostic: n must be positive");
    DiagnosticBatch out;
    out.pairs.reserve(count);
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < count; ++i) {
        for (auto& p : probs) p = param_sampler(rng);
        const gbin::GeneralizedBinomial dist(probs);
        const auto approx = gbin::binomial_approx(dist);
        out.pairs.emplace_back(std::max(approx.variance_gap, 0.0), gbin::max_cdf_distance(dist, approx));
    }
    out.correlation = pearson(out.pairs);
    return out;
}

}  // namespace spuf::studies
