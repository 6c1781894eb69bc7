#include "spuf/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/math/distributions/gamma.hpp>

#include "spuf/common.hpp"
#include "spuf/estimators.hpp"
#include "spuf/ingest.hpp"
#include "spuf/orderstats.hpp"
#include "spuf/studies.hpp"

namespace spuf::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Plain decimal or a fraction "p/q".
double parse_number(const std::string& raw) {
    const std::string s = trim(raw);
    auto one = [&](const std::string& t) {
        double v = 0.0;
        auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
            throw ConfigError("not a number: '" + raw + "'");
        }
        return v;
    };
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        const double den = one(trim(s.substr(slash + 1)));
        if (den == 0.0) throw ConfigError("zero denominator in '" + raw + "'");
        return one(trim(s.substr(0, slash))) / den;
    }
    return one(s);
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot read '" + path + "'");
    return f;
}

struct Globals {
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out_dir;
    std::string config;
    std::vector<std::string> argv;
};

// Writes <out>/<name> and remembers it for the manifest.
class OutputSet {
public:
    OutputSet(const Globals& g, std::string subcommand) : g_(g), sub_(std::move(subcommand)) {
        if (!g_.out_dir.empty()) fs::create_directories(g_.out_dir);
    }

    bool to_files() const { return !g_.out_dir.empty(); }

    void write(const std::string& name, const std::string& content, std::ostream& fallback) {
        if (!to_files()) {
            fallback << content;
            return;
        }
        auto f = open_out(fs::path(g_.out_dir) / name);
        f << content;
        files_.push_back(name);
    }

    void finish() const {
        if (!to_files()) return;
        json m;
        m["subcommand"] = sub_;
        m["config"] = g_.config;
        m["master_seed"] = g_.seed;
        m["tool_version"] = kToolVersion;
        m["outputs"] = files_;
        m["arguments"] = g_.argv;
        auto f = open_out(fs::path(g_.out_dir) / "manifest.json");
        f << m.dump(2) << '\n';
    }

private:
    const Globals& g_;
    std::string sub_;
    std::vector<std::string> files_;
};

struct HyperOptions {
    double alpha = 0, beta = 0, kappa = 0, lambda = 0;
    bool any = false;
};

void add_hyper_options(CLI::App* app, HyperOptions& h) {
    app->add_option("--alpha", h.alpha, "Beta shape of the device-mean law");
    app->add_option("--beta", h.beta, "Beta shape of the device-mean law");
    app->add_option("--kappa", h.kappa, "Gamma shape of the device-shape law");
    app->add_option("--lambda", h.lambda, "Gamma rate of the device-shape law");
}

// Explicit flags win over --config.
std::optional<model::HyperParams> resolve_hyper(const CLI::App* app, const HyperOptions& h, const Globals& g) {
    const bool flags = app->count("--alpha") + app->count("--beta") + app->count("--kappa") + app->count("--lambda") > 0;
    if (flags) return model::HyperParams::make(h.alpha, h.beta, h.kappa, h.lambda);
    if (!g.config.empty()) {
        auto f = open_in(g.config);
        return parse_hyper_config(f);
    }
    return std::nullopt;
}

// ---- subcommands ---------------------------------------------------------

struct IngestArgs {
    std::vector<std::string> inputs;
    std::size_t skip = 0;
    std::string encoding = "auto";
};

int cmd_ingest(const IngestArgs& a, const Globals& g, std::ostream& out) {
    ingest::RawEncoding enc = ingest::RawEncoding::Auto;
    if (a.encoding == "text") enc = ingest::RawEncoding::Text;
    else if (a.encoding == "hex") enc = ingest::RawEncoding::Hex;
    else if (a.encoding != "auto") throw ConfigError("unknown encoding '" + a.encoding + "'");

    OutputSet outputs(g, "ingest");
    for (const auto& path : a.inputs) {
        auto f = open_in(path);
        ingest::EvaluationMatrix mat;
        try {
            mat = ingest::parse_evaluations(f, enc);
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what());
        }
        if (a.skip >= mat.rows) {
            throw ParseError(path + ": skipping " + std::to_string(a.skip) + " of " + std::to_string(mat.rows) +
                             " evaluations leaves none");
        }
        const auto kept = ingest::discard_aging(mat, a.skip);
        const auto summary = ingest::summarize_cells(kept);
        const est::DeviceCounts dev = ingest::to_counts(mat.device_id, summary);
        std::ostringstream csv;
        ingest::write_counts_csv(csv, std::span(&dev, 1));
        outputs.write(mat.device_id + ".counts.csv", csv.str(), out);
    }
    outputs.finish();
    return kOk;
}

struct SimulateArgs {
    HyperOptions hyper;
    std::size_t devices = 15;
    std::size_t cells = 1024;
    std::uint32_t trials = 290;
    std::size_t raw_evals = 0;
    std::string raw_encoding = "hex";
};

int cmd_simulate(const CLI::App* app, const SimulateArgs& a, const Globals& g, std::ostream& out) {
    const auto h = resolve_hyper(app, a.hyper, g);
    if (!h) throw ConfigError("simulate: give hyperparameters via --alpha/--beta/--kappa/--lambda or --config");
    if (a.devices == 0 || a.cells == 0 || a.trials == 0) throw ConfigError("simulate: dimensions must be positive");
    OutputSet outputs(g, "simulate");

    if (a.raw_evals == 0) {
        const auto data = studies::simulate_dataset(*h, a.devices, a.cells, a.trials, g.seed);
        std::ostringstream csv;
        ingest::write_counts_csv(csv, data);
        outputs.write("counts.csv", csv.str(), out);
    } else {
        if (!outputs.to_files()) throw ConfigError("simulate: raw dumps need --out");
        const auto enc = a.raw_encoding == "text" ? ingest::RawEncoding::Text : ingest::RawEncoding::Hex;
        const auto population = model::sample_population_seeded(*h, a.devices, a.cells, g.seed);
        for (std::size_t d = 0; d < a.devices; ++d) {
            Rng rng(derive_seed(g.seed, d, 2));
            std::bernoulli_distribution coin(0.5);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            ingest::EvaluationMatrix mat;
            mat.device_id = "dev" + std::to_string(d);
            mat.cells = a.cells;
            mat.rows = a.raw_evals;
            std::vector<std::uint8_t> stable(a.cells);
            for (auto& s : stable) s = coin(rng) ? 1 : 0;
            mat.bits.resize(a.cells * a.raw_evals);
            for (std::size_t r = 0; r < a.raw_evals; ++r) {
                for (std::size_t c = 0; c < a.cells; ++c) {
                    const bool flip = unif(rng) < population[d].probs[c];
                    mat.bits[r * a.cells + c] = static_cast<std::uint8_t>(stable[c] ^ (flip ? 1 : 0));
                }
            }
            std::ostringstream dump;
            ingest::write_evaluations(dump, mat, enc);
            outputs.write(mat.device_id + (enc == ingest::RawEncoding::Hex ? ".hex" : ".txt"), dump.str(), out);
        }
    }
    outputs.finish();
    return kOk;
}

struct FitArgs {
    std::vector<std::string> inputs;
    std::string methods = "Jeffreys/BayesMode/MLE";
    double level = 0.95;
};

int cmd_fit(const FitArgs& a, const Globals& g, std::ostream& out) {
    const auto sel = est::parse_method_selection(a.methods);
    if (!(a.level > 0.0 && a.level < 1.0)) throw ConfigError("fit: interval level must lie in (0, 1)");
    std::vector<est::DeviceCounts> data;
    for (const auto& path : a.inputs) {
        auto f = open_in(path);
        try {
            auto part = ingest::read_counts_csv(f);
            for (auto& d : part) {
                for (const auto& existing : data) {
                    if (existing.device_id == d.device_id) throw ParseError("device '" + d.device_id + "' appears twice");
                }
                data.push_back(std::move(d));
            }
        } catch (const ParseError& e) {
            throw ParseError(path + ": " + e.what());
        }
    }
    const auto result = est::fit(data, sel);
    const auto& h = result.hyper;
    const double lo = 0.5 * (1.0 - a.level);
    const double hi = 1.0 - lo;
    const auto delta_law = h.delta_distribution();
    const boost::math::gamma_distribution<double> k_law(h.kappa, 1.0 / h.lambda);

    json rep;
    rep["methods"] = est::to_string(sel);
    rep["hyper"] = {{"alpha", h.alpha}, {"beta", h.beta}, {"kappa", h.kappa}, {"lambda", h.lambda}};
    rep["expected_delta"] = h.expected_delta();
    rep["expected_k"] = h.expected_k();
    rep["interval_level"] = a.level;
    rep["interval_delta"] = {delta_law.quantile(lo), delta_law.quantile(hi)};
    rep["interval_k"] = {boost::math::quantile(k_law, lo), boost::math::quantile(k_law, hi)};
    json devs = json::array();
    for (std::size_t i = 0; i < data.size(); ++i) {
        devs.push_back({{"device_id", data[i].device_id},
                        {"cells", data[i].cells.size()},
                        {"delta", result.device_params[i].delta},
                        {"k", result.device_params[i].k_shape}});
    }
    rep["devices"] = devs;
    rep["diagnostics"] = {{"flagged_cells", result.diagnostics.flagged_cells},
                          {"hyper_evals", result.diagnostics.hyper_evals}};

    OutputSet outputs(g, "fit");
    outputs.write("fit.json", rep.dump(2) + "\n", out);
    outputs.finish();
    return kOk;
}

struct FailureArgs {
    HyperOptions hyper;
    std::size_t n = 0;
    std::size_t capacity = 0;
    std::string p_bar;
    std::size_t samples = 100000;
};

int cmd_failure(const CLI::App* app, const FailureArgs& a, const Globals& g, std::ostream& out) {
    if (a.capacity > a.n) throw ConfigError("failure: capacity exceeds response length");
    if (a.n == 0) throw ConfigError("failure: response length must be positive");
    json rep;
    double p_bar = 0.0;
    if (app->count("--p-bar")) {
        p_bar = parse_number(a.p_bar);
        if (!(p_bar >= 0.0 && p_bar <= 1.0)) throw ConfigError("failure: --p-bar outside [0, 1]");
        rep["p_bar_source"] = "given";
    } else {
        const auto h = resolve_hyper(app, a.hyper, g);
        if (!h) throw ConfigError("failure: give --p-bar or hyperparameters");
        if (a.samples == 0) throw ConfigError("failure: --samples must be positive");
        Rng rng(g.seed);
        const auto draws = model::posterior_predictive_sample(*h, a.samples, rng);
        double sum = 0.0;
        for (double p : draws) sum += p;
        p_bar = sum / static_cast<double>(draws.size());
        rep["p_bar_source"] = "posterior-predictive";
        rep["samples"] = a.samples;
    }
    const auto law = model::compound_binomial(a.n, p_bar);
    const double lf = model::log_failure_probability(a.n, a.capacity, p_bar);
    rep["n"] = a.n;
    rep["capacity"] = a.capacity;
    rep["p_bar"] = p_bar;
    rep["expected_errors"] = law.mean();
    rep["error_variance"] = law.variance();
    rep["failure_probability"] = std::exp(lf);
    if (std::isfinite(lf)) rep["log10_failure_probability"] = lf / std::log(10.0);
    else rep["log10_failure_probability"] = nullptr;

    OutputSet outputs(g, "failure");
    outputs.write("failure.json", rep.dump(2) + "\n", out);
    outputs.finish();
    return kOk;
}

struct MaskArgs {
    std::size_t length = 16;
    std::size_t r_max = 6;
    long capacity = -1;
    std::size_t decrement = 2;
    std::string sampler = "scaled-beta:0,0.5,1/9,1";
    std::size_t replicates = 100000;
};

int cmd_mask(const CLI::App* app, const MaskArgs& a, const Globals& g, std::ostream& out) {
    if (a.r_max >= a.length) throw ConfigError("mask: --r-max must be below --length");
    model::CellSampler sampler;
    if (app->count("--sampler") == 0 && !g.config.empty()) {
        auto f = open_in(g.config);
        sampler = model::posterior_predictive_sampler(parse_hyper_config(f));
    } else {
        sampler = parse_sampler(a.sampler);
    }
    OutputSet outputs(g, "mask");
    const char* flag = a.replicates < 100 ? "1" : "0";

    if (a.capacity >= 0) {
        os::MaskPolicy policy;
        policy.response_len = a.length;
        policy.base_capacity = static_cast<std::size_t>(a.capacity);
        policy.capacity_decrement_per = a.decrement;
        Rng rng(g.seed);
        const auto rows = os::mask_table(policy, a.r_max, sampler, a.replicates, rng);
        std::ostringstream csv;
        csv << "ignored,capacity,mean_error_rate,avg_failure_prob,max_failure_prob,replicates,low_precision\n";
        for (const auto& r : rows) {
            csv << r.ignored << ',' << r.capacity << ',' << format_double(r.mean_error_rate_after_mask) << ','
                << format_double(r.avg_failure_prob) << ',' << format_double(r.max_failure_prob) << ','
                << r.replicates << ',' << flag << '\n';
        }
        outputs.write("mask_table.csv", csv.str(), out);
    }

    Rng rng(derive_seed(g.seed, 1));
    const auto curve = os::mask_curve(a.length, a.r_max, sampler, a.replicates, rng);
    std::ostringstream csv;
    csv << "ignored,mean_error_rate,replicates,low_precision\n";
    for (std::size_t r = 0; r < curve.size(); ++r) {
        csv << r << ',' << format_double(curve[r]) << ',' << a.replicates << ',' << flag << '\n';
    }
    outputs.write("mask_curve.csv", csv.str(), out);
    outputs.finish();
    return kOk;
}

struct OrderstatArgs {
    std::size_t n = 16;
    std::string alpha = "";
    std::string beta = "";
    double a = 0.0;
    double b = 0.5;
    std::size_t mc = 0;
};

int cmd_orderstat(const OrderstatArgs& o, const Globals& g, std::ostream& out) {
    if (o.n == 0) throw ConfigError("orderstat: n must be positive");
    if (o.alpha.empty() == o.beta.empty()) throw ConfigError("orderstat: give exactly one of --alpha or --beta");
    if (!(o.a < o.b)) throw ConfigError("orderstat: need a < b");
    const bool alpha_case = !o.alpha.empty();
    const double shape = parse_number(alpha_case ? o.alpha : o.beta);
    if (!(shape > 0.0)) throw ConfigError("orderstat: shape must be positive");
    const auto law = alpha_case ? model::ScaledBeta::make(o.a, o.b, shape, 1.0) : model::ScaledBeta::make(o.a, o.b, 1.0, shape);
    const model::CellSampler sampler = [law](Rng& rng) { return model::sample_scaled_beta(law, rng); };

    std::ostringstream csv;
    csv << "k,n,expected";
    if (o.mc) csv << ",mc_estimate,mc_std_error";
    csv << '\n';
    for (std::size_t k = 1; k <= o.n; ++k) {
        const auto spec = os::OrderStatSpec::make(k, o.n);
        const double e = alpha_case ? os::expected_orderstat_scaled_beta_alpha1(o.a, o.b, shape, spec)
                                    : os::expected_orderstat_scaled_beta_beta1(o.a, o.b, shape, spec);
        csv << k << ',' << o.n << ',' << format_double(e);
        if (o.mc) {
            Rng rng(derive_seed(g.seed, k));
            const auto mc = os::expected_orderstat_mc(sampler, spec, o.mc, rng);
            csv << ',' << format_double(mc.estimate) << ',' << format_double(mc.std_error);
        }
        csv << '\n';
    }
    OutputSet outputs(g, "orderstat");
    outputs.write("orderstat.csv", csv.str(), out);
    outputs.finish();
    return kOk;
}

int cmd_study(const Globals& g, std::ostream& out) {
    if (g.config.empty()) throw ConfigError("study: --config is required");
    auto f = open_in(g.config);
    auto cfg = studies::parse_study_config(f);
    if (g.seed_given) cfg.master_seed = g.seed;
    const auto rows = studies::run_estimation_study(cfg);
    std::ostringstream csv;
    studies::write_loss_csv(csv, rows);
    Globals effective = g;
    effective.seed = cfg.master_seed;
    OutputSet outputs(effective, "study");
    outputs.write("losses.csv", csv.str(), out);
    outputs.finish();
    return kOk;
}

struct ApproxArgs {
    std::size_t count = 1000;
    std::size_t n = 100;
    double shape_a = 1.5;
    double shape_b = 1.8;
};

int cmd_approx(const ApproxArgs& a, const Globals& g, std::ostream& out) {
    if (!(a.shape_a > 0.0) || !(a.shape_b > 0.0)) throw ConfigError("approx-diag: beta shapes must be positive");
    Rng rng(g.seed);
    const double sa = a.shape_a;
    const double sb = a.shape_b;
    const auto batch = studies::approx_diagnostic_batch(
        a.count, a.n, [sa, sb](Rng& r) { return model::sample_beta(sa, sb, r); }, rng);
    std::ostringstream csv;
    csv << "variance_gap,max_cdf_distance\n";
    for (const auto& [gap, dist] : batch.pairs) csv << format_double(gap) << ',' << format_double(dist) << '\n';
    json summary;
    summary["count"] = a.count;
    summary["n"] = a.n;
    summary["beta_shapes"] = {a.shape_a, a.shape_b};
    if (batch.correlation) summary["correlation"] = *batch.correlation;
    else summary["correlation"] = nullptr;

    OutputSet outputs(g, "approx-diag");
    outputs.write("approx_pairs.csv", csv.str(), out);
    outputs.write("approx_summary.json", summary.dump(2) + "\n", out);
    outputs.finish();
    return kOk;
}

}  // namespace

model::HyperParams parse_hyper_config(std::istream& in) {
    std::map<std::string, double> v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (key != "alpha" && key != "beta" && key != "kappa" && key != "lambda") {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        v[key] = parse_number(line.substr(eq + 1));
    }
    for (const char* k : {"alpha", "beta", "kappa", "lambda"}) {
        if (!v.count(k)) throw ConfigError(std::string("hyperparameter config: missing '") + k + "'");
    }
    try {
        return model::HyperParams::make(v["alpha"], v["beta"], v["kappa"], v["lambda"]);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

model::CellSampler parse_sampler(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw ConfigError("sampler spec needs 'kind:params': '" + spec + "'");
    const std::string kind = spec.substr(0, colon);
    const auto vals = parse_list(spec.substr(colon + 1));
    try {
        if (kind == "scaled-beta") {
            if (vals.size() != 4) throw ConfigError("scaled-beta sampler takes a,b,alpha,beta");
            const auto law = model::ScaledBeta::make(vals[0], vals[1], vals[2], vals[3]);
            return [law](Rng& rng) { return model::sample_scaled_beta(law, rng); };
        }
        if (kind == "posterior") {
            if (vals.size() != 4) throw ConfigError("posterior sampler takes alpha,beta,kappa,lambda");
            return model::posterior_predictive_sampler(model::HyperParams::make(vals[0], vals[1], vals[2], vals[3]));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown sampler kind '" + kind + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"SRAM-PUF noise model: estimation, failure and masking analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    for (int i = 1; i < argc; ++i) g.argv.emplace_back(argv[i]);
    app.add_option("--seed", g.seed, "Master seed (default 1)");
    app.add_option("--out", g.out_dir, "Output directory; results go to stdout when omitted");
    app.add_option("--config", g.config, "Study config or hyperparameter file");

    IngestArgs ingest_args;
    auto* ingest = app.add_subcommand("ingest", "Raw evaluation dumps -> per-cell error counts");
    ingest->add_option("inputs", ingest_args.inputs, "Raw dump files")->required();
    ingest->add_option("--skip", ingest_args.skip, "Leading evaluations to discard (aging window)");
    ingest->add_option("--encoding", ingest_args.encoding, "auto, text or hex");

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "Synthetic counts (or raw dumps) from hyperparameters");
    add_hyper_options(simulate, sim_args.hyper);
    simulate->add_option("--devices", sim_args.devices);
    simulate->add_option("--cells", sim_args.cells);
    simulate->add_option("--trials", sim_args.trials);
    simulate->add_option("--raw-evals", sim_args.raw_evals, "Write raw dumps with this many evaluations instead");
    simulate->add_option("--raw-encoding", sim_args.raw_encoding, "text or hex");

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "Fit the hierarchy to counts CSVs");
    fit->add_option("inputs", fit_args.inputs, "Counts CSV files")->required();
    fit->add_option("--methods", fit_args.methods, "cell/device/hyper, e.g. Jeffreys/BayesMode/MLE");
    fit->add_option("--level", fit_args.level, "Interval probability");

    FailureArgs fail_args;
    auto* failure = app.add_subcommand("failure", "Probability that more than `capacity` errors occur");
    add_hyper_options(failure, fail_args.hyper);
    failure->add_option("--n", fail_args.n, "Response length")->required();
    failure->add_option("--capacity", fail_args.capacity, "Correctable errors")->required();
    failure->add_option("--p-bar", fail_args.p_bar, "Mean flip probability (fractions allowed); sampled from the hyperparameters when omitted");
    failure->add_option("--samples", fail_args.samples, "Posterior-predictive sample size");

    MaskArgs mask_args;
    auto* mask = app.add_subcommand("mask", "Bit-masking failure table and mean-error-rate curve");
    mask->add_option("--length", mask_args.length, "Response length");
    mask->add_option("--r-max", mask_args.r_max, "Largest number of ignored cells");
    mask->add_option("--capacity", mask_args.capacity, "Base correction capacity; enables the failure table");
    mask->add_option("--decrement", mask_args.decrement, "Ignored cells per lost unit of capacity");
    mask->add_option("--sampler", mask_args.sampler, "scaled-beta:a,b,alpha,beta or posterior:alpha,beta,kappa,lambda");
    mask->add_option("--replicates", mask_args.replicates);

    OrderstatArgs os_args;
    auto* orderstat = app.add_subcommand("orderstat", "Expected order statistics of Be_[a,b](alpha,1) or (1,beta)");
    orderstat->add_option("--n", os_args.n);
    orderstat->add_option("--alpha", os_args.alpha);
    orderstat->add_option("--beta", os_args.beta);
    orderstat->add_option("--a", os_args.a);
    orderstat->add_option("--b", os_args.b);
    orderstat->add_option("--mc", os_args.mc, "Monte Carlo replicates for a cross-check column");

    auto* study = app.add_subcommand("study", "Estimator comparison study from a config file");

    ApproxArgs approx_args;
    auto* approx = app.add_subcommand("approx-diag", "Variance gap vs. max CDF distance of the binomial approximation");
    approx->add_option("--count", approx_args.count);
    approx->add_option("--n", approx_args.n);
    approx->add_option("--shape-a", approx_args.shape_a);
    approx->add_option("--shape-b", approx_args.shape_b);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }
    g.seed_given = app.count("--seed") > 0;

    try {
        if (*ingest) return cmd_ingest(ingest_args, g, out);
        if (*simulate) return cmd_simulate(simulate, sim_args, g, out);
        if (*fit) return cmd_fit(fit_args, g, out);
        if (*failure) return cmd_failure(failure, fail_args, g, out);
        if (*mask) return cmd_mask(mask, mask_args, g, out);
        if (*orderstat) return cmd_orderstat(os_args, g, out);
        if (*study) return cmd_study(g, out);
        if (*approx) return cmd_approx(approx_args, g, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const ConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    } catch (const EstimationError& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kData;
    }
    return kUsage;
}

}  // namespace spuf::cli
