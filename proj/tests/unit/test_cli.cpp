#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "spuf/cli.hpp"

using namespace spuf;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "spuf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("spuf_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const std::vector<std::string> kHyper = {"--alpha", "9378.324", "--beta", "81409.79", "--kappa", "7166.669",
                                         "--lambda", "3965.296"};

}  // namespace

TEST_CASE("usage errors") {
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"nonsense"}).code == cli::kUsage);
    CHECK(run({"failure", "--n", "10"}).code == cli::kUsage);
    CHECK(run({"failure", "--n", "10", "--capacity", "11", "--p-bar", "0.1"}).code == cli::kUsage);
    CHECK(run({"orderstat", "--n", "4"}).code == cli::kUsage);
    CHECK(run({"fit", "--methods", "A/B/C", "x.csv"}).code == cli::kUsage);
    CHECK(run({"--help"}).code == cli::kOk);
}

TEST_CASE("data errors") {
    const auto dir = scratch("data");
    std::ofstream(dir / "bad.txt") << "d,4,2\n0101\n01x1\n";
    const auto r = run({"ingest", (dir / "bad.txt").string()});
    CHECK(r.code == cli::kData);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(run({"fit", (dir / "missing.csv").string()}).code == cli::kData);

    std::ofstream(dir / "one.csv") << "device_id,cell_index,error_count,trials\na,0,1,10\na,1,2,10\n";
    CHECK(run({"fit", (dir / "one.csv").string()}).code == cli::kData);
}

TEST_CASE("parsers") {
    std::istringstream cfg("alpha = 2 # c\nbeta = 18\nkappa = 4\nlambda = 1/2\n");
    const auto h = cli::parse_hyper_config(cfg);
    CHECK(h.lambda == 0.5);
    std::istringstream missing("alpha = 2\n");
    CHECK_THROWS_AS(cli::parse_hyper_config(missing), ConfigError);
    Rng rng(1);
    const auto s = cli::parse_sampler("scaled-beta:0,0.5,1/9,1");
    for (int i = 0; i < 100; ++i) {
        const double v = s(rng);
        CHECK((v >= 0.0 && v <= 0.5));
    }
    CHECK_NOTHROW(cli::parse_sampler("posterior:100,900,800,900"));
    CHECK_THROWS_AS(cli::parse_sampler("scaled-beta:0,0.5,1"), ConfigError);
    CHECK_THROWS_AS(cli::parse_sampler("gauss:0,1"), ConfigError);
    CHECK_THROWS_AS(cli::parse_sampler("scaled-beta:0,0.5,x,1"), ConfigError);
}

TEST_CASE("simulate, ingest and fit pipeline") {
    const auto dir = scratch("pipeline");
    auto sim = kHyper;
    sim.insert(sim.begin(), {"--seed", "5", "--out", (dir / "raw").string(), "simulate"});
    for (const char* a : {"--devices", "3", "--cells", "64", "--raw-evals", "40"}) sim.emplace_back(a);
    REQUIRE(run(sim).code == cli::kOk);
    CHECK(fs::exists(dir / "raw" / "dev2.hex"));

    const auto ing = run({"--out", (dir / "counts").string(), "ingest", "--skip", "4", (dir / "raw" / "dev0.hex").string(),
                          (dir / "raw" / "dev1.hex").string(), (dir / "raw" / "dev2.hex").string()});
    REQUIRE(ing.code == cli::kOk);
    const auto c0 = slurp(dir / "counts" / "dev0.counts.csv");
    CHECK(c0.find("dev0,63,") != std::string::npos);
    CHECK(c0.find(",36\n") != std::string::npos);

    const auto fit = run({"--out", (dir / "fit").string(), "fit", "--methods", "Moments/Moments/Moments",
                          (dir / "counts" / "dev0.counts.csv").string(), (dir / "counts" / "dev1.counts.csv").string(),
                          (dir / "counts" / "dev2.counts.csv").string()});
    if (fit.code == cli::kOk) {
        const auto j = nlohmann::json::parse(slurp(dir / "fit" / "fit.json"));
        CHECK(j["devices"].size() == 3);
        CHECK(j["interval_delta"][0].get<double>() < j["interval_delta"][1].get<double>());
        const auto m = nlohmann::json::parse(slurp(dir / "fit" / "manifest.json"));
        CHECK(m["subcommand"] == "fit");
        CHECK(m["tool_version"] == cli::kToolVersion);
    } else {
        // three small devices can defeat the moment estimators; that is a data error
        CHECK(fit.code == cli::kData);
    }
}

TEST_CASE("reruns are byte identical and honor --seed") {
    const auto dir = scratch("rerun");
    auto args = [&](const std::string& sub, const std::string& seed) {
        std::vector<std::string> a{"--seed", seed, "--out", (dir / sub).string(), "simulate"};
        a.insert(a.end(), kHyper.begin(), kHyper.end());
        for (const char* x : {"--devices", "4", "--cells", "100"}) a.emplace_back(x);
        return a;
    };
    REQUIRE(run(args("a", "9")).code == 0);
    REQUIRE(run(args("b", "9")).code == 0);
    REQUIRE(run(args("c", "10")).code == 0);
    CHECK(slurp(dir / "a" / "counts.csv") == slurp(dir / "b" / "counts.csv"));
    CHECK(slurp(dir / "a" / "counts.csv") != slurp(dir / "c" / "counts.csv"));

    const auto m1 = run({"--seed", "3", "mask", "--length", "16", "--r-max", "3", "--capacity", "3", "--replicates", "500"});
    const auto m2 = run({"--seed", "3", "mask", "--length", "16", "--r-max", "3", "--capacity", "3", "--replicates", "500"});
    const auto m3 = run({"--seed", "4", "mask", "--length", "16", "--r-max", "3", "--capacity", "3", "--replicates", "500"});
    CHECK(m1.code == 0);
    CHECK(m1.out == m2.out);
    CHECK(m1.out != m3.out);
}

TEST_CASE("failure report") {
    const auto r = run({"failure", "--n", "1953", "--capacity", "239", "--p-bar", "101.3101/1953"});
    REQUIRE(r.code == 0);
    const auto big = nlohmann::json::parse(r.out);
    CHECK(big["expected_errors"].get<double>() == doctest::Approx(101.3101).epsilon(1e-12));
    CHECK(big["log10_failure_probability"].get<double>() < -20.0);
    const auto ok = run({"failure", "--n", "100", "--capacity", "20", "--p-bar", "0.1"});
    REQUIRE(ok.code == 0);
    const auto j = nlohmann::json::parse(ok.out);
    CHECK(j["expected_errors"].get<double>() == doctest::Approx(10.0));
    CHECK(j["log10_failure_probability"].get<double>() < -3.0);

    auto sampled = kHyper;
    sampled.insert(sampled.begin(), {"failure", "--n", "512", "--capacity", "60", "--samples", "5000"});
    const auto s = run(sampled);
    REQUIRE(s.code == 0);
    CHECK(nlohmann::json::parse(s.out)["p_bar"].get<double>() == doctest::Approx(0.0516).epsilon(0.05));
}

TEST_CASE("orderstat and mask outputs") {
    const auto o = run({"orderstat", "--n", "16", "--alpha", "1/9"});
    REQUIRE(o.code == 0);
    const auto last = o.out.substr(o.out.rfind("16,16,") + 6);
    CHECK(std::stod(last) == doctest::Approx(0.32).epsilon(1e-12));

    const auto dir = scratch("mask");
    const auto m = run({"--out", dir.string(), "mask", "--length", "16", "--r-max", "2", "--replicates", "50"});
    REQUIRE(m.code == 0);
    CHECK_FALSE(fs::exists(dir / "mask_table.csv"));
    const auto curve = slurp(dir / "mask_curve.csv");
    CHECK(curve.find("ignored,mean_error_rate,replicates,low_precision\n0,") == 0);
    CHECK(curve.find(",50,1\n") != std::string::npos);
}

TEST_CASE("study and approx-diag") {
    const auto dir = scratch("study");
    std::ofstream(dir / "s.conf") << "alpha=100\nbeta=900\nkappa=800\nlambda=900\nm_dev=4\ncells=200\ntrials=100\n"
                                     "replications=3\nmethod=Jeffreys/BayesMode/MLE\nmethod=Moments/Moments/Moments\n";
    const auto r1 = run({"--config", (dir / "s.conf").string(), "--out", (dir / "o1").string(), "study"});
    const auto r2 = run({"--config", (dir / "s.conf").string(), "--out", (dir / "o2").string(), "study"});
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "o1" / "losses.csv") == slurp(dir / "o2" / "losses.csv"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "o1" / "manifest.json"));
    CHECK(manifest["config"] == (dir / "s.conf").string());
    CHECK(manifest["outputs"][0] == "losses.csv");

    std::ofstream(dir / "bad.conf") << "alpha=100\n";
    CHECK(run({"--config", (dir / "bad.conf").string(), "study"}).code == cli::kUsage);
    CHECK(run({"study"}).code == cli::kUsage);

    const auto a = run({"--out", (dir / "diag").string(), "approx-diag", "--count", "100"});
    REQUIRE(a.code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "diag" / "approx_summary.json"));
    CHECK(summary["correlation"].get<double>() > 0.9);
}
