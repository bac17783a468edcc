#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vfc/config.hpp"
#include "vfc/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>

using namespace vfc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name)
        : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SystemConfig base_config() { return SystemConfig{}; }

}  // namespace

TEST_CASE("config file: full round trip with comments, lists and ranges") {
    TempDir dir("vfc-config-test");
    const std::string path = (dir.path / "run.conf").string();
    {
        std::ofstream out(path);
        out << "# experiment configuration\n"
            << "k_max = 6\n"
            << "mu_t = 50   # tasks per second\n"
            << "data_rate_mbps = 12\n"
            << "experiment = reward-compare\n"
            << "k_range = 3,5-7\n"
            << "mu_t_list = 25, 50\n"
            << "seed = 99\n"
            << "replications = 123\n"
            << "delay_limit_ms = 80\n";
    }
    SystemConfig config;
    ExperimentSpec spec;
    apply_config_file(path, config, spec);
    CHECK(config.k_max == 6);
    CHECK(config.mu_t == 50.0);
    CHECK(config.dcf.data_rate_mbps == 12.0);
    CHECK(spec.kind == ExperimentKind::RewardCompare);
    CHECK(spec.k_range == std::vector<int>{3, 5, 6, 7});
    CHECK(spec.mu_t_list == std::vector<double>{25.0, 50.0});
    CHECK(spec.seed == 99);
    CHECK(spec.replications == 123);
    CHECK(spec.delay_limit_ms == 80.0);
}

TEST_CASE("config file: errors carry the offending line") {
    TempDir dir("vfc-config-err");
    const std::string path = (dir.path / "bad.conf").string();
    {
        std::ofstream out(path);
        out << "k_max = 6\n"
            << "frobnicate = 1\n";
    }
    SystemConfig config;
    ExperimentSpec spec;
    try {
        apply_config_file(path, config, spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
        CHECK(std::string(e.what()).find("frobnicate") != std::string::npos);
    }

    {
        std::ofstream out(path);
        out << "mu_t = fast\n";
    }
    try {
        apply_config_file(path, config, spec);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":1:") != std::string::npos);
    }
}

TEST_CASE("experiment kinds parse and print") {
    for (const std::string name : {"arrival-rate", "delay", "policy-mix",
                                   "reward-compare", "feasibility", "simulate"})
        CHECK(to_string(experiment_kind_from(name)) == name);
    CHECK_THROWS_AS(experiment_kind_from("frobnicate"), std::invalid_argument);
}

TEST_CASE("arrival-rate and delay datasets: shapes and trends") {
    TempDir dir("vfc-exp-rates");
    ExperimentSpec spec;
    spec.kind = ExperimentKind::ArrivalRate;
    spec.k_range = {5, 6, 7, 8};
    spec.out_dir = dir.path.string();
    const auto rate_files = run(spec, base_config());
    REQUIRE(rate_files.size() == 1);

    std::ifstream in(rate_files[0]);
    std::string header;
    std::getline(in, header);
    CHECK(header == "K,i,lambda_t");
    double previous_rate[4] = {0, 1e18, 1e18, 1e18};
    int rows = 0;
    int k, i;
    double lambda;
    char comma;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream cols(line);
        cols >> k >> comma >> i >> comma >> lambda;
        ++rows;
        if (i > 1) CHECK(lambda < previous_rate[i - 1]);  // decreasing in i
        previous_rate[i] = lambda;
    }
    CHECK(rows == 4 * 3);

    spec.kind = ExperimentKind::Delay;
    const auto delay_files = run(spec, base_config());
    std::ifstream din(delay_files[0]);
    std::getline(din, header);
    CHECK(header == "K,i,delay_ms");
    double last_delay_i1 = 0.0;
    while (std::getline(din, line)) {
        std::istringstream cols(line);
        cols >> k >> comma >> i >> comma >> lambda;
        if (i == 1) {
            CHECK(lambda > last_delay_i1);  // increasing in K
            last_delay_i1 = lambda;
        }
    }
}

TEST_CASE("feasibility bound: reference values and edge cases") {
    const SystemConfig base = base_config();
    // frozen from the closed-form delay chain at the default parameters
    CHECK(feasibility_bound(base, 25.0, 100.0, 64).max_k == 5);
    CHECK(feasibility_bound(base, 50.0, 100.0, 64).max_k == 6);

    const FeasibilityResult none = feasibility_bound(base, 25.0, 1e-3, 64);
    CHECK(none.max_k == 0);
    CHECK(!none.capped);

    const FeasibilityResult capped = feasibility_bound(base, 25.0, 1e12, 16);
    CHECK(capped.max_k == 16);
    CHECK(capped.capped);
}

TEST_CASE("policy-mix dataset: distributions sum to one") {
    TempDir dir("vfc-exp-mix");
    ExperimentSpec spec;
    spec.kind = ExperimentKind::PolicyMix;
    spec.k_range = {3, 4};
    spec.out_dir = dir.path.string();
    const auto files = run(spec, base_config());
    REQUIRE(files.size() == 2);  // weighted and unweighted variants

    for (const std::string& file : files) {
        std::ifstream in(file);
        std::string header, line;
        std::getline(in, header);
        CHECK(header == "K,action,probability");
        std::map<int, double> totals;
        while (std::getline(in, line)) {
            int k, action;
            double probability;
            char comma;
            std::istringstream cols(line);
            cols >> k >> comma >> action >> comma >> probability;
            CHECK(probability >= 0.0);
            totals[k] += probability;
        }
        REQUIRE(totals.size() == 2);
        for (const auto& [k, total] : totals) CHECK(std::abs(total - 1.0) <= 1e-9);
    }
}

TEST_CASE("reward-compare dataset: optimal beats greedy on both conventions") {
    TempDir dir("vfc-exp-reward");
    ExperimentSpec spec;
    spec.kind = ExperimentKind::RewardCompare;
    spec.k_range = {3, 4};
    spec.out_dir = dir.path.string();
    const auto files = run(spec, base_config());
    REQUIRE(files.size() == 2);

    std::ifstream in(files[0]);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "K,V_optimal,V_greedy,improvement_pct");
    while (std::getline(in, line)) {
        int k;
        double v_opt, v_greedy, improvement;
        char comma;
        std::istringstream cols(line);
        cols >> k >> comma >> v_opt >> comma >> v_greedy >> comma >> improvement;
        CHECK(v_opt >= v_greedy - 1e-9);
        CHECK(improvement >= -1e-9);
    }
}

TEST_CASE("simulate dataset and byte-identical reruns") {
    TempDir dir_a("vfc-exp-sim-a");
    TempDir dir_b("vfc-exp-sim-b");
    SystemConfig config = base_config();
    config.k_max = 4;
    ExperimentSpec spec;
    spec.kind = ExperimentKind::Simulate;
    spec.k_range = {4};
    spec.replications = 500;
    spec.seed = 31337;

    spec.out_dir = dir_a.path.string();
    const auto files_a = run(spec, config);
    spec.out_dir = dir_b.path.string();
    const auto files_b = run(spec, config);
    REQUIRE(files_a.size() == 1);
    CHECK(slurp(files_a[0]) == slurp(files_b[0]));

    // different seed, different bytes
    spec.seed = 31338;
    spec.out_dir = dir_a.path.string();
    const auto files_c = run(spec, config);
    CHECK(slurp(files_c[0]) != slurp(files_b[0]));
}

TEST_CASE("csv reruns are byte-identical across every experiment kind") {
    TempDir dir_a("vfc-exp-det-a");
    TempDir dir_b("vfc-exp-det-b");
    SystemConfig config = base_config();
    config.k_max = 4;
    ExperimentSpec spec;
    spec.k_range = {3, 4};
    spec.replications = 200;
    for (ExperimentKind kind :
         {ExperimentKind::ArrivalRate, ExperimentKind::Delay, ExperimentKind::PolicyMix,
          ExperimentKind::RewardCompare, ExperimentKind::Feasibility,
          ExperimentKind::Simulate}) {
        spec.kind = kind;
        spec.out_dir = dir_a.path.string();
        const auto files_a = run(spec, config);
        spec.out_dir = dir_b.path.string();
        const auto files_b = run(spec, config);
        REQUIRE(files_a.size() == files_b.size());
        for (size_t i = 0; i < files_a.size(); ++i)
            CHECK_MESSAGE(slurp(files_a[i]) == slurp(files_b[i]),
                          "experiment ", to_string(kind));
    }
}

TEST_CASE("invalid specs are rejected") {
    ExperimentSpec spec;
    spec.k_range = {};
    CHECK_THROWS_AS(run(spec, base_config()), std::invalid_argument);
    spec.k_range = {2};  // below n_max = 3
    CHECK_THROWS_AS(run(spec, base_config()), std::invalid_argument);
    spec = ExperimentSpec{};
    spec.replications = 0;
    CHECK_THROWS_AS(spec.validate(base_config()), std::invalid_argument);
}
