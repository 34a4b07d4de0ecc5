#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecomap/workload.hpp"

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(ECOMAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ecomap_cli_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

void write_scenario(const fs::path& path, const std::string& extra = "") {
    std::ofstream out(path);
    out << R"({
  "name": "cli-test",
  "trace_profile": "week1",
  "duration_days": 1,
  "threshold_preset": "strict",
  "workload": {"max_concurrent": 8, "mean_interarrival_s": 900.0, "mean_duration_s": 2400.0},
  "seed": 42,
  "auto_train_per_mode": 40)" << extra
        << "\n}\n";
}

} // namespace

TEST_CASE("cli run emits report files and a success or breach exit", "[cli]") {
    TempDir dir;
    fs::path scenario = dir.path / "scenario.json";
    write_scenario(scenario);
    int rc = run_cli("run --scenario " + scenario.string() + " --out " +
                     (dir.path / "out").string());
    CHECK((rc == 0 || rc == 3));
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    CHECK(fs::exists(dir.path / "out" / "daily.csv"));
    std::string report = slurp(dir.path / "out" / "report.json");
    CHECK(report.find("\"format\": \"ecomap-report\"") != std::string::npos);
}

TEST_CASE("cli run with a missing trace exits with the config code and no report", "[cli]") {
    TempDir dir;
    fs::path scenario = dir.path / "scenario.json";
    write_scenario(scenario, ",\n  \"trace\": \"/nonexistent/trace.csv\"");
    int rc = run_cli("run --scenario " + scenario.string() + " --out " +
                     (dir.path / "out").string());
    CHECK(rc == 2);
    CHECK_FALSE(fs::exists(dir.path / "out" / "report.json"));
}

TEST_CASE("cli run is byte-deterministic under a repeated seed", "[cli]") {
    TempDir dir;
    fs::path scenario = dir.path / "scenario.json";
    write_scenario(scenario);
    REQUIRE(run_cli("run --scenario " + scenario.string() + " --seed 7 --out " +
                    (dir.path / "a").string()) != 2);
    REQUIRE(run_cli("run --scenario " + scenario.string() + " --seed 7 --out " +
                    (dir.path / "b").string()) != 2);
    CHECK(slurp(dir.path / "a" / "report.json") == slurp(dir.path / "b" / "report.json"));
    CHECK(slurp(dir.path / "a" / "daily.csv") == slurp(dir.path / "b" / "daily.csv"));
}

TEST_CASE("cli compare normalizes to the first policy", "[cli]") {
    TempDir dir;
    fs::path scenario = dir.path / "scenario.json";
    write_scenario(scenario);
    fs::path out = dir.path / "compare.csv";
    int rc = run_cli("compare --scenario " + scenario.string() +
                     " --policies greedy,ecomap --out " + out.string());
    REQUIRE(rc == 0);
    std::istringstream csv(slurp(out));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "day,policy,power_norm,latency_norm,emissions_norm,cdp_norm");
    bool saw_baseline = false;
    while (std::getline(csv, line)) {
        if (line.find(",greedy,") == std::string::npos)
            continue;
        saw_baseline = true;
        CHECK(line.find(",1.000000,1.000000,1.000000,1.000000") != std::string::npos);
    }
    CHECK(saw_baseline);
}

TEST_CASE("cli compare requires at least two policies", "[cli]") {
    TempDir dir;
    fs::path scenario = dir.path / "scenario.json";
    write_scenario(scenario);
    int rc = run_cli("compare --scenario " + scenario.string() + " --policies ecomap --out " +
                     (dir.path / "cmp.csv").string());
    CHECK(rc == 2);
}

TEST_CASE("cli gen-trace writes deterministic bounded traces", "[cli]") {
    TempDir dir;
    fs::path a = dir.path / "a.csv";
    fs::path b = dir.path / "b.csv";
    REQUIRE(run_cli("gen-trace --profile week2 --seed 5 --out " + a.string()) == 0);
    REQUIRE(run_cli("gen-trace --profile week2 --seed 5 --out " + b.string()) == 0);
    CHECK(slurp(a) == slurp(b));
    std::istringstream csv(slurp(a));
    std::string line;
    std::getline(csv, line);
    REQUIRE(line == "timestamp_seconds,ci_gco2_per_kwh");
    double lo = 1e18, hi = -1e18;
    while (std::getline(csv, line)) {
        auto comma = line.find(',');
        double ci = std::stod(line.substr(comma + 1));
        lo = std::min(lo, ci);
        hi = std::max(hi, ci);
    }
    CHECK(lo >= 450.0 - 1e-6);
    CHECK(hi <= 550.0 + 1e-6);
}

TEST_CASE("cli dataset, train and eval-estimator pipeline", "[cli]") {
    TempDir dir;
    fs::path dataset = dir.path / "dataset.csv";
    fs::path estimator = dir.path / "estimator.json";
    REQUIRE(run_cli("dataset --per-mode 80 --seed 3 --out " + dataset.string()) == 0);

    std::istringstream csv(slurp(dataset));
    std::string line;
    std::getline(csv, line); // version comment
    CHECK(line.rfind("# ecomap-dataset v1", 0) == 0);
    std::getline(csv, line); // header
    int rows = 0;
    while (std::getline(csv, line))
        rows += !line.empty();
    CHECK(rows == 8 * 80);

    REQUIRE(run_cli("train --dataset " + dataset.string() + " --out " + estimator.string()) == 0);
    std::string est = slurp(estimator);
    CHECK(est.find("\"latency_spearman\"") != std::string::npos);
    CHECK(est.find("\"test_samples\"") != std::string::npos);

    CHECK(run_cli("eval-estimator --estimator " + estimator.string() + " --dataset " +
                  dataset.string() + " --min-spearman 0.5") == 0);
    // an impossible bar exercises the gate exit code
    CHECK(run_cli("eval-estimator --estimator " + estimator.string() + " --dataset " +
                  dataset.string() + " --min-spearman 0.9999") == 4);
}
