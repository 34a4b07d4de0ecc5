// Command-line front end: scenario runs, policy comparisons, synthetic
// trace generation, and the estimator dataset/train/eval lifecycle.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ecomap/runtime.hpp"

namespace fs = std::filesystem;
using namespace ecomap;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitBreaches = 3;
constexpr int kExitEstimatorGate = 4;

// Atomic overwrite: write to a sibling temp file, then rename over the
// target.
void write_file_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out)
            throw ConfigError("cannot write: " + tmp.string());
        out << content;
    }
    fs::rename(tmp, target);
}

std::string report_csv_string(const SimulationReport& report) {
    fs::path tmp = fs::temp_directory_path() /
                   ("ecomap-csv-" + std::to_string(::getpid()) + ".tmp");
    report.write_daily_csv(tmp.string());
    std::ifstream in(tmp);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    fs::remove(tmp);
    return content;
}

struct RunOverrides {
    std::string policy;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string estimator;
    std::string trace;
    double w_latency = -1, w_power = -1;
    int quantiles = 0;
    int budget = 0;
    bool strict = false, relaxed = false;
};

Scenario apply_overrides(Scenario sc, const RunOverrides& o) {
    if (!o.policy.empty())
        sc.policy = parse_policy(o.policy);
    if (o.seed_set)
        sc.seed = o.seed;
    if (!o.estimator.empty())
        sc.estimator_path = o.estimator;
    if (!o.trace.empty()) {
        sc.trace_path = o.trace;
        sc.trace_profile.clear();
    }
    if (o.w_latency >= 0)
        sc.weights.w_latency = o.w_latency;
    if (o.w_power >= 0)
        sc.weights.w_power = o.w_power;
    if (o.quantiles > 0)
        sc.quantiles = o.quantiles;
    if (o.budget > 0)
        sc.budget.max_evaluations = o.budget;
    if (o.strict && o.relaxed)
        throw ConfigError("--strict and --relaxed are mutually exclusive");
    if (o.strict) {
        sc.threshold_preset = "strict";
        sc.apply_threshold_preset();
    }
    if (o.relaxed) {
        sc.threshold_preset = "relaxed";
        sc.apply_threshold_preset();
    }
    return sc;
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const RunOverrides& overrides) {
    Scenario sc = apply_overrides(load_scenario(scenario_path), overrides);
    SimulationReport report = run_scenario(sc, sc.policy, sc.seed);
    write_file_atomic((fs::path(out_dir) / "report.json").string(),
                      report.to_json().dump(2) + "\n");
    write_file_atomic((fs::path(out_dir) / "daily.csv").string(), report_csv_string(report));
    std::printf("policy=%s seed=%llu emissions_g=%.3f mean_latency_ms=%.3f cdp=%.3f breaches=%s\n",
                report.policy.c_str(), static_cast<unsigned long long>(report.seed),
                report.totals.emissions_g, report.totals.mean_latency_ms, report.totals.cdp,
                report.has_breaches() ? "yes" : "no");
    return report.has_breaches() ? kExitBreaches : kExitOk;
}

int cmd_compare(const std::string& scenario_path, const std::vector<std::string>& policies,
                const std::string& out_path, const RunOverrides& overrides) {
    if (policies.size() < 2)
        throw ConfigError("compare needs at least 2 policies");
    Scenario sc = apply_overrides(load_scenario(scenario_path), overrides);
    RunInputs inputs = prepare_run(sc, sc.seed);
    std::vector<SimulationReport> reports;
    for (const auto& p : policies)
        reports.push_back(run_scenario(sc, parse_policy(p), sc.seed, inputs));
    for (const auto& r : reports)
        if (r.days.size() != reports.front().days.size())
            throw ConfigError("compare: mismatched scenario durations");

    std::string csv = "day,policy,power_norm,latency_norm,emissions_norm,cdp_norm\n";
    char buf[160];
    for (std::size_t d = 0; d < reports.front().days.size(); ++d) {
        const DayReport& base = reports.front().days[d];
        for (std::size_t p = 0; p < reports.size(); ++p) {
            const DayReport& day = reports[p].days[d];
            auto norm = [](double v, double b) { return b != 0.0 ? v / b : 0.0; };
            std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%.6f,%.6f\n", day.day,
                          reports[p].policy.c_str(), norm(day.mean_power_w, base.mean_power_w),
                          norm(day.mean_latency_ms, base.mean_latency_ms),
                          norm(day.emissions_g, base.emissions_g), norm(day.cdp, base.cdp));
            csv += buf;
        }
    }
    write_file_atomic(out_path, csv);
    std::printf("wrote %s (%zu policies x %zu days)\n", out_path.c_str(), reports.size(),
                reports.front().days.size());
    return kExitOk;
}

int cmd_gen_trace(const std::string& profile_name, const std::string& out_path,
                  std::uint64_t seed, int days, double lo, double hi, double period) {
    TraceProfile profile;
    if (profile_name == "custom") {
        if (lo <= 0 || hi <= lo || days < 1)
            throw ConfigError("custom profile needs --lo, --hi and --days");
        profile = {"custom", lo, hi, days, period};
    } else {
        profile = trace_profile(profile_name);
        if (days > 0)
            profile.days = days;
    }
    CiTrace trace = generate_ci_trace(profile, seed);
    fs::path target(out_path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    save_ci_trace(trace, out_path);
    std::printf("wrote %s (%zu samples, %d+1 days)\n", out_path.c_str(), trace.samples.size(),
                profile.days);
    return kExitOk;
}

int cmd_dataset(const std::string& out_path, int per_mode, std::uint64_t seed, int min_dnns,
                int max_dnns, const std::string& lut_path) {
    DeviceModel device = DeviceModel::standard(
        lut_path.empty() ? default_mode_lut() : load_mode_lut(lut_path));
    DatasetGenParams params;
    params.per_mode_count = per_mode;
    params.min_dnns = min_dnns;
    params.max_dnns = max_dnns;
    TrainingDataset dataset = generate_dataset(default_catalog(), device, params, seed);
    fs::path target(out_path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    save_dataset(dataset, device, out_path);
    std::printf("wrote %s (%zu samples, %d per mode)\n", out_path.c_str(),
                dataset.samples.size(), per_mode);
    return kExitOk;
}

int cmd_train(const std::string& dataset_path, const std::string& out_path, int quantiles,
              double split, int iterations) {
    TrainingDataset dataset = load_dataset(dataset_path);
    TrainParams params;
    params.n_classes = quantiles;
    params.split_fraction = split;
    params.iterations = iterations;
    Estimator est = train(dataset, params);
    fs::path target(out_path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    est.save(out_path);
    std::printf("latency: accuracy=%.4f spearman=%.4f | power: accuracy=%.4f spearman=%.4f "
                "(train=%zu test=%zu)\n",
                est.metrics.latency_accuracy, est.metrics.latency_spearman,
                est.metrics.power_accuracy, est.metrics.power_spearman,
                est.metrics.train_samples, est.metrics.test_samples);
    return kExitOk;
}

int cmd_eval_estimator(const std::string& estimator_path, const std::string& dataset_path,
                       double min_spearman) {
    Estimator est = Estimator::load(estimator_path);
    TrainingDataset dataset = load_dataset(dataset_path);
    std::vector<double> pred_lat, pred_pow, true_lat, true_pow;
    std::size_t lat_hits = 0, pow_hits = 0;
    for (const auto& s : dataset.samples) {
        auto pred = est.predict_features(s.features);
        pred_lat.push_back(pred.latency_class);
        pred_pow.push_back(pred.power_class);
        true_lat.push_back(s.latency_ms);
        true_pow.push_back(s.power_w);
        if (pred.latency_class == est.latency_buckets.class_of(s.latency_ms))
            ++lat_hits;
        if (pred.power_class == est.power_buckets.class_of(s.power_w))
            ++pow_hits;
    }
    double n = static_cast<double>(dataset.samples.size());
    double lat_sp = spearman(pred_lat, true_lat);
    double pow_sp = spearman(pred_pow, true_pow);
    std::printf("latency: accuracy=%.4f spearman=%.4f | power: accuracy=%.4f spearman=%.4f "
                "(n=%zu, bar=%.2f)\n",
                lat_hits / n, lat_sp, pow_hits / n, pow_sp, dataset.samples.size(),
                min_spearman);
    if (lat_sp < min_spearman || pow_sp < min_spearman) {
        std::printf("FAIL: spearman below the %.2f bar\n", min_spearman);
        return kExitEstimatorGate;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"carbon-aware multi-DNN mapping simulator"};
    app.require_subcommand(1);

    RunOverrides overrides;
    std::string scenario_path, out_dir, out_path;
    std::vector<std::string> policies;

    auto add_override_flags = [&](CLI::App* cmd) {
        cmd->add_option("--policy", overrides.policy, "policy override (ecomap|greedy|powermin|static:<m>)");
        cmd->add_option("--seed", overrides.seed, "seed override")
            ->each([&](const std::string&) { overrides.seed_set = true; });
        cmd->add_option("--estimator", overrides.estimator, "trained estimator file");
        cmd->add_option("--trace", overrides.trace, "CI trace override");
        cmd->add_option("--w-latency", overrides.w_latency, "latency weight override");
        cmd->add_option("--w-power", overrides.w_power, "power weight override");
        cmd->add_option("--quantiles", overrides.quantiles, "estimator class count override");
        cmd->add_option("--budget", overrides.budget, "search evaluation budget override");
        cmd->add_flag("--strict", overrides.strict, "500 ms latency threshold preset");
        cmd->add_flag("--relaxed", overrides.relaxed, "2000 ms latency threshold preset");
    };

    auto* run = app.add_subcommand("run", "run one scenario and emit report.json + daily.csv");
    run->add_option("--scenario", scenario_path, "scenario JSON")->required();
    run->add_option("--out", out_dir, "output directory")->required();
    add_override_flags(run);

    auto* compare = app.add_subcommand("compare", "run several policies on one scenario");
    compare->add_option("--scenario", scenario_path, "scenario JSON")->required();
    compare->add_option("--policies", policies, "policies, first is the normalization baseline")
        ->required()
        ->delimiter(',');
    compare->add_option("--out", out_path, "comparison CSV path")->required();
    add_override_flags(compare);

    std::string profile = "week1";
    std::uint64_t seed = 1;
    int days = 0;
    double lo = 0, hi = 0, period = 600;
    auto* gen = app.add_subcommand("gen-trace", "generate a synthetic CI trace CSV");
    gen->add_option("--profile", profile, "week1|week2|week3|custom");
    gen->add_option("--out", out_path, "trace CSV path")->required();
    gen->add_option("--seed", seed, "seed");
    gen->add_option("--days", days, "override day count");
    gen->add_option("--lo", lo, "custom profile: CI lower bound");
    gen->add_option("--hi", hi, "custom profile: CI upper bound");
    gen->add_option("--period", period, "sample period seconds");

    int per_mode = 1000, min_dnns = 5, max_dnns = 10;
    std::string lut_path, dataset_path, estimator_path;
    auto* dataset = app.add_subcommand("dataset", "generate an estimator training dataset");
    dataset->add_option("--out", out_path, "dataset CSV path")->required();
    dataset->add_option("--per-mode", per_mode, "samples per operating mode");
    dataset->add_option("--seed", seed, "seed");
    dataset->add_option("--min-dnns", min_dnns, "min concurrent DNNs per sample");
    dataset->add_option("--max-dnns", max_dnns, "max concurrent DNNs per sample");
    dataset->add_option("--lut", lut_path, "mode LUT CSV (default: built-in)");

    int quantiles = 10, iterations = 400;
    double split = 0.8, min_spearman = 0.80;
    auto* tr = app.add_subcommand("train", "train an estimator from a dataset");
    tr->add_option("--dataset", dataset_path, "dataset CSV")->required();
    tr->add_option("--out", out_path, "estimator JSON path")->required();
    tr->add_option("--quantiles", quantiles, "quantile class count");
    tr->add_option("--split", split, "train fraction");
    tr->add_option("--iterations", iterations, "training iterations");

    auto* ev = app.add_subcommand("eval-estimator", "evaluate an estimator against a dataset");
    ev->add_option("--estimator", estimator_path, "estimator JSON")->required();
    ev->add_option("--dataset", dataset_path, "dataset CSV")->required();
    ev->add_option("--min-spearman", min_spearman, "gate: minimum rank correlation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_path, out_dir, overrides);
        if (compare->parsed())
            return cmd_compare(scenario_path, policies, out_path, overrides);
        if (gen->parsed())
            return cmd_gen_trace(profile, out_path, seed, days, lo, hi, period);
        if (dataset->parsed())
            return cmd_dataset(out_path, per_mode, seed, min_dnns, max_dnns, lut_path);
        if (tr->parsed())
            return cmd_train(dataset_path, out_path, quantiles, split, iterations);
        if (ev->parsed())
            return cmd_eval_estimator(estimator_path, dataset_path, min_spearman);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    }
    return kExitOk;
}
