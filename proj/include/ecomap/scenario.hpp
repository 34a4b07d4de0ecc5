#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ecomap/carbon.hpp"
#include "ecomap/search.hpp"
#include "ecomap/workload.hpp"

namespace ecomap {

enum class PolicyKind { Ecomap, GreedyThroughput, PowerMin, StaticMode };

struct Policy {
    PolicyKind kind = PolicyKind::Ecomap;
    int static_mode_id = 1; // only for StaticMode

    std::string name() const {
        switch (kind) {
        case PolicyKind::Ecomap: return "ecomap";
        case PolicyKind::GreedyThroughput: return "greedy";
        case PolicyKind::PowerMin: return "powermin";
        case PolicyKind::StaticMode: return "static:" + std::to_string(static_mode_id);
        }
        return "?";
    }
};

inline Policy parse_policy(const std::string& s) {
    if (s == "ecomap")
        return {PolicyKind::Ecomap, 1};
    if (s == "greedy")
        return {PolicyKind::GreedyThroughput, 1};
    if (s == "powermin")
        return {PolicyKind::PowerMin, 1};
    if (s.rfind("static:", 0) == 0)
        return {PolicyKind::StaticMode, std::stoi(s.substr(7))};
    throw ConfigError("unknown policy: " + s + " (ecomap|greedy|powermin|static:<m>)");
}

// Everything a run needs: the CI environment, the workload process, the
// latency SLO, and the knobs of the search and estimator.
struct Scenario {
    std::string name = "scenario";
    std::string trace_path;     // CSV trace; empty = generate trace_profile
    std::string trace_profile;  // week1 | week2 | week3
    int duration_days = 5;

    std::string threshold_preset = "relaxed"; // relaxed (2000 ms) | strict (500 ms)
    double latency_threshold_ms = 2000.0;
    double accuracy_tolerance_pp = 4.5;

    ScheduleParams schedule;

    Policy policy;
    std::uint64_t seed = 1;

    ValueWeights weights;      // power_threshold_class is filled per mode at runtime
    int quantiles = 10;
    SearchBudget budget;
    int max_partitions = 2;
    double enumeration_cap = 4096.0;
    double monitor_period_s = 60.0;
    bool upgrades_enabled = true;
    int oracle_verify_cap = 64; // ranked candidates oracle-checked per commit

    std::string estimator_path; // empty = train a seeded estimator in-process
    int auto_train_per_mode = 150;
    std::string lut_path;       // empty = built-in default LUT
    std::string catalog_path;   // empty = built-in catalog

    void apply_threshold_preset() {
        if (threshold_preset == "relaxed")
            latency_threshold_ms = 2000.0;
        else if (threshold_preset == "strict")
            latency_threshold_ms = 500.0;
        else
            throw ConfigError("unknown threshold preset: " + threshold_preset);
    }
};

inline Scenario make_week_scenario(const std::string& profile, const std::string& preset,
                                   std::uint64_t seed) {
    Scenario sc;
    sc.name = profile + "-" + preset;
    sc.trace_profile = profile;
    sc.threshold_preset = preset;
    sc.apply_threshold_preset();
    sc.seed = seed;
    TraceProfile tp = trace_profile(profile);
    sc.duration_days = tp.days;
    sc.schedule.duration_s = tp.days * 86400.0;
    if (profile == "week3") { // medium workload intensity
        sc.schedule.max_concurrent = 10;
        sc.schedule.mean_interarrival_s = 600.0;
    } else { // high workload intensity
        sc.schedule.max_concurrent = 15;
        sc.schedule.mean_interarrival_s = 300.0;
    }
    sc.schedule.mean_duration_s = 3600.0;
    return sc;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open scenario: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("scenario parse error in " + path + ": " + e.what());
    }
    Scenario sc;
    sc.name = doc.value("name", sc.name);
    sc.trace_path = doc.value("trace", "");
    sc.trace_profile = doc.value("trace_profile", "");
    if (sc.trace_path.empty() && sc.trace_profile.empty())
        throw ConfigError("scenario needs either 'trace' or 'trace_profile'");
    sc.duration_days = doc.value("duration_days", sc.duration_days);
    if (sc.duration_days < 1)
        throw ConfigError("scenario duration must be at least one day");
    if (doc.contains("threshold_preset")) {
        sc.threshold_preset = doc["threshold_preset"].get<std::string>();
        sc.apply_threshold_preset();
    }
    sc.latency_threshold_ms = doc.value("latency_threshold_ms", sc.latency_threshold_ms);
    sc.accuracy_tolerance_pp = doc.value("accuracy_tolerance_pp", sc.accuracy_tolerance_pp);
    if (doc.contains("workload")) {
        const auto& w = doc["workload"];
        sc.schedule.max_concurrent = w.value("max_concurrent", sc.schedule.max_concurrent);
        sc.schedule.mean_interarrival_s =
            w.value("mean_interarrival_s", sc.schedule.mean_interarrival_s);
        sc.schedule.mean_duration_s = w.value("mean_duration_s", sc.schedule.mean_duration_s);
    }
    sc.schedule.duration_s = sc.duration_days * 86400.0;
    sc.policy = parse_policy(doc.value("policy", "ecomap"));
    sc.seed = doc.value("seed", sc.seed);
    if (doc.contains("weights")) {
        sc.weights.w_latency = doc["weights"].value("latency", sc.weights.w_latency);
        sc.weights.w_power = doc["weights"].value("power", sc.weights.w_power);
    }
    sc.quantiles = doc.value("quantiles", sc.quantiles);
    if (doc.contains("search")) {
        const auto& s = doc["search"];
        sc.budget.max_evaluations = s.value("max_evaluations", sc.budget.max_evaluations);
        sc.budget.leaf_split_threshold =
            s.value("leaf_split_threshold", sc.budget.leaf_split_threshold);
        sc.budget.exploration_c = s.value("exploration_c", sc.budget.exploration_c);
        sc.max_partitions = s.value("max_partitions", sc.max_partitions);
        sc.enumeration_cap = s.value("enumeration_cap", sc.enumeration_cap);
    }
    sc.monitor_period_s = doc.value("monitor_period_s", sc.monitor_period_s);
    sc.upgrades_enabled = doc.value("upgrades_enabled", sc.upgrades_enabled);
    sc.estimator_path = doc.value("estimator", "");
    sc.auto_train_per_mode = doc.value("auto_train_per_mode", sc.auto_train_per_mode);
    sc.lut_path = doc.value("lut", "");
    sc.catalog_path = doc.value("catalog", "");
    return sc;
}

} // namespace ecomap
