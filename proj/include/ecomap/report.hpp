#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecomap/workload.hpp"

namespace ecomap {

struct DayReport {
    int day = 0;
    double seconds = 0.0;
    double energy_kwh = 0.0;
    double emissions_g = 0.0;
    double mean_power_w = 0.0;
    double mean_latency_ms = 0.0; // request-weighted
    double cdp = 0.0;             // emissions_g * mean latency in seconds
    double requests = 0.0;
    std::vector<double> level_requests; // index 0 = quality level 1
    int power_breach_intervals = 0;
    double power_breach_s = 0.0;
    int latency_breach_intervals = 0;
    double latency_breach_s = 0.0;
    int mode_changes = 0;
    int cascade_steps = 0;
    int upgrade_steps = 0;
    int admission_breaches = 0;

    double level_share(int level) const {
        if (requests <= 0.0 || level < 1 || level > static_cast<int>(level_requests.size()))
            return 0.0;
        return level_requests[static_cast<std::size_t>(level - 1)] / requests;
    }
};

struct SimulationReport {
    std::string scenario_name;
    std::string policy;
    std::uint64_t seed = 0;
    double duration_s = 0.0;
    std::vector<DayReport> days;
    DayReport totals; // day = -1, aggregates the whole run

    bool has_breaches() const {
        return totals.power_breach_intervals > 0 || totals.latency_breach_intervals > 0 ||
               totals.admission_breaches > 0;
    }

    nlohmann::json to_json() const {
        auto day_json = [](const DayReport& d) {
            return nlohmann::json{{"day", d.day},
                                  {"seconds", d.seconds},
                                  {"energy_kwh", d.energy_kwh},
                                  {"emissions_g", d.emissions_g},
                                  {"mean_power_w", d.mean_power_w},
                                  {"mean_latency_ms", d.mean_latency_ms},
                                  {"cdp", d.cdp},
                                  {"requests", d.requests},
                                  {"level_requests", d.level_requests},
                                  {"power_breach_intervals", d.power_breach_intervals},
                                  {"power_breach_s", d.power_breach_s},
                                  {"latency_breach_intervals", d.latency_breach_intervals},
                                  {"latency_breach_s", d.latency_breach_s},
                                  {"mode_changes", d.mode_changes},
                                  {"cascade_steps", d.cascade_steps},
                                  {"upgrade_steps", d.upgrade_steps},
                                  {"admission_breaches", d.admission_breaches}};
        };
        nlohmann::json doc;
        doc["format"] = "ecomap-report";
        doc["version"] = 1;
        doc["scenario"] = scenario_name;
        doc["policy"] = policy;
        doc["seed"] = seed;
        doc["duration_s"] = duration_s;
        doc["totals"] = day_json(totals);
        for (const auto& d : days)
            doc["days"].push_back(day_json(d));
        return doc;
    }

    void write_json(const std::string& path) const {
        std::ofstream out(path);
        if (!out)
            throw ConfigError("cannot write report: " + path);
        out << to_json().dump(2) << "\n";
    }

    // Per-day CSV with one row per simulated day.
    void write_daily_csv(const std::string& path) const {
        std::ofstream out(path);
        if (!out)
            throw ConfigError("cannot write daily csv: " + path);
        std::size_t max_levels = 0;
        for (const auto& d : days)
            max_levels = std::max(max_levels, d.level_requests.size());
        out << "day,mean_power_w,mean_latency_ms,emissions_g,cdp,requests";
        for (std::size_t l = 1; l <= max_levels; ++l)
            out << ",level" << l << "_share";
        out << ",power_breach_s,latency_breach_s,mode_changes,cascade_steps\n";
        char buf[64];
        for (const auto& d : days) {
            out << d.day;
            for (double v : {d.mean_power_w, d.mean_latency_ms, d.emissions_g, d.cdp, d.requests}) {
                std::snprintf(buf, sizeof buf, ",%.6f", v);
                out << buf;
            }
            for (std::size_t l = 1; l <= max_levels; ++l) {
                std::snprintf(buf, sizeof buf, ",%.6f", d.level_share(static_cast<int>(l)));
                out << buf;
            }
            std::snprintf(buf, sizeof buf, ",%.6f,%.6f,%d,%d\n", d.power_breach_s,
                          d.latency_breach_s, d.mode_changes, d.cascade_steps);
            out << buf;
        }
    }
};

} // namespace ecomap
