#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "ecomap/device.hpp"
#include "ecomap/random.hpp"

namespace ecomap {

// Per-source carbon emission factors, gCO2/kWh.
namespace cef {
inline constexpr double coal = 820.0;
inline constexpr double oil = 650.0;
inline constexpr double natural_gas = 490.0;
inline constexpr double wind = 11.0;
inline constexpr double nuclear = 12.0;
inline constexpr double hydro = 24.0;
} // namespace cef

struct EnergySource {
    std::string name;
    double energy_kwh = 0.0;
    double emission_factor = 0.0; // gCO2/kWh
};

// Grid carbon intensity of a generation mix: energy-weighted average of the
// per-source emission factors.
inline double mix_ci(std::span<const EnergySource> sources) {
    double energy = 0.0, weighted = 0.0;
    for (const auto& s : sources) {
        if (s.energy_kwh < 0 || s.emission_factor < 0)
            throw ConfigError("energy source with negative field: " + s.name);
        energy += s.energy_kwh;
        weighted += s.energy_kwh * s.emission_factor;
    }
    if (energy <= 0.0)
        throw ConfigError("mix_ci: total generated energy must be positive");
    return weighted / energy;
}

// ---------------------------------------------------------------------------
// Carbon intensity traces
// ---------------------------------------------------------------------------

struct CiSample {
    double t_s = 0.0;   // seconds since scenario start
    double ci = 0.0;    // gCO2/kWh
};

struct CiTrace {
    std::vector<CiSample> samples;

    void validate() const {
        if (samples.empty())
            throw ConfigError("CI trace is empty");
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].ci < 0)
                throw ConfigError("CI trace has a negative sample");
            if (i > 0 && samples[i].t_s <= samples[i - 1].t_s)
                throw ConfigError("CI trace timestamps must be strictly increasing");
        }
    }

    // Piecewise-constant value: the sample at or before t holds until the
    // next sample.
    double at(double t) const {
        auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                   [](double v, const CiSample& s) { return v < s.t_s; });
        if (it == samples.begin())
            throw ConfigError("CI trace does not cover requested time");
        return std::prev(it)->ci;
    }

    double end_time() const { return samples.back().t_s; }
};

// Trace file: two-column CSV, header required.
inline CiTrace load_ci_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open CI trace: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("timestamp_seconds,ci_gco2_per_kwh", 0) != 0)
        throw ConfigError("CI trace missing required header: " + path);
    CiTrace trace;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        CiSample s;
        char comma;
        std::istringstream row(line);
        if (!(row >> s.t_s >> comma >> s.ci))
            throw ConfigError("malformed CI trace row: " + line);
        trace.samples.push_back(s);
    }
    trace.validate();
    return trace;
}

inline void save_ci_trace(const CiTrace& trace, const std::string& path) {
    std::ofstream out(path);
    out << "timestamp_seconds,ci_gco2_per_kwh\n";
    char buf[64];
    for (const auto& s : trace.samples) {
        std::snprintf(buf, sizeof buf, "%.0f,%.6f\n", s.t_s, s.ci);
        out << buf;
    }
}

struct TraceProfile {
    std::string name;
    double ci_lo = 200.0;
    double ci_hi = 500.0;
    int days = 5;
    double period_s = 600.0;
};

inline TraceProfile trace_profile(const std::string& name) {
    if (name == "week1")
        return {"week1", 200.0, 500.0, 5, 600.0};
    if (name == "week2")
        return {"week2", 450.0, 550.0, 5, 600.0};
    if (name == "week3")
        return {"week3", 250.0, 600.0, 5, 600.0};
    throw ConfigError("unknown trace profile: " + name);
}

// Synthetic CI trace: diurnal sinusoid plus seeded noise, rescaled so the
// trace attains exactly [ci_lo, ci_hi]. One extra day is generated past the
// nominal duration so a 24-hour forecast is available until the end.
inline CiTrace generate_ci_trace(const TraceProfile& profile, std::uint64_t seed) {
    CiTrace trace;
    Rng rng(derive_seed(seed, fnv1a(profile.name)));
    std::normal_distribution<double> noise(0.0, 0.02 * (profile.ci_hi - profile.ci_lo));
    const double mid = 0.5 * (profile.ci_lo + profile.ci_hi);
    const double amp = 0.5 * (profile.ci_hi - profile.ci_lo);
    const double horizon = (profile.days + 1) * 86400.0;
    for (double t = 0.0; t <= horizon; t += profile.period_s) {
        // trough in the early morning, peak in the evening
        double phase = 2.0 * std::numbers::pi * (t / 86400.0 - 4.5 / 24.0);
        trace.samples.push_back({t, mid - amp * std::cos(phase) + noise(rng)});
    }
    double lo = trace.samples[0].ci, hi = lo;
    for (const auto& s : trace.samples) {
        lo = std::min(lo, s.ci);
        hi = std::max(hi, s.ci);
    }
    for (auto& s : trace.samples)
        s.ci = profile.ci_lo + (s.ci - lo) * (profile.ci_hi - profile.ci_lo) / (hi - lo);
    trace.validate();
    return trace;
}

// ---------------------------------------------------------------------------
// Forecast and threshold policy
// ---------------------------------------------------------------------------

struct CiForecast {
    double start_s = 0.0;
    double ci_min_day = 0.0;
    double ci_max_day = 0.0;

    double range() const { return ci_max_day - ci_min_day; }
};

// 24-hour perfect-foresight forecast over the trace window [now, now+24h].
inline CiForecast forecast(const CiTrace& trace, double now) {
    const double horizon = now + 86400.0;
    if (trace.samples.empty() || trace.samples.front().t_s > now ||
        trace.end_time() < horizon)
        throw ConfigError("CI trace does not cover the 24h forecast window");
    CiForecast fc;
    fc.start_s = now;
    fc.ci_min_day = fc.ci_max_day = trace.at(now);
    for (const auto& s : trace.samples) {
        if (s.t_s < now || s.t_s > horizon)
            continue;
        fc.ci_min_day = std::min(fc.ci_min_day, s.ci);
        fc.ci_max_day = std::max(fc.ci_max_day, s.ci);
    }
    return fc;
}

// Maps current CI onto an operating mode: position within the forecast
// day's range, split into |LUT| equal bins, highest power cap first. A
// degenerate (flat) forecast selects the highest-cap mode.
inline const OperatingMode& ci_to_mode(double ci, const CiForecast& fc, const ModeLut& lut) {
    if (lut.empty())
        throw ConfigError("ci_to_mode: empty LUT");
    if (fc.range() <= 0.0)
        return lut.front();
    double p = std::clamp((ci - fc.ci_min_day) / fc.range(), 0.0, 1.0);
    auto idx = static_cast<std::size_t>(
        std::min(p * static_cast<double>(lut.size()),
                 static_cast<double>(lut.size()) - 1.0));
    return lut[idx];
}

// Threshold update rule: apply a change only when CI moved by at least 10%
// of the forecast day's range since the last applied value.
inline bool hysteresis_gate(double last_applied_ci, double new_ci, const CiForecast& fc,
                            double fraction = 0.10) {
    if (fc.range() <= 0.0)
        return false;
    return std::abs(new_ci - last_applied_ci) >= fraction * fc.range();
}

// ---------------------------------------------------------------------------
// Emissions accounting
// ---------------------------------------------------------------------------

struct EmissionsLedger {
    double energy_kwh = 0.0;
    double emissions_g = 0.0;
    // request-weighted latency accumulator feeding the CDP metric
    double request_count = 0.0;
    double latency_request_sum_ms = 0.0;

    double mean_latency_ms() const {
        return request_count > 0.0 ? latency_request_sum_ms / request_count : 0.0;
    }
};

// CF = E x CI accrued over an interval of constant power and CI.
inline void accrue(double power_w, double duration_s, double ci, EmissionsLedger& ledger) {
    if (power_w < 0 || duration_s < 0)
        throw ConfigError("accrue: negative power or duration");
    double energy = power_w * duration_s / 3.6e6; // kWh
    ledger.energy_kwh += energy;
    ledger.emissions_g += energy * ci;
}

// Carbon Delay Product: emissions times mean latency in seconds.
inline double cdp(const EmissionsLedger& ledger, double mean_latency_ms) {
    return ledger.emissions_g * mean_latency_ms / 1000.0;
}

} // namespace ecomap
