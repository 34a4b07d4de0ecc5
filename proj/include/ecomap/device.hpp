#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ecomap/mapping.hpp"
#include "ecomap/workload.hpp"

namespace ecomap {

enum class ComponentKind { CpuCluster, Gpu };

struct ComputeComponent {
    std::string component_id;
    ComponentKind kind = ComponentKind::CpuCluster;
    double peak_gflops = 0.0;          // at reference frequency, all cores active
    double reference_frequency_ghz = 0.0;
    bool per_core = false;             // throughput scales with active cores
    int max_cores = 1;
};

// One precomputed hardware configuration with its measured power cap.
struct OperatingMode {
    int mode_id = 0;
    int active_cores = 0;
    double cpu_freq_ghz = 0.0;
    double gpu_freq_ghz = 0.0;
    double mem_freq_ghz = 0.0;
    double power_cap_w = 0.0;

    bool operator==(const OperatingMode&) const = default;
};

using ModeLut = std::vector<OperatingMode>;

inline void validate_mode_lut(const ModeLut& lut) {
    if (lut.size() < 2)
        throw ConfigError("mode LUT must define at least 2 modes");
    for (std::size_t i = 0; i < lut.size(); ++i) {
        const auto& m = lut[i];
        if (m.active_cores < 1 || m.cpu_freq_ghz <= 0 || m.gpu_freq_ghz <= 0 ||
            m.mem_freq_ghz <= 0 || m.power_cap_w <= 0)
            throw ConfigError("mode " + std::to_string(m.mode_id) + " has a non-positive field");
        for (std::size_t j = 0; j < i; ++j)
            if (lut[j].mode_id == m.mode_id)
                throw ConfigError("duplicate mode_id " + std::to_string(m.mode_id));
        if (i > 0 && lut[i].power_cap_w >= lut[i - 1].power_cap_w)
            throw ConfigError("mode LUT power caps must be strictly decreasing");
    }
    if (lut.front().mode_id != 1)
        throw ConfigError("mode 1 must hold the largest power cap");
}

// The default LUT: eight modes from 30 W down to 6 W.
inline ModeLut default_mode_lut() {
    return {
        {1, 8, 2.2, 1.300, 2.1, 30.0}, {2, 6, 2.2, 1.300, 2.1, 26.0},
        {3, 4, 2.2, 1.300, 2.1, 22.0}, {4, 8, 1.8, 0.828, 2.1, 16.0},
        {5, 6, 1.8, 0.828, 2.1, 13.0}, {6, 4, 1.8, 0.828, 2.1, 11.0},
        {7, 8, 1.2, 0.675, 1.2, 8.0},  {8, 6, 1.2, 0.675, 1.2, 6.0},
    };
}

// LUT file format: CSV mirroring the mode table columns.
//   mode,cores,f_cpu_ghz,f_gpu_ghz,f_mem_ghz,p_max_w
inline ModeLut load_mode_lut(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open mode LUT: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("mode,", 0) != 0)
        throw ConfigError("mode LUT missing header line: " + path);
    ModeLut lut;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        OperatingMode m;
        char comma;
        std::istringstream row(line);
        if (!(row >> m.mode_id >> comma >> m.active_cores >> comma >> m.cpu_freq_ghz >> comma >>
              m.gpu_freq_ghz >> comma >> m.mem_freq_ghz >> comma >> m.power_cap_w))
            throw ConfigError("malformed mode LUT row: " + line);
        lut.push_back(m);
    }
    validate_mode_lut(lut);
    return lut;
}

inline void save_mode_lut(const ModeLut& lut, const std::string& path) {
    std::ofstream out(path);
    out << "mode,cores,f_cpu_ghz,f_gpu_ghz,f_mem_ghz,p_max_w\n";
    char buf[128];
    for (const auto& m : lut) {
        std::snprintf(buf, sizeof buf, "%d,%d,%g,%g,%g,%g\n", m.mode_id, m.active_cores,
                      m.cpu_freq_ghz, m.gpu_freq_ghz, m.mem_freq_ghz, m.power_cap_w);
        out << buf;
    }
}

inline const OperatingMode& find_mode(const ModeLut& lut, int mode_id) {
    for (const auto& m : lut)
        if (m.mode_id == mode_id)
            return m;
    throw ConfigError("mode " + std::to_string(mode_id) + " not in LUT");
}

// ---------------------------------------------------------------------------
// Device model
// ---------------------------------------------------------------------------

struct EvaluationResult {
    std::vector<double> latency_ms;      // aligned with the evaluated workload
    double total_power_w = 0.0;
    std::vector<double> utilization;     // per component, in [0, 1]

    double max_latency_ms() const {
        double m = 0.0;
        for (double l : latency_ms)
            m = std::max(m, l);
        return m;
    }
};

// The modeled edge server: one CPU cluster and one GPU by default, a mode
// LUT, and the closed-form latency/power oracle that stands in for
// hardware measurement.
class DeviceModel {
public:
    std::vector<ComputeComponent> components;
    ModeLut lut;

    double mem_bandwidth_gbps = 30.0;      // at mem_reference_freq_ghz
    double mem_reference_freq_ghz = 2.1;
    double static_power_fraction = 0.2;    // of the mode's power cap
    double cpu_dynamic_share = 2.0 / 3.0;  // of the mode-1 dynamic budget
    double request_rate_hz = 1.0;          // per-service demand rate for contention

    static DeviceModel standard(ModeLut lut_in = default_mode_lut()) {
        DeviceModel dev;
        dev.components = {
            {"cpu", ComponentKind::CpuCluster, 12.0, 2.2, true, 8},
            {"gpu", ComponentKind::Gpu, 30.0, 1.3, false, 1},
        };
        dev.lut = std::move(lut_in);
        validate_mode_lut(dev.lut);
        dev.calibrate();
        return dev;
    }

    int component_count() const { return static_cast<int>(components.size()); }

    double component_frequency_ghz(int component, const OperatingMode& mode) const {
        return components[static_cast<std::size_t>(component)].kind == ComponentKind::CpuCluster
                   ? mode.cpu_freq_ghz
                   : mode.gpu_freq_ghz;
    }

    // Effective GFLOP/s of a component under a mode.
    double effective_throughput_gflops(int component, const OperatingMode& mode) const {
        const auto& c = components[static_cast<std::size_t>(component)];
        double thr = c.peak_gflops * component_frequency_ghz(component, mode) /
                     c.reference_frequency_ghz;
        if (c.per_core)
            thr *= static_cast<double>(std::min(mode.active_cores, c.max_cores)) / c.max_cores;
        return thr;
    }

    double mem_bandwidth_gbps_at(const OperatingMode& mode) const {
        return mem_bandwidth_gbps * mode.mem_freq_ghz / mem_reference_freq_ghz;
    }

    double static_power_w(const OperatingMode& mode) const {
        return static_power_fraction * mode.power_cap_w;
    }

    // Dynamic power of a fully utilized component; cubic in frequency,
    // linear in active cores for per-core components.
    double dynamic_power_w(int component, const OperatingMode& mode) const {
        const auto& c = components[static_cast<std::size_t>(component)];
        double f = component_frequency_ghz(component, mode);
        double p = dyn_coeff_[static_cast<std::size_t>(component)] * f * f * f;
        if (c.per_core)
            p *= static_cast<double>(std::min(mode.active_cores, c.max_cores)) / c.max_cores;
        return p;
    }

    // Pins the cubic coefficients so that a fully utilized device in mode 1
    // draws exactly its power cap. The dynamic budget is split between CPU
    // and GPU components by cpu_dynamic_share (within a group, by peak).
    void calibrate() {
        const OperatingMode& m1 = lut.front();
        double budget = (1.0 - static_power_fraction) * m1.power_cap_w;
        double cpu_peak = 0.0, gpu_peak = 0.0;
        for (const auto& c : components)
            (c.kind == ComponentKind::CpuCluster ? cpu_peak : gpu_peak) += c.peak_gflops;
        dyn_coeff_.assign(components.size(), 0.0);
        for (std::size_t i = 0; i < components.size(); ++i) {
            const auto& c = components[i];
            double group_share = c.kind == ComponentKind::CpuCluster ? cpu_dynamic_share
                                                                     : 1.0 - cpu_dynamic_share;
            double group_peak = c.kind == ComponentKind::CpuCluster ? cpu_peak : gpu_peak;
            double share = group_share * c.peak_gflops / group_peak;
            double f = component_frequency_ghz(static_cast<int>(i), m1);
            dyn_coeff_[i] = share * budget / (f * f * f);
        }
    }

private:
    std::vector<double> dyn_coeff_;
};

// ---------------------------------------------------------------------------
// Latency / power oracle
// ---------------------------------------------------------------------------

// Deterministic ground-truth evaluation of a (mapping, mode) pair.
//
//  - partition service time  = compute cost / effective throughput  [ms]
//  - a boundary crossing between different components adds
//    activation volume / memory bandwidth                            [ms]
//  - contention: partitions sharing a component are all slowed by the
//    component's offered-load factor max(1, U), with
//    U = sum(assigned cost * request rate) / throughput
//  - service latency = sum over its pipeline of slowed partition times
//    plus crossing transfers
//  - power = static floor + dynamic power * utilization per component
inline EvaluationResult oracle_evaluate(const Mapping& mapping, const OperatingMode& mode,
                                        const ActiveWorkload& workload,
                                        const DeviceModel& device) {
    const int n_components = device.component_count();
    validate_mapping(mapping, workload, n_components);

    thread_local std::vector<double> throughput, demand_mflops;
    throughput.assign(static_cast<std::size_t>(n_components), 0.0);
    demand_mflops.assign(static_cast<std::size_t>(n_components), 0.0);
    for (int c = 0; c < n_components; ++c)
        throughput[static_cast<std::size_t>(c)] = device.effective_throughput_gflops(c, mode);

    for (std::size_t s = 0; s < workload.size(); ++s)
        for (const auto& part : mapping.placements[s].partitions)
            demand_mflops[static_cast<std::size_t>(part.component)] +=
                workload[s].model->range_cost_mflops(part.begin, part.end);

    EvaluationResult result;
    result.utilization.resize(static_cast<std::size_t>(n_components));
    std::vector<double> slowdown(static_cast<std::size_t>(n_components));
    for (int c = 0; c < n_components; ++c) {
        // demand in MFLOP/s vs capacity in MFLOP/s
        double u = demand_mflops[static_cast<std::size_t>(c)] * device.request_rate_hz /
                   (throughput[static_cast<std::size_t>(c)] * 1000.0);
        slowdown[static_cast<std::size_t>(c)] = std::max(1.0, u);
        result.utilization[static_cast<std::size_t>(c)] = std::min(1.0, u);
    }

    const double bw = device.mem_bandwidth_gbps_at(mode);
    result.latency_ms.resize(workload.size());
    for (std::size_t s = 0; s < workload.size(); ++s) {
        const auto& model = *workload[s].model;
        const auto& parts = mapping.placements[s].partitions;
        double latency = 0.0;
        for (std::size_t p = 0; p < parts.size(); ++p) {
            const auto& part = parts[p];
            double t = model.range_cost_mflops(part.begin, part.end) /
                       throughput[static_cast<std::size_t>(part.component)];
            latency += t * slowdown[static_cast<std::size_t>(part.component)];
            if (p + 1 < parts.size() && parts[p + 1].component != part.component)
                latency += model.layers[static_cast<std::size_t>(part.end - 1)].activation_mb / bw;
        }
        result.latency_ms[s] = latency;
    }

    result.total_power_w = device.static_power_w(mode);
    for (int c = 0; c < n_components; ++c)
        result.total_power_w +=
            device.dynamic_power_w(c, mode) * result.utilization[static_cast<std::size_t>(c)];
    return result;
}

} // namespace ecomap
