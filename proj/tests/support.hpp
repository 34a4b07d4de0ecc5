#pragma once

// Shared helpers for runtime-level tests: custom catalogs, independent
// power/emissions reconstruction from audit snapshots, and scenario
// shorthands.

#include <map>
#include <string>
#include <vector>

#include "ecomap/runtime.hpp"

namespace ecomap::testsupport {

// A catalog with controllable weight so violation scenarios can be
// constructed exactly. Each family gets `depth` levels at 0.7x cost steps.
inline ServiceCatalog heavy_catalog(std::vector<std::pair<std::string, double>> families,
                                    int depth = 3, int layers = 12) {
    ServiceCatalog catalog;
    for (const auto& [name, base_total] : families) {
        ModelGenParams params;
        params.base_total_mflops = base_total;
        std::vector<VariantSpec> variants;
        for (int lvl = 1; lvl <= depth; ++lvl)
            variants.push_back({name + "-l" + std::to_string(lvl), layers - 2 * (lvl - 1)});
        catalog.push_back({name, build_family(name, variants, params)});
    }
    return catalog;
}

inline WorkloadSchedule fixed_schedule(
    const ServiceCatalog& catalog,
    std::vector<std::tuple<std::uint32_t, std::string, double, double>> entries) {
    WorkloadSchedule schedule;
    for (const auto& [id, family, arrive, depart] : entries) {
        ServiceSpec spec;
        spec.service_id = id;
        spec.family_id = family;
        spec.service_name = family;
        spec.arrival_time_s = arrive;
        spec.departure_time_s = depart;
        schedule.services.push_back(spec);
    }
    return schedule;
}

// Constant-CI trace covering `days` plus the forecast day.
inline CiTrace flat_trace(double ci, int days) {
    CiTrace trace;
    for (double t = 0.0; t <= (days + 1) * 86400.0; t += 600.0)
        trace.samples.push_back({t, ci});
    return trace;
}

struct Reconstruction {
    double emissions_g = 0.0;
    double energy_kwh = 0.0;
    int unflagged_overcap_intervals = 0;
    int checked_intervals = 0;
};

// Recomputes every interval's power from the audit snapshots through the
// oracle, and the emissions integral from the trace. Independent of the
// runtime's own ledger path.
inline Reconstruction reconstruct(const RunDebug& debug, const RunInputs& inputs,
                                  const WorkloadSchedule& schedule) {
    std::map<std::uint32_t, const ModelFamily*> families;
    for (const auto& spec : schedule.services)
        families[spec.service_id] = &find_family(inputs.catalog, spec.family_id);

    Reconstruction rec;
    std::size_t snap_i = 0;
    for (const auto& iv : debug.intervals) {
        while (snap_i + 1 < debug.snapshots.size() &&
               debug.snapshots[snap_i + 1].t <= iv.t0 + 1e-9)
            ++snap_i;
        const auto& snap = debug.snapshots[snap_i];
        ActiveWorkload workload;
        for (const auto& [id, level] : snap.levels)
            workload.push_back({id, &families.at(id)->level(level)});
        const OperatingMode& mode = find_mode(inputs.device.lut, snap.mode_id);
        EvaluationResult ev = oracle_evaluate(snap.mapping, mode, workload, inputs.device);

        double ci = inputs.trace.at(iv.t0);
        double dt = iv.t1 - iv.t0;
        rec.energy_kwh += ev.total_power_w * dt / 3.6e6;
        rec.emissions_g += ev.total_power_w * dt / 3.6e6 * ci;
        ++rec.checked_intervals;
        if (ev.total_power_w > mode.power_cap_w + 1e-6 && !iv.power_breach)
            ++rec.unflagged_overcap_intervals;
    }
    return rec;
}

} // namespace ecomap::testsupport
