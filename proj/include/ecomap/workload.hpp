#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecomap/random.hpp"

namespace ecomap {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One DNN layer: compute demand plus the activation volume that crosses a
// partition boundary placed right after this layer.
struct LayerProfile {
    int layer_id = 0;
    double compute_cost_mflops = 0.0;
    double activation_mb = 0.0;
};

struct DnnModel {
    std::string name;
    std::vector<LayerProfile> layers;
    double accuracy_pct = 0.0;
    int quality_level = 1; // 1 = default / highest quality

    // cost_prefix[i] = sum of compute cost of layers [0, i); sized layers+1.
    std::vector<double> cost_prefix;

    void finalize() {
        cost_prefix.assign(layers.size() + 1, 0.0);
        for (std::size_t i = 0; i < layers.size(); ++i)
            cost_prefix[i + 1] = cost_prefix[i] + layers[i].compute_cost_mflops;
    }

    int layer_count() const { return static_cast<int>(layers.size()); }
    double total_cost_mflops() const { return cost_prefix.empty() ? 0.0 : cost_prefix.back(); }
    double range_cost_mflops(int begin, int end) const {
        return cost_prefix[end] - cost_prefix[begin];
    }
};

struct ModelFamily {
    std::string family_id;
    std::vector<DnnModel> variants; // ascending quality_level, 1..m

    const DnnModel& level(int quality_level) const {
        if (quality_level < 1 || quality_level > static_cast<int>(variants.size()))
            throw ConfigError("quality level out of range for family " + family_id);
        return variants[static_cast<std::size_t>(quality_level - 1)];
    }
    int depth() const { return static_cast<int>(variants.size()); }

    void validate() const {
        if (variants.empty())
            throw ConfigError("family " + family_id + " has no variants");
        for (std::size_t i = 0; i < variants.size(); ++i) {
            if (variants[i].quality_level != static_cast<int>(i) + 1)
                throw ConfigError("family " + family_id + " has a quality level gap");
            if (variants[i].layers.empty())
                throw ConfigError("family " + family_id + " has an empty model");
            if (i > 0) {
                if (variants[i].total_cost_mflops() >= variants[i - 1].total_cost_mflops())
                    throw ConfigError("family " + family_id +
                                      ": compute cost must strictly decrease per level");
                if (variants[i].accuracy_pct > variants[i - 1].accuracy_pct)
                    throw ConfigError("family " + family_id +
                                      ": accuracy must not increase per level");
            }
        }
    }
};

struct ServiceSpec {
    std::uint32_t service_id = 0;
    std::string service_name;   // catalog entry this service was drawn from
    std::string family_id;
    double latency_threshold_ms = 2000.0; // L_max
    double accuracy_tolerance_pp = 4.5;   // epsilon, max acceptable accuracy drop
    double arrival_time_s = 0.0;
    double departure_time_s = 0.0;
};

struct WorkloadSchedule {
    std::vector<ServiceSpec> services;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Synthetic model generation
// ---------------------------------------------------------------------------

struct ModelGenParams {
    double layer_cost_lo_mflops = 10.0;
    double layer_cost_hi_mflops = 500.0;
    double activation_lo_mb = 0.1;
    double activation_hi_mb = 8.0;
    double level_cost_factor = 0.7;     // total cost ratio between adjacent levels
    double accuracy_drop_pp = 1.5;      // accuracy lost per level step
    double base_accuracy_pct = 80.0;    // level-1 accuracy
    double base_total_mflops = 0.0;     // 0 = derive from family_id hash
};

// Deterministic per-family level-1 total compute, in [2000, 8000] MFLOPs.
inline double family_base_total_mflops(const std::string& family_id) {
    std::uint64_t h = splitmix64(fnv1a(family_id));
    double u = static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
    return 2000.0 + u * 6000.0;
}

// Builds one quality level of a family. Per-layer costs are drawn
// log-uniform and rescaled so the level's total compute is exactly
// base_total * factor^(level-1); that keeps the inter-level cost ratio
// exact regardless of layer counts.
inline DnnModel generate_synthetic_model(const std::string& family_id, int quality_level,
                                         int layer_count, Rng& rng,
                                         const ModelGenParams& params = {}) {
    if (layer_count < 1)
        throw ConfigError("layer_count must be >= 1");
    if (quality_level < 1)
        throw ConfigError("quality_level must be >= 1");

    double base = params.base_total_mflops > 0.0 ? params.base_total_mflops
                                                 : family_base_total_mflops(family_id);
    double target_total = base * std::pow(params.level_cost_factor, quality_level - 1);

    DnnModel model;
    model.name = family_id + "-l" + std::to_string(quality_level);
    model.quality_level = quality_level;
    model.accuracy_pct = params.base_accuracy_pct - params.accuracy_drop_pp * (quality_level - 1);

    model.layers.resize(static_cast<std::size_t>(layer_count));
    double drawn_total = 0.0;
    for (int i = 0; i < layer_count; ++i) {
        auto& layer = model.layers[static_cast<std::size_t>(i)];
        layer.layer_id = i;
        layer.compute_cost_mflops =
            log_uniform(rng, params.layer_cost_lo_mflops, params.layer_cost_hi_mflops);
        layer.activation_mb = log_uniform(rng, params.activation_lo_mb, params.activation_hi_mb);
        drawn_total += layer.compute_cost_mflops;
    }
    double scale = target_total / drawn_total;
    for (auto& layer : model.layers)
        layer.compute_cost_mflops *= scale;

    model.finalize();
    return model;
}

// ---------------------------------------------------------------------------
// Service catalog
// ---------------------------------------------------------------------------

struct CatalogEntry {
    std::string service_name;
    ModelFamily family;
};

using ServiceCatalog = std::vector<CatalogEntry>;

struct VariantSpec {
    std::string name;
    int layer_count = 0;
};

inline ModelFamily build_family(const std::string& family_id,
                                const std::vector<VariantSpec>& variants,
                                const ModelGenParams& params = {}) {
    ModelFamily family;
    family.family_id = family_id;
    Rng rng(derive_seed(0xec0'0c47ULL, fnv1a(family_id)));
    for (std::size_t i = 0; i < variants.size(); ++i) {
        DnnModel model = generate_synthetic_model(family_id, static_cast<int>(i) + 1,
                                                  variants[i].layer_count, rng, params);
        model.name = variants[i].name;
        family.variants.push_back(std::move(model));
    }
    family.validate();
    return family;
}

// The six supported services with their three quality levels. Layer counts
// scale with the relative depth of the named architectures; base totals
// separate heavy (VGG/ResNet) from light (MNASNet) families.
inline ModelFamily family_from_table2(const std::string& service_name) {
    ModelGenParams p;
    auto make = [&](const char* id, double base_total,
                    std::initializer_list<VariantSpec> variants) {
        p.base_total_mflops = base_total;
        return build_family(id, variants, p);
    };
    if (service_name == "Object Detection")
        return make("mnasnet", 2500.0,
                    {{"MNASNet1_3", 18}, {"MNASNet1_0", 16}, {"MNASNet0_75", 14}});
    if (service_name == "Object Classification")
        return make("efficientnet", 4200.0,
                    {{"EfficientNet_v2_s", 28}, {"EfficientNet_b1", 24}, {"EfficientNet_b3", 22}});
    if (service_name == "Object Tracking")
        return make("resnet-track", 8000.0,
                    {{"ResNet152", 50}, {"ResNet101", 34}, {"ResNet50", 17}});
    if (service_name == "Depth Estimation")
        return make("resnet-depth", 8000.0,
                    {{"ResNet152", 50}, {"ResNet101", 34}, {"ResNet50", 17}});
    if (service_name == "Abnormal Behavior Detection")
        return make("vgg", 9000.0, {{"VGG19", 19}, {"VGG16", 16}, {"VGG13", 13}});
    if (service_name == "Facial Expression Recognition")
        return make("densenet", 6000.0,
                    {{"DenseNet169", 42}, {"DenseNet161", 40}, {"DenseNet121", 30}});
    throw ConfigError("unknown service: " + service_name);
}

inline ServiceCatalog default_catalog() {
    ServiceCatalog catalog;
    for (const char* name :
         {"Object Detection", "Object Classification", "Object Tracking", "Depth Estimation",
          "Abnormal Behavior Detection", "Facial Expression Recognition"})
        catalog.push_back({name, family_from_table2(name)});
    return catalog;
}

// Catalog file schema (JSON), see README:
//   {"services": [{"service": ..., "family_id": ..., "base_total_mflops": ...,
//                  "base_accuracy_pct": ..., "accuracy_drop_pp": ...,
//                  "level_cost_factor": ...,
//                  "variants": [{"name": ..., "layers": ...}, ...]}]}
inline ServiceCatalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open catalog file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("catalog parse error in " + path + ": " + e.what());
    }
    if (!doc.contains("services") || !doc["services"].is_array())
        throw ConfigError("catalog file missing 'services' array: " + path);
    ServiceCatalog catalog;
    for (const auto& svc : doc["services"]) {
        ModelGenParams p;
        p.base_total_mflops = svc.value("base_total_mflops", 0.0);
        p.base_accuracy_pct = svc.value("base_accuracy_pct", p.base_accuracy_pct);
        p.accuracy_drop_pp = svc.value("accuracy_drop_pp", p.accuracy_drop_pp);
        p.level_cost_factor = svc.value("level_cost_factor", p.level_cost_factor);
        std::vector<VariantSpec> variants;
        for (const auto& v : svc.at("variants"))
            variants.push_back({v.at("name").get<std::string>(), v.at("layers").get<int>()});
        if (variants.empty())
            throw ConfigError("catalog service with no variants: " + path);
        catalog.push_back({svc.at("service").get<std::string>(),
                           build_family(svc.at("family_id").get<std::string>(), variants, p)});
    }
    if (catalog.empty())
        throw ConfigError("catalog file has no services: " + path);
    return catalog;
}

inline void save_catalog_template(const ServiceCatalog& catalog, const std::string& path) {
    nlohmann::json doc;
    for (const auto& entry : catalog) {
        nlohmann::json svc;
        svc["service"] = entry.service_name;
        svc["family_id"] = entry.family.family_id;
        svc["base_total_mflops"] = entry.family.variants.front().total_cost_mflops();
        for (const auto& v : entry.family.variants)
            svc["variants"].push_back({{"name", v.name}, {"layers", v.layer_count()}});
        doc["services"].push_back(svc);
    }
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Workload sampling
// ---------------------------------------------------------------------------

// Draws a static set of services (all present for the whole horizon), used
// for estimator dataset generation. Service count uniform in
// [min_count, max_count]; catalog entry and quality level uniform.
inline WorkloadSchedule sample_workload(const ServiceCatalog& catalog, int min_count,
                                        int max_count, Rng& rng, std::uint64_t seed = 0,
                                        double horizon_s = 86400.0) {
    if (catalog.empty())
        throw ConfigError("sample_workload: empty catalog");
    if (min_count > max_count || min_count < 0)
        throw ConfigError("sample_workload: bad count range");

    WorkloadSchedule schedule;
    schedule.seed = seed;
    int count = uniform_int(rng, min_count, max_count);
    for (int i = 0; i < count; ++i) {
        const auto& entry =
            catalog[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(catalog.size()) - 1))];
        ServiceSpec spec;
        spec.service_id = static_cast<std::uint32_t>(i);
        spec.service_name = entry.service_name;
        spec.family_id = entry.family.family_id;
        spec.arrival_time_s = 0.0;
        spec.departure_time_s = horizon_s;
        schedule.services.push_back(spec);
    }
    return schedule;
}

struct ScheduleParams {
    double duration_s = 5 * 86400.0;
    int max_concurrent = 15;
    double mean_interarrival_s = 300.0;
    double mean_duration_s = 3600.0;
    double min_duration_s = 600.0;
};

// Timed arrival/departure schedule for scenario runs. Arrivals are a
// seeded Poisson-ish process; an arrival that would exceed the concurrency
// cap is deferred until a running service departs.
inline WorkloadSchedule schedule_workload(const ServiceCatalog& catalog,
                                          const ScheduleParams& params, std::uint64_t seed) {
    if (catalog.empty())
        throw ConfigError("schedule_workload: empty catalog");
    Rng rng(derive_seed(seed, 0x5c4edULL));
    std::exponential_distribution<double> interarrival(1.0 / params.mean_interarrival_s);
    std::exponential_distribution<double> duration(1.0 / params.mean_duration_s);

    WorkloadSchedule schedule;
    schedule.seed = seed;
    std::vector<double> active_departures;
    double t = 0.0;
    std::uint32_t next_id = 1;
    while (true) {
        t += interarrival(rng);
        if (t >= params.duration_s)
            break;
        std::erase_if(active_departures, [&](double d) { return d <= t; });
        if (static_cast<int>(active_departures.size()) >= params.max_concurrent) {
            // Defer to just after the earliest departure.
            double earliest = *std::min_element(active_departures.begin(), active_departures.end());
            t = std::max(t, earliest + 1.0);
            if (t >= params.duration_s)
                break;
            std::erase_if(active_departures, [&](double d) { return d <= t; });
        }
        const auto& entry =
            catalog[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(catalog.size()) - 1))];
        ServiceSpec spec;
        spec.service_id = next_id++;
        spec.service_name = entry.service_name;
        spec.family_id = entry.family.family_id;
        spec.arrival_time_s = t;
        spec.departure_time_s =
            std::min(params.duration_s, t + std::max(params.min_duration_s, duration(rng)));
        if (spec.departure_time_s <= spec.arrival_time_s)
            continue;
        active_departures.push_back(spec.departure_time_s);
        schedule.services.push_back(spec);
    }
    return schedule;
}

inline const ModelFamily& find_family(const ServiceCatalog& catalog, const std::string& family_id) {
    for (const auto& entry : catalog)
        if (entry.family.family_id == family_id)
            return entry.family;
    throw ConfigError("unknown family: " + family_id);
}

} // namespace ecomap
