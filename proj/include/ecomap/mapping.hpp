#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ecomap/random.hpp"
#include "ecomap/workload.hpp"

namespace ecomap {

struct SpaceTooLargeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A running service instance: identity plus the model variant currently
// deployed for it. The pointer target is owned by the catalog / runtime.
struct ActiveService {
    std::uint32_t service_id = 0;
    const DnnModel* model = nullptr;
};

using ActiveWorkload = std::vector<ActiveService>;

// Contiguous layer range [begin, end) pinned to one compute component.
struct Partition {
    int begin = 0;
    int end = 0;
    int component = 0;

    auto operator<=>(const Partition&) const = default;
};

struct ServicePlacement {
    std::uint32_t service_id = 0;
    std::vector<Partition> partitions;

    auto operator<=>(const ServicePlacement&) const = default;
};

// Assignment of every running service's layer partitions to components.
// Placements are kept in the same order as the ActiveWorkload they map.
struct Mapping {
    std::vector<ServicePlacement> placements;

    auto operator<=>(const Mapping&) const = default;
    bool empty() const { return placements.empty(); }
};

inline void validate_mapping(const Mapping& mapping, const ActiveWorkload& workload,
                             int component_count) {
    if (mapping.placements.size() != workload.size())
        throw ConfigError("mapping does not cover the workload");
    for (std::size_t i = 0; i < workload.size(); ++i) {
        const auto& placement = mapping.placements[i];
        if (placement.service_id != workload[i].service_id)
            throw ConfigError("mapping service order mismatch");
        const int layer_count = workload[i].model->layer_count();
        if (placement.partitions.empty())
            throw ConfigError("placement with no partitions");
        int cursor = 0;
        for (const auto& part : placement.partitions) {
            if (part.begin != cursor || part.end <= part.begin)
                throw ConfigError("partitions must cover layers contiguously");
            if (part.component < 0 || part.component >= component_count)
                throw ConfigError("partition references unknown component");
            cursor = part.end;
        }
        if (cursor != layer_count)
            throw ConfigError("partitions do not cover all layers");
    }
}

// ---------------------------------------------------------------------------
// Per-service configuration space
// ---------------------------------------------------------------------------

// All ways to split `layer_count` layers into at most `max_partitions`
// contiguous runs, each assigned to one of `component_count` components.
// Adjacent runs on the same component are distinct configurations.
inline std::vector<std::vector<Partition>> single_service_configs(int layer_count,
                                                                  int component_count,
                                                                  int max_partitions) {
    std::vector<std::vector<Partition>> configs;
    int parts_cap = std::min(max_partitions, layer_count);
    std::vector<int> cuts;

    auto emit_assignments = [&](const std::vector<int>& bounds) {
        // bounds: cut points, defines bounds.size()+1 partitions
        int k = static_cast<int>(bounds.size()) + 1;
        std::vector<int> assign(static_cast<std::size_t>(k), 0);
        while (true) {
            std::vector<Partition> parts;
            int begin = 0;
            for (int p = 0; p < k; ++p) {
                int end = p < k - 1 ? bounds[static_cast<std::size_t>(p)] : layer_count;
                parts.push_back({begin, end, assign[static_cast<std::size_t>(p)]});
                begin = end;
            }
            configs.push_back(std::move(parts));
            int i = k - 1;
            while (i >= 0 && assign[static_cast<std::size_t>(i)] == component_count - 1)
                assign[static_cast<std::size_t>(i--)] = 0;
            if (i < 0)
                break;
            ++assign[static_cast<std::size_t>(i)];
        }
    };

    // choose k-1 cut points out of layer_count-1 interior boundaries
    for (int k = 1; k <= parts_cap; ++k) {
        cuts.assign(static_cast<std::size_t>(k - 1), 0);
        for (int i = 0; i < k - 1; ++i)
            cuts[static_cast<std::size_t>(i)] = i + 1;
        if (k == 1) {
            emit_assignments({});
            continue;
        }
        while (true) {
            emit_assignments(cuts);
            int i = k - 2;
            while (i >= 0 && cuts[static_cast<std::size_t>(i)] == layer_count - (k - 1 - i))
                --i;
            if (i < 0)
                break;
            ++cuts[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k - 1; ++j)
                cuts[static_cast<std::size_t>(j)] = cuts[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return configs;
}

inline double single_service_config_count(int layer_count, int component_count,
                                          int max_partitions) {
    double total = 0.0;
    int parts_cap = std::min(max_partitions, layer_count);
    for (int k = 1; k <= parts_cap; ++k) {
        double ways = 1.0; // C(layer_count-1, k-1)
        for (int i = 0; i < k - 1; ++i)
            ways = ways * (layer_count - 1 - i) / (i + 1);
        total += ways * std::pow(static_cast<double>(component_count), k);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Joint mapping space
// ---------------------------------------------------------------------------

inline double mapping_space_size(const ActiveWorkload& workload, int component_count,
                                 int max_partitions) {
    double total = 1.0;
    for (const auto& svc : workload)
        total *= single_service_config_count(svc.model->layer_count(), component_count,
                                             max_partitions);
    return total;
}

// Enumerates every valid mapping exactly once (cartesian product of the
// per-service configuration lists). Refuses spaces larger than `cap`
// rather than silently exploding.
class MappingEnumerator {
public:
    MappingEnumerator(const ActiveWorkload& workload, int component_count, int max_partitions,
                      double cap = 1e6)
        : workload_(workload) {
        double size = mapping_space_size(workload, component_count, max_partitions);
        if (size > cap)
            throw SpaceTooLargeError("mapping space of " + std::to_string(size) +
                                     " exceeds enumeration cap of " + std::to_string(cap));
        for (const auto& svc : workload)
            per_service_.push_back(single_service_configs(svc.model->layer_count(),
                                                          component_count, max_partitions));
        index_.assign(per_service_.size(), 0);
    }

    std::size_t size() const {
        std::size_t n = 1;
        for (const auto& configs : per_service_)
            n *= configs.size();
        return n;
    }

    bool next(Mapping& out) {
        if (done_)
            return false;
        out.placements.clear();
        for (std::size_t s = 0; s < per_service_.size(); ++s)
            out.placements.push_back(
                {workload_[s].service_id, per_service_[s][index_[s]]});
        // advance mixed-radix counter
        std::size_t i = per_service_.size();
        while (i > 0) {
            --i;
            if (++index_[i] < per_service_[i].size())
                return true;
            index_[i] = 0;
        }
        done_ = true;
        return true;
    }

    std::vector<Mapping> all() {
        std::vector<Mapping> result;
        result.reserve(size());
        Mapping m;
        while (next(m))
            result.push_back(m);
        return result;
    }

private:
    ActiveWorkload workload_;
    std::vector<std::vector<std::vector<Partition>>> per_service_;
    std::vector<std::size_t> index_;
    bool done_ = false;
};

inline std::vector<Partition> random_service_config(int layer_count, int component_count,
                                                    int max_partitions, Rng& rng) {
    int k = uniform_int(rng, 1, std::min(max_partitions, layer_count));
    std::vector<int> cuts;
    while (static_cast<int>(cuts.size()) < k - 1) {
        int c = uniform_int(rng, 1, layer_count - 1);
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end())
            cuts.push_back(c);
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<Partition> parts;
    int begin = 0;
    for (int p = 0; p < k; ++p) {
        int end = p < k - 1 ? cuts[static_cast<std::size_t>(p)] : layer_count;
        parts.push_back({begin, end, uniform_int(rng, 0, component_count - 1)});
        begin = end;
    }
    return parts;
}

inline Mapping random_mapping(const ActiveWorkload& workload, int component_count,
                              int max_partitions, Rng& rng) {
    Mapping mapping;
    for (const auto& svc : workload)
        mapping.placements.push_back(
            {svc.service_id, random_service_config(svc.model->layer_count(), component_count,
                                                   max_partitions, rng)});
    return mapping;
}

} // namespace ecomap
