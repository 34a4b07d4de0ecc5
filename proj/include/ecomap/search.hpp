#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ecomap/device.hpp"
#include "ecomap/estimator.hpp"
#include "ecomap/mapping.hpp"
#include "ecomap/random.hpp"

namespace ecomap {

inline constexpr double kInfeasible = -std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Value function
// ---------------------------------------------------------------------------

struct ValueWeights {
    double w_latency = 1.0;
    double w_power = 0.25;
    int power_threshold_class = std::numeric_limits<int>::max();
};

// Scores a class prediction so that larger is better: low latency classes
// and low power classes win. Candidates whose predicted power class
// exceeds the threshold class are removed from consideration entirely.
inline double value(const ClassPrediction& pred, const ValueWeights& weights, int n_classes) {
    if (pred.power_class > weights.power_threshold_class)
        return kInfeasible;
    return weights.w_latency * static_cast<double>(n_classes - 1 - pred.latency_class) -
           weights.w_power * static_cast<double>(pred.power_class);
}

// Evaluator abstraction: maps a candidate mapping to an oriented value,
// kInfeasible meaning the power filter rejected it.
using Evaluator = std::function<double(const Mapping&)>;

// ---------------------------------------------------------------------------
// Mapping features for region learning
// ---------------------------------------------------------------------------

// Label-free descriptor used for clustering and decision boundaries:
// per-component assigned-compute fractions plus a partition count per
// service.
inline std::vector<double> mapping_region_features(const Mapping& mapping,
                                                   const ActiveWorkload& workload,
                                                   int component_count, int max_partitions) {
    std::vector<double> x(static_cast<std::size_t>(component_count), 0.0);
    double total = 0.0;
    for (std::size_t s = 0; s < workload.size(); ++s) {
        const auto& model = *workload[s].model;
        for (const auto& part : mapping.placements[s].partitions) {
            double cost = model.range_cost_mflops(part.begin, part.end);
            x[static_cast<std::size_t>(part.component)] += cost;
            total += cost;
        }
    }
    if (total > 0)
        for (auto& v : x)
            v /= total;
    for (const auto& placement : mapping.placements)
        x.push_back(static_cast<double>(placement.partitions.size()) /
                    static_cast<double>(std::max(1, max_partitions)));
    return x;
}

// ---------------------------------------------------------------------------
// k-means bipartition
// ---------------------------------------------------------------------------

struct Bipartition {
    std::vector<std::size_t> good; // cluster with the higher mean value
    std::vector<std::size_t> bad;
};

// k = 2 clustering over (features, value); k-means++ init from the seeded
// rng, at most 50 Lloyd iterations. Refuses degenerate inputs.
inline std::optional<Bipartition> kmeans_bipartition(
    const std::vector<std::vector<double>>& features, const std::vector<double>& values,
    Rng& rng) {
    const std::size_t n = features.size();
    if (n < 2)
        return std::nullopt;
    const std::size_t f = features.front().size();

    // standardize features and value jointly
    std::vector<std::vector<double>> pts(n, std::vector<double>(f + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < f; ++j)
            pts[i][j] = features[i][j];
        pts[i][f] = values[i];
    }
    for (std::size_t j = 0; j <= f; ++j) {
        double mean = 0, var = 0;
        for (const auto& p : pts)
            mean += p[j];
        mean /= static_cast<double>(n);
        for (const auto& p : pts)
            var += (p[j] - mean) * (p[j] - mean);
        double sd = std::sqrt(var / static_cast<double>(n));
        if (sd < 1e-12)
            sd = 1.0;
        for (auto& p : pts)
            p[j] = (p[j] - mean) / sd;
    }

    auto dist2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double d = 0;
        for (std::size_t j = 0; j <= f; ++j)
            d += (a[j] - b[j]) * (a[j] - b[j]);
        return d;
    };

    // k-means++ seeding
    std::size_t c0 = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1));
    std::vector<double> d2(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += (d2[i] = dist2(pts[i], pts[c0]));
    if (total <= 0)
        return std::nullopt; // all points identical
    double pick = uniform_real(rng, 0.0, total);
    std::size_t c1 = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        pick -= d2[i];
        if (pick <= 0) {
            c1 = i;
            break;
        }
    }
    std::vector<std::vector<double>> centers = {pts[c0], pts[c1]};

    std::vector<int> assign(n, 0);
    for (int it = 0; it < 50; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int a = dist2(pts[i], centers[0]) <= dist2(pts[i], centers[1]) ? 0 : 1;
            if (a != assign[i]) {
                assign[i] = a;
                changed = true;
            }
        }
        std::vector<std::vector<double>> sums(2, std::vector<double>(f + 1, 0.0));
        std::size_t counts[2] = {0, 0};
        for (std::size_t i = 0; i < n; ++i) {
            ++counts[assign[i]];
            for (std::size_t j = 0; j <= f; ++j)
                sums[static_cast<std::size_t>(assign[i])][j] += pts[i][j];
        }
        if (counts[0] == 0 || counts[1] == 0)
            return std::nullopt;
        for (int c = 0; c < 2; ++c)
            for (std::size_t j = 0; j <= f; ++j)
                centers[static_cast<std::size_t>(c)][j] =
                    sums[static_cast<std::size_t>(c)][j] / static_cast<double>(counts[c]);
        if (!changed)
            break;
    }

    double mean_value[2] = {0, 0};
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        mean_value[assign[i]] += values[i];
        ++counts[assign[i]];
    }
    if (counts[0] == 0 || counts[1] == 0)
        return std::nullopt;
    mean_value[0] /= static_cast<double>(counts[0]);
    mean_value[1] /= static_cast<double>(counts[1]);

    Bipartition split;
    int good_cluster = mean_value[0] >= mean_value[1] ? 0 : 1;
    for (std::size_t i = 0; i < n; ++i)
        (assign[i] == good_cluster ? split.good : split.bad).push_back(i);
    return split;
}

// ---------------------------------------------------------------------------
// Linear maximum-margin boundary
// ---------------------------------------------------------------------------

// Soft-margin linear separator fit by deterministic subgradient descent on
// the hinge loss, polished with perceptron passes so separable sets are
// classified exactly.
struct LinearBoundary {
    std::vector<double> w;
    double b = 0.0;
    std::vector<double> mean, stdev;

    double score(const std::vector<double>& x) const {
        double s = b;
        for (std::size_t j = 0; j < w.size(); ++j)
            s += w[j] * (x[j] - mean[j]) / stdev[j];
        return s;
    }
    // true = the "good" side
    bool classify(const std::vector<double>& x) const { return score(x) >= 0.0; }
};

inline LinearBoundary fit_boundary(const std::vector<std::vector<double>>& good,
                                   const std::vector<std::vector<double>>& bad) {
    if (good.empty() || bad.empty())
        throw ConfigError("fit_boundary: both classes must be non-empty");
    const std::size_t f = good.front().size();
    const std::size_t n = good.size() + bad.size();

    LinearBoundary boundary;
    boundary.mean.assign(f, 0.0);
    boundary.stdev.assign(f, 1.0);
    std::vector<std::pair<std::vector<double>, double>> data; // standardized x, label
    for (const auto& x : good)
        data.push_back({x, +1.0});
    for (const auto& x : bad)
        data.push_back({x, -1.0});
    for (std::size_t j = 0; j < f; ++j) {
        double m = 0;
        for (const auto& [x, y] : data)
            m += x[j];
        m /= static_cast<double>(n);
        double v = 0;
        for (const auto& [x, y] : data)
            v += (x[j] - m) * (x[j] - m);
        double sd = std::sqrt(v / static_cast<double>(n));
        boundary.mean[j] = m;
        boundary.stdev[j] = sd < 1e-12 ? 1.0 : sd;
    }
    for (auto& [x, y] : data)
        for (std::size_t j = 0; j < f; ++j)
            x[j] = (x[j] - boundary.mean[j]) / boundary.stdev[j];

    std::vector<double> w(f, 0.0);
    double b = 0.0;
    const double lambda = 1e-3;
    for (int it = 1; it <= 600; ++it) {
        std::vector<double> grad(f, 0.0);
        double grad_b = 0.0;
        for (const auto& [x, y] : data) {
            double s = b;
            for (std::size_t j = 0; j < f; ++j)
                s += w[j] * x[j];
            if (y * s < 1.0) {
                for (std::size_t j = 0; j < f; ++j)
                    grad[j] -= y * x[j];
                grad_b -= y;
            }
        }
        double step = 1.0 / (lambda * it);
        step = std::min(step, 2.0);
        for (std::size_t j = 0; j < f; ++j)
            w[j] -= step * (grad[j] / static_cast<double>(n) + lambda * w[j]);
        b -= step * grad_b / static_cast<double>(n);
    }
    // perceptron polish: separable sets end up classified exactly
    for (int pass = 0; pass < 200; ++pass) {
        bool clean = true;
        for (const auto& [x, y] : data) {
            double s = b;
            for (std::size_t j = 0; j < f; ++j)
                s += w[j] * x[j];
            if ((s >= 0 ? 1.0 : -1.0) != y) {
                clean = false;
                for (std::size_t j = 0; j < f; ++j)
                    w[j] += 0.1 * y * x[j];
                b += 0.1 * y;
            }
        }
        if (clean)
            break;
    }
    // orient at least as well as chance
    std::size_t hits = 0;
    for (const auto& [x, y] : data) {
        double s = b;
        for (std::size_t j = 0; j < f; ++j)
            s += w[j] * x[j];
        if ((s >= 0 ? 1.0 : -1.0) == y)
            ++hits;
    }
    if (hits * 2 < n) {
        for (auto& v : w)
            v = -v;
        b = -b;
        std::size_t flipped = 0;
        for (const auto& [x, y] : data) {
            double s = b;
            for (std::size_t j = 0; j < f; ++j)
                s += w[j] * x[j];
            if ((s >= 0 ? 1.0 : -1.0) == y)
                ++flipped;
        }
        if (flipped * 2 < n) {
            // boundary ties defeat the flip; fall back to the majority class
            std::fill(w.begin(), w.end(), 0.0);
            b = good.size() >= bad.size() ? 1.0 : -1.0;
        }
    }
    boundary.w = std::move(w);
    boundary.b = b;
    return boundary;
}

// ---------------------------------------------------------------------------
// Search space
// ---------------------------------------------------------------------------

struct SearchBudget {
    int max_evaluations = 256;
    int leaf_split_threshold = 20;
    double exploration_c = std::numbers::sqrt2;
    int rejection_retry_cap = 200;
};

// A candidate source for the tree search. When the joint space is small it
// is enumerated up front (a deterministically shuffled list), which lets a
// full-budget search cover it exactly; otherwise candidates are drawn by
// rejection sampling.
class MappingSpace {
public:
    const ActiveWorkload* workload = nullptr;
    int component_count = 2;
    int max_partitions = 3;
    double enumeration_cap = 4096.0;

    MappingSpace(const ActiveWorkload& wl, int components, int max_parts,
                 double enum_cap = 4096.0)
        : workload(&wl), component_count(components), max_partitions(max_parts),
          enumeration_cap(enum_cap) {
        if (mapping_space_size(wl, components, max_parts) <= enumeration_cap) {
            MappingEnumerator it(wl, components, max_parts, enumeration_cap);
            enumerated_ = it.all();
        }
    }

    bool enumerable() const { return !enumerated_.empty() || workload->empty(); }
    const std::vector<Mapping>& enumerated() const { return enumerated_; }

    Mapping sample(Rng& rng) const {
        return random_mapping(*workload, component_count, max_partitions, rng);
    }

    std::vector<double> region_features(const Mapping& m) const {
        return mapping_region_features(m, *workload, component_count, max_partitions);
    }

private:
    std::vector<Mapping> enumerated_;
};

struct SearchResult {
    std::optional<Mapping> best;     // empty = no feasible mapping found
    double best_value = kInfeasible;
    int evaluations = 0;
    std::vector<std::pair<int, double>> trace; // (evaluation index, best value so far)
    // all feasible candidates, best first (value desc, then mapping order)
    std::vector<std::pair<double, Mapping>> ranked;
};

namespace detail {

struct SearchNode {
    std::vector<std::size_t> samples; // indices into the global sample store
    int visits = 0;
    double value_sum = 0.0;
    std::unique_ptr<LinearBoundary> boundary; // set on internal nodes
    std::unique_ptr<SearchNode> good_child, bad_child;

    bool leaf() const { return !good_child; }
};

} // namespace detail

// Latent-action tree search: descends by UCB over learned regions, samples
// candidates inside the selected region, and splits leaves into good/bad
// halves via k-means + a linear boundary once they hold enough samples.
inline SearchResult lamcts_search(const MappingSpace& space, const Evaluator& evaluate,
                                  const SearchBudget& budget, Rng& rng) {
    if (budget.max_evaluations < 1)
        throw ConfigError("lamcts_search: budget must allow at least one evaluation");

    SearchResult result;
    if (space.workload->empty()) {
        // only the empty mapping exists
        Mapping empty;
        double v = evaluate(empty);
        result.evaluations = 1;
        result.trace.push_back({1, v});
        if (v != kInfeasible) {
            result.best = empty;
            result.best_value = v;
            result.ranked.push_back({v, empty});
        }
        return result;
    }

    std::vector<Mapping> enumerated = space.enumerated() /* copy for shuffling */;
    const bool use_enumeration = space.enumerable();
    if (use_enumeration)
        std::shuffle(enumerated.begin(), enumerated.end(), rng);

    std::vector<std::vector<double>> sample_features;
    std::vector<double> sample_values;
    std::set<Mapping> seen;

    detail::SearchNode root;
    double feasible_min = 0.0;
    bool any_feasible = false;

    auto stat_value = [&](double v) {
        // infeasible samples enter node statistics as a value strictly
        // below every feasible one
        if (v != kInfeasible)
            return v;
        return any_feasible ? feasible_min - 1.0 : -1.0;
    };

    auto node_mean = [&](const detail::SearchNode& node) {
        double sum = 0.0;
        for (std::size_t idx : node.samples)
            sum += stat_value(sample_values[idx]);
        return node.samples.empty() ? 0.0 : sum / static_cast<double>(node.samples.size());
    };

    std::size_t enum_cursor = 0;
    int evals = 0;
    while (evals < budget.max_evaluations) {
        // descend by UCB
        std::vector<detail::SearchNode*> path = {&root};
        detail::SearchNode* node = &root;
        while (!node->leaf()) {
            detail::SearchNode* g = node->good_child.get();
            detail::SearchNode* b = node->bad_child.get();
            auto ucb = [&](detail::SearchNode* child) {
                if (child->samples.empty())
                    return std::numeric_limits<double>::max();
                double mean = node_mean(*child);
                double explore = budget.exploration_c *
                                 std::sqrt(std::log(static_cast<double>(node->samples.size())) /
                                           static_cast<double>(child->samples.size()));
                return mean + explore;
            };
            node = ucb(g) >= ucb(b) ? g : b;
            path.push_back(node);
        }

        // draw a candidate inside this leaf's region
        std::optional<Mapping> candidate;
        if (use_enumeration) {
            // constraints along the path: boundary of each internal node,
            // oriented toward the chosen child
            auto inside = [&](const Mapping& m) {
                const auto feat = space.region_features(m);
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    bool want_good = path[i]->good_child.get() == path[i + 1];
                    if (path[i]->boundary->classify(feat) != want_good)
                        return false;
                }
                return true;
            };
            for (std::size_t scan = 0; scan < enumerated.size(); ++scan) {
                const Mapping& m = enumerated[(enum_cursor + scan) % enumerated.size()];
                if (seen.contains(m))
                    continue;
                if (inside(m)) {
                    candidate = m;
                    enum_cursor = (enum_cursor + scan + 1) % enumerated.size();
                    break;
                }
            }
            if (!candidate) {
                // region exhausted: relax to any unseen mapping
                for (const Mapping& m : enumerated)
                    if (!seen.contains(m)) {
                        candidate = m;
                        break;
                    }
            }
            if (!candidate)
                break; // whole space evaluated
        } else {
            // rejection sampling against the path constraints, relaxing one
            // level up the tree when the retry cap is hit
            std::size_t active_depth = path.size() - 1;
            while (!candidate) {
                for (int attempt = 0; attempt < budget.rejection_retry_cap; ++attempt) {
                    Mapping m = space.sample(rng);
                    if (seen.contains(m))
                        continue;
                    const auto feat = space.region_features(m);
                    bool ok = true;
                    for (std::size_t i = 0; i < active_depth; ++i) {
                        bool want_good = path[i]->good_child.get() == path[i + 1];
                        if (path[i]->boundary->classify(feat) != want_good) {
                            ok = false;
                            break;
                        }
                    }
                    if (ok) {
                        candidate = std::move(m);
                        break;
                    }
                }
                if (candidate)
                    break;
                if (active_depth == 0)
                    break;
                --active_depth;
            }
            if (!candidate)
                break; // space saturated
        }

        // evaluate and record along the path
        seen.insert(*candidate);
        double v = evaluate(*candidate);
        ++evals;
        if (v != kInfeasible) {
            feasible_min = any_feasible ? std::min(feasible_min, v) : v;
            any_feasible = true;
            result.ranked.push_back({v, *candidate});
            if (!result.best || v > result.best_value ||
                (v == result.best_value && *candidate < *result.best)) {
                result.best = *candidate;
                result.best_value = v;
            }
        }
        result.trace.push_back({evals, result.best ? result.best_value : kInfeasible});

        std::size_t idx = sample_values.size();
        sample_features.push_back(space.region_features(*candidate));
        sample_values.push_back(v);
        for (auto* n : path) {
            n->samples.push_back(idx);
            ++n->visits;
            n->value_sum += stat_value(v);
        }

        // split the leaf once it holds enough samples
        detail::SearchNode* leaf = path.back();
        if (static_cast<int>(leaf->samples.size()) >= budget.leaf_split_threshold) {
            std::vector<std::vector<double>> feats;
            std::vector<double> vals;
            for (std::size_t i : leaf->samples) {
                feats.push_back(sample_features[i]);
                vals.push_back(stat_value(sample_values[i]));
            }
            auto split = kmeans_bipartition(feats, vals, rng);
            if (split) {
                std::vector<std::vector<double>> good_feats, bad_feats;
                for (std::size_t i : split->good)
                    good_feats.push_back(feats[i]);
                for (std::size_t i : split->bad)
                    bad_feats.push_back(feats[i]);
                auto boundary = std::make_unique<LinearBoundary>(fit_boundary(good_feats, bad_feats));
                auto good_child = std::make_unique<detail::SearchNode>();
                auto bad_child = std::make_unique<detail::SearchNode>();
                // children partition the parent's samples by the boundary test
                for (std::size_t i : leaf->samples) {
                    auto* child = boundary->classify(sample_features[i]) ? good_child.get()
                                                                         : bad_child.get();
                    child->samples.push_back(i);
                    ++child->visits;
                    child->value_sum += stat_value(sample_values[i]);
                }
                if (!good_child->samples.empty() && !bad_child->samples.empty()) {
                    leaf->boundary = std::move(boundary);
                    leaf->good_child = std::move(good_child);
                    leaf->bad_child = std::move(bad_child);
                }
            }
        }
    }

    result.evaluations = evals;
    std::stable_sort(result.ranked.begin(), result.ranked.end(),
                     [](const auto& a, const auto& b) {
                         return a.first > b.first ||
                                (a.first == b.first && a.second < b.second);
                     });
    return result;
}

// ---------------------------------------------------------------------------
// Tailored (single-service) search with learned pruning
// ---------------------------------------------------------------------------

// Canonical key of a per-service split configuration.
inline std::vector<int> config_key(const std::vector<Partition>& parts) {
    std::vector<int> key;
    key.push_back(static_cast<int>(parts.size()));
    for (const auto& p : parts)
        key.push_back(p.end);
    for (const auto& p : parts)
        key.push_back(p.component);
    return key;
}

struct ConfigObservation {
    std::vector<int> key;
    double latency_ms = 0.0;
};

// Split configurations observed at more than 1.3x the best observed
// latency are excluded from the tailored search space.
struct PruneMask {
    std::set<std::vector<int>> excluded;

    bool is_excluded(const std::vector<Partition>& parts) const {
        return excluded.contains(config_key(parts));
    }
    bool empty() const { return excluded.empty(); }
};

inline PruneMask build_pruned_space(const std::vector<ConfigObservation>& observations,
                                    double excess_threshold = 0.30) {
    PruneMask mask;
    if (observations.empty())
        return mask;
    std::map<std::vector<int>, double> best_per_config;
    double best = std::numeric_limits<double>::max();
    for (const auto& obs : observations) {
        auto [it, inserted] = best_per_config.try_emplace(obs.key, obs.latency_ms);
        if (!inserted)
            it->second = std::min(it->second, obs.latency_ms);
        best = std::min(best, obs.latency_ms);
    }
    for (const auto& [key, latency] : best_per_config)
        if (latency > (1.0 + excess_threshold) * best)
            mask.excluded.insert(key);
    return mask;
}

struct TailoredResult {
    std::optional<Mapping> best;
    double best_value = kInfeasible;
    int evaluations = 0;
    bool used_fallback = false; // pruned space was infeasible, searched unpruned
};

// Re-maps exactly one service, holding every other placement fixed. The
// candidate set is the changed service's split configurations, minus the
// pruned ones; if nothing in the pruned space is feasible the full
// single-service space is retried. Equal-value ties break toward the
// lower tie_break score (the runtime passes oracle power), then toward
// mapping order.
inline TailoredResult tailored_search(const Mapping& current, std::size_t changed_index,
                                      const ActiveWorkload& workload, int component_count,
                                      int max_partitions, const PruneMask& mask,
                                      const Evaluator& evaluate,
                                      const Evaluator& tie_break = {}) {
    if (changed_index >= workload.size())
        throw ConfigError("tailored_search: changed service index out of range");
    const int layer_count = workload[changed_index].model->layer_count();
    auto configs = single_service_configs(layer_count, component_count, max_partitions);

    TailoredResult result;
    double best_tie = 0.0;
    auto run = [&](bool apply_mask) {
        for (const auto& parts : configs) {
            if (apply_mask && mask.is_excluded(parts))
                continue;
            Mapping candidate = current;
            candidate.placements[changed_index].partitions = parts;
            double v = evaluate(candidate);
            ++result.evaluations;
            if (v == kInfeasible)
                continue;
            bool take = false;
            if (!result.best || v > result.best_value) {
                take = true;
            } else if (v == result.best_value) {
                if (tie_break) {
                    double tie = tie_break(candidate);
                    if (tie < best_tie - 1e-12 ||
                        (tie <= best_tie + 1e-12 && candidate < *result.best))
                        take = true;
                } else if (candidate < *result.best) {
                    take = true;
                }
            }
            if (take) {
                if (tie_break)
                    best_tie = tie_break(candidate);
                result.best = std::move(candidate);
                result.best_value = v;
            }
        }
    };

    run(!mask.empty());
    if (!result.best && !mask.empty()) {
        result.used_fallback = true;
        run(false);
    }
    return result;
}

} // namespace ecomap
