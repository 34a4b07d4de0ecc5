#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ecomap/device.hpp"
#include "ecomap/mapping.hpp"
#include "ecomap/random.hpp"
#include "ecomap/workload.hpp"

namespace ecomap {

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Tuple-sequence encoding
// ---------------------------------------------------------------------------

// One token per layer: the layer's profile, the component it is assigned
// to, and that component's operational frequency under the mode.
struct EncodedToken {
    int service_ordinal = 0;
    double layer_cost_mflops = 0.0;
    double activation_mb = 0.0;
    int component = 0;
    double component_freq_ghz = 0.0;
};

using EncodedSequence = std::vector<EncodedToken>;

inline EncodedSequence encode(const Mapping& mapping, const OperatingMode& mode,
                              const ActiveWorkload& workload, const DeviceModel& device) {
    EncodedSequence seq;
    for (std::size_t s = 0; s < workload.size(); ++s) {
        const auto& model = *workload[s].model;
        for (const auto& part : mapping.placements[s].partitions) {
            double freq = device.component_frequency_ghz(part.component, mode);
            for (int l = part.begin; l < part.end; ++l)
                seq.push_back({static_cast<int>(s), model.layers[static_cast<std::size_t>(l)].compute_cost_mflops,
                               model.layers[static_cast<std::size_t>(l)].activation_mb, part.component, freq});
        }
    }
    return seq;
}

// ---------------------------------------------------------------------------
// Aggregated features
// ---------------------------------------------------------------------------

inline std::vector<std::string> feature_names(int n_components) {
    std::vector<std::string> names = {"service_count", "total_layers", "partition_runs",
                                      "log_total_cost", "log_crossing_mb", "log_serial_ms",
                                      "log_bottleneck_ms", "log_max_service_cost",
                                      "active_cores", "f_mem_ghz", "power_cap_w"};
    for (int c = 0; c < n_components; ++c) {
        names.push_back("log_demand_c" + std::to_string(c));
        names.push_back("log_capacity_c" + std::to_string(c));
        names.push_back("log_load_c" + std::to_string(c));
    }
    return names;
}

// Summarizes a (mapping, mode) pair into a fixed-size vector: per-component
// demand totals and frequencies/capacities, partition counts, crossing
// volumes, and cheap analytic time aggregates.
inline std::vector<double> aggregate_features(const Mapping& mapping, const OperatingMode& mode,
                                              const ActiveWorkload& workload,
                                              const DeviceModel& device) {
    const int n_components = device.component_count();
    std::vector<double> demand(static_cast<std::size_t>(n_components), 0.0);
    std::vector<double> capacity(static_cast<std::size_t>(n_components), 0.0);
    for (int c = 0; c < n_components; ++c)
        capacity[static_cast<std::size_t>(c)] = device.effective_throughput_gflops(c, mode);

    const double bw = device.mem_bandwidth_gbps_at(mode);
    double total_cost = 0.0, crossing_mb = 0.0, bottleneck_ms = 0.0, max_service_cost = 0.0;
    int total_layers = 0, partition_runs = 0;
    for (std::size_t s = 0; s < workload.size(); ++s) {
        const auto& model = *workload[s].model;
        const auto& parts = mapping.placements[s].partitions;
        double service_ms = 0.0;
        double service_cost = model.total_cost_mflops();
        total_layers += model.layer_count();
        for (std::size_t p = 0; p < parts.size(); ++p) {
            const auto& part = parts[p];
            double cost = model.range_cost_mflops(part.begin, part.end);
            demand[static_cast<std::size_t>(part.component)] += cost;
            service_ms += cost / capacity[static_cast<std::size_t>(part.component)];
            if (p == 0 || parts[p - 1].component != part.component)
                ++partition_runs;
            if (p + 1 < parts.size() && parts[p + 1].component != part.component) {
                double act = model.layers[static_cast<std::size_t>(part.end - 1)].activation_mb;
                crossing_mb += act;
                service_ms += act / bw;
            }
        }
        total_cost += service_cost;
        max_service_cost = std::max(max_service_cost, service_cost);
        bottleneck_ms = std::max(bottleneck_ms, service_ms);
    }

    double serial_ms = 0.0;
    for (int c = 0; c < n_components; ++c)
        serial_ms += demand[static_cast<std::size_t>(c)] / capacity[static_cast<std::size_t>(c)];

    std::vector<double> x = {static_cast<double>(workload.size()),
                             static_cast<double>(total_layers),
                             static_cast<double>(partition_runs),
                             std::log1p(total_cost),
                             std::log1p(crossing_mb),
                             std::log1p(serial_ms),
                             std::log1p(bottleneck_ms),
                             std::log1p(max_service_cost),
                             static_cast<double>(mode.active_cores),
                             mode.mem_freq_ghz,
                             mode.power_cap_w};
    for (int c = 0; c < n_components; ++c) {
        double d = demand[static_cast<std::size_t>(c)];
        double cap = capacity[static_cast<std::size_t>(c)];
        x.push_back(std::log1p(d));
        x.push_back(std::log(cap));
        x.push_back(std::log1p(d / (cap * 1000.0)));
    }
    return x;
}

// ---------------------------------------------------------------------------
// Quantile buckets
// ---------------------------------------------------------------------------

// N classes, equal in sample size (within one), cut at midpoints between
// adjacent training values. Ties are broken by value-then-index order when
// assigning training labels.
struct QuantileBuckets {
    int n_classes = 0;
    std::vector<double> edges; // n_classes - 1, strictly increasing

    int class_of(double value) const {
        auto it = std::upper_bound(edges.begin(), edges.end(), value);
        return static_cast<int>(it - edges.begin());
    }
};

struct BucketFit {
    QuantileBuckets buckets;
    std::vector<int> labels; // positional training labels, balanced within 1
};

inline BucketFit fit_buckets(const std::vector<double>& values, int n_classes) {
    if (values.empty())
        throw InsufficientDataError("fit_buckets: no values");
    if (n_classes < 2)
        throw ConfigError("fit_buckets: need at least 2 classes");

    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });

    std::size_t distinct = 1;
    for (std::size_t i = 1; i < n; ++i)
        if (values[order[i]] != values[order[i - 1]])
            ++distinct;
    if (static_cast<std::size_t>(n_classes) > distinct)
        throw InsufficientDataError("fit_buckets: more classes than distinct values");

    BucketFit fit;
    fit.buckets.n_classes = n_classes;
    fit.labels.assign(n, 0);
    for (int k = 0; k < n_classes; ++k) {
        std::size_t lo = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(n_classes);
        std::size_t hi = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(n_classes);
        for (std::size_t i = lo; i < hi; ++i)
            fit.labels[order[i]] = k;
    }
    double prev_edge = -std::numeric_limits<double>::infinity();
    for (int k = 1; k < n_classes; ++k) {
        std::size_t b = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(n_classes);
        double edge = 0.5 * (values[order[b - 1]] + values[order[b]]);
        // duplicates straddling the cut: move the published edge forward to
        // the nearest distinct pair so edges stay strictly increasing
        std::size_t j = b;
        while (edge <= prev_edge && j + 1 < n) {
            ++j;
            edge = 0.5 * (values[order[j - 1]] + values[order[j]]);
        }
        if (edge <= prev_edge)
            throw InsufficientDataError("fit_buckets: cannot place strictly increasing edges");
        fit.buckets.edges.push_back(edge);
        prev_edge = edge;
    }
    return fit;
}

// ---------------------------------------------------------------------------
// Training data
// ---------------------------------------------------------------------------

struct TrainingSample {
    std::vector<double> features;
    double latency_ms = 0.0; // bottleneck (max) service latency of the mapping
    double power_w = 0.0;
    int mode_id = 0;
};

struct TrainingDataset {
    std::vector<TrainingSample> samples;
    std::uint64_t seed = 0;
    int per_mode_count = 0;
};

struct DatasetGenParams {
    int per_mode_count = 1000;
    int min_dnns = 5;
    int max_dnns = 10;
    int max_partitions = 3;
};

// Random (workload, mapping, mode) triples labeled by the oracle; the
// per-mode sample counts are exactly equal.
inline TrainingDataset generate_dataset(const ServiceCatalog& catalog, const DeviceModel& device,
                                        const DatasetGenParams& params, std::uint64_t seed) {
    if (params.per_mode_count < 1)
        throw ConfigError("generate_dataset: per_mode_count must be >= 1");
    TrainingDataset dataset;
    dataset.seed = seed;
    dataset.per_mode_count = params.per_mode_count;
    Rng rng(derive_seed(seed, 0xda7a5e7ULL));
    for (const auto& mode : device.lut) {
        for (int i = 0; i < params.per_mode_count; ++i) {
            WorkloadSchedule schedule =
                sample_workload(catalog, params.min_dnns, params.max_dnns, rng, seed);
            ActiveWorkload workload;
            for (const auto& spec : schedule.services) {
                const auto& family = find_family(catalog, spec.family_id);
                int level = uniform_int(rng, 1, family.depth());
                workload.push_back({spec.service_id, &family.level(level)});
            }
            Mapping mapping =
                random_mapping(workload, device.component_count(), params.max_partitions, rng);
            EvaluationResult eval = oracle_evaluate(mapping, mode, workload, device);
            TrainingSample sample;
            sample.features = aggregate_features(mapping, mode, workload, device);
            sample.latency_ms = eval.max_latency_ms();
            sample.power_w = eval.total_power_w;
            sample.mode_id = mode.mode_id;
            dataset.samples.push_back(std::move(sample));
        }
    }
    return dataset;
}

// Dataset file: versioned CSV of aggregated features plus oracle labels.
inline void save_dataset(const TrainingDataset& dataset, const DeviceModel& device,
                         const std::string& path) {
    std::ofstream out(path);
    out << "# ecomap-dataset v1 seed=" << dataset.seed
        << " per_mode=" << dataset.per_mode_count << "\n";
    auto names = feature_names(device.component_count());
    for (const auto& n : names)
        out << n << ",";
    out << "latency_ms,power_w,mode_id\n";
    char buf[64];
    for (const auto& s : dataset.samples) {
        for (double v : s.features) {
            std::snprintf(buf, sizeof buf, "%.9g,", v);
            out << buf;
        }
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%d\n", s.latency_ms, s.power_w, s.mode_id);
        out << buf;
    }
}

inline TrainingDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ecomap-dataset v1", 0) != 0)
        throw ConfigError("not an ecomap dataset file: " + path);
    TrainingDataset dataset;
    if (auto pos = line.find("seed="); pos != std::string::npos)
        dataset.seed = std::stoull(line.substr(pos + 5));
    if (auto pos = line.find("per_mode="); pos != std::string::npos)
        dataset.per_mode_count = std::stoi(line.substr(pos + 9));
    std::getline(in, line); // column header
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        TrainingSample s;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ','))
            cells.push_back(std::stod(cell));
        if (cells.size() < 4)
            throw ConfigError("malformed dataset row: " + line);
        s.mode_id = static_cast<int>(cells.back());
        s.power_w = cells[cells.size() - 2];
        s.latency_ms = cells[cells.size() - 3];
        s.features.assign(cells.begin(), cells.end() - 3);
        dataset.samples.push_back(std::move(s));
    }
    return dataset;
}

// ---------------------------------------------------------------------------
// Multinomial logistic head
// ---------------------------------------------------------------------------

struct FeatureScaler {
    std::vector<double> mean, stdev;

    void fit(const std::vector<const std::vector<double>*>& rows) {
        const std::size_t f = rows.front()->size();
        mean.assign(f, 0.0);
        stdev.assign(f, 0.0);
        for (const auto* r : rows)
            for (std::size_t j = 0; j < f; ++j)
                mean[j] += (*r)[j];
        for (auto& m : mean)
            m /= static_cast<double>(rows.size());
        for (const auto* r : rows)
            for (std::size_t j = 0; j < f; ++j) {
                double d = (*r)[j] - mean[j];
                stdev[j] += d * d;
            }
        for (auto& s : stdev)
            s = std::max(1e-9, std::sqrt(s / static_cast<double>(rows.size())));
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> z(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            z[j] = (x[j] - mean[j]) / stdev[j];
        return z;
    }
};

// Softmax classifier trained by full-batch gradient descent; deterministic
// (zero init, fixed iteration count).
struct SoftmaxHead {
    int n_classes = 0;
    int n_features = 0;
    std::vector<double> weights; // (n_features + 1) x n_classes, row-major

    double& w(int j, int k) { return weights[static_cast<std::size_t>(j * n_classes + k)]; }
    double wv(int j, int k) const { return weights[static_cast<std::size_t>(j * n_classes + k)]; }

    void scores(const std::vector<double>& x, std::vector<double>& out) const {
        out.assign(static_cast<std::size_t>(n_classes), 0.0);
        for (int k = 0; k < n_classes; ++k)
            out[static_cast<std::size_t>(k)] = wv(n_features, k);
        for (int j = 0; j < n_features; ++j) {
            double xj = x[static_cast<std::size_t>(j)];
            if (xj == 0.0)
                continue;
            for (int k = 0; k < n_classes; ++k)
                out[static_cast<std::size_t>(k)] += xj * wv(j, k);
        }
    }

    int predict(const std::vector<double>& x) const {
        std::vector<double> s;
        scores(x, s);
        return static_cast<int>(std::max_element(s.begin(), s.end()) - s.begin());
    }

    void train(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
               int n_classes_in, int iterations = 400, double learning_rate = 0.5,
               double l2 = 1e-4) {
        n_classes = n_classes_in;
        n_features = static_cast<int>(x.front().size());
        weights.assign(static_cast<std::size_t>((n_features + 1) * n_classes), 0.0);
        const std::size_t n = x.size();
        std::vector<double> grad(weights.size());
        std::vector<double> p;
        for (int it = 0; it < iterations; ++it) {
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                scores(x[i], p);
                double mx = *std::max_element(p.begin(), p.end());
                double z = 0.0;
                for (auto& v : p)
                    z += (v = std::exp(v - mx));
                for (int k = 0; k < n_classes; ++k) {
                    double err = p[static_cast<std::size_t>(k)] / z -
                                 (k == y[i] ? 1.0 : 0.0);
                    for (int j = 0; j < n_features; ++j)
                        grad[static_cast<std::size_t>(j * n_classes + k)] +=
                            err * x[i][static_cast<std::size_t>(j)];
                    grad[static_cast<std::size_t>(n_features * n_classes + k)] += err;
                }
            }
            double step = learning_rate / (1.0 + 0.01 * it);
            for (std::size_t j = 0; j < weights.size(); ++j)
                weights[j] -= step * (grad[j] / static_cast<double>(n) + l2 * weights[j]);
        }
    }
};

// ---------------------------------------------------------------------------
// Rank metrics
// ---------------------------------------------------------------------------

inline std::vector<double> average_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]])
            ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    auto ra = average_ranks(a);
    auto rb = average_ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
    double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va <= 0 || vb <= 0)
        return 0.0;
    return cov / std::sqrt(va * vb);
}

// ---------------------------------------------------------------------------
// Estimator
// ---------------------------------------------------------------------------

struct ClassPrediction {
    int latency_class = 0;
    int power_class = 0;
};

struct EstimatorMetrics {
    double latency_accuracy = 0.0;
    double power_accuracy = 0.0;
    double latency_spearman = 0.0;
    double power_spearman = 0.0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
};

class Estimator {
public:
    int n_classes = 10;
    FeatureScaler scaler;
    QuantileBuckets latency_buckets, power_buckets;
    SoftmaxHead latency_head, power_head;
    EstimatorMetrics metrics;

    ClassPrediction predict_features(const std::vector<double>& features) const {
        auto z = scaler.apply(features);
        return {latency_head.predict(z), power_head.predict(z)};
    }

    ClassPrediction predict(const Mapping& mapping, const OperatingMode& mode,
                            const ActiveWorkload& workload, const DeviceModel& device) const {
        if (workload.empty())
            return {0, 0}; // sentinel for an idle device
        return predict_features(aggregate_features(mapping, mode, workload, device));
    }

    // Class a raw power cap falls into; candidates predicted at or below
    // this class pass the power filter.
    int power_threshold_class(double power_cap_w) const {
        return power_buckets.class_of(power_cap_w);
    }

    nlohmann::json to_json() const {
        nlohmann::json doc;
        doc["format"] = "ecomap-estimator";
        doc["version"] = 1;
        doc["n_classes"] = n_classes;
        doc["scaler"] = {{"mean", scaler.mean}, {"stdev", scaler.stdev}};
        doc["latency_buckets"] = latency_buckets.edges;
        doc["power_buckets"] = power_buckets.edges;
        auto head = [](const SoftmaxHead& h) {
            return nlohmann::json{{"n_classes", h.n_classes},
                                  {"n_features", h.n_features},
                                  {"weights", h.weights}};
        };
        doc["latency_head"] = head(latency_head);
        doc["power_head"] = head(power_head);
        doc["metrics"] = {{"latency_accuracy", metrics.latency_accuracy},
                          {"power_accuracy", metrics.power_accuracy},
                          {"latency_spearman", metrics.latency_spearman},
                          {"power_spearman", metrics.power_spearman},
                          {"train_samples", metrics.train_samples},
                          {"test_samples", metrics.test_samples}};
        return doc;
    }

    static Estimator from_json(const nlohmann::json& doc) {
        if (doc.value("format", "") != "ecomap-estimator")
            throw ConfigError("not an ecomap estimator file");
        Estimator est;
        est.n_classes = doc.at("n_classes").get<int>();
        est.scaler.mean = doc.at("scaler").at("mean").get<std::vector<double>>();
        est.scaler.stdev = doc.at("scaler").at("stdev").get<std::vector<double>>();
        est.latency_buckets = {est.n_classes, doc.at("latency_buckets").get<std::vector<double>>()};
        est.power_buckets = {est.n_classes, doc.at("power_buckets").get<std::vector<double>>()};
        auto head = [](const nlohmann::json& j) {
            SoftmaxHead h;
            h.n_classes = j.at("n_classes").get<int>();
            h.n_features = j.at("n_features").get<int>();
            h.weights = j.at("weights").get<std::vector<double>>();
            return h;
        };
        est.latency_head = head(doc.at("latency_head"));
        est.power_head = head(doc.at("power_head"));
        const auto& m = doc.at("metrics");
        est.metrics.latency_accuracy = m.at("latency_accuracy").get<double>();
        est.metrics.power_accuracy = m.at("power_accuracy").get<double>();
        est.metrics.latency_spearman = m.at("latency_spearman").get<double>();
        est.metrics.power_spearman = m.at("power_spearman").get<double>();
        est.metrics.train_samples = m.at("train_samples").get<std::size_t>();
        est.metrics.test_samples = m.at("test_samples").get<std::size_t>();
        return est;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        out << to_json().dump(2) << "\n";
    }

    static Estimator load(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open estimator: " + path);
        nlohmann::json doc;
        in >> doc;
        return from_json(doc);
    }
};

struct TrainParams {
    int n_classes = 10;
    double split_fraction = 0.8; // train share
    int iterations = 400;
    int min_samples_per_class = 50;
};

// Fits quantile buckets on the training split, trains the two heads, and
// records held-out accuracy plus rank correlation against the oracle
// labels.
inline Estimator train(const TrainingDataset& dataset, const TrainParams& params = {}) {
    const std::size_t n = dataset.samples.size();
    if (n < 10)
        throw InsufficientDataError("train: dataset too small");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(dataset.seed, 0x7a17ULL));
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(params.split_fraction * static_cast<double>(n)));
    if (n_train / static_cast<std::size_t>(params.n_classes) <
        static_cast<std::size_t>(params.min_samples_per_class))
        throw InsufficientDataError("train: fewer than the required samples per class");

    Estimator est;
    est.n_classes = params.n_classes;

    std::vector<const std::vector<double>*> train_rows;
    std::vector<double> lat_values, pow_values;
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto& s = dataset.samples[order[i]];
        train_rows.push_back(&s.features);
        lat_values.push_back(s.latency_ms);
        pow_values.push_back(s.power_w);
    }
    est.scaler.fit(train_rows);

    BucketFit lat_fit = fit_buckets(lat_values, params.n_classes);
    BucketFit pow_fit = fit_buckets(pow_values, params.n_classes);
    est.latency_buckets = lat_fit.buckets;
    est.power_buckets = pow_fit.buckets;

    std::vector<std::vector<double>> x;
    x.reserve(n_train);
    for (const auto* r : train_rows)
        x.push_back(est.scaler.apply(*r));
    est.latency_head.train(x, lat_fit.labels, params.n_classes, params.iterations);
    est.power_head.train(x, pow_fit.labels, params.n_classes, params.iterations);

    // held-out metrics
    std::vector<double> pred_lat, pred_pow, true_lat, true_pow;
    std::size_t lat_hits = 0, pow_hits = 0, n_test = n - n_train;
    for (std::size_t i = n_train; i < n; ++i) {
        const auto& s = dataset.samples[order[i]];
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
    est.metrics.train_samples = n_train;
    est.metrics.test_samples = n_test;
    if (n_test > 0) {
        est.metrics.latency_accuracy = static_cast<double>(lat_hits) / static_cast<double>(n_test);
        est.metrics.power_accuracy = static_cast<double>(pow_hits) / static_cast<double>(n_test);
        est.metrics.latency_spearman = spearman(pred_lat, true_lat);
        est.metrics.power_spearman = spearman(pred_pow, true_pow);
    }
    return est;
}

} // namespace ecomap
