#include <catch2/catch_amalgamated.hpp>

#include "ecomap/search.hpp"

using namespace ecomap;

namespace {

// Independent brute-force oracle over a fully enumerated space.
std::pair<Mapping, double> brute_force_best(const ActiveWorkload& workload, int components,
                                            int max_partitions, const Evaluator& evaluate) {
    MappingEnumerator it(workload, components, max_partitions, 1e6);
    Mapping m;
    std::optional<Mapping> best;
    double best_value = kInfeasible;
    while (it.next(m)) {
        double v = evaluate(m);
        if (v == kInfeasible)
            continue;
        if (!best || v > best_value || (v == best_value && m < *best)) {
            best = m;
            best_value = v;
        }
    }
    REQUIRE(best.has_value());
    return {*best, best_value};
}

std::vector<DnnModel> make_models(int count, int min_layers, int max_layers, Rng& rng) {
    std::vector<DnnModel> models;
    for (int i = 0; i < count; ++i)
        models.push_back(generate_synthetic_model("s" + std::to_string(i), 1,
                                                  uniform_int(rng, min_layers, max_layers), rng));
    return models;
}

} // namespace

TEST_CASE("value applies the power filter and the stated orientation", "[search][value]") {
    ValueWeights w{1.0, 1.0, 5};
    CHECK(value({2, 6}, w, 10) == kInfeasible);
    CHECK(value({2, 3}, w, 10) == Catch::Approx(4.0)); // 9 - 2 - 3

    ValueWeights latency_only{1.0, 0.0, 9};
    double better = value({1, 4}, latency_only, 10);
    double worse = value({3, 0}, latency_only, 10);
    CHECK(better > worse);
}

TEST_CASE("kmeans bipartition recovers separated groups", "[search][kmeans]") {
    Rng rng(6);
    std::vector<std::vector<double>> features;
    std::vector<double> values;
    for (int i = 0; i < 12; ++i) {
        features.push_back({uniform_real(rng, 0.0, 0.1), uniform_real(rng, 0.0, 0.1)});
        values.push_back(10.0 + uniform_real(rng, -0.2, 0.2));
    }
    for (int i = 0; i < 12; ++i) {
        features.push_back({uniform_real(rng, 5.0, 5.1), uniform_real(rng, 5.0, 5.1)});
        values.push_back(1.0 + uniform_real(rng, -0.2, 0.2));
    }
    auto split = kmeans_bipartition(features, values, rng);
    REQUIRE(split.has_value());
    REQUIRE(split->good.size() == 12u);
    for (std::size_t idx : split->good)
        CHECK(idx < 12u); // the high-value half is labeled good
}

TEST_CASE("kmeans bipartition: two points, one per cluster", "[search][kmeans]") {
    Rng rng(9);
    std::vector<std::vector<double>> features = {{0.0}, {1.0}};
    std::vector<double> values = {1.0, 2.0};
    auto split = kmeans_bipartition(features, values, rng);
    REQUIRE(split.has_value());
    CHECK(split->good.size() == 1u);
    CHECK(split->bad.size() == 1u);
}

TEST_CASE("kmeans bipartition refuses identical points", "[search][kmeans]") {
    Rng rng(9);
    std::vector<std::vector<double>> features = {{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}};
    std::vector<double> values = {3.0, 3.0, 3.0};
    CHECK_FALSE(kmeans_bipartition(features, values, rng).has_value());
}

TEST_CASE("boundary separates separable sets exactly", "[search][boundary]") {
    Rng rng(15);
    std::vector<std::vector<double>> good, bad;
    for (int i = 0; i < 20; ++i) {
        good.push_back({uniform_real(rng, 0.0, 1.0), uniform_real(rng, 0.0, 1.0)});
        bad.push_back({uniform_real(rng, 3.0, 4.0), uniform_real(rng, 3.0, 4.0)});
    }
    LinearBoundary boundary = fit_boundary(good, bad);
    for (const auto& x : good)
        CHECK(boundary.classify(x));
    for (const auto& x : bad)
        CHECK_FALSE(boundary.classify(x));
}

TEST_CASE("boundary training accuracy is at least chance on random labels",
          "[search][boundary][property]") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        std::vector<std::vector<double>> good, bad;
        for (int i = 0; i < 30; ++i) {
            std::vector<double> x = {uniform_real(rng, -1, 1), uniform_real(rng, -1, 1),
                                     uniform_real(rng, -1, 1)};
            (uniform_int(rng, 0, 1) ? good : bad).push_back(x);
        }
        if (good.empty() || bad.empty())
            continue;
        LinearBoundary boundary = fit_boundary(good, bad);
        std::size_t hits = 0;
        for (const auto& x : good)
            hits += boundary.classify(x);
        for (const auto& x : bad)
            hits += !boundary.classify(x);
        CHECK(hits * 2 >= good.size() + bad.size());
    }
}

TEST_CASE("lamcts with budget 1 evaluates exactly one candidate", "[search][lamcts]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(3);
    auto models = make_models(1, 3, 3, rng);
    ActiveWorkload workload = {{0, &models[0]}};
    MappingSpace space(workload, 2, 2);
    int calls = 0;
    Evaluator ev = [&](const Mapping& m) {
        ++calls;
        return -oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms();
    };
    SearchBudget budget;
    budget.max_evaluations = 1;
    Rng search_rng(1);
    SearchResult res = lamcts_search(space, ev, budget, search_rng);
    CHECK(calls == 1);
    CHECK(res.evaluations == 1);
    CHECK(res.best.has_value());
}

TEST_CASE("lamcts with full budget matches brute force on enumerable spaces",
          "[search][lamcts][oracle]") {
    DeviceModel device = DeviceModel::standard();
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        Rng rng(seed);
        auto models = make_models(2, 2, 4, rng);
        ActiveWorkload workload = {{0, &models[0]}, {1, &models[1]}};
        const OperatingMode& mode = device.lut[static_cast<std::size_t>(uniform_int(rng, 0, 7))];
        Evaluator ev = [&](const Mapping& m) {
            EvaluationResult r = oracle_evaluate(m, mode, workload, device);
            return -(r.max_latency_ms() + 0.25 * r.total_power_w);
        };
        auto [best_mapping, best_value] = brute_force_best(workload, 2, 2, ev);

        MappingSpace space(workload, 2, 2);
        REQUIRE(space.enumerable());
        SearchBudget budget;
        budget.max_evaluations = static_cast<int>(space.enumerated().size());
        budget.leaf_split_threshold = 12;
        Rng search_rng(seed * 17);
        SearchResult res = lamcts_search(space, ev, budget, search_rng);
        REQUIRE(res.best.has_value());
        CHECK(res.best_value == Catch::Approx(best_value).margin(1e-12));
        CHECK(*res.best == best_mapping);
    }
}

TEST_CASE("lamcts is deterministic under a fixed seed", "[search][lamcts]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(12);
    auto models = make_models(3, 4, 10, rng);
    ActiveWorkload workload;
    for (std::size_t i = 0; i < models.size(); ++i)
        workload.push_back({static_cast<std::uint32_t>(i), &models[i]});
    MappingSpace space(workload, 2, 3, 16.0); // force the sampling path
    REQUIRE_FALSE(space.enumerable());
    Evaluator ev = [&](const Mapping& m) {
        return -oracle_evaluate(m, device.lut[2], workload, device).max_latency_ms();
    };
    SearchBudget budget;
    budget.max_evaluations = 120;
    Rng rng_a(555), rng_b(555);
    SearchResult a = lamcts_search(space, ev, budget, rng_a);
    SearchResult b = lamcts_search(space, ev, budget, rng_b);
    REQUIRE(a.best.has_value());
    REQUIRE(b.best.has_value());
    CHECK(*a.best == *b.best);
    CHECK(a.best_value == b.best_value);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("lamcts never returns an infeasible candidate and reports infeasible spaces",
          "[search][lamcts]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(8);
    auto models = make_models(1, 4, 4, rng);
    ActiveWorkload workload = {{0, &models[0]}};
    MappingSpace space(workload, 2, 2);

    // threshold that rejects roughly half the space
    std::vector<double> latencies;
    for (const auto& m : space.enumerated())
        latencies.push_back(oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms());
    std::vector<double> sorted = latencies;
    std::sort(sorted.begin(), sorted.end());
    double cut = sorted[sorted.size() / 2];

    Evaluator ev = [&](const Mapping& m) {
        double lat = oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms();
        if (lat > cut)
            return kInfeasible;
        return -lat;
    };
    SearchBudget budget;
    budget.max_evaluations = static_cast<int>(space.enumerated().size());
    Rng search_rng(77);
    SearchResult res = lamcts_search(space, ev, budget, search_rng);
    REQUIRE(res.best.has_value());
    CHECK(ev(*res.best) != kInfeasible);
    for (const auto& [v, m] : res.ranked)
        CHECK(v != kInfeasible);

    // fully infeasible space is reported, not absorbed
    Evaluator never = [](const Mapping&) { return kInfeasible; };
    Rng search_rng2(78);
    SearchResult res2 = lamcts_search(space, never, budget, search_rng2);
    CHECK_FALSE(res2.best.has_value());
}

TEST_CASE("lamcts best value is non-decreasing in consumed budget", "[search][lamcts]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(14);
    auto models = make_models(2, 3, 6, rng);
    ActiveWorkload workload = {{0, &models[0]}, {1, &models[1]}};
    MappingSpace space(workload, 2, 2);
    Evaluator ev = [&](const Mapping& m) {
        return -oracle_evaluate(m, device.lut[5], workload, device).max_latency_ms();
    };
    SearchBudget budget;
    budget.max_evaluations = 64;
    Rng search_rng(31);
    SearchResult res = lamcts_search(space, ev, budget, search_rng);
    double best = kInfeasible;
    for (const auto& [it, v] : res.trace) {
        CHECK(v >= best);
        best = v;
    }
}

TEST_CASE("with zero power weight the search minimizes the latency class",
          "[search][lamcts]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(18);
    auto models = make_models(1, 6, 6, rng);
    ActiveWorkload workload = {{0, &models[0]}};
    MappingSpace space(workload, 2, 3);

    // synthetic class evaluator: derive classes from oracle quantiles
    std::vector<double> latencies;
    for (const auto& m : space.enumerated())
        latencies.push_back(oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms());
    const int n_classes = 5;
    BucketFit fit = fit_buckets(latencies, n_classes);
    ValueWeights w{1.0, 0.0, n_classes - 1};
    std::vector<std::pair<Mapping, int>> evaluated;
    Evaluator ev = [&](const Mapping& m) {
        int cls = fit.buckets.class_of(
            oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms());
        evaluated.push_back({m, cls});
        return value({cls, 0}, w, n_classes);
    };
    SearchBudget budget;
    budget.max_evaluations = static_cast<int>(space.enumerated().size());
    Rng search_rng(9);
    SearchResult res = lamcts_search(space, ev, budget, search_rng);
    REQUIRE(res.best.has_value());
    int best_class = n_classes;
    for (const auto& [m, cls] : evaluated)
        best_class = std::min(best_class, cls);
    int returned_class = fit.buckets.class_of(
        oracle_evaluate(*res.best, device.lut[0], workload, device).max_latency_ms());
    CHECK(returned_class == best_class);
}

TEST_CASE("pruned space: strictly above 30% excess is excluded", "[search][prune]") {
    std::vector<ConfigObservation> obs;
    std::vector<Partition> best_cfg = {{0, 4, 1}};
    std::vector<Partition> bad_cfg = {{0, 2, 0}, {2, 4, 1}};
    std::vector<Partition> edge_cfg = {{0, 1, 0}, {1, 4, 1}};
    obs.push_back({config_key(best_cfg), 100.0});
    obs.push_back({config_key(bad_cfg), 140.0});  // 1.4x -> excluded
    obs.push_back({config_key(edge_cfg), 130.0}); // exactly 1.30x -> retained
    PruneMask mask = build_pruned_space(obs);
    CHECK_FALSE(mask.is_excluded(best_cfg));
    CHECK(mask.is_excluded(bad_cfg));
    CHECK_FALSE(mask.is_excluded(edge_cfg));

    PruneMask empty_mask = build_pruned_space({});
    CHECK(empty_mask.empty());
    CHECK_FALSE(empty_mask.is_excluded(bad_cfg));
}

TEST_CASE("tailored search touches only the changed service", "[search][tailored]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(19);
    auto models = make_models(3, 3, 6, rng);
    ActiveWorkload workload;
    for (std::size_t i = 0; i < models.size(); ++i)
        workload.push_back({static_cast<std::uint32_t>(i), &models[i]});
    Mapping current = random_mapping(workload, 2, 2, rng);

    int calls = 0;
    Evaluator ev = [&](const Mapping& m) {
        ++calls;
        return -oracle_evaluate(m, device.lut[0], workload, device).max_latency_ms();
    };
    PruneMask no_mask;
    TailoredResult res = tailored_search(current, 1, workload, 2, 2, no_mask, ev);
    REQUIRE(res.best.has_value());
    CHECK(res.best->placements[0] == current.placements[0]);
    CHECK(res.best->placements[2] == current.placements[2]);

    double single_space = single_service_config_count(models[1].layer_count(), 2, 2);
    double joint_space = mapping_space_size(workload, 2, 2);
    CHECK(static_cast<double>(res.evaluations) <= single_space);
    CHECK(static_cast<double>(res.evaluations) < joint_space);
    CHECK(calls == res.evaluations);
}

TEST_CASE("pruned tailored optimum stays within 10% of the unpruned optimum",
          "[search][tailored][oracle]") {
    DeviceModel device = DeviceModel::standard();
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        Rng rng(seed * 131);
        auto models = make_models(2, 3, 7, rng);
        ActiveWorkload workload = {{0, &models[0]}, {1, &models[1]}};
        Mapping current = random_mapping(workload, 2, 2, rng);
        const OperatingMode& mode = device.lut[1];

        Evaluator ev = [&](const Mapping& m) {
            return -oracle_evaluate(m, mode, workload, device).max_latency_ms();
        };

        // observations: probe every config of service 0 solo
        ActiveWorkload solo = {{0, &models[0]}};
        std::vector<ConfigObservation> obs;
        for (const auto& cfg : single_service_configs(models[0].layer_count(), 2, 2)) {
            Mapping m;
            m.placements.push_back({0, cfg});
            obs.push_back({config_key(cfg),
                           oracle_evaluate(m, mode, solo, device).latency_ms[0]});
        }
        PruneMask mask = build_pruned_space(obs);
        PruneMask no_mask;

        TailoredResult pruned = tailored_search(current, 0, workload, 2, 2, mask, ev);
        TailoredResult unpruned = tailored_search(current, 0, workload, 2, 2, no_mask, ev);
        REQUIRE(pruned.best.has_value());
        REQUIRE(unpruned.best.has_value());
        // values are negative latencies
        double pruned_latency = -pruned.best_value;
        double unpruned_latency = -unpruned.best_value;
        CHECK(pruned_latency <= unpruned_latency * 1.10);
    }
}

TEST_CASE("tailored search reports infeasibility explicitly and falls back from "
          "an infeasible pruned space",
          "[search][tailored]") {
    DeviceModel device = DeviceModel::standard();
    Rng rng(23);
    auto models = make_models(1, 3, 3, rng);
    ActiveWorkload workload = {{0, &models[0]}};
    Mapping current = random_mapping(workload, 2, 2, rng);

    Evaluator never = [](const Mapping&) { return kInfeasible; };
    PruneMask no_mask;
    TailoredResult res = tailored_search(current, 0, workload, 2, 2, no_mask, never);
    CHECK_FALSE(res.best.has_value());

    // mask that excludes the only feasible configuration: fallback finds it
    auto configs = single_service_configs(models[0].layer_count(), 2, 2);
    const std::vector<Partition>& only_good = configs.front();
    PruneMask mask;
    mask.excluded.insert(config_key(only_good));
    Evaluator picky = [&](const Mapping& m) {
        if (m.placements[0].partitions == only_good)
            return 1.0;
        return kInfeasible;
    };
    TailoredResult res2 = tailored_search(current, 0, workload, 2, 2, mask, picky);
    REQUIRE(res2.best.has_value());
    CHECK(res2.used_fallback);
    CHECK(res2.best->placements[0].partitions == only_good);
}
