#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ecomap/carbon.hpp"

using namespace ecomap;
namespace fs = std::filesystem;

TEST_CASE("mix_ci single source is that source's factor", "[carbon]") {
    std::vector<EnergySource> sources = {{"coal", 120.0, cef::coal}};
    CHECK(mix_ci(sources) == Catch::Approx(820.0).margin(1e-12));
}

TEST_CASE("mix_ci coal/wind half split", "[carbon]") {
    // hand-computed: (50*820 + 50*11) / 100 = 41550 / 100 = 415.5
    std::vector<EnergySource> sources = {{"coal", 50.0, cef::coal}, {"wind", 50.0, cef::wind}};
    CHECK(mix_ci(sources) == Catch::Approx(415.5).margin(1e-9));
}

TEST_CASE("mix_ci stays within factor bounds and scales invariantly", "[carbon]") {
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<EnergySource> sources;
        double lo = 1e18, hi = -1;
        int n = uniform_int(rng, 1, 6);
        for (int i = 0; i < n; ++i) {
            double e = uniform_real(rng, 0.1, 100.0);
            double f = uniform_real(rng, 5.0, 900.0);
            sources.push_back({"s", e, f});
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        double ci = mix_ci(sources);
        CHECK(ci >= lo - 1e-9);
        CHECK(ci <= hi + 1e-9);
        auto scaled = sources;
        for (auto& s : scaled)
            s.energy_kwh *= 7.25;
        CHECK(mix_ci(scaled) == Catch::Approx(ci).epsilon(1e-12));
    }
}

TEST_CASE("mix_ci rejects zero total energy", "[carbon]") {
    std::vector<EnergySource> sources = {{"idle", 0.0, cef::coal}};
    CHECK_THROWS_AS(mix_ci(sources), ConfigError);
}

TEST_CASE("accrue unit case: 1 kWh at CI 500", "[carbon]") {
    EmissionsLedger ledger;
    accrue(1000.0, 3600.0, 500.0, ledger); // 1000 W for 1 h = 1 kWh
    CHECK(ledger.energy_kwh == Catch::Approx(1.0).margin(1e-12));
    CHECK(ledger.emissions_g == Catch::Approx(500.0).margin(1e-9));
}

TEST_CASE("accrue 30 W for 2 h at CI 400", "[carbon]") {
    // hand-computed: 30*7200/3.6e6 = 0.06 kWh; 0.06*400 = 24 g
    EmissionsLedger ledger;
    accrue(30.0, 7200.0, 400.0, ledger);
    CHECK(ledger.energy_kwh == Catch::Approx(0.06).margin(1e-9));
    CHECK(ledger.emissions_g == Catch::Approx(24.0).margin(1e-9));
}

TEST_CASE("accrue zero duration leaves ledger unchanged", "[carbon]") {
    EmissionsLedger ledger;
    accrue(55.0, 0.0, 700.0, ledger);
    CHECK(ledger.energy_kwh == 0.0);
    CHECK(ledger.emissions_g == 0.0);
}

TEST_CASE("forecast of a constant trace", "[carbon]") {
    CiTrace trace;
    for (double t = 0; t <= 2 * 86400.0; t += 3600.0)
        trace.samples.push_back({t, 500.0});
    CiForecast fc = forecast(trace, 0.0);
    CHECK(fc.ci_min_day == 500.0);
    CHECK(fc.ci_max_day == 500.0);
}

TEST_CASE("forecast min/max match an independent scan", "[carbon]") {
    CiTrace trace = generate_ci_trace(trace_profile("week1"), 7);
    double now = 86400.0;
    CiForecast fc = forecast(trace, now);
    // independent oracle: linear scan of the window
    double lo = trace.at(now), hi = trace.at(now);
    for (const auto& s : trace.samples) {
        if (s.t_s < now || s.t_s > now + 86400.0)
            continue;
        lo = std::min(lo, s.ci);
        hi = std::max(hi, s.ci);
    }
    CHECK(fc.ci_min_day == Catch::Approx(lo).margin(1e-12));
    CHECK(fc.ci_max_day == Catch::Approx(hi).margin(1e-12));
    // week1 span reaches its bounds across the full trace
    double glo = 1e18, ghi = -1;
    for (const auto& s : trace.samples) {
        glo = std::min(glo, s.ci);
        ghi = std::max(ghi, s.ci);
    }
    CHECK(glo == Catch::Approx(200.0).margin(1e-9));
    CHECK(ghi == Catch::Approx(500.0).margin(1e-9));
}

TEST_CASE("forecast past trace coverage is rejected", "[carbon]") {
    CiTrace trace;
    for (double t = 0; t <= 86400.0; t += 3600.0)
        trace.samples.push_back({t, 300.0});
    CHECK_THROWS_AS(forecast(trace, 3600.0), ConfigError); // window ends past trace
}

TEST_CASE("ci_to_mode endpoints and degenerate forecast", "[carbon]") {
    ModeLut lut = default_mode_lut();
    CiForecast fc{0.0, 200.0, 500.0};
    CHECK(ci_to_mode(200.0, fc, lut).mode_id == 1);
    CHECK(ci_to_mode(200.0, fc, lut).power_cap_w == 30.0);
    CHECK(ci_to_mode(500.0, fc, lut).mode_id == 8);
    CHECK(ci_to_mode(500.0, fc, lut).power_cap_w == 6.0);
    CiForecast flat{0.0, 400.0, 400.0};
    CHECK(ci_to_mode(400.0, flat, lut).mode_id == 1);
    CHECK(ci_to_mode(150.0, flat, lut).mode_id == 1);
}

TEST_CASE("ci_to_mode is monotone in CI", "[carbon]") {
    ModeLut lut = default_mode_lut();
    CiForecast fc{0.0, 250.0, 600.0};
    double last_cap = 1e18;
    for (double ci = 250.0; ci <= 600.0; ci += 1.0) {
        double cap = ci_to_mode(ci, fc, lut).power_cap_w;
        CHECK(cap <= last_cap + 1e-12);
        last_cap = cap;
    }
}

TEST_CASE("hysteresis gate around the 10% boundary", "[carbon]") {
    CiForecast fc{0.0, 200.0, 500.0}; // range 300, 10% = 30
    CHECK_FALSE(hysteresis_gate(300.0, 329.0, fc));
    CHECK(hysteresis_gate(300.0, 330.0, fc));
    CHECK_FALSE(hysteresis_gate(300.0, 300.0, fc));
    CiForecast flat{0.0, 450.0, 450.0};
    CHECK_FALSE(hysteresis_gate(450.0, 800.0, flat));
}

TEST_CASE("cdp arithmetic", "[carbon]") {
    EmissionsLedger ledger;
    ledger.emissions_g = 100.0;
    CHECK(cdp(ledger, 500.0) == Catch::Approx(50.0).margin(1e-12));
    CHECK(cdp(ledger, 1000.0) == Catch::Approx(2.0 * cdp(ledger, 500.0)).margin(1e-12));
    EmissionsLedger empty;
    CHECK(cdp(empty, 500.0) == 0.0);
}

TEST_CASE("trace profiles hit their spans", "[carbon][trace]") {
    for (auto [name, lo_b, hi_b] :
         {std::tuple{"week1", 200.0, 500.0}, {"week2", 450.0, 550.0}, {"week3", 250.0, 600.0}}) {
        CiTrace trace = generate_ci_trace(trace_profile(name), 11);
        double lo = 1e18, hi = -1e18;
        for (const auto& s : trace.samples) {
            lo = std::min(lo, s.ci);
            hi = std::max(hi, s.ci);
        }
        CHECK(lo >= lo_b - 1e-9);
        CHECK(hi <= hi_b + 1e-9);
        CHECK(lo <= lo_b * 1.02);       // attains the lower bound within 2%
        CHECK(hi >= hi_b * 0.98);       // attains the upper bound within 2%
    }
}

TEST_CASE("trace generation is deterministic and round-trips through CSV", "[carbon][trace]") {
    CiTrace a = generate_ci_trace(trace_profile("week2"), 99);
    CiTrace b = generate_ci_trace(trace_profile("week2"), 99);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        CHECK(a.samples[i].t_s == b.samples[i].t_s);
        CHECK(a.samples[i].ci == b.samples[i].ci);
    }
    fs::path path = fs::temp_directory_path() / "ecomap_test_trace.csv";
    save_ci_trace(a, path.string());
    CiTrace loaded = load_ci_trace(path.string());
    REQUIRE(loaded.samples.size() == a.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        CHECK(loaded.samples[i].ci == Catch::Approx(a.samples[i].ci).margin(1e-5));
    fs::remove(path);
}

TEST_CASE("trace CSV requires the header", "[carbon][trace]") {
    fs::path path = fs::temp_directory_path() / "ecomap_test_headerless.csv";
    {
        std::ofstream out(path);
        out << "0,300\n3600,320\n";
    }
    CHECK_THROWS_AS(load_ci_trace(path.string()), ConfigError);
    fs::remove(path);
}
