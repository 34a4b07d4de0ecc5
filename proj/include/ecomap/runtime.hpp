#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ecomap/carbon.hpp"
#include "ecomap/device.hpp"
#include "ecomap/estimator.hpp"
#include "ecomap/report.hpp"
#include "ecomap/scenario.hpp"
#include "ecomap/search.hpp"
#include "ecomap/workload.hpp"

namespace ecomap {

// Simulation events, processed in time order with deterministic tie
// breaking: CiUpdate, then Departure, then Arrival, then Monitor.
struct SimEvent {
    enum Kind { CiUpdate = 0, Departure = 1, Arrival = 2, Monitor = 3 };
    double t_s = 0.0;
    Kind kind = Monitor;
    std::size_t payload = 0; // schedule index for Arrival/Departure, trace index for CiUpdate
    std::uint64_t seq = 0;

    bool operator<(const SimEvent& other) const {
        if (t_s != other.t_s)
            return t_s < other.t_s;
        if (kind != other.kind)
            return kind < other.kind;
        return seq < other.seq;
    }
};

// Optional audit hooks for tests: interval-level power/latency records,
// mode changes with their CI deltas, cascade steps, and state snapshots
// sufficient to re-derive every interval independently.
struct RunDebug {
    struct Interval {
        double t0 = 0, t1 = 0;
        double power_w = 0, cap_w = 0, ci = 0;
        bool power_breach = false, latency_breach = false;
    };
    struct ModeChange {
        double t = 0;
        int from_mode = 0, to_mode = 0;
        double ci_delta = 0, forecast_range = 0;
    };
    struct CascadeStep {
        double t = 0;
        std::uint32_t service_id = 0;
        int from_level = 0, to_level = 0;
        std::string reason; // "latency" | "power" | "upgrade"
        double accuracy_drop_pp = 0.0;
    };
    struct Snapshot {
        double t = 0;
        int mode_id = 0;
        Mapping mapping;
        std::vector<std::pair<std::uint32_t, int>> levels; // service -> quality level
    };
    std::vector<Interval> intervals;
    std::vector<ModeChange> mode_changes;
    std::vector<CascadeStep> cascade_steps;
    std::vector<Snapshot> snapshots;
};

// ---------------------------------------------------------------------------
// Runtime manager
// ---------------------------------------------------------------------------

class RuntimeManager {
public:
    RuntimeManager(const Scenario& scenario, Policy policy, std::uint64_t seed,
                   const ServiceCatalog& catalog, const DeviceModel& device,
                   const Estimator& estimator, CiTrace trace, WorkloadSchedule schedule,
                   RunDebug* debug = nullptr)
        : scenario_(scenario), policy_(policy), seed_(seed), catalog_(&catalog),
          device_(device), estimator_(&estimator), trace_(std::move(trace)),
          schedule_(std::move(schedule)), debug_(debug),
          search_rng_(derive_seed(seed, 0x5ea2c4ULL)) {
        duration_s_ = scenario.duration_days * 86400.0;
        max_family_depth_ = 0;
        for (const auto& entry : *catalog_)
            max_family_depth_ = std::max(max_family_depth_, entry.family.depth());
        build_prune_masks();
    }

    SimulationReport run() {
        init_state();
        auto events = build_events();

        double t_prev = 0.0;
        for (const auto& ev : events) {
            accrue_interval(t_prev, ev.t_s);
            t_prev = ev.t_s;
            dispatch(ev);
        }
        accrue_interval(t_prev, duration_s_);
        return finalize_report();
    }

private:
    // --- configuration ---
    const Scenario& scenario_;
    Policy policy_;
    std::uint64_t seed_;
    const ServiceCatalog* catalog_;
    DeviceModel device_;
    const Estimator* estimator_;
    CiTrace trace_;
    WorkloadSchedule schedule_;
    RunDebug* debug_;
    Rng search_rng_;
    double duration_s_ = 0.0;
    int max_family_depth_ = 1;
    std::map<std::string, PruneMask> prune_masks_; // per model name

    // --- mutable state ---
    struct Active {
        ServiceSpec spec;
        int level = 1;
        const ModelFamily* family = nullptr;
    };
    std::vector<Active> active_; // sorted by service_id
    ActiveWorkload workload_;
    Mapping mapping_;
    EvaluationResult eval_;
    std::size_t mode_index_ = 0;
    double current_ci_ = 0.0;
    double last_applied_ci_ = 0.0;
    CiForecast forecast_;
    bool saturated_ = false; // cascade already exhausted for this state

    // --- accounting ---
    struct DayAccum {
        EmissionsLedger ledger;
        double seconds = 0.0;
        std::vector<double> level_requests;
        int power_breach_intervals = 0;
        double power_breach_s = 0.0;
        int latency_breach_intervals = 0;
        double latency_breach_s = 0.0;
        int mode_changes = 0;
        int cascade_steps = 0;
        int upgrade_steps = 0;
        int admission_breaches = 0;
    };
    std::vector<DayAccum> day_accum_;
    int current_day_ = 0;

    const OperatingMode& current_mode() const { return device_.lut[mode_index_]; }

    DayAccum& day(double t) {
        auto idx = static_cast<std::size_t>(std::min(
            static_cast<double>(scenario_.duration_days - 1), std::floor(t / 86400.0)));
        return day_accum_[idx];
    }

    // -----------------------------------------------------------------
    // Setup
    // -----------------------------------------------------------------

    // Split-quality observations per model: every single-service
    // configuration probed solo under the top mode. Regions whose latency
    // exceeds the best by >30% are excluded from tailored searches.
    void build_prune_masks() {
        const OperatingMode& probe_mode = device_.lut.front();
        for (const auto& entry : *catalog_) {
            for (const auto& model : entry.family.variants) {
                if (prune_masks_.contains(model.name))
                    continue;
                ActiveWorkload solo = {{0, &model}};
                auto configs = single_service_configs(model.layer_count(),
                                                      device_.component_count(),
                                                      scenario_.max_partitions);
                std::vector<ConfigObservation> obs;
                obs.reserve(configs.size());
                for (const auto& parts : configs) {
                    Mapping m;
                    m.placements.push_back({0, parts});
                    obs.push_back({config_key(parts),
                                   oracle_evaluate(m, probe_mode, solo, device_).latency_ms[0]});
                }
                prune_masks_[model.name] = build_pruned_space(obs);
            }
        }
    }

    void init_state() {
        day_accum_.assign(static_cast<std::size_t>(scenario_.duration_days), {});
        for (auto& d : day_accum_)
            d.level_requests.assign(static_cast<std::size_t>(max_family_depth_), 0.0);

        current_ci_ = trace_.at(0.0);
        last_applied_ci_ = current_ci_;
        forecast_ = forecast(trace_, 0.0);
        switch (policy_.kind) {
        case PolicyKind::Ecomap:
            mode_index_ = mode_index_of(ci_to_mode(current_ci_, forecast_, device_.lut).mode_id);
            break;
        case PolicyKind::GreedyThroughput:
            mode_index_ = 0;
            break;
        case PolicyKind::PowerMin:
            mode_index_ = device_.lut.size() - 1;
            break;
        case PolicyKind::StaticMode:
            mode_index_ = mode_index_of(policy_.static_mode_id);
            break;
        }
        active_.clear();
        workload_.clear();
        mapping_ = {};
        refresh_eval();
        snapshot(0.0);
    }

    std::size_t mode_index_of(int mode_id) const {
        for (std::size_t i = 0; i < device_.lut.size(); ++i)
            if (device_.lut[i].mode_id == mode_id)
                return i;
        throw ConfigError("mode " + std::to_string(mode_id) + " not in LUT");
    }

    std::vector<SimEvent> build_events() const {
        std::vector<SimEvent> events;
        std::uint64_t seq = 0;
        for (std::size_t i = 0; i < trace_.samples.size(); ++i) {
            double t = trace_.samples[i].t_s;
            if (t > 0.0 && t < duration_s_)
                events.push_back({t, SimEvent::CiUpdate, i, seq++});
        }
        for (std::size_t i = 0; i < schedule_.services.size(); ++i) {
            const auto& spec = schedule_.services[i];
            events.push_back({spec.arrival_time_s, SimEvent::Arrival, i, seq++});
            if (spec.departure_time_s < duration_s_)
                events.push_back({spec.departure_time_s, SimEvent::Departure, i, seq++});
        }
        for (double t = scenario_.monitor_period_s; t < duration_s_;
             t += scenario_.monitor_period_s)
            events.push_back({t, SimEvent::Monitor, 0, seq++});
        std::sort(events.begin(), events.end());
        return events;
    }

    // -----------------------------------------------------------------
    // Accounting
    // -----------------------------------------------------------------

    void accrue_interval(double t0, double t1) {
        while (t0 < t1 - 1e-12) {
            double day_end = (std::floor(t0 / 86400.0) + 1.0) * 86400.0;
            double stop = std::min(t1, day_end);
            accrue_flat(t0, stop);
            t0 = stop;
        }
    }

    void accrue_flat(double t0, double t1) {
        double dt = t1 - t0;
        if (dt <= 0)
            return;
        DayAccum& d = day(t0);
        d.seconds += dt;
        accrue(eval_.total_power_w, dt, current_ci_, d.ledger);

        const double cap = current_mode().power_cap_w;
        bool power_breach = eval_.total_power_w > cap + 1e-9;
        bool latency_breach = false;
        for (std::size_t s = 0; s < active_.size(); ++s) {
            double lat = eval_.latency_ms[s];
            if (lat > active_[s].spec.latency_threshold_ms)
                latency_breach = true;
            double requests = dt * 1000.0 / lat;
            d.ledger.request_count += requests;
            d.ledger.latency_request_sum_ms += requests * lat;
            d.level_requests[static_cast<std::size_t>(active_[s].level - 1)] += requests;
        }
        if (power_breach) {
            ++d.power_breach_intervals;
            d.power_breach_s += dt;
        }
        if (latency_breach) {
            ++d.latency_breach_intervals;
            d.latency_breach_s += dt;
        }
        if (debug_)
            debug_->intervals.push_back(
                {t0, t1, eval_.total_power_w, cap, current_ci_, power_breach, latency_breach});
    }

    // -----------------------------------------------------------------
    // Event dispatch
    // -----------------------------------------------------------------

    void dispatch(const SimEvent& ev) {
        switch (ev.kind) {
        case SimEvent::CiUpdate:
            on_ci_update(ev.t_s, trace_.samples[ev.payload].ci);
            break;
        case SimEvent::Arrival:
            on_arrival(ev.t_s, schedule_.services[ev.payload]);
            break;
        case SimEvent::Departure:
            on_departure(ev.t_s, schedule_.services[ev.payload].service_id);
            break;
        case SimEvent::Monitor:
            on_monitor(ev.t_s);
            break;
        }
    }

    void on_ci_update(double t, double ci) {
        current_ci_ = ci;
        if (policy_.kind != PolicyKind::Ecomap)
            return;
        forecast_ = forecast(trace_, t);
        if (!hysteresis_gate(last_applied_ci_, ci, forecast_))
            return;
        double delta = std::abs(ci - last_applied_ci_);
        last_applied_ci_ = ci;
        const OperatingMode& next = ci_to_mode(ci, forecast_, device_.lut);
        if (next.mode_id == current_mode().mode_id)
            return;
        bool raising = next.power_cap_w > current_mode().power_cap_w;
        if (debug_)
            debug_->mode_changes.push_back(
                {t, current_mode().mode_id, next.mode_id, delta, forecast_.range()});
        ++day(t).mode_changes;
        mode_index_ = mode_index_of(next.mode_id);
        saturated_ = false;
        refresh_eval();
        if (!workload_.empty() && power_violated() && !remap_joint(t))
            flag_admission_breach(t);
        cascade(t);
        if (raising && scenario_.upgrades_enabled)
            try_upgrades(t);
        snapshot(t);
    }

    void on_arrival(double t, const ServiceSpec& spec) {
        for (const auto& a : active_)
            if (a.spec.service_id == spec.service_id)
                throw ConfigError("duplicate arrival for service " +
                                  std::to_string(spec.service_id));
        Active entry;
        entry.spec = spec;
        entry.spec.latency_threshold_ms = scenario_.latency_threshold_ms;
        entry.spec.accuracy_tolerance_pp = scenario_.accuracy_tolerance_pp;
        entry.level = 1;
        entry.family = &find_family(*catalog_, spec.family_id);
        auto pos = std::lower_bound(active_.begin(), active_.end(), entry.spec.service_id,
                                    [](const Active& a, std::uint32_t id) {
                                        return a.spec.service_id < id;
                                    });
        std::size_t index = static_cast<std::size_t>(pos - active_.begin());
        active_.insert(pos, entry);
        mapping_.placements.insert(
            mapping_.placements.begin() + static_cast<std::ptrdiff_t>(index),
            ServicePlacement{spec.service_id,
                             {{0, entry.family->level(1).layer_count(), 0}}});
        rebuild_workload();
        saturated_ = false;

        if (policy_.kind == PolicyKind::PowerMin) {
            if (!powermin_admit(t))
                flag_admission_breach(t);
        } else {
            if (!remap_joint(t))
                flag_admission_breach(t);
        }
        if (policy_.kind == PolicyKind::Ecomap)
            cascade(t);
        snapshot(t);
    }

    void on_departure(double t, std::uint32_t service_id) {
        for (std::size_t i = 0; i < active_.size(); ++i) {
            if (active_[i].spec.service_id != service_id)
                continue;
            active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(i));
            mapping_.placements.erase(mapping_.placements.begin() +
                                      static_cast<std::ptrdiff_t>(i));
            rebuild_workload();
            saturated_ = false;
            refresh_eval();
            if (policy_.kind == PolicyKind::Ecomap && scenario_.upgrades_enabled)
                try_upgrades(t);
            snapshot(t);
            return;
        }
    }

    void on_monitor(double t) {
        if (policy_.kind != PolicyKind::Ecomap || saturated_ || workload_.empty())
            return;
        if (latency_violators_exist() || power_violated())
            cascade(t);
    }

    // -----------------------------------------------------------------
    // State helpers
    // -----------------------------------------------------------------

    void rebuild_workload() {
        workload_.clear();
        for (const auto& a : active_)
            workload_.push_back({a.spec.service_id, &a.family->level(a.level)});
    }

    void refresh_eval() {
        eval_ = oracle_evaluate(mapping_, current_mode(), workload_, device_);
    }

    void snapshot(double t) {
        if (!debug_)
            return;
        RunDebug::Snapshot snap;
        snap.t = t;
        snap.mode_id = current_mode().mode_id;
        snap.mapping = mapping_;
        for (const auto& a : active_)
            snap.levels.push_back({a.spec.service_id, a.level});
        debug_->snapshots.push_back(std::move(snap));
    }

    bool power_violated() const {
        return eval_.total_power_w > current_mode().power_cap_w + 1e-9;
    }

    bool latency_violators_exist() const {
        for (std::size_t s = 0; s < active_.size(); ++s)
            if (eval_.latency_ms[s] > active_[s].spec.latency_threshold_ms)
                return true;
        return false;
    }

    void flag_admission_breach(double t) { ++day(t).admission_breaches; }

    // -----------------------------------------------------------------
    // Search plumbing
    // -----------------------------------------------------------------

    Evaluator estimator_evaluator(const OperatingMode& mode) {
        ValueWeights weights = scenario_.weights;
        if (policy_.kind == PolicyKind::PowerMin) {
            weights.w_latency = 0.25;
            weights.w_power = 1.0;
        }
        weights.power_threshold_class = estimator_->power_threshold_class(mode.power_cap_w);
        const ActiveWorkload* wl = &workload_;
        const DeviceModel* dev = &device_;
        const Estimator* est = estimator_;
        int n_classes = estimator_->n_classes;
        OperatingMode mode_copy = mode;
        return [wl, dev, est, weights, n_classes, mode_copy](const Mapping& m) {
            return value(est->predict(m, mode_copy, *wl, *dev), weights, n_classes);
        };
    }

    // Runs the joint LA-MCTS search under the current mode, then commits
    // the best candidate that the oracle confirms within the power cap.
    // Ties on value break toward lower oracle power, then mapping order.
    bool remap_joint(double t) {
        (void)t;
        if (workload_.empty()) {
            mapping_ = {};
            refresh_eval();
            return true;
        }
        MappingSpace space(workload_, device_.component_count(), scenario_.max_partitions,
                           scenario_.enumeration_cap);
        SearchResult res =
            lamcts_search(space, estimator_evaluator(current_mode()), scenario_.budget,
                          search_rng_);
        const double cap = current_mode().power_cap_w;
        int checked = 0;
        std::size_t i = 0;
        while (i < res.ranked.size() && checked < scenario_.oracle_verify_cap) {
            std::size_t j = i;
            std::optional<Mapping> best_in_tier;
            double best_power = std::numeric_limits<double>::max();
            while (j < res.ranked.size() && res.ranked[j].first == res.ranked[i].first) {
                if (checked++ >= scenario_.oracle_verify_cap)
                    break;
                EvaluationResult ev =
                    oracle_evaluate(res.ranked[j].second, current_mode(), workload_, device_);
                if (ev.total_power_w <= cap + 1e-9 && ev.total_power_w < best_power) {
                    best_power = ev.total_power_w;
                    best_in_tier = res.ranked[j].second;
                }
                ++j;
            }
            if (best_in_tier) {
                mapping_ = std::move(*best_in_tier);
                refresh_eval();
                return true;
            }
            i = j;
        }
        // nothing oracle-feasible: keep the best-effort candidate, caller flags
        if (!res.ranked.empty()) {
            mapping_ = res.ranked.front().second;
            refresh_eval();
        } else if (res.best) {
            mapping_ = *res.best;
            refresh_eval();
        } else {
            refresh_eval();
        }
        return false;
    }

    // PowerMin scans modes from the lowest power cap upward and commits
    // the first mode that admits an oracle-feasible mapping.
    bool powermin_admit(double t) {
        for (std::size_t i = device_.lut.size(); i > 0; --i) {
            mode_index_ = i - 1;
            if (remap_joint(t))
                return true;
        }
        mode_index_ = 0;
        return remap_joint(t);
    }

    // Tailored re-map of one service: estimator-guided first, oracle-backed
    // retry when the commit check fails.
    bool retarget_service(std::size_t index) {
        const auto& model = *workload_[index].model;
        Mapping base = mapping_;
        base.placements[index].partitions = {{0, model.layer_count(), 0}};
        auto mask_it = prune_masks_.find(model.name);
        const PruneMask empty_mask;
        const PruneMask& mask =
            mask_it == prune_masks_.end() ? empty_mask : mask_it->second;

        const ActiveWorkload* wl_tie = &workload_;
        const DeviceModel* dev_tie = &device_;
        const OperatingMode mode_tie = current_mode();
        Evaluator power_tie = [wl_tie, dev_tie, mode_tie](const Mapping& m) {
            return oracle_evaluate(m, mode_tie, *wl_tie, *dev_tie).total_power_w;
        };
        TailoredResult res = tailored_search(base, index, workload_, device_.component_count(),
                                             scenario_.max_partitions, mask,
                                             estimator_evaluator(current_mode()), power_tie);
        const double cap = current_mode().power_cap_w;
        if (res.best) {
            EvaluationResult ev = oracle_evaluate(*res.best, current_mode(), workload_, device_);
            if (ev.total_power_w <= cap + 1e-9) {
                mapping_ = std::move(*res.best);
                refresh_eval();
                return true;
            }
        }
        // oracle-backed retry: minimize latency of the changed service
        // among power-feasible configurations
        const ActiveWorkload* wl = &workload_;
        const DeviceModel* dev = &device_;
        const OperatingMode mode_copy = current_mode();
        Evaluator oracle_eval = [wl, dev, mode_copy, cap, index](const Mapping& m) {
            EvaluationResult ev = oracle_evaluate(m, mode_copy, *wl, *dev);
            if (ev.total_power_w > cap + 1e-9)
                return kInfeasible;
            return -ev.latency_ms[index];
        };
        TailoredResult res2 = tailored_search(base, index, workload_, device_.component_count(),
                                              scenario_.max_partitions, mask, oracle_eval);
        if (res2.best) {
            mapping_ = std::move(*res2.best);
            refresh_eval();
            return true;
        }
        // keep a valid placement even when nothing is feasible
        mapping_ = std::move(base);
        refresh_eval();
        return false;
    }

    // -----------------------------------------------------------------
    // Mixed-quality cascade
    // -----------------------------------------------------------------

    int downgrade_budget() const {
        int total = 0;
        for (const auto& a : active_)
            total += a.family->depth() - a.level;
        return total;
    }

    bool downgradable(const Active& a) const {
        if (a.level >= a.family->depth())
            return false;
        double drop = a.family->level(1).accuracy_pct - a.family->level(a.level + 1).accuracy_pct;
        return drop <= a.spec.accuracy_tolerance_pp + 1e-12;
    }

    // Picks the worst latency violator; when its alternatives are
    // exhausted (or the trigger is power), falls back to the most
    // computationally intensive downgradable service.
    std::optional<std::size_t> pick_cascade_target(bool latency_driven) {
        std::optional<std::size_t> target;
        if (latency_driven) {
            double worst_ratio = 1.0;
            for (std::size_t s = 0; s < active_.size(); ++s) {
                double ratio = eval_.latency_ms[s] / active_[s].spec.latency_threshold_ms;
                if (ratio > worst_ratio + 1e-12) {
                    worst_ratio = ratio;
                    target = s;
                }
            }
            if (target && downgradable(active_[*target]))
                return target;
            target.reset();
        }
        double heaviest = -1.0;
        for (std::size_t s = 0; s < active_.size(); ++s) {
            if (!downgradable(active_[s]))
                continue;
            double cost = workload_[s].model->total_cost_mflops();
            if (cost > heaviest + 1e-12) {
                heaviest = cost;
                target = s;
            }
        }
        return target;
    }

    // Worst-violator-first mixed-quality substitution: one model change per
    // step, re-measured through a tailored single-service re-map, bounded
    // by the total remaining downgrade depth.
    void cascade(double t) {
        if (policy_.kind != PolicyKind::Ecomap)
            return;
        int guard = downgrade_budget();
        while (guard-- > 0) {
            bool power_bad = power_violated();
            bool latency_bad = latency_violators_exist();
            if (!power_bad && !latency_bad) {
                saturated_ = false;
                return;
            }
            auto target = pick_cascade_target(latency_bad);
            if (!target) {
                saturated_ = true; // exhausted: breach persists, flagged via accounting
                return;
            }
            auto& svc = active_[*target];
            int from_level = svc.level;
            ++svc.level;
            rebuild_workload();
            retarget_service(*target);
            ++day(t).cascade_steps;
            if (debug_)
                debug_->cascade_steps.push_back(
                    {t, svc.spec.service_id, from_level, svc.level,
                     power_bad && !latency_bad ? "power" : "latency",
                     svc.family->level(1).accuracy_pct -
                         svc.family->level(svc.level).accuracy_pct});
            snapshot(t);
        }
        saturated_ = latency_violators_exist() || power_violated();
    }

    // Restores degraded services toward level 1 (most degraded first) when
    // capacity allows; each restored step must stay feasible on both power
    // and latency.
    void try_upgrades(double t) {
        if (workload_.empty())
            return;
        bool improved = true;
        while (improved) {
            improved = false;
            std::vector<std::size_t> order(active_.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return active_[a].level > active_[b].level;
            });
            for (std::size_t s : order) {
                if (active_[s].level <= 1)
                    continue;
                Active saved = active_[s];
                Mapping saved_mapping = mapping_;
                EvaluationResult saved_eval = eval_;
                --active_[s].level;
                rebuild_workload();
                bool ok = retarget_service(s) && !latency_violators_exist() && !power_violated();
                if (ok) {
                    ++day(t).upgrade_steps;
                    if (debug_)
                        debug_->cascade_steps.push_back({t, active_[s].spec.service_id,
                                                         saved.level, active_[s].level,
                                                         "upgrade", 0.0});
                    snapshot(t);
                    improved = true;
                    break;
                }
                active_[s] = saved;
                mapping_ = std::move(saved_mapping);
                rebuild_workload();
                eval_ = std::move(saved_eval);
            }
        }
    }

    // -----------------------------------------------------------------
    // Report
    // -----------------------------------------------------------------

    SimulationReport finalize_report() {
        SimulationReport report;
        report.scenario_name = scenario_.name;
        report.policy = policy_.name();
        report.seed = seed_;
        report.duration_s = duration_s_;
        DayReport totals;
        totals.day = -1;
        totals.level_requests.assign(static_cast<std::size_t>(max_family_depth_), 0.0);
        for (int d = 0; d < scenario_.duration_days; ++d) {
            const DayAccum& a = day_accum_[static_cast<std::size_t>(d)];
            DayReport r;
            r.day = d;
            r.seconds = a.seconds;
            r.energy_kwh = a.ledger.energy_kwh;
            r.emissions_g = a.ledger.emissions_g;
            r.mean_power_w = a.seconds > 0 ? a.ledger.energy_kwh * 3.6e6 / a.seconds : 0.0;
            r.mean_latency_ms = a.ledger.mean_latency_ms();
            r.cdp = cdp(a.ledger, r.mean_latency_ms);
            r.requests = a.ledger.request_count;
            r.level_requests = a.level_requests;
            r.power_breach_intervals = a.power_breach_intervals;
            r.power_breach_s = a.power_breach_s;
            r.latency_breach_intervals = a.latency_breach_intervals;
            r.latency_breach_s = a.latency_breach_s;
            r.mode_changes = a.mode_changes;
            r.cascade_steps = a.cascade_steps;
            r.upgrade_steps = a.upgrade_steps;
            r.admission_breaches = a.admission_breaches;
            report.days.push_back(r);

            totals.seconds += r.seconds;
            totals.energy_kwh += r.energy_kwh;
            totals.emissions_g += r.emissions_g;
            totals.requests += r.requests;
            for (std::size_t l = 0; l < r.level_requests.size(); ++l)
                totals.level_requests[l] += r.level_requests[l];
            totals.power_breach_intervals += r.power_breach_intervals;
            totals.power_breach_s += r.power_breach_s;
            totals.latency_breach_intervals += r.latency_breach_intervals;
            totals.latency_breach_s += r.latency_breach_s;
            totals.mode_changes += r.mode_changes;
            totals.cascade_steps += r.cascade_steps;
            totals.upgrade_steps += r.upgrade_steps;
            totals.admission_breaches += r.admission_breaches;
        }
        double lat_sum = 0.0;
        for (const auto& d : day_accum_)
            lat_sum += d.ledger.latency_request_sum_ms;
        totals.mean_power_w =
            totals.seconds > 0 ? totals.energy_kwh * 3.6e6 / totals.seconds : 0.0;
        totals.mean_latency_ms = totals.requests > 0 ? lat_sum / totals.requests : 0.0;
        totals.cdp = totals.emissions_g * totals.mean_latency_ms / 1000.0;
        report.totals = totals;
        return report;
    }
};

// ---------------------------------------------------------------------------
// Scenario entry point
// ---------------------------------------------------------------------------

struct RunInputs {
    ServiceCatalog catalog;
    DeviceModel device;
    Estimator estimator;
    CiTrace trace;
    WorkloadSchedule schedule;
};

// Resolves a scenario's external references (trace, LUT, catalog,
// estimator) into concrete inputs. Everything is a pure function of the
// scenario plus the run seed. A caller holding an already-trained
// estimator for the same catalog/device can pass it to skip training.
inline RunInputs prepare_run(const Scenario& scenario, std::uint64_t seed,
                             const Estimator* pretrained = nullptr) {
    RunInputs inputs;
    inputs.catalog =
        scenario.catalog_path.empty() ? default_catalog() : load_catalog(scenario.catalog_path);
    ModeLut lut =
        scenario.lut_path.empty() ? default_mode_lut() : load_mode_lut(scenario.lut_path);
    inputs.device = DeviceModel::standard(std::move(lut));
    if (!scenario.trace_path.empty())
        inputs.trace = load_ci_trace(scenario.trace_path);
    else
        inputs.trace = generate_ci_trace(trace_profile(scenario.trace_profile), seed);
    if (inputs.trace.end_time() < scenario.duration_days * 86400.0 + 86400.0)
        throw ConfigError("CI trace must cover the scenario duration plus a 24h forecast window");
    if (pretrained) {
        inputs.estimator = *pretrained;
    } else if (!scenario.estimator_path.empty()) {
        inputs.estimator = Estimator::load(scenario.estimator_path);
    } else {
        DatasetGenParams gen;
        gen.per_mode_count = scenario.auto_train_per_mode;
        gen.max_partitions = std::max(scenario.max_partitions, 2);
        gen.min_dnns = 1; // runtime arrivals start from an empty system
        TrainingDataset dataset = generate_dataset(inputs.catalog, inputs.device, gen,
                                                   derive_seed(seed, 0xe571ULL));
        TrainParams tp;
        tp.n_classes = scenario.quantiles;
        tp.min_samples_per_class = 1;
        inputs.estimator = train(dataset, tp);
    }
    ScheduleParams sp = scenario.schedule;
    sp.duration_s = scenario.duration_days * 86400.0;
    inputs.schedule = schedule_workload(inputs.catalog, sp, seed);
    return inputs;
}

inline SimulationReport run_scenario(const Scenario& scenario, Policy policy, std::uint64_t seed,
                                     const RunInputs& inputs, RunDebug* debug = nullptr) {
    RuntimeManager manager(scenario, policy, seed, inputs.catalog, inputs.device,
                           inputs.estimator, inputs.trace, inputs.schedule, debug);
    return manager.run();
}

inline SimulationReport run_scenario(const Scenario& scenario, Policy policy, std::uint64_t seed,
                                     RunDebug* debug = nullptr) {
    RunInputs inputs = prepare_run(scenario, seed);
    return run_scenario(scenario, policy, seed, inputs, debug);
}

} // namespace ecomap
