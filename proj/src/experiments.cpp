#include "autopath/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "autopath/planner.hpp"
#include "json.hpp"

namespace autopath::experiments {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "N/A";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

ClosedLoopInput make_input(const RoadMap& map, const ScenarioSpec& scenario,
                           const ToolkitConfig& config) {
    ClosedLoopInput in;
    in.map = &map;
    in.scenario = scenario;
    in.planner = config.planner;
    in.mpc = config.mpc;
    in.footprint = config.footprint;
    in.limits = config.limits;
    in.sim = config.sim;
    return in;
}

}  // namespace

// ---------------------------------------------------------------------------
// SCP iteration study

ScpReport run_scp_experiment(const RoadMap& map, const ScenarioSpec& root,
                             const ToolkitConfig& config, const std::vector<int>& counts,
                             int scenario_count, int repeats, std::uint64_t seed) {
    ScpReport report;
    report.counts = counts;
    report.scenario_count = scenario_count;
    report.repeats = repeats;
    report.seed = seed;
    report.config = config;
    report.root_scenario_json = serialize_scenario(root);

    const auto scenarios = generate_perturbed_scenarios(root, map, scenario_count, seed);
    for (int si = 0; si < scenario_count; ++si) {
        for (std::size_t ci = 0; ci < counts.size(); ++ci) {
            for (int rep = 0; rep < repeats; ++rep) {
                ScenarioSpec scenario = scenarios[si];
                scenario.rng_seed += 97ULL * static_cast<std::uint64_t>(rep);
                ClosedLoopInput in = make_input(map, scenario, config);
                in.mpc.scp_iterations = counts[ci];
                const RunResult run = run_closed_loop(in);
                ScpRow row;
                row.scenario = si;
                row.iterations = counts[ci];
                row.repeat = rep;
                row.seed = scenario.rng_seed;
                row.success = run.metrics.success;
                row.min_obstacle_distance = run.metrics.min_obstacle_distance;
                row.mean_tick_scp_s = run.metrics.mean_tick_scp_s;
                row.total_scp_s = run.metrics.mpc_time_s;
                row.sim_time_s = run.metrics.sim_time_s;
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

std::string scp_rank_matrix_csv(const ScpReport& report) {
    std::string out = "scenario";
    for (int c : report.counts) out += ",rank_k" + std::to_string(c);
    out += "\n";
    for (int si = 0; si < report.scenario_count; ++si) {
        // Mean min distance per count over repeats.
        std::vector<std::pair<double, int>> by_count;
        for (std::size_t ci = 0; ci < report.counts.size(); ++ci) {
            double sum = 0.0;
            int n = 0;
            for (const ScpRow& row : report.rows) {
                if (row.scenario == si && row.iterations == report.counts[ci]) {
                    sum += row.min_obstacle_distance;
                    ++n;
                }
            }
            by_count.emplace_back(n ? sum / n : 0.0, report.counts[ci]);
        }
        // Descending distance; ties favour the smaller count.
        std::vector<int> order(by_count.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (by_count[a].first != by_count[b].first)
                return by_count[a].first > by_count[b].first;
            return by_count[a].second < by_count[b].second;
        });
        std::vector<int> rank(by_count.size(), 0);
        for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = static_cast<int>(pos) + 1;
        out += std::to_string(si);
        for (std::size_t ci = 0; ci < report.counts.size(); ++ci) {
            out += "," + std::to_string(rank[ci]);
        }
        out += "\n";
    }
    return out;
}

std::string scp_timing_csv(const ScpReport& report) {
    std::string out = "iterations,mean_tick_scp_ms,std_tick_scp_ms,mean_min_obstacle_distance\n";
    for (int c : report.counts) {
        std::vector<double> ticks;
        double dist_sum = 0.0;
        for (const ScpRow& row : report.rows) {
            if (row.iterations != c) continue;
            ticks.push_back(row.mean_tick_scp_s * 1e3);
            dist_sum += row.min_obstacle_distance;
        }
        double mean = 0.0, var = 0.0;
        for (double t : ticks) mean += t;
        mean /= ticks.empty() ? 1 : ticks.size();
        for (double t : ticks) var += (t - mean) * (t - mean);
        var /= ticks.empty() ? 1 : ticks.size();
        out += std::to_string(c) + "," + fmt(mean) + "," + fmt(std::sqrt(var)) + "," +
               fmt(ticks.empty() ? 0.0 : dist_sum / ticks.size()) + "\n";
    }
    return out;
}

std::string scp_report_json(const ScpReport& report) {
    ordered_json doc;
    doc["experiment"] = "scp_iterations";
    doc["seed"] = report.seed;
    doc["counts"] = report.counts;
    doc["scenario_count"] = report.scenario_count;
    doc["repeats"] = report.repeats;
    doc["config"] = ordered_json::parse(serialize_config(report.config));
    doc["root_scenario"] = ordered_json::parse(report.root_scenario_json);
    doc["rows"] = ordered_json::array();
    for (const ScpRow& r : report.rows) {
        doc["rows"].push_back({{"scenario", r.scenario},
                               {"iterations", r.iterations},
                               {"repeat", r.repeat},
                               {"seed", r.seed},
                               {"success", r.success},
                               {"min_obstacle_distance", r.min_obstacle_distance},
                               {"mean_tick_scp_s", r.mean_tick_scp_s},
                               {"total_scp_s", r.total_scp_s},
                               {"sim_time_s", r.sim_time_s}});
    }
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Planner comparison

namespace {

CompareRow plan_once(const RoadMap& map, const ScenarioSpec& scenario,
                     const ToolkitConfig& config, PlannerMode mode, const std::string& mode_name,
                     int trial, std::uint64_t seed) {
    PlannerConfig pcfg = config.planner;
    pcfg.rng_seed = seed;
    HybridPlanner planner(map, scenario.build_obstacles(), config.footprint, pcfg, mode);
    const auto t0 = std::chrono::steady_clock::now();
    const PlanResult result = planner.plan(scenario.start, scenario.destination);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    CompareRow row;
    row.scenario = scenario.name;
    row.mode = mode_name;
    row.trial = trial;
    row.seed = seed;
    row.success = result.path.has_value();
    row.time_ms = ms;
    row.length = result.path ? result.path->cost : std::nan("");
    return row;
}

}  // namespace

CompareReport run_compare_experiment(const RoadMap& map_a, const ScenarioSpec& scenario_a,
                                     const RoadMap& map_b, const ScenarioSpec& scenario_b,
                                     const ToolkitConfig& config, int trials,
                                     std::uint64_t seed) {
    if (trials < 1) throw ConfigError("compare experiment needs trials >= 1");
    CompareReport report;
    report.trials = trials;
    report.seed = seed;
    report.config = config;

    const std::pair<const RoadMap*, const ScenarioSpec*> cases[2] = {{&map_a, &scenario_a},
                                                                     {&map_b, &scenario_b}};
    for (const auto& [map, scenario] : cases) {
        // The lattice search is deterministic: one run.
        report.rows.push_back(
            plan_once(*map, *scenario, config, PlannerMode::LatticeOnly, "lattice", 0, seed));
        for (int t = 0; t < trials; ++t) {
            report.rows.push_back(plan_once(*map, *scenario, config, PlannerMode::Hybrid,
                                            "hybrid", t, seed + 11ULL * t));
        }
        for (int t = 0; t < trials; ++t) {
            report.rows.push_back(plan_once(*map, *scenario, config, PlannerMode::FreeSpaceOnly,
                                            "free_space", t, seed + 13ULL * t));
        }
    }
    return report;
}

std::string compare_csv(const CompareReport& report) {
    std::string out = "scenario,mode,trial,seed,success,time_ms,length_m\n";
    for (const CompareRow& r : report.rows) {
        out += r.scenario + "," + r.mode + "," + std::to_string(r.trial) + "," +
               std::to_string(r.seed) + "," + (r.success ? "1" : "0") + "," + fmt(r.time_ms) +
               "," + fmt(r.length) + "\n";
    }
    return out;
}

double median_time_ms(const CompareReport& report, const std::string& scenario,
                      const std::string& mode) {
    std::vector<double> times;
    for (const CompareRow& r : report.rows) {
        if (r.scenario == scenario && r.mode == mode) times.push_back(r.time_ms);
    }
    if (times.empty()) return std::nan("");
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

std::string compare_report_json(const CompareReport& report) {
    ordered_json doc;
    doc["experiment"] = "planner_compare";
    doc["seed"] = report.seed;
    doc["trials"] = report.trials;
    doc["config"] = ordered_json::parse(serialize_config(report.config));
    doc["rows"] = ordered_json::array();
    for (const CompareRow& r : report.rows) {
        ordered_json jr = {{"scenario", r.scenario}, {"mode", r.mode},   {"trial", r.trial},
                           {"seed", r.seed},         {"success", r.success},
                           {"time_ms", r.time_ms}};
        if (std::isnan(r.length)) {
            jr["length_m"] = nullptr;
        } else {
            jr["length_m"] = r.length;
        }
        doc["rows"].push_back(std::move(jr));
    }
    return doc.dump(2);
}

// ---------------------------------------------------------------------------
// Constraint trials

TrialsReport run_trials_experiment(const RoadMap& map, const ScenarioSpec& scenario,
                                   const ToolkitConfig& config, int trials, std::uint64_t seed) {
    if (trials < 1) throw ConfigError("trials experiment needs trials >= 1");
    TrialsReport report;
    report.trials = trials;
    report.seed = seed;
    report.config = config;
    for (int t = 0; t < trials; ++t) {
        ScenarioSpec s = scenario;
        s.rng_seed = seed + static_cast<std::uint64_t>(t);
        const RunResult run = run_closed_loop(make_input(map, s, config));
        report.rows.push_back({t, s.rng_seed, run.metrics});
    }
    return report;
}

std::string trials_csv(const TrialsReport& report) {
    std::string out =
        "trial,seed,success,failure_reason,min_obstacle_distance,max_long_accel,max_long_jerk,"
        "max_lat_accel,max_steering_angle,max_steering_rate,path_length,sim_time_s\n";
    RunMetrics maxima;
    maxima.min_obstacle_distance = kInfCost;
    int successes = 0;
    for (const TrialsRow& r : report.rows) {
        const RunMetrics& m = r.metrics;
        out += std::to_string(r.trial) + "," + std::to_string(r.seed) + "," +
               (m.success ? "1" : "0") + "," + (m.failure_reason.empty() ? "-" : m.failure_reason) +
               "," + fmt(m.min_obstacle_distance) + "," + fmt(m.max_long_accel) + "," +
               fmt(m.max_long_jerk) + "," + fmt(m.max_lat_accel) + "," +
               fmt(m.max_steering_angle) + "," + fmt(m.max_steering_rate) + "," +
               fmt(m.path_length) + "," + fmt(m.sim_time_s) + "\n";
        successes += m.success ? 1 : 0;
        maxima.min_obstacle_distance =
            std::min(maxima.min_obstacle_distance, m.min_obstacle_distance);
        maxima.max_long_accel = std::max(maxima.max_long_accel, m.max_long_accel);
        maxima.max_long_jerk = std::max(maxima.max_long_jerk, m.max_long_jerk);
        maxima.max_lat_accel = std::max(maxima.max_lat_accel, m.max_lat_accel);
        maxima.max_steering_angle = std::max(maxima.max_steering_angle, m.max_steering_angle);
        maxima.max_steering_rate = std::max(maxima.max_steering_rate, m.max_steering_rate);
    }
    const VehicleLimits& lim = report.config.limits;
    out += "maximum_across_trials,-," + std::to_string(successes) + "/" +
           std::to_string(report.trials) + ",-," + fmt(maxima.min_obstacle_distance) + "," +
           fmt(maxima.max_long_accel) + "," + fmt(maxima.max_long_jerk) + "," +
           fmt(maxima.max_lat_accel) + "," + fmt(maxima.max_steering_angle) + "," +
           fmt(maxima.max_steering_rate) + ",-,-\n";
    out += "constraint,-,-,-,-," + fmt(lim.long_accel_max) + "," + fmt(lim.long_jerk_max) + "," +
           fmt(lim.lat_accel_max) + "," + fmt(lim.steering_max) + ",N/A,-,-\n";
    return out;
}

std::string trials_report_json(const TrialsReport& report) {
    ordered_json doc;
    doc["experiment"] = "constraint_trials";
    doc["seed"] = report.seed;
    doc["trials"] = report.trials;
    doc["config"] = ordered_json::parse(serialize_config(report.config));
    doc["rows"] = ordered_json::array();
    for (const TrialsRow& r : report.rows) {
        const RunMetrics& m = r.metrics;
        doc["rows"].push_back({{"trial", r.trial},
                               {"seed", r.seed},
                               {"success", m.success},
                               {"failure_reason", m.failure_reason},
                               {"min_obstacle_distance", m.min_obstacle_distance},
                               {"max_long_accel", m.max_long_accel},
                               {"max_long_jerk", m.max_long_jerk},
                               {"max_lat_accel", m.max_lat_accel},
                               {"max_steering_angle", m.max_steering_angle},
                               {"max_steering_rate", m.max_steering_rate},
                               {"path_length", m.path_length},
                               {"sim_time_s", m.sim_time_s},
                               {"ticks", m.ticks},
                               {"replans", m.replans}});
    }
    return doc.dump(2);
}

}  // namespace autopath::experiments
