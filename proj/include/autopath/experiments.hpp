#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "autopath/config.hpp"
#include "autopath/roadmap.hpp"
#include "autopath/sim.hpp"

namespace autopath::experiments {

// ---------------------------------------------------------------------------
// SCP iteration study: perturbed scenarios x iteration counts, closed loop.

struct ScpRow {
    int scenario = 0;
    int iterations = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double min_obstacle_distance = 0.0;
    double mean_tick_scp_s = 0.0;
    double total_scp_s = 0.0;
    double sim_time_s = 0.0;
};

struct ScpReport {
    std::vector<int> counts;
    int scenario_count = 0;
    int repeats = 1;
    std::uint64_t seed = 0;
    std::vector<ScpRow> rows;
    ToolkitConfig config;
    std::string root_scenario_json;
};

ScpReport run_scp_experiment(const RoadMap& map, const ScenarioSpec& root,
                             const ToolkitConfig& config, const std::vector<int>& counts,
                             int scenario_count, int repeats, std::uint64_t seed);

// Per-scenario descending rank of min obstacle distance across counts
// (1 = safest).
std::string scp_rank_matrix_csv(const ScpReport& report);

// Mean and standard deviation of the per-tick SCP time for each count.
std::string scp_timing_csv(const ScpReport& report);

std::string scp_report_json(const ScpReport& report);

// ---------------------------------------------------------------------------
// Planner comparison: hybrid vs lattice-only vs free-space-only, planning only.

struct CompareRow {
    std::string scenario;
    std::string mode;  // hybrid | lattice | free_space
    int trial = 0;
    std::uint64_t seed = 0;
    bool success = false;
    double time_ms = 0.0;
    double length = 0.0;  // NaN when no solution
};

struct CompareReport {
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<CompareRow> rows;
    ToolkitConfig config;
};

CompareReport run_compare_experiment(const RoadMap& map_a, const ScenarioSpec& scenario_a,
                                     const RoadMap& map_b, const ScenarioSpec& scenario_b,
                                     const ToolkitConfig& config, int trials,
                                     std::uint64_t seed);

std::string compare_csv(const CompareReport& report);
std::string compare_report_json(const CompareReport& report);

double median_time_ms(const CompareReport& report, const std::string& scenario,
                      const std::string& mode);

// ---------------------------------------------------------------------------
// Constraint study: repeated closed-loop trials against the vehicle limits.

struct TrialsRow {
    int trial = 0;
    std::uint64_t seed = 0;
    RunMetrics metrics;
};

struct TrialsReport {
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<TrialsRow> rows;
    ToolkitConfig config;
};

TrialsReport run_trials_experiment(const RoadMap& map, const ScenarioSpec& scenario,
                                   const ToolkitConfig& config, int trials, std::uint64_t seed);

// Per-trial metrics plus a maxima-across-trials row compared to the limits.
std::string trials_csv(const TrialsReport& report);
std::string trials_report_json(const TrialsReport& report);

}  // namespace autopath::experiments
