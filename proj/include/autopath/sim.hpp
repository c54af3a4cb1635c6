#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "autopath/collision.hpp"
#include "autopath/geometry.hpp"
#include "autopath/mpc.hpp"
#include "autopath/planner.hpp"
#include "autopath/roadmap.hpp"

namespace autopath {

// Table-level vehicle constraints; every metric is checked against these.
struct VehicleLimits {
    double long_accel_max = 3.0;   // m/s^2
    double long_jerk_max = 0.9;    // m/s^3
    double lat_accel_max = 3.0;    // m/s^2
    double steering_max = 0.52;    // rad
};

struct SimConfig {
    double control_rate_hz = 10.0;
    double plant_rate_hz = 100.0;
    double tau_steer = 0.2;                // first-order steering lag
    double replan_lateral_deviation = 1.5;  // metres
    double goal_tolerance = 1.0;            // metres
    double sim_timeout_s = 120.0;
    // The command governor ramps accel at this fraction of the jerk limit so
    // plant-rate finite differences stay strictly inside the constraint.
    double governor_jerk_fraction = 0.95;
};

struct PlantState {
    Pose2 pose;
    double v = 0.0;
    double psi = 0.0;
    double t = 0.0;
};

// Kinematic bicycle with first-order steering actuation, integrated with RK4.
// Inputs are saturated before integration: |a| at the accel limit and the
// steering target at the steering-angle limit.
class Plant {
public:
    Plant(const VehicleLimits& limits, double tau_steer, double wheelbase)
        : limits_(limits), tau_steer_(tau_steer), wheelbase_(wheelbase) {}

    PlantState step(const PlantState& state, const ControlInput& control, double dt) const;

    // Same integration with an explicit absolute steering target, used by the
    // closed loop to hold one target across the substeps of a control tick.
    PlantState step_toward(const PlantState& state, double a_cmd, double psi_target,
                           double dt) const;

private:
    VehicleLimits limits_;
    double tau_steer_;
    double wheelbase_;
};

struct Perturbation {
    double sigma = 1.0;
    bool keep_on_road = true;
};

// Obstacle shape as authored in the scenario file. Circles become regular
// 16-gons, boxes axis-aligned rectangles.
struct ObstacleShape {
    std::string id;
    std::string kind;  // circle | box | polygon
    Vec2 center = Vec2::Zero();
    double radius = 0.3;
    Vec2 size = Vec2::Zero();
    std::vector<Vec2> vertices;  // polygon kind only

    PolygonObstacle to_polygon() const;
    ObstacleShape translated(const Vec2& offset) const;
    Vec2 reference_point() const;  // centre used for the on-road check
};

struct ScenarioSpec {
    std::string name;
    std::string map_ref;  // path to the map file, relative to the scenario file
    Pose2 start;
    Pose2 destination;
    std::vector<ObstacleShape> obstacles;
    double v_ref = 5.0;
    std::uint64_t rng_seed = 1;
    std::optional<Perturbation> perturbation;

    ObstacleSet build_obstacles() const;
};

// "autopath-scenario/1" JSON.
ScenarioSpec load_scenario(const std::string& json_text);
std::string serialize_scenario(const ScenarioSpec& scenario);

// Independent 2-D Gaussian displacement per obstacle, rejection-resampled
// onto the road when keep_on_road is set. Fully determined by seed.
std::vector<ScenarioSpec> generate_perturbed_scenarios(const ScenarioSpec& root,
                                                       const RoadMap& map, int count,
                                                       std::uint64_t seed);

struct TraceSample {
    double t = 0.0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;
    double psi = 0.0;
    double a_cmd = 0.0;
    double dpsi_cmd = 0.0;
    double min_obst_dist = 0.0;
};

struct RunMetrics {
    bool success = false;
    std::string failure_reason;  // empty on success: NoPath | Collision | Timeout | ConstraintViolation
    double min_obstacle_distance = kInfCost;
    double max_long_accel = 0.0;
    double max_long_jerk = 0.0;
    double max_lat_accel = 0.0;
    double max_steering_angle = 0.0;
    double max_steering_rate = 0.0;
    double path_length = 0.0;
    double sim_time_s = 0.0;
    int ticks = 0;
    int replans = 0;
    double plan_time_s = 0.0;        // total planner time
    double mpc_time_s = 0.0;         // total SCP time across ticks
    double mean_tick_scp_s = 0.0;    // mean SCP time per tick
};

struct TickLog {
    double t = 0.0;
    ControlInput u_raw;      // MPC output
    ControlInput u_applied;  // after the comfort governor
    double cost = 0.0;
    double max_defect = 0.0;
    double solve_time_s = 0.0;
    bool fallback = false;
    std::vector<VehicleState> states;  // predicted horizon (kept when recording)
};

struct RunResult {
    RunMetrics metrics;
    std::vector<TraceSample> trace;
    std::vector<TickLog> ticks;
};

struct ClosedLoopInput {
    const RoadMap* map = nullptr;
    ScenarioSpec scenario;
    PlannerConfig planner;
    MpcParams mpc;
    VehicleFootprint footprint;
    VehicleLimits limits;
    SimConfig sim;
    PlannerMode mode = PlannerMode::Hybrid;
    bool record_solutions = false;
};

// plan -> corridor -> mpc_tick -> plant loop at the configured rates.
// Failures are recorded outcomes, not errors.
RunResult run_closed_loop(const ClosedLoopInput& input);

// Brute-force minimum distance from every trace sample to every obstacle.
double min_obstacle_distance_oracle(const std::vector<TraceSample>& trace,
                                    const ObstacleSet& obstacles);

// Trace CSV with the columns t, x, y, theta, v, psi, a_cmd, dpsi_cmd,
// min_obst_dist. Deterministic byte stream for fixed inputs.
std::string trace_to_csv(const std::vector<TraceSample>& trace);

}  // namespace autopath
