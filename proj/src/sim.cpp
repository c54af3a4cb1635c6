#include "autopath/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "autopath/errors.hpp"
#include "autopath/scenario_gen.hpp"
#include "json.hpp"

namespace autopath {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr const char* kScenarioVersion = "autopath-scenario/1";

std::string fmt_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}
}  // namespace

// ---------------------------------------------------------------------------
// Plant

PlantState Plant::step_toward(const PlantState& state, double a_cmd, double psi_target,
                              double dt) const {
    const double a = std::clamp(a_cmd, -limits_.long_accel_max, limits_.long_accel_max);
    const double target = std::clamp(psi_target, -limits_.steering_max, limits_.steering_max);

    struct Y {
        double x, y, th, v, psi;
    };
    auto deriv = [&](const Y& s) {
        Y d;
        d.x = s.v * std::cos(s.th);
        d.y = s.v * std::sin(s.th);
        d.th = s.v * std::tan(s.psi) / wheelbase_;
        d.v = (s.v <= 0.0 && a < 0.0) ? 0.0 : a;
        d.psi = (target - s.psi) / tau_steer_;
        return d;
    };
    auto axpy = [](const Y& s, double h, const Y& d) {
        return Y{s.x + h * d.x, s.y + h * d.y, s.th + h * d.th, s.v + h * d.v, s.psi + h * d.psi};
    };

    const Y y0{state.pose.x, state.pose.y, state.pose.heading, state.v, state.psi};
    const Y k1 = deriv(y0);
    const Y k2 = deriv(axpy(y0, dt / 2.0, k1));
    const Y k3 = deriv(axpy(y0, dt / 2.0, k2));
    const Y k4 = deriv(axpy(y0, dt, k3));
    Y y1 = y0;
    y1.x += dt / 6.0 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
    y1.y += dt / 6.0 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y);
    y1.th += dt / 6.0 * (k1.th + 2 * k2.th + 2 * k3.th + k4.th);
    y1.v += dt / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v);
    y1.psi += dt / 6.0 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi);

    PlantState out;
    out.pose = Pose2(y1.x, y1.y, y1.th);
    out.v = std::max(y1.v, 0.0);
    out.psi = std::clamp(y1.psi, -limits_.steering_max, limits_.steering_max);
    out.t = state.t + dt;
    return out;
}

PlantState Plant::step(const PlantState& state, const ControlInput& control, double dt) const {
    return step_toward(state, control.a, state.psi + control.dpsi, dt);
}

// ---------------------------------------------------------------------------
// Scenario files

PolygonObstacle ObstacleShape::to_polygon() const {
    if (kind == "circle") return PolygonObstacle(barrel_polygon(center, radius), id);
    if (kind == "box") return PolygonObstacle(box_polygon(center, size.x(), size.y()), id);
    if (kind == "polygon") return PolygonObstacle(vertices, id);
    throw SchemaError("unknown obstacle shape '" + kind + "'");
}

ObstacleShape ObstacleShape::translated(const Vec2& offset) const {
    ObstacleShape out = *this;
    out.center += offset;
    for (Vec2& v : out.vertices) v += offset;
    return out;
}

Vec2 ObstacleShape::reference_point() const {
    if (kind == "polygon") {
        Vec2 c = Vec2::Zero();
        for (const Vec2& v : vertices) c += v;
        return c / static_cast<double>(vertices.size());
    }
    return center;
}

ObstacleSet ScenarioSpec::build_obstacles() const {
    std::vector<PolygonObstacle> polys;
    polys.reserve(obstacles.size());
    for (const ObstacleShape& s : obstacles) polys.push_back(s.to_polygon());
    return ObstacleSet(std::move(polys));
}

ScenarioSpec load_scenario(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("scenario is not valid JSON: ") + e.what());
    }
    ScenarioSpec s;
    try {
        if (doc.at("meta").at("version").get<std::string>() != kScenarioVersion)
            throw SchemaError("unsupported scenario version");
        s.name = doc["meta"].value("name", "");
        s.map_ref = doc.at("map").get<std::string>();
        auto pose = [](const ordered_json& j) {
            return Pose2(j.at("x").get<double>(), j.at("y").get<double>(),
                         j.at("heading").get<double>());
        };
        s.start = pose(doc.at("start"));
        s.destination = pose(doc.at("destination"));
        s.v_ref = doc.at("v_ref").get<double>();
        s.rng_seed = doc.value("rng_seed", std::uint64_t{1});
        for (const auto& jo : doc.at("obstacles")) {
            ObstacleShape shape;
            shape.id = jo.at("id").get<std::string>();
            shape.kind = jo.at("shape").get<std::string>();
            if (shape.kind == "circle") {
                shape.center = Vec2(jo.at("center").at(0).get<double>(),
                                    jo.at("center").at(1).get<double>());
                shape.radius = jo.at("radius").get<double>();
            } else if (shape.kind == "box") {
                shape.center = Vec2(jo.at("center").at(0).get<double>(),
                                    jo.at("center").at(1).get<double>());
                shape.size = Vec2(jo.at("size").at(0).get<double>(),
                                  jo.at("size").at(1).get<double>());
            } else if (shape.kind == "polygon") {
                for (const auto& jv : jo.at("vertices")) {
                    shape.vertices.emplace_back(jv.at(0).get<double>(), jv.at(1).get<double>());
                }
            } else {
                throw SchemaError("unknown obstacle shape '" + shape.kind + "'");
            }
            (void)shape.to_polygon();  // validate now
            s.obstacles.push_back(std::move(shape));
        }
        if (doc.contains("perturbation")) {
            Perturbation p;
            p.sigma = doc["perturbation"].at("sigma").get<double>();
            p.keep_on_road = doc["perturbation"].value("keep_on_road", true);
            s.perturbation = p;
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("scenario schema violation: ") + e.what());
    }
    return s;
}

std::string serialize_scenario(const ScenarioSpec& s) {
    ordered_json doc;
    doc["meta"] = {{"version", kScenarioVersion}, {"name", s.name}};
    doc["map"] = s.map_ref;
    doc["start"] = {{"x", s.start.x}, {"y", s.start.y}, {"heading", s.start.heading}};
    doc["destination"] = {{"x", s.destination.x},
                          {"y", s.destination.y},
                          {"heading", s.destination.heading}};
    doc["v_ref"] = s.v_ref;
    doc["rng_seed"] = s.rng_seed;
    doc["obstacles"] = ordered_json::array();
    for (const ObstacleShape& o : s.obstacles) {
        ordered_json jo;
        jo["id"] = o.id;
        jo["shape"] = o.kind;
        if (o.kind == "circle") {
            jo["center"] = {o.center.x(), o.center.y()};
            jo["radius"] = o.radius;
        } else if (o.kind == "box") {
            jo["center"] = {o.center.x(), o.center.y()};
            jo["size"] = {o.size.x(), o.size.y()};
        } else {
            jo["vertices"] = ordered_json::array();
            for (const Vec2& v : o.vertices) jo["vertices"].push_back({v.x(), v.y()});
        }
        doc["obstacles"].push_back(std::move(jo));
    }
    if (s.perturbation) {
        doc["perturbation"] = {{"sigma", s.perturbation->sigma},
                               {"keep_on_road", s.perturbation->keep_on_road}};
    }
    return doc.dump(2);
}

std::vector<ScenarioSpec> generate_perturbed_scenarios(const ScenarioSpec& root,
                                                       const RoadMap& map, int count,
                                                       std::uint64_t seed) {
    if (!root.perturbation) throw Error("root scenario has no perturbation config");
    const Perturbation& p = *root.perturbation;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, p.sigma);

    std::vector<ScenarioSpec> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        ScenarioSpec spec = root;
        spec.name = root.name + "_p" + std::to_string(i);
        spec.rng_seed = seed * 1000003ULL + static_cast<std::uint64_t>(i) + 1ULL;
        for (ObstacleShape& shape : spec.obstacles) {
            for (int attempt = 0; attempt < 10000; ++attempt) {
                const Vec2 offset(gauss(rng), gauss(rng));
                const ObstacleShape cand = shape.translated(offset);
                if (!p.keep_on_road || map.on_driveable_area(cand.reference_point())) {
                    shape = cand;
                    break;
                }
            }
        }
        out.push_back(std::move(spec));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Closed loop

double min_obstacle_distance_oracle(const std::vector<TraceSample>& trace,
                                    const ObstacleSet& obstacles) {
    double best = kInfCost;
    for (const TraceSample& s : trace) {
        for (const PolygonObstacle& o : obstacles.obstacles()) {
            best = std::min(best, min_distance_polygon(Vec2(s.x, s.y), o));
        }
    }
    return best;
}

std::string trace_to_csv(const std::vector<TraceSample>& trace) {
    std::string out = "t,x,y,theta,v,psi,a_cmd,dpsi_cmd,min_obst_dist\n";
    for (const TraceSample& s : trace) {
        out += fmt_double(s.t) + "," + fmt_double(s.x) + "," + fmt_double(s.y) + "," +
               fmt_double(s.theta) + "," + fmt_double(s.v) + "," + fmt_double(s.psi) + "," +
               fmt_double(s.a_cmd) + "," + fmt_double(s.dpsi_cmd) + "," +
               fmt_double(s.min_obst_dist) + "\n";
    }
    return out;
}

namespace {

double min_dist_to_obstacles(const Vec2& p, const ObstacleSet& obstacles) {
    double best = kInfCost;
    for (const PolygonObstacle& o : obstacles.obstacles()) {
        best = std::min(best, min_distance_polygon(p, o));
    }
    return best;
}

PlannedPath slice_path(const PlannedPath& path, std::size_t from, std::size_t max_points) {
    PlannedPath out;
    const std::size_t end = std::min(path.points.size(), from + max_points);
    out.points.assign(path.points.begin() + from, path.points.begin() + end);
    out.length = 0.0;
    for (std::size_t i = 1; i < out.points.size(); ++i) {
        out.length += (out.points[i].pose.position() - out.points[i - 1].pose.position()).norm();
    }
    out.cost = out.length;
    return out;
}

void finalize_metrics(RunMetrics& m, const std::vector<TraceSample>& trace,
                      const VehicleLimits& limits, double wheelbase, bool reached) {
    const std::size_t n = trace.size();
    m.sim_time_s = n ? trace.back().t : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        m.min_obstacle_distance = std::min(m.min_obstacle_distance, trace[i].min_obst_dist);
        m.max_steering_angle = std::max(m.max_steering_angle, std::abs(trace[i].psi));
        const double lat = trace[i].v * trace[i].v * std::abs(std::tan(trace[i].psi)) / wheelbase;
        m.max_lat_accel = std::max(m.max_lat_accel, lat);
        if (i + 1 < n) {
            const double dt = trace[i + 1].t - trace[i].t;
            if (dt <= 0.0) continue;
            m.max_steering_rate = std::max(m.max_steering_rate,
                                           std::abs(trace[i + 1].psi - trace[i].psi) / dt);
            m.path_length += std::hypot(trace[i + 1].x - trace[i].x, trace[i + 1].y - trace[i].y);
        }
    }
    // Longitudinal accel and jerk by finite differences of speed at plant rate.
    std::vector<double> accel;
    accel.reserve(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double dt = trace[i + 1].t - trace[i].t;
        if (dt <= 0.0) continue;
        accel.push_back((trace[i + 1].v - trace[i].v) / dt);
    }
    for (std::size_t i = 0; i < accel.size(); ++i) {
        m.max_long_accel = std::max(m.max_long_accel, std::abs(accel[i]));
        if (i + 1 < accel.size()) {
            const double dt = trace[i + 1].t - trace[i].t;
            m.max_long_jerk = std::max(m.max_long_jerk, std::abs(accel[i + 1] - accel[i]) /
                                                            (trace[1].t - trace[0].t));
        }
    }

    const bool violated = m.max_long_accel > limits.long_accel_max + 1e-9 ||
                          m.max_long_jerk > limits.long_jerk_max + 1e-9 ||
                          m.max_lat_accel > limits.lat_accel_max + 1e-9 ||
                          m.max_steering_angle > limits.steering_max + 1e-9;
    if (reached && m.failure_reason.empty() && violated) m.failure_reason = "ConstraintViolation";
    m.success = reached && m.failure_reason.empty();
}

}  // namespace

RunResult run_closed_loop(const ClosedLoopInput& input) {
    RunResult result;
    RunMetrics& metrics = result.metrics;
    const RoadMap& map = *input.map;
    const ObstacleSet obstacles = input.scenario.build_obstacles();

    PlannerConfig pcfg = input.planner;
    pcfg.rng_seed = input.scenario.rng_seed;

    MpcParams mpc_params = input.mpc;
    mpc_params.vehicle_half_width = input.footprint.width / 2.0;

    const Plant plant(input.limits, input.sim.tau_steer, input.mpc.wheelbase_ref);
    MpcController controller(mpc_params);

    const double dt_ctrl = 1.0 / input.sim.control_rate_hz;
    const int substeps = std::max(1, static_cast<int>(std::lround(input.sim.plant_rate_hz /
                                                                  input.sim.control_rate_hz)));
    const double dt_plant = dt_ctrl / substeps;
    const double jerk_slew = input.sim.governor_jerk_fraction * input.limits.long_jerk_max;

    PlantState state;
    state.pose = input.scenario.start;

    auto record = [&](double a_cmd, double dpsi_cmd) {
        result.trace.push_back({state.t, state.pose.x, state.pose.y, state.pose.heading, state.v,
                                state.psi, a_cmd, dpsi_cmd,
                                min_dist_to_obstacles(state.pose.position(), obstacles)});
    };
    record(0.0, 0.0);

    std::optional<PlannedPath> path;
    double prev_a = 0.0;
    bool reached = false;

    while (state.t < input.sim.sim_timeout_s && !reached && metrics.failure_reason.empty()) {
        const Pose2 pose = state.pose;

        // (Re)plan when needed: no path yet, too far from it, or exhausted.
        for (int attempt = 0; attempt < 2; ++attempt) {
            bool need = !path.has_value();
            std::size_t progress = 0;
            if (path) {
                double best = kInfCost;
                for (std::size_t i = 0; i < path->points.size(); ++i) {
                    const double d = (path->points[i].pose.position() - pose.position()).norm();
                    if (d < best) {
                        best = d;
                        progress = i;
                    }
                }
                if (best > input.sim.replan_lateral_deviation) need = true;
                if (progress + 2 >= path->points.size()) need = true;
            }
            if (!need) break;
            const auto t0 = std::chrono::steady_clock::now();
            HybridPlanner planner(map, obstacles, input.footprint, pcfg, input.mode);
            PlanResult plan = planner.plan(pose, input.scenario.destination);
            metrics.plan_time_s +=
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            if (!plan.path) {
                metrics.failure_reason = "NoPath";
                break;
            }
            path = std::move(*plan.path);
            controller.reset();
            ++metrics.replans;
        }
        if (metrics.failure_reason == "NoPath") break;

        std::size_t progress = 0;
        double best = kInfCost;
        for (std::size_t i = 0; i < path->points.size(); ++i) {
            const double d = (path->points[i].pose.position() - pose.position()).norm();
            if (d < best) {
                best = d;
                progress = i;
            }
        }
        const PlannedPath window =
            slice_path(*path, progress, static_cast<std::size_t>(input.mpc.horizon) + 3);

        ControlInput u_raw{-input.mpc.a_max, 0.0};
        TickLog log;
        log.t = state.t;
        log.fallback = true;
        if (window.points.size() >= 2) {
            try {
                const auto classified = classify_boundary_points(window, map, obstacles);
                const Corridor corridor = build_corridor(
                    window, classified, input.mpc.sigma_buffer, input.mpc.horizon + 1,
                    input.scenario.v_ref,
                    input.footprint.width + 2.0 * input.mpc.sigma_buffer);
                VehicleState measured{pose.x, pose.y, pose.heading, state.v, state.psi};
                auto tick = controller.tick(measured, window, corridor, input.scenario.v_ref);
                u_raw = tick.u0;
                metrics.mpc_time_s += tick.solution.solve_time_s;
                log.fallback = tick.solution.fallback;
                log.cost = tick.solution.cost;
                log.max_defect = tick.solution.max_defect;
                log.solve_time_s = tick.solution.solve_time_s;
                if (input.record_solutions) log.states = tick.solution.states;
            } catch (const DegenerateCorridor&) {
                controller.reset();
            } catch (const HorizonTooShort&) {
                controller.reset();
            }
        }
        log.u_raw = u_raw;

        // Comfort governor: ramp the applied accel toward the command at the
        // jerk limit over this tick; hold the steering target.
        const double a_goal =
            std::clamp(u_raw.a, -input.limits.long_accel_max, input.limits.long_accel_max);
        const double a_end = std::clamp(a_goal, prev_a - jerk_slew * dt_ctrl,
                                        prev_a + jerk_slew * dt_ctrl);
        const double psi_target = std::clamp(state.psi + u_raw.dpsi, -input.limits.steering_max,
                                             input.limits.steering_max);
        log.u_applied = {a_end, u_raw.dpsi};
        result.ticks.push_back(std::move(log));

        for (int i = 0; i < substeps; ++i) {
            const double a_i = prev_a + (a_end - prev_a) * (i + 1) / substeps;
            state = plant.step_toward(state, a_i, psi_target, dt_plant);
            record(a_i, u_raw.dpsi);
            if (pose_in_collision(state.pose, input.footprint, obstacles, 0.0)) {
                metrics.failure_reason = "Collision";
                break;
            }
            if ((state.pose.position() - input.scenario.destination.position()).norm() <=
                input.sim.goal_tolerance) {
                reached = true;
                break;
            }
        }
        prev_a = a_end;
        ++metrics.ticks;
    }

    if (!reached && metrics.failure_reason.empty()) metrics.failure_reason = "Timeout";
    metrics.replans = std::max(0, metrics.replans - 1);  // first plan is not a replan
    metrics.mean_tick_scp_s = metrics.ticks ? metrics.mpc_time_s / metrics.ticks : 0.0;
    finalize_metrics(metrics, result.trace, input.limits, input.mpc.wheelbase_ref, reached);
    return result;
}

}  // namespace autopath
