#include "autopath/config.hpp"

#include "autopath/errors.hpp"
#include "json.hpp"

namespace autopath {

using ordered_json = nlohmann::ordered_json;

namespace {
constexpr const char* kConfigVersion = "autopath-config/1";
}

ToolkitConfig load_config(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("config is not valid JSON: ") + e.what());
    }
    ToolkitConfig c;
    try {
        if (doc.at("meta").at("version").get<std::string>() != kConfigVersion)
            throw SchemaError("unsupported config version");

        if (doc.contains("planner")) {
            const auto& j = doc["planner"];
            auto& p = c.planner;
            p.max_planning_time = j.value("max_planning_time", p.max_planning_time);
            p.samples_per_round = j.value("samples_per_round", p.samples_per_round);
            p.sigma_long = j.value("sigma_long", p.sigma_long);
            p.sigma_lat = j.value("sigma_lat", p.sigma_lat);
            p.sigma_yaw = j.value("sigma_yaw", p.sigma_yaw);
            p.uniform_samples_per_round =
                j.value("uniform_samples_per_round", p.uniform_samples_per_round);
            p.connect_radius = j.value("connect_radius", p.connect_radius);
            p.max_heading_change = j.value("max_heading_change", p.max_heading_change);
            p.rng_seed = j.value("rng_seed", p.rng_seed);
            p.collision_margin = j.value("collision_margin", p.collision_margin);
            p.resample_spacing = j.value("resample_spacing", p.resample_spacing);
        }
        if (doc.contains("mpc")) {
            const auto& j = doc["mpc"];
            auto& m = c.mpc;
            m.horizon = j.value("horizon", m.horizon);
            m.step_distance = j.value("step_distance", m.step_distance);
            m.wheelbase_ref = j.value("wheelbase_ref", m.wheelbase_ref);
            if (j.contains("weights")) {
                const auto& w = j["weights"];
                m.weights.w1 = w.value("w1", m.weights.w1);
                m.weights.w2 = w.value("w2", m.weights.w2);
                m.weights.w3 = w.value("w3", m.weights.w3);
                m.weights.w4 = w.value("w4", m.weights.w4);
                m.weights.w5 = w.value("w5", m.weights.w5);
                m.weights.w6 = w.value("w6", m.weights.w6);
                m.weights.w7 = w.value("w7", m.weights.w7);
            }
            m.sigma_buffer = j.value("sigma_buffer", m.sigma_buffer);
            m.v_max = j.value("v_max", m.v_max);
            m.psi_max = j.value("psi_max", m.psi_max);
            m.a_max = j.value("a_max", m.a_max);
            m.dpsi_max = j.value("dpsi_max", m.dpsi_max);
            m.scp_iterations = j.value("scp_iterations", m.scp_iterations);
            m.qp_tolerance = j.value("qp_tolerance", m.qp_tolerance);
            if (j.contains("trust_region")) {
                const auto& t = j["trust_region"];
                m.trust_region.enabled = t.value("enabled", m.trust_region.enabled);
                m.trust_region.position = t.value("position", m.trust_region.position);
                m.trust_region.angle = t.value("angle", m.trust_region.angle);
            }
            m.paper_literal_dynamics = j.value("paper_literal_dynamics", m.paper_literal_dynamics);
            m.v_floor = j.value("v_floor", m.v_floor);
            m.vehicle_half_width = j.value("vehicle_half_width", m.vehicle_half_width);
        }
        if (doc.contains("vehicle")) {
            const auto& j = doc["vehicle"];
            c.footprint.length = j.value("length", c.footprint.length);
            c.footprint.width = j.value("width", c.footprint.width);
            c.footprint.rear_axle_to_center =
                j.value("rear_axle_to_center", c.footprint.rear_axle_to_center);
        }
        if (doc.contains("limits")) {
            const auto& j = doc["limits"];
            c.limits.long_accel_max = j.value("long_accel_max", c.limits.long_accel_max);
            c.limits.long_jerk_max = j.value("long_jerk_max", c.limits.long_jerk_max);
            c.limits.lat_accel_max = j.value("lat_accel_max", c.limits.lat_accel_max);
            c.limits.steering_max = j.value("steering_max", c.limits.steering_max);
        }
        if (doc.contains("sim")) {
            const auto& j = doc["sim"];
            c.sim.control_rate_hz = j.value("control_rate_hz", c.sim.control_rate_hz);
            c.sim.plant_rate_hz = j.value("plant_rate_hz", c.sim.plant_rate_hz);
            c.sim.tau_steer = j.value("tau_steer", c.sim.tau_steer);
            c.sim.replan_lateral_deviation =
                j.value("replan_lateral_deviation", c.sim.replan_lateral_deviation);
            c.sim.goal_tolerance = j.value("goal_tolerance", c.sim.goal_tolerance);
            c.sim.sim_timeout_s = j.value("sim_timeout_s", c.sim.sim_timeout_s);
            c.sim.governor_jerk_fraction =
                j.value("governor_jerk_fraction", c.sim.governor_jerk_fraction);
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("config schema violation: ") + e.what());
    }
    return c;
}

std::string serialize_config(const ToolkitConfig& c) {
    ordered_json doc;
    doc["meta"] = {{"version", kConfigVersion}};
    doc["planner"] = {{"max_planning_time", c.planner.max_planning_time},
                      {"samples_per_round", c.planner.samples_per_round},
                      {"sigma_long", c.planner.sigma_long},
                      {"sigma_lat", c.planner.sigma_lat},
                      {"sigma_yaw", c.planner.sigma_yaw},
                      {"uniform_samples_per_round", c.planner.uniform_samples_per_round},
                      {"connect_radius", c.planner.connect_radius},
                      {"max_heading_change", c.planner.max_heading_change},
                      {"rng_seed", c.planner.rng_seed},
                      {"collision_margin", c.planner.collision_margin},
                      {"resample_spacing", c.planner.resample_spacing}};
    doc["mpc"] = {{"horizon", c.mpc.horizon},
                  {"step_distance", c.mpc.step_distance},
                  {"wheelbase_ref", c.mpc.wheelbase_ref},
                  {"weights",
                   {{"w1", c.mpc.weights.w1},
                    {"w2", c.mpc.weights.w2},
                    {"w3", c.mpc.weights.w3},
                    {"w4", c.mpc.weights.w4},
                    {"w5", c.mpc.weights.w5},
                    {"w6", c.mpc.weights.w6},
                    {"w7", c.mpc.weights.w7}}},
                  {"sigma_buffer", c.mpc.sigma_buffer},
                  {"v_max", c.mpc.v_max},
                  {"psi_max", c.mpc.psi_max},
                  {"a_max", c.mpc.a_max},
                  {"dpsi_max", c.mpc.dpsi_max},
                  {"scp_iterations", c.mpc.scp_iterations},
                  {"qp_tolerance", c.mpc.qp_tolerance},
                  {"trust_region",
                   {{"enabled", c.mpc.trust_region.enabled},
                    {"position", c.mpc.trust_region.position},
                    {"angle", c.mpc.trust_region.angle}}},
                  {"paper_literal_dynamics", c.mpc.paper_literal_dynamics},
                  {"v_floor", c.mpc.v_floor},
                  {"vehicle_half_width", c.mpc.vehicle_half_width}};
    doc["vehicle"] = {{"length", c.footprint.length},
                      {"width", c.footprint.width},
                      {"rear_axle_to_center", c.footprint.rear_axle_to_center}};
    doc["limits"] = {{"long_accel_max", c.limits.long_accel_max},
                     {"long_jerk_max", c.limits.long_jerk_max},
                     {"lat_accel_max", c.limits.lat_accel_max},
                     {"steering_max", c.limits.steering_max}};
    doc["sim"] = {{"control_rate_hz", c.sim.control_rate_hz},
                  {"plant_rate_hz", c.sim.plant_rate_hz},
                  {"tau_steer", c.sim.tau_steer},
                  {"replan_lateral_deviation", c.sim.replan_lateral_deviation},
                  {"goal_tolerance", c.sim.goal_tolerance},
                  {"sim_timeout_s", c.sim.sim_timeout_s},
                  {"governor_jerk_fraction", c.sim.governor_jerk_fraction}};
    return doc.dump(2);
}

}  // namespace autopath
