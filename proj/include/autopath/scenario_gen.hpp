#pragma once

#include <string>
#include <vector>

#include "autopath/geometry.hpp"

namespace autopath {

// Desk-scale road course: a straight section, an optional constant-radius
// left arc, and an optional straight tail, with parallel same-direction lanes.
struct MapGenConfig {
    std::string name = "desk_map";
    double straight_length = 200.0;
    double curve_radius = 0.0;  // 0 disables the arc
    double curve_angle = 0.0;   // radians, left turn
    double tail_length = 0.0;
    int lanes = 2;
    double lane_width = 3.7;
    double node_spacing = 2.0;
    std::vector<double> lane_change_spans = {8.0, 12.0};  // metres of run per change
};

// "autopath-map/1" JSON document for the configured course. Lane i is named
// "L<i>", ordered right to left; the road centre starts at the origin heading +x.
std::string generate_map_json(const MapGenConfig& cfg);

// Centreline pose of lane `lane` at arc position `s` along the course.
Pose2 lane_pose(const MapGenConfig& cfg, int lane, double s);

// Regular 16-gon approximating a barrel of the given radius.
std::vector<Vec2> barrel_polygon(const Vec2& center, double radius);

// Axis-aligned rectangle (used for barricade walls).
std::vector<Vec2> box_polygon(const Vec2& center, double size_x, double size_y);

}  // namespace autopath

#include "autopath/sim.hpp"

namespace autopath {

// Shipped desk-scale courses and scenarios.

// 200 m straight dual-lane road for the planner-comparison scenarios.
MapGenConfig desk_map_config();
// 64 m straight dual-lane road for the SCP iteration study.
MapGenConfig short_map_config();
// 60 m straight, 40 m-radius left arc, short tail: the trial course.
MapGenConfig trial_map_config();

// Four barrels 7 m apart blocking lane L0; a lattice route exists via L1.
ScenarioSpec scenario_a(const std::string& map_ref);
// Two barricade walls across the road leaving a 2 m gap inside lane L1.
ScenarioSpec scenario_b(const std::string& map_ref);
// Four barrels in alternating lanes with the perturbation protocol attached.
ScenarioSpec scenario_scp_root(const std::string& map_ref);
// Four barrels 6 m apart in alternating lanes, then the curve to the goal.
ScenarioSpec scenario_trials(const std::string& map_ref);

}  // namespace autopath
