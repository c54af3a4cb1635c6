#include "autopath/scenario_gen.hpp"

#include <cmath>

#include "autopath/errors.hpp"
#include "json.hpp"

namespace autopath {

using ordered_json = nlohmann::ordered_json;

namespace {

struct CentrePoint {
    Vec2 pos;
    double heading;
};

double course_length(const MapGenConfig& cfg) {
    return cfg.straight_length + cfg.curve_radius * cfg.curve_angle + cfg.tail_length;
}

CentrePoint centre_at(const MapGenConfig& cfg, double s) {
    const double arc_len = cfg.curve_radius * cfg.curve_angle;
    if (s <= cfg.straight_length || arc_len <= 0.0) {
        return {{std::min(s, course_length(cfg)), 0.0}, 0.0};
    }
    const double s_arc = s - cfg.straight_length;
    if (s_arc <= arc_len) {
        const double phi = s_arc / cfg.curve_radius;
        const Vec2 pivot(cfg.straight_length, cfg.curve_radius);
        return {pivot + cfg.curve_radius * Vec2(std::sin(phi), -std::cos(phi)), phi};
    }
    const double phi = cfg.curve_angle;
    const Vec2 pivot(cfg.straight_length, cfg.curve_radius);
    const Vec2 arc_end = pivot + cfg.curve_radius * Vec2(std::sin(phi), -std::cos(phi));
    const double tail = s_arc - arc_len;
    return {arc_end + tail * Vec2(std::cos(phi), std::sin(phi)), phi};
}

double lane_offset(const MapGenConfig& cfg, int lane) {
    return (lane - (cfg.lanes - 1) / 2.0) * cfg.lane_width;
}

Vec2 offset_point(const CentrePoint& c, double offset) {
    const Vec2 normal(-std::sin(c.heading), std::cos(c.heading));
    return c.pos + offset * normal;
}

std::string lane_name(int lane) { return "L" + std::to_string(lane); }

}  // namespace

Pose2 lane_pose(const MapGenConfig& cfg, int lane, double s) {
    const CentrePoint c = centre_at(cfg, s);
    const Vec2 p = offset_point(c, lane_offset(cfg, lane));
    return Pose2(p.x(), p.y(), c.heading);
}

std::string generate_map_json(const MapGenConfig& cfg) {
    if (cfg.lanes < 1) throw Error("map needs at least one lane");
    const double total = course_length(cfg);
    const int n_pts = static_cast<int>(std::floor(total / cfg.node_spacing + 1e-9)) + 1;

    ordered_json doc;
    doc["meta"] = {{"version", "autopath-map/1"}, {"name", cfg.name}};

    doc["nodes"] = ordered_json::array();
    for (int lane = 0; lane < cfg.lanes; ++lane) {
        for (int j = 0; j < n_pts; ++j) {
            const Pose2 pose = lane_pose(cfg, lane, j * cfg.node_spacing);
            doc["nodes"].push_back({{"id", lane * n_pts + j},
                                    {"x", pose.x},
                                    {"y", pose.y},
                                    {"heading", pose.heading},
                                    {"lane_id", lane_name(lane)}});
        }
    }

    doc["edges"] = ordered_json::array();
    for (int lane = 0; lane < cfg.lanes; ++lane) {
        const int base = lane * n_pts;
        for (int j = 0; j + 1 < n_pts; ++j) {
            doc["edges"].push_back(
                {{"from", base + j}, {"to", base + j + 1}, {"kind", "lane_follow"}});
        }
        for (int other : {lane - 1, lane + 1}) {
            if (other < 0 || other >= cfg.lanes) continue;
            for (double span : cfg.lane_change_spans) {
                const int steps = static_cast<int>(std::lround(span / cfg.node_spacing));
                if (steps < 1) continue;
                for (int j = 0; j + steps < n_pts; ++j) {
                    doc["edges"].push_back({{"from", base + j},
                                            {"to", other * n_pts + j + steps},
                                            {"kind", "lane_change"}});
                }
            }
        }
    }

    doc["boundaries"] = ordered_json::array();
    for (int k = 0; k <= cfg.lanes; ++k) {
        const double offset = (k - cfg.lanes / 2.0) * cfg.lane_width;
        ordered_json jb;
        jb["tag"] = (k == 0 || k == cfg.lanes) ? "road" : "lane";
        jb["points"] = ordered_json::array();
        for (int j = 0; j < n_pts; ++j) {
            const Vec2 p = offset_point(centre_at(cfg, j * cfg.node_spacing), offset);
            jb["points"].push_back({p.x(), p.y()});
        }
        if (k == 0) {
            jb["lanes"] = {lane_name(0)};
        } else if (k == cfg.lanes) {
            jb["lanes"] = {lane_name(cfg.lanes - 1)};
        } else {
            jb["lanes"] = {lane_name(k - 1), lane_name(k)};
        }
        doc["boundaries"].push_back(std::move(jb));
    }

    doc["legality"] = ordered_json::array();
    for (int lane = 0; lane + 1 < cfg.lanes; ++lane) {
        doc["legality"].push_back(
            {{"from_lane", lane_name(lane)}, {"to_lane", lane_name(lane + 1)}, {"legal", true}});
        doc["legality"].push_back(
            {{"from_lane", lane_name(lane + 1)}, {"to_lane", lane_name(lane)}, {"legal", true}});
    }

    return doc.dump(2);
}

std::vector<Vec2> barrel_polygon(const Vec2& center, double radius) {
    std::vector<Vec2> v;
    const int sides = 16;
    for (int k = 0; k < sides; ++k) {
        const double a = 2.0 * M_PI * (k + 0.5) / sides;
        v.emplace_back(center.x() + radius * std::cos(a), center.y() + radius * std::sin(a));
    }
    return v;
}

std::vector<Vec2> box_polygon(const Vec2& center, double size_x, double size_y) {
    const double hx = size_x / 2.0;
    const double hy = size_y / 2.0;
    return {{center.x() - hx, center.y() - hy},
            {center.x() + hx, center.y() - hy},
            {center.x() + hx, center.y() + hy},
            {center.x() - hx, center.y() + hy}};
}

MapGenConfig desk_map_config() {
    MapGenConfig cfg;
    cfg.name = "desk_straight_200";
    cfg.straight_length = 200.0;
    return cfg;
}

MapGenConfig short_map_config() {
    MapGenConfig cfg;
    cfg.name = "desk_straight_64";
    cfg.straight_length = 64.0;
    return cfg;
}

MapGenConfig trial_map_config() {
    MapGenConfig cfg;
    cfg.name = "desk_trial_course";
    cfg.straight_length = 60.0;
    cfg.curve_radius = 40.0;
    cfg.curve_angle = 0.5;
    cfg.tail_length = 16.0;
    return cfg;
}

namespace {
ObstacleShape barrel_shape(const std::string& id, const Vec2& center, double radius = 0.3) {
    ObstacleShape s;
    s.id = id;
    s.kind = "circle";
    s.center = center;
    s.radius = radius;
    return s;
}

ObstacleShape wall_shape(const std::string& id, const Vec2& center, double sx, double sy) {
    ObstacleShape s;
    s.id = id;
    s.kind = "box";
    s.center = center;
    s.size = Vec2(sx, sy);
    return s;
}
}  // namespace

ScenarioSpec scenario_a(const std::string& map_ref) {
    ScenarioSpec s;
    s.name = "scenario_a";
    s.map_ref = map_ref;
    s.start = lane_pose(desk_map_config(), 0, 2.0);
    s.destination = lane_pose(desk_map_config(), 0, 188.0);
    s.v_ref = 5.0;
    s.rng_seed = 1;
    for (int i = 0; i < 4; ++i) {
        s.obstacles.push_back(
            barrel_shape("barrel_" + std::to_string(i), Vec2(60.0 + 7.0 * i, -1.85)));
    }
    return s;
}

ScenarioSpec scenario_b(const std::string& map_ref) {
    ScenarioSpec s;
    s.name = "scenario_b";
    s.map_ref = map_ref;
    s.start = lane_pose(desk_map_config(), 0, 2.0);
    s.destination = lane_pose(desk_map_config(), 0, 188.0);
    s.v_ref = 5.0;
    s.rng_seed = 1;
    // Passage between the wall ends spans y in (0.2, 2.2): 2 m, inside L1.
    s.obstacles.push_back(wall_shape("wall_left", Vec2(100.0, 2.95), 0.3, 1.5));
    s.obstacles.push_back(wall_shape("wall_right", Vec2(100.0, -1.75), 0.3, 3.9));
    return s;
}

ScenarioSpec scenario_scp_root(const std::string& map_ref) {
    ScenarioSpec s;
    s.name = "scp_root";
    s.map_ref = map_ref;
    s.start = lane_pose(short_map_config(), 0, 2.0);
    s.destination = lane_pose(short_map_config(), 0, 60.0);
    s.v_ref = 4.0;
    s.rng_seed = 1;
    const double lat[4] = {-1.85, 1.85, -1.85, 1.85};
    for (int i = 0; i < 4; ++i) {
        s.obstacles.push_back(
            barrel_shape("barrel_" + std::to_string(i), Vec2(20.0 + 7.0 * i, lat[i])));
    }
    s.perturbation = Perturbation{1.0, true};
    return s;
}

ScenarioSpec scenario_trials(const std::string& map_ref) {
    ScenarioSpec s;
    s.name = "trial_course";
    s.map_ref = map_ref;
    const MapGenConfig cfg = trial_map_config();
    s.start = lane_pose(cfg, 0, 2.0);
    const double total = cfg.straight_length + cfg.curve_radius * cfg.curve_angle +
                         cfg.tail_length;
    s.destination = lane_pose(cfg, 0, total - 4.0);
    s.v_ref = 4.0;
    s.rng_seed = 1;
    const double lat[4] = {-1.85, 1.85, -1.85, 1.85};
    for (int i = 0; i < 4; ++i) {
        s.obstacles.push_back(
            barrel_shape("barrel_" + std::to_string(i), Vec2(24.0 + 6.0 * i, lat[i])));
    }
    return s;
}

}  // namespace autopath
