#pragma once

#include <string>
#include <vector>

#include "autopath/corridor.hpp"
#include "autopath/geometry.hpp"
#include "autopath/planner.hpp"
#include "autopath/roadmap.hpp"
#include "autopath/sim.hpp"

namespace autopath {

// Minimal deterministic SVG writer; fixed-precision coordinates so output is
// byte-stable for fixed inputs.
class SvgCanvas {
public:
    SvgCanvas(const Vec2& world_min, const Vec2& world_max, double pixels_per_metre);

    void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width,
                  const std::string& dash = "");
    void polygon(const std::vector<Vec2>& pts, const std::string& fill,
                 const std::string& stroke);
    void circle(const Vec2& center, double radius, const std::string& fill);
    void line(const Vec2& a, const Vec2& b, const std::string& stroke, double width,
              const std::string& dash = "");
    void text(const Vec2& at, const std::string& content, int font_px);

    std::string finish() const;

private:
    Vec2 to_px(const Vec2& world) const;
    Vec2 world_min_;
    Vec2 world_max_;
    double scale_;
    double height_px_;
    double width_px_;
    std::string body_;
};

// Map, obstacles, planned path, and corridor band overlay.
std::string plan_overlay_svg(const RoadMap& map, const ObstacleSet& obstacles,
                             const PlannedPath& path, const Corridor* corridor,
                             const Pose2& start, const Pose2& destination);

// Commanded acceleration and steering angle over time with their limits.
std::string command_plot_svg(const std::vector<TraceSample>& trace, const VehicleLimits& limits);

}  // namespace autopath
