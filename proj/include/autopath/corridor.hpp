#pragma once

#include <string>
#include <vector>

#include "autopath/collision.hpp"
#include "autopath/geometry.hpp"
#include "autopath/planner.hpp"
#include "autopath/roadmap.hpp"

namespace autopath {

enum class BoundarySource { LaneBoundary, RoadBoundary, ObstacleVertex };

struct BoundaryPoint {
    Vec2 position = Vec2::Zero();
    BoundarySource source = BoundarySource::LaneBoundary;
    int obstacle_index = -1;  // set for ObstacleVertex
    Side side = Side::Right;
};

// Per-pose candidate boundary points, split by side of the path.
struct ClassifiedPoints {
    std::vector<BoundaryPoint> left;
    std::vector<BoundaryPoint> right;
};

// alpha*x + beta*y <= gamma with (alpha, beta) a unit normal pointing away
// from the path.
struct HalfPlane {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    double signed_slack(const Vec2& p) const { return gamma - (alpha * p.x() + beta * p.y()); }
};

struct CorridorStep {
    Pose2 anchor;  // path pose (or trajectory point after relinearization)
    HalfPlane left;
    HalfPlane right;
    bool has_reference = false;
    Vec2 reference_point = Vec2::Zero();
    double reference_speed = 0.0;
    bool width_flagged = false;  // width below vehicle width + 2*sigma_buffer

    // Distance between the two constraint lines.
    double width() const { return left.gamma + right.gamma; }
};

struct Corridor {
    std::vector<CorridorStep> steps;
    double sigma_buffer = 0.3;
    double min_clear_width = 0.0;  // flagging threshold used at build time
    // Candidate sets are kept so relinearization re-selects nearest points
    // without re-classifying sides.
    std::vector<ClassifiedPoints> candidates;
};

// Obstacle vertices are considered for poses within this arc-length window.
inline constexpr double kObstacleLookahead = 15.0;
inline constexpr double kObstacleLookbehind = 5.0;

// Window for lane/road boundary candidate points around each pose.
inline constexpr double kBoundaryWindow = 25.0;

// Gathers lane-boundary points (own lane when following it, road boundaries
// otherwise) and obstacle vertices per pose, classified with side_of_path.
// On-classified points go Right.
std::vector<ClassifiedPoints> classify_boundary_points(const PlannedPath& path,
                                                       const RoadMap& map,
                                                       const ObstacleSet& obstacles);

// One pair of half-planes per path pose within the horizon: a line through
// the nearest candidate on each side, parallel to the local path tangent.
Corridor build_corridor(const PlannedPath& path, const std::vector<ClassifiedPoints>& classified,
                        double sigma_buffer, int horizon, double reference_speed,
                        double min_clear_width);

// Re-runs nearest-point selection and line construction at the trajectory's
// positions with finite-difference tangents; candidate sides are not
// re-classified. Idempotent at a fixed trajectory.
Corridor relinearize(const Corridor& corridor, const std::vector<Vec2>& trajectory);

}  // namespace autopath
