#pragma once

#include <optional>
#include <string>
#include <vector>

#include "autopath/geometry.hpp"
#include "autopath/spatial_index.hpp"

namespace autopath {

struct VehicleFootprint {
    double length = 4.6;
    double width = 1.8;
    double rear_axle_to_center = 1.4;
};

// Static polygon obstacles behind an AABB r-tree. The index returns a
// superset of the truly intersecting obstacles for any query box.
class ObstacleSet {
public:
    ObstacleSet() = default;
    explicit ObstacleSet(std::vector<PolygonObstacle> obstacles);

    const std::vector<PolygonObstacle>& obstacles() const { return obstacles_; }
    bool empty() const { return obstacles_.empty(); }
    std::size_t size() const { return obstacles_.size(); }

    // Obstacle indices whose AABB intersects the query box, ascending.
    std::vector<int> candidates(const Vec2& lo, const Vec2& hi) const {
        return index_.intersecting(lo, hi);
    }

private:
    std::vector<PolygonObstacle> obstacles_;
    BoxIndex index_;
};

// Oriented footprint rectangle at `pose` (rear-axle convention), inflated by
// `margin` on all sides, against every obstacle.
bool pose_in_collision(const Pose2& pose, const VehicleFootprint& footprint,
                       const ObstacleSet& obstacles, double margin);

// Index of the first colliding obstacle (ascending index order), or nullopt.
std::optional<int> colliding_obstacle(const Pose2& pose, const VehicleFootprint& footprint,
                                      const ObstacleSet& obstacles, double margin);

struct CollisionReport {
    bool clear = true;
    double first_s = 0.0;          // arc length of the first colliding sample
    int obstacle_index = -1;
    std::string obstacle_id;
};

// Sweeps pose_in_collision over the spline's cached arc-length samples.
CollisionReport edge_in_collision(const HermiteSpline& spline, const VehicleFootprint& footprint,
                                  const ObstacleSet& obstacles, double margin);

}  // namespace autopath
