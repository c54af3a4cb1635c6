#include "autopath/collision.hpp"

#include <array>
#include <cmath>

namespace autopath {

ObstacleSet::ObstacleSet(std::vector<PolygonObstacle> obstacles)
    : obstacles_(std::move(obstacles)) {
    for (std::size_t i = 0; i < obstacles_.size(); ++i) {
        index_.insert(obstacles_[i].aabb_min(), obstacles_[i].aabb_max(), static_cast<int>(i));
    }
}

namespace {

struct OrientedRect {
    Vec2 center;
    Vec2 axis;      // unit, along the footprint length
    double half_l;
    double half_w;

    std::array<Vec2, 4> corners() const {
        const Vec2 perp(-axis.y(), axis.x());
        return {center + half_l * axis + half_w * perp, center - half_l * axis + half_w * perp,
                center - half_l * axis - half_w * perp, center + half_l * axis - half_w * perp};
    }

    bool contains(const Vec2& p) const {
        const Vec2 v = p - center;
        const double along = axis.dot(v);
        const double lat = axis.x() * v.y() - axis.y() * v.x();
        return std::abs(along) <= half_l && std::abs(lat) <= half_w;
    }
};

OrientedRect footprint_rect(const Pose2& pose, const VehicleFootprint& fp, double margin) {
    const Vec2 dir = pose.direction();
    return {pose.position() + fp.rear_axle_to_center * dir, dir, fp.length / 2.0 + margin,
            fp.width / 2.0 + margin};
}

// Exact intersection test for a rectangle against a simple polygon: any edge
// crossing, or either shape containing a vertex of the other.
bool rect_intersects_polygon(const OrientedRect& rect, const PolygonObstacle& poly) {
    const auto rc = rect.corners();
    const auto& pv = poly.vertices();
    for (const Vec2& v : pv) {
        if (rect.contains(v)) return true;
    }
    for (const Vec2& c : rc) {
        if (point_in_polygon(c, poly)) return true;
    }
    for (std::size_t i = 0; i < 4; ++i) {
        const Vec2& a = rc[i];
        const Vec2& b = rc[(i + 1) % 4];
        for (std::size_t j = 0; j < pv.size(); ++j) {
            if (segments_intersect(a, b, pv[j], pv[(j + 1) % pv.size()])) return true;
        }
    }
    return false;
}

}  // namespace

std::optional<int> colliding_obstacle(const Pose2& pose, const VehicleFootprint& footprint,
                                      const ObstacleSet& obstacles, double margin) {
    if (obstacles.empty()) return std::nullopt;
    const OrientedRect rect = footprint_rect(pose, footprint, margin);
    const double r = std::hypot(rect.half_l, rect.half_w);
    const Vec2 lo = rect.center - Vec2(r, r);
    const Vec2 hi = rect.center + Vec2(r, r);
    for (int idx : obstacles.candidates(lo, hi)) {
        if (rect_intersects_polygon(rect, obstacles.obstacles()[idx])) return idx;
    }
    return std::nullopt;
}

bool pose_in_collision(const Pose2& pose, const VehicleFootprint& footprint,
                       const ObstacleSet& obstacles, double margin) {
    return colliding_obstacle(pose, footprint, obstacles, margin).has_value();
}

CollisionReport edge_in_collision(const HermiteSpline& spline, const VehicleFootprint& footprint,
                                  const ObstacleSet& obstacles, double margin) {
    for (const ArcSample& sample : spline.samples()) {
        const auto hit = colliding_obstacle(sample.pose, footprint, obstacles, margin);
        if (hit) {
            return {false, sample.s, *hit, obstacles.obstacles()[*hit].id()};
        }
    }
    return {};
}

}  // namespace autopath
