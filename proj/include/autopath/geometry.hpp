#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "autopath/errors.hpp"

namespace autopath {

using Vec2 = Eigen::Vector2d;

// Wraps an angle into (-pi, pi].
double normalize_angle(double a);

// Normalized difference a - b in (-pi, pi].
double angle_diff(double a, double b);

struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // radians, kept in (-pi, pi]

    Pose2() = default;
    Pose2(double x_, double y_, double heading_) : x(x_), y(y_), heading(normalize_angle(heading_)) {}

    Vec2 position() const { return {x, y}; }
    Vec2 direction() const;  // unit tangent of the heading
};

enum class Side { Left, Right, On };

// |cross| below this counts as On. Downstream modules break the tie toward Right.
inline constexpr double kSideEpsilon = 1e-9;

// Sign of the 2-D cross product of the path tangent with the vector from the
// path point to the query point.
Side side_of_path(const Vec2& point, const Pose2& path_point);

class Polyline {
public:
    explicit Polyline(std::vector<Vec2> points);

    const std::vector<Vec2>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double length() const { return length_; }

private:
    std::vector<Vec2> points_;
    double length_ = 0.0;
};

class PolygonObstacle {
public:
    // Vertices are reordered to counter-clockwise if needed; the polygon must
    // be simple and have at least 3 vertices.
    PolygonObstacle(std::vector<Vec2> vertices, std::string id);

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::string& id() const { return id_; }
    Vec2 centroid() const;

    Vec2 aabb_min() const { return aabb_min_; }
    Vec2 aabb_max() const { return aabb_max_; }

    PolygonObstacle translated(const Vec2& offset) const;

private:
    std::vector<Vec2> vertices_;
    std::string id_;
    Vec2 aabb_min_;
    Vec2 aabb_max_;
};

// Ray-casting test; boundary points count as inside.
bool point_in_polygon(const Vec2& p, const PolygonObstacle& poly);

// Euclidean distance from p to the polygon boundary, 0 if inside or on it.
double min_distance_polygon(const Vec2& p, const PolygonObstacle& poly);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

struct ArcSample {
    double s = 0.0;  // arc length from the curve start
    Pose2 pose;
};

class HermiteSpline {
public:
    // Spacing of the cached arc-length samples used for collision sweeps.
    static constexpr double kSampleSpacing = 0.25;

    HermiteSpline(const Pose2& start, const Pose2& end, double tangent_scale);

    const Pose2& start() const { return start_; }
    const Pose2& end() const { return end_; }
    double arc_length() const { return arc_length_; }

    Vec2 position_at(double t) const;    // t in [0, 1]
    Vec2 derivative_at(double t) const;  // d position / dt

    // Poses every kSampleSpacing metres plus both endpoints.
    const std::vector<ArcSample>& samples() const { return samples_; }

    Pose2 pose_at_arclength(double s) const;

private:
    Pose2 start_;
    Pose2 end_;
    Vec2 m0_;
    Vec2 m1_;
    double arc_length_ = 0.0;
    std::vector<double> table_t_;    // fine parameter grid
    std::vector<double> table_s_;    // cumulative arc length at table_t_
    std::vector<ArcSample> samples_;

    double t_at_arclength(double s) const;
};

// Cubic Hermite curve between two poses with endpoint tangents along the pose
// headings. tangent_scale defaults to the endpoint separation distance.
// Throws DegenerateEndpoints when the poses are closer than 1e-6 m.
HermiteSpline hermite_connect(const Pose2& a, const Pose2& b,
                              std::optional<double> tangent_scale = std::nullopt);

// Poses spaced by `spacing` along arc length; the final segment may be
// shorter so the curve end is always included. Headings follow the local tangent.
std::vector<Pose2> resample_arclength(const HermiteSpline& curve, double spacing);
std::vector<Pose2> resample_arclength(const Polyline& curve, double spacing);
std::vector<Pose2> resample_arclength(const std::vector<Vec2>& points, double spacing);

}  // namespace autopath
