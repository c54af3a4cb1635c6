#include "autopath/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace autopath {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kMinPointSeparation = 1e-9;
constexpr double kMinEndpointSeparation = 1e-6;
}  // namespace

double normalize_angle(double a) {
    double r = std::fmod(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    if (r > kPi) r -= 2.0 * kPi;
    return r;
}

double angle_diff(double a, double b) { return normalize_angle(a - b); }

Vec2 Pose2::direction() const { return {std::cos(heading), std::sin(heading)}; }

Side side_of_path(const Vec2& point, const Pose2& path_point) {
    const Vec2 d = path_point.direction();
    const Vec2 v = point - path_point.position();
    const double cross = d.x() * v.y() - d.y() * v.x();
    if (cross > kSideEpsilon) return Side::Left;
    if (cross < -kSideEpsilon) return Side::Right;
    return Side::On;
}

Polyline::Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw ValidationError("polyline needs at least 2 points");
    for (std::size_t i = 1; i < points_.size(); ++i) {
        const double d = (points_[i] - points_[i - 1]).norm();
        if (d <= kMinPointSeparation)
            throw ValidationError("polyline has coincident consecutive points at index " +
                                  std::to_string(i));
        length_ += d;
    }
}

namespace {

double signed_area(const std::vector<Vec2>& v) {
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

bool polygon_is_simple(const std::vector<Vec2>& v) {
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip edges sharing a vertex.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
        }
    }
    return true;
}

}  // namespace

PolygonObstacle::PolygonObstacle(std::vector<Vec2> vertices, std::string id)
    : vertices_(std::move(vertices)), id_(std::move(id)) {
    if (vertices_.size() < 3)
        throw ValidationError("polygon '" + id_ + "' needs at least 3 vertices");
    if (signed_area(vertices_) < 0.0) std::reverse(vertices_.begin(), vertices_.end());
    if (!polygon_is_simple(vertices_))
        throw ValidationError("polygon '" + id_ + "' is self-intersecting");
    aabb_min_ = vertices_.front();
    aabb_max_ = vertices_.front();
    for (const Vec2& v : vertices_) {
        aabb_min_ = aabb_min_.cwiseMin(v);
        aabb_max_ = aabb_max_.cwiseMax(v);
    }
}

Vec2 PolygonObstacle::centroid() const {
    Vec2 c = Vec2::Zero();
    for (const Vec2& v : vertices_) c += v;
    return c / static_cast<double>(vertices_.size());
}

PolygonObstacle PolygonObstacle::translated(const Vec2& offset) const {
    std::vector<Vec2> moved = vertices_;
    for (Vec2& v : moved) v += offset;
    return PolygonObstacle(std::move(moved), id_);
}

bool point_in_polygon(const Vec2& p, const PolygonObstacle& poly) {
    const auto& v = poly.vertices();
    const std::size_t n = v.size();
    // Boundary counts as inside.
    for (std::size_t i = 0; i < n; ++i) {
        if (point_segment_distance(p, v[i], v[(i + 1) % n]) <= 1e-12) return true;
    }
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const bool crosses = (v[i].y() > p.y()) != (v[j].y() > p.y());
        if (!crosses) continue;
        const double x_at =
            v[j].x() + (v[i].x() - v[j].x()) * (p.y() - v[j].y()) / (v[i].y() - v[j].y());
        if (p.x() < x_at) inside = !inside;
    }
    return inside;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squaredNorm();
    if (len2 <= 0.0) return (p - a).norm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double min_distance_polygon(const Vec2& p, const PolygonObstacle& poly) {
    if (point_in_polygon(p, poly)) return 0.0;
    const auto& v = poly.vertices();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < v.size(); ++i) {
        best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % v.size()]));
    }
    return best;
}

namespace {
double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
           std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}
}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double o1 = orient(a, b, c);
    const double o2 = orient(a, b, d);
    const double o3 = orient(c, d, a);
    const double o4 = orient(c, d, b);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 &&
        o4 != 0)
        return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

HermiteSpline::HermiteSpline(const Pose2& start, const Pose2& end, double tangent_scale)
    : start_(start), end_(end) {
    m0_ = tangent_scale * start.direction();
    m1_ = tangent_scale * end.direction();

    // Fine parameter table for arc-length queries; ~1 cm parameter steps.
    const double chord = (end.position() - start.position()).norm();
    const int n = std::clamp(static_cast<int>(std::ceil((chord + tangent_scale) / 0.01)), 64, 8192);
    table_t_.resize(n + 1);
    table_s_.resize(n + 1);
    Vec2 prev = position_at(0.0);
    table_t_[0] = 0.0;
    table_s_[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        const Vec2 p = position_at(t);
        table_t_[i] = t;
        table_s_[i] = table_s_[i - 1] + (p - prev).norm();
        prev = p;
    }
    arc_length_ = table_s_.back();

    // Cached poses every kSampleSpacing plus the exact endpoint.
    for (std::size_t i = 0; i * kSampleSpacing < arc_length_ - 1e-9; ++i) {
        const double s = static_cast<double>(i) * kSampleSpacing;
        samples_.push_back({s, pose_at_arclength(s)});
    }
    samples_.push_back({arc_length_, pose_at_arclength(arc_length_)});
}

Vec2 HermiteSpline::position_at(double t) const {
    const double t2 = t * t;
    const double t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * start_.position() + h10 * m0_ + h01 * end_.position() + h11 * m1_;
}

Vec2 HermiteSpline::derivative_at(double t) const {
    const double t2 = t * t;
    const double d00 = 6 * t2 - 6 * t;
    const double d10 = 3 * t2 - 4 * t + 1;
    const double d01 = -6 * t2 + 6 * t;
    const double d11 = 3 * t2 - 2 * t;
    return d00 * start_.position() + d10 * m0_ + d01 * end_.position() + d11 * m1_;
}

double HermiteSpline::t_at_arclength(double s) const {
    if (s <= 0.0) return 0.0;
    if (s >= arc_length_) return 1.0;
    const auto it = std::lower_bound(table_s_.begin(), table_s_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - table_s_.begin());
    if (i == 0) return 0.0;
    const double s0 = table_s_[i - 1];
    const double s1 = table_s_[i];
    const double w = (s1 > s0) ? (s - s0) / (s1 - s0) : 0.0;
    return table_t_[i - 1] + w * (table_t_[i] - table_t_[i - 1]);
}

Pose2 HermiteSpline::pose_at_arclength(double s) const {
    const double t = t_at_arclength(s);
    const Vec2 p = position_at(t);
    Vec2 d = derivative_at(t);
    if (d.squaredNorm() < 1e-18) d = start_.direction();
    return Pose2(p.x(), p.y(), std::atan2(d.y(), d.x()));
}

HermiteSpline hermite_connect(const Pose2& a, const Pose2& b, std::optional<double> tangent_scale) {
    const double sep = (b.position() - a.position()).norm();
    if (sep <= kMinEndpointSeparation)
        throw DegenerateEndpoints("hermite_connect endpoints are coincident");
    return HermiteSpline(a, b, tangent_scale.value_or(sep));
}

std::vector<Pose2> resample_arclength(const HermiteSpline& curve, double spacing) {
    if (spacing <= 0.0) throw Error("resample spacing must be positive");
    std::vector<Pose2> out;
    const double total = curve.arc_length();
    for (std::size_t i = 0; i * spacing < total - 1e-9; ++i) {
        out.push_back(curve.pose_at_arclength(static_cast<double>(i) * spacing));
    }
    out.push_back(curve.pose_at_arclength(total));
    return out;
}

std::vector<Pose2> resample_arclength(const std::vector<Vec2>& points, double spacing) {
    if (spacing <= 0.0) throw Error("resample spacing must be positive");
    if (points.size() < 2) throw Error("resample needs at least 2 points");

    std::vector<double> cum(points.size(), 0.0);
    for (std::size_t i = 1; i < points.size(); ++i) {
        cum[i] = cum[i - 1] + (points[i] - points[i - 1]).norm();
    }
    const double total = cum.back();

    auto pose_at = [&](double s) {
        s = std::clamp(s, 0.0, total);
        const auto it = std::upper_bound(cum.begin(), cum.end(), s);
        std::size_t i = std::min(static_cast<std::size_t>(it - cum.begin()), points.size() - 1);
        if (i == 0) i = 1;
        const double seg = cum[i] - cum[i - 1];
        const double w = (seg > 0.0) ? (s - cum[i - 1]) / seg : 0.0;
        const Vec2 p = points[i - 1] + w * (points[i] - points[i - 1]);
        const Vec2 d = points[i] - points[i - 1];
        return Pose2(p.x(), p.y(), std::atan2(d.y(), d.x()));
    };

    std::vector<Pose2> out;
    for (std::size_t i = 0; i * spacing < total - 1e-9; ++i) {
        out.push_back(pose_at(static_cast<double>(i) * spacing));
    }
    out.push_back(pose_at(total));
    return out;
}

std::vector<Pose2> resample_arclength(const Polyline& curve, double spacing) {
    return resample_arclength(curve.points(), spacing);
}

}  // namespace autopath
