#include "autopath/corridor.hpp"

#include <algorithm>
#include <cmath>

#include "autopath/errors.hpp"

namespace autopath {

namespace {

// Local path tangents by central differences over the anchor positions, so
// build and relinearize share one construction and a fixed trajectory is a
// fixed point.
std::vector<Vec2> fd_tangents(const std::vector<Vec2>& pts, const std::vector<Pose2>& fallback) {
    std::vector<Vec2> tangents(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        Vec2 d;
        if (pts.size() == 1) {
            d = fallback.empty() ? Vec2(1.0, 0.0) : fallback[k].direction();
        } else if (k == 0) {
            d = pts[1] - pts[0];
        } else if (k + 1 == pts.size()) {
            d = pts[k] - pts[k - 1];
        } else {
            d = pts[k + 1] - pts[k - 1];
        }
        if (d.squaredNorm() < 1e-18) {
            d = (k < fallback.size()) ? fallback[k].direction() : Vec2(1.0, 0.0);
        }
        tangents[k] = d.normalized();
    }
    return tangents;
}

const BoundaryPoint* nearest_candidate(const std::vector<BoundaryPoint>& side, const Vec2& p) {
    const BoundaryPoint* best = nullptr;
    double best_d = kInfCost;
    for (const BoundaryPoint& c : side) {
        const double d = (c.position - p).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = &c;
        }
    }
    return best;
}

CorridorStep make_step(const Vec2& pos, const Vec2& tangent, const ClassifiedPoints& cand,
                       std::size_t index, double min_clear_width) {
    const BoundaryPoint* left = nearest_candidate(cand.left, pos);
    const BoundaryPoint* right = nearest_candidate(cand.right, pos);
    if (!left || !right)
        throw DegenerateCorridor("corridor step " + std::to_string(index) +
                                 " has no boundary candidate on " +
                                 std::string(!left ? "the left" : "the right"));

    CorridorStep step;
    step.anchor = Pose2(pos.x(), pos.y(), std::atan2(tangent.y(), tangent.x()));

    const Vec2 n_left(-tangent.y(), tangent.x());
    step.left = {n_left.x(), n_left.y(), n_left.dot(left->position)};
    const Vec2 n_right(tangent.y(), -tangent.x());
    step.right = {n_right.x(), n_right.y(), n_right.dot(right->position)};

    if (step.width() < 0.0)
        throw DegenerateCorridor("corridor step " + std::to_string(index) +
                                 " has no interior (width " + std::to_string(step.width()) + ")");
    step.width_flagged = step.width() < min_clear_width;
    return step;
}

}  // namespace

std::vector<ClassifiedPoints> classify_boundary_points(const PlannedPath& path,
                                                       const RoadMap& map,
                                                       const ObstacleSet& obstacles) {
    const auto& pts = path.points;
    std::vector<ClassifiedPoints> out(pts.size());

    // Arc positions of path poses and of each obstacle vertex (nearest pose).
    std::vector<double> arc(pts.size(), 0.0);
    for (std::size_t k = 1; k < pts.size(); ++k) {
        arc[k] = arc[k - 1] + (pts[k].pose.position() - pts[k - 1].pose.position()).norm();
    }

    struct VertexInfo {
        Vec2 position;
        int obstacle;
        double arc;
    };
    std::vector<VertexInfo> vertices;
    for (std::size_t oi = 0; oi < obstacles.obstacles().size(); ++oi) {
        for (const Vec2& v : obstacles.obstacles()[oi].vertices()) {
            double best_d = kInfCost;
            double best_s = 0.0;
            for (std::size_t k = 0; k < pts.size(); ++k) {
                const double d = (v - pts[k].pose.position()).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best_s = arc[k];
                }
            }
            vertices.push_back({v, static_cast<int>(oi), best_s});
        }
    }

    for (std::size_t k = 0; k < pts.size(); ++k) {
        const PathPoint& pp = pts[k];
        if (pp.context_node < 0)
            throw MissingBoundaryContext("path pose " + std::to_string(k) +
                                         " carries no boundary context");
        const std::string& lane = map.nodes()[pp.context_node].lane_id;

        auto classify = [&](const Vec2& p, BoundarySource source, int obstacle) {
            const Side side = side_of_path(p, pp.pose);
            BoundaryPoint bp{p, source, obstacle, side == Side::Left ? Side::Left : Side::Right};
            if (bp.side == Side::Left) {
                out[k].left.push_back(bp);
            } else {
                out[k].right.push_back(bp);
            }
        };

        for (const Boundary& b : map.boundaries()) {
            bool relevant;
            if (pp.on_lane_follow) {
                // Following the centreline: the own lane's boundary pair.
                relevant = std::find(b.lanes.begin(), b.lanes.end(), lane) != b.lanes.end();
            } else {
                // Changing lanes / avoiding obstacles: the outer road envelope.
                relevant = b.tag == BoundaryTag::RoadBoundary;
            }
            if (!relevant) continue;
            const BoundarySource source = b.tag == BoundaryTag::RoadBoundary
                                              ? BoundarySource::RoadBoundary
                                              : BoundarySource::LaneBoundary;
            for (const Vec2& p : b.line.points()) {
                if ((p - pp.pose.position()).norm() > kBoundaryWindow) continue;
                classify(p, source, -1);
            }
        }

        for (const VertexInfo& v : vertices) {
            if (v.arc < arc[k] - kObstacleLookbehind || v.arc > arc[k] + kObstacleLookahead)
                continue;
            classify(v.position, BoundarySource::ObstacleVertex, v.obstacle);
        }
    }
    return out;
}

Corridor build_corridor(const PlannedPath& path, const std::vector<ClassifiedPoints>& classified,
                        double sigma_buffer, int horizon, double reference_speed,
                        double min_clear_width) {
    if (horizon < 1) throw HorizonTooShort("corridor horizon must be at least 1");
    const std::size_t count =
        std::min(path.points.size(), static_cast<std::size_t>(horizon));
    if (classified.size() < count) throw Error("classified point lists shorter than the path");

    std::vector<Vec2> anchors(count);
    std::vector<Pose2> poses(count);
    for (std::size_t k = 0; k < count; ++k) {
        anchors[k] = path.points[k].pose.position();
        poses[k] = path.points[k].pose;
    }
    const auto tangents = fd_tangents(anchors, poses);

    Corridor corridor;
    corridor.sigma_buffer = sigma_buffer;
    corridor.min_clear_width = min_clear_width;
    corridor.candidates.assign(classified.begin(), classified.begin() + count);
    corridor.steps.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        CorridorStep step = make_step(anchors[k], tangents[k], corridor.candidates[k], k,
                                      min_clear_width);
        const PathPoint& pp = path.points[k];
        if (pp.on_lane_follow) {
            step.has_reference = true;
            step.reference_point = pp.pose.position();
            step.reference_speed = reference_speed;
        }
        corridor.steps.push_back(step);
    }
    return corridor;
}

Corridor relinearize(const Corridor& corridor, const std::vector<Vec2>& trajectory) {
    if (trajectory.size() != corridor.steps.size())
        throw Error("relinearize trajectory length " + std::to_string(trajectory.size()) +
                    " does not match corridor length " + std::to_string(corridor.steps.size()));

    std::vector<Pose2> fallback(corridor.steps.size());
    for (std::size_t k = 0; k < corridor.steps.size(); ++k) fallback[k] = corridor.steps[k].anchor;
    const auto tangents = fd_tangents(trajectory, fallback);

    Corridor out;
    out.sigma_buffer = corridor.sigma_buffer;
    out.min_clear_width = corridor.min_clear_width;
    out.candidates = corridor.candidates;
    out.steps.reserve(corridor.steps.size());
    for (std::size_t k = 0; k < corridor.steps.size(); ++k) {
        CorridorStep step = make_step(trajectory[k], tangents[k], corridor.candidates[k], k,
                                      corridor.min_clear_width);
        step.has_reference = corridor.steps[k].has_reference;
        step.reference_point = corridor.steps[k].reference_point;
        step.reference_speed = corridor.steps[k].reference_speed;
        out.steps.push_back(step);
    }
    return out;
}

}  // namespace autopath
