#pragma once

#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "autopath/geometry.hpp"
#include "autopath/spatial_index.hpp"

namespace autopath {

inline constexpr double kInfCost = std::numeric_limits<double>::infinity();

// Destination snapping tolerance, half the default node spacing.
inline constexpr double kDestinationSnapRadius = 2.0;

enum class EdgeKind { LaneFollow, LaneChange };
enum class BoundaryTag { LaneBoundary, RoadBoundary };

// Index of a single point inside one boundary polyline.
struct BoundaryRef {
    int boundary = -1;
    int point = -1;
};

struct MapNode {
    int id = -1;  // file id; equals the dense index after load
    Pose2 pose;
    std::string lane_id;
    double dist_to_goal = kInfCost;
    BoundaryRef left_boundary;
    BoundaryRef right_boundary;
};

struct MapEdge {
    int from = -1;
    int to = -1;
    HermiteSpline spline;
    double cost = 0.0;  // spline arc length
    EdgeKind kind = EdgeKind::LaneFollow;
};

struct Boundary {
    BoundaryTag tag = BoundaryTag::LaneBoundary;
    Polyline line;
    std::vector<std::string> lanes;  // lanes this polyline borders
};

// Lattice road map: centreline nodes, spline edges, boundary polylines, a
// spatial index, and a declarative lane-change legality table. Topology is
// immutable after load; dist_to_goal belongs to the active planning session.
class RoadMap {
public:
    // Parses and validates "autopath-map/1" JSON. Throws SchemaError for
    // malformed documents and ValidationError for inconsistent content; the
    // message names the offending entity.
    static RoadMap load(const std::string& json_text);

    std::string serialize() const;

    const std::vector<MapNode>& nodes() const { return nodes_; }
    std::vector<MapNode>& nodes() { return nodes_; }
    const std::vector<MapEdge>& edges() const { return edges_; }
    const std::vector<Boundary>& boundaries() const { return boundaries_; }
    const std::vector<int>& out_edges(int node) const { return out_[node]; }
    const std::vector<int>& in_edges(int node) const { return in_[node]; }
    const std::string& name() const { return name_; }

    // Exact cost-to-go over the lattice, ignoring obstacles: Dijkstra from the
    // snapped goal node over reversed edges. Unreachable nodes keep +inf.
    // Returns the goal node index.
    int initialize_destination(const Pose2& destination);

    // Up to k nodes within radius, ascending (distance, id).
    std::vector<int> nearest_nodes(const Vec2& point, int k, double radius) const;

    // Nearest node regardless of radius; the map is never empty.
    int nearest_node(const Vec2& point) const;

    bool manoeuvre_is_legal(const std::string& from_lane, const std::string& to_lane) const;

    // Signed lateral extent of the node's lane at the node: first = left
    // boundary offset (>0), second = right boundary offset (<0).
    std::pair<double, double> lateral_bounds(int node) const;

    // True when the point lies inside some lane's boundary pair near a node.
    bool on_driveable_area(const Vec2& point) const;

    const std::set<std::string>& lane_ids() const { return lane_ids_; }

    // Estimated centreline node spacing (median lane-follow edge length).
    double node_spacing() const { return node_spacing_; }

    const Vec2& bounds_min() const { return bounds_min_; }
    const Vec2& bounds_max() const { return bounds_max_; }

private:
    RoadMap() = default;
    void build_derived();

    std::string name_;
    std::vector<MapNode> nodes_;
    std::vector<MapEdge> edges_;
    std::vector<Boundary> boundaries_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
    std::map<std::pair<std::string, std::string>, bool> legality_rules_;
    std::set<std::pair<std::string, std::string>> lane_adjacency_;
    std::set<std::string> lane_ids_;
    PointIndex node_index_;
    double node_spacing_ = 2.0;
    Vec2 bounds_min_ = Vec2::Zero();
    Vec2 bounds_max_ = Vec2::Zero();
};

}  // namespace autopath
