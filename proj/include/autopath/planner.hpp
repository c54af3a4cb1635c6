#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "autopath/collision.hpp"
#include "autopath/geometry.hpp"
#include "autopath/roadmap.hpp"

namespace autopath {

struct PlannerConfig {
    double max_planning_time = 10.0;  // seconds
    int samples_per_round = 50;
    double sigma_long = 2.0;   // metres, along the seed node heading
    double sigma_lat = 1.5;    // metres, perpendicular
    double sigma_yaw = 0.15;   // radians
    int uniform_samples_per_round = 20;
    double connect_radius = 8.0;       // metres
    double max_heading_change = 0.6;   // radians
    std::uint64_t rng_seed = 1;
    double collision_margin = 0.2;     // metres, planning-time inflation
    double resample_spacing = 1.0;     // metres, matches the MPC step distance
    int max_rounds = 100000;           // safety cap; the time budget binds first
};

enum class PlannerMode { Hybrid, LatticeOnly, FreeSpaceOnly };

enum class OriginKind { Lattice, FreeSample, VehicleStart, Goal };

enum class SearchEdgeKind { LaneFollow, LaneChange, Connection };

struct PathPoint {
    Pose2 pose;
    OriginKind origin = OriginKind::Lattice;
    int context_node = -1;  // lattice node index supplying lane/boundary context
    std::string lane_id;
    bool on_lane_follow = false;  // centreline reference available here
};

struct PlanDiagnostics {
    int passes = 0;
    int rounds = 0;
    int samples_drawn = 0;
    int samples_added = 0;
    int edges_checked = 0;
    double best_partial_f = kInfCost;
    double planning_time_s = 0.0;
};

struct PlannedPath {
    std::vector<PathPoint> points;
    double length = 0.0;  // solution cost (sum of edge arc lengths)
    double cost = 0.0;
    PlanDiagnostics diag;
};

struct PlanResult {
    std::optional<PlannedPath> path;
    PlanDiagnostics diag;
};

// Directed search graph shared by the forward search and the reverse tree.
// Edges are only ever marked removed, never erased, so edge ids are stable.
struct SearchGraph {
    struct Edge {
        int from = -1;
        int to = -1;
        double cost = 0.0;
        SearchEdgeKind kind = SearchEdgeKind::Connection;
        int map_edge = -1;  // backing lattice edge, -1 for connections
        bool removed = false;
    };

    std::vector<Edge> edges;
    std::vector<std::vector<int>> out;
    std::vector<std::vector<int>> in;

    int add_node() {
        out.emplace_back();
        in.emplace_back();
        return static_cast<int>(out.size()) - 1;
    }

    int add_edge(int from, int to, double cost, SearchEdgeKind kind, int map_edge = -1) {
        const int id = static_cast<int>(edges.size());
        edges.push_back({from, to, cost, kind, map_edge, false});
        out[from].push_back(id);
        in[to].push_back(id);
        return id;
    }

    void remove_edge(int e) { edges[e].removed = true; }
    int size() const { return static_cast<int>(out.size()); }
};

// Goal-rooted shortest-path tree over the live (non-removed) edges of a
// SearchGraph, maintained incrementally in the LPA* style. After settle()
// drains the queue, cost_to_go(n) equals the exact Dijkstra distance from n
// to the goal over live edges.
class ReverseTree {
public:
    explicit ReverseTree(const SearchGraph& graph) : graph_(&graph) {}

    void set_goal(int goal);
    void on_node_added();
    void on_edge_added(int edge);
    void on_edge_removed(int edge);
    void settle();

    double cost_to_go(int node) const { return h_[node]; }
    bool settled() const { return queue_.empty(); }

private:
    using Key = std::pair<double, int>;

    double rhs_value(int node) const;
    void update_vertex(int node);

    const SearchGraph* graph_;
    int goal_ = -1;
    std::vector<double> h_;
    std::vector<double> rhs_;
    std::priority_queue<Key, std::vector<Key>, std::greater<>> queue_;
};

struct SearchNode {
    int id = -1;
    Pose2 pose;
    OriginKind origin = OriginKind::Lattice;
    int context_node = -1;
    std::string lane_id;
};

struct PassResult {
    std::optional<PlannedPath> solution;
    bool obstacle_encountered = false;
};

// Asymmetric bidirectional search over the lattice plus free-space samples:
// a lazy forward edge search guided by the reverse tree's cost-to-go, with
// Gaussian sampling focused on nodes whose edges collided.
class HybridPlanner {
public:
    HybridPlanner(const RoadMap& map, const ObstacleSet& obstacles,
                  const VehicleFootprint& footprint, const PlannerConfig& config,
                  PlannerMode mode = PlannerMode::Hybrid);

    // Builds the search graph, the reverse tree (ignoring collisions),
    // connects the vehicle pose, and seeds the edge queue.
    void init_search(const Pose2& vehicle_pose, const Pose2& destination);

    // Pops minimum-key edges until the queue empties or the time budget
    // expires; colliding edges are removed from the reverse tree (which is
    // repaired) and their endpoints recorded for sampling.
    PassResult forward_pass();

    // Draws Gaussian samples around invalid nodes plus uniform samples over
    // the informed bounding region, connects survivors, updates the reverse
    // tree, and re-initializes the edge queue. Returns nodes added.
    int sample_round();

    // Creates lazy spline edges between `node` and every graph node within
    // connect_radius that passes the heading, geometry, and legality checks.
    int connect_sample(int node);

    PlanResult plan(const Pose2& vehicle_pose, const Pose2& destination);

    // Introspection for tests and experiments.
    const std::vector<SearchNode>& search_nodes() const { return nodes_; }
    const SearchGraph& graph() const { return graph_; }
    const ReverseTree& reverse_tree() const { return tree_; }
    double cost_to_come(int node) const { return g_[node]; }
    double incumbent_cost() const { return incumbent_; }
    int start_node() const { return start_; }
    int goal_node() const { return goal_; }
    const std::map<int, std::set<int>>& invalid_nodes() const { return invalid_nodes_; }
    const std::vector<int>& checked_edges() const { return checked_edges_; }
    const PlanDiagnostics& diagnostics() const { return diag_; }
    bool edge_checked_clear(int edge) const;
    std::vector<int> solution_edges() const;  // parent chain start -> goal

private:
    enum class EdgeStatus : std::uint8_t { Unknown, Clear, Blocked };

    struct QueueEntry {
        double key;
        int from;
        int to;
        int edge;
        bool operator>(const QueueEntry& o) const {
            if (key != o.key) return key > o.key;
            if (from != o.from) return from > o.from;
            if (to != o.to) return to > o.to;
            return edge > o.edge;
        }
    };

    HermiteSpline edge_spline(int edge) const;
    void push_edge(int edge);
    void push_out_edges(int node);
    void reinitialize_queue();
    bool deadline_passed() const;
    int add_sample_node(const Pose2& pose, OriginKind origin, int context, std::string lane);
    PlannedPath extract_solution();
    double best_partial_f() const;

    const RoadMap& map_;
    const ObstacleSet& obstacles_;
    VehicleFootprint footprint_;
    PlannerConfig config_;
    PlannerMode mode_;

    SearchGraph graph_;
    ReverseTree tree_;
    std::vector<SearchNode> nodes_;
    std::vector<EdgeStatus> edge_status_;
    std::vector<double> g_;
    std::vector<int> parent_edge_;
    PointIndex node_index_;
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> queue_;
    std::map<int, std::set<int>> invalid_nodes_;  // node -> colliding obstacle indices
    std::vector<int> checked_edges_;
    double incumbent_ = kInfCost;
    int start_ = -1;
    int goal_ = -1;
    Vec2 sample_lo_ = Vec2::Zero();
    Vec2 sample_hi_ = Vec2::Zero();
    std::mt19937_64 rng_;
    std::chrono::steady_clock::time_point deadline_;
    PlanDiagnostics diag_;
    bool initialized_ = false;
};

}  // namespace autopath
