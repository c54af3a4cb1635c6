#include "autopath/planner.hpp"

#include <algorithm>
#include <cmath>

#include "autopath/errors.hpp"

namespace autopath {

namespace {
// Equal-cost edges must not be re-expanded forever once an incumbent exists.
constexpr double kImprovementEpsilon = 1e-6;
constexpr double kStartSnapDistance = 1e-3;
constexpr double kKeyStaleTolerance = 1e-12;
}  // namespace

// ---------------------------------------------------------------------------
// ReverseTree

void ReverseTree::set_goal(int goal) {
    goal_ = goal;
    h_.assign(graph_->size(), kInfCost);
    rhs_.assign(graph_->size(), kInfCost);
    queue_ = {};
    rhs_[goal] = 0.0;
    queue_.push({0.0, goal});
    settle();
}

void ReverseTree::on_node_added() {
    h_.push_back(kInfCost);
    rhs_.push_back(kInfCost);
}

double ReverseTree::rhs_value(int node) const {
    if (node == goal_) return 0.0;
    double best = kInfCost;
    for (int e : graph_->out[node]) {
        const auto& edge = graph_->edges[e];
        if (edge.removed) continue;
        if (h_[edge.to] == kInfCost) continue;
        best = std::min(best, edge.cost + h_[edge.to]);
    }
    return best;
}

void ReverseTree::update_vertex(int node) {
    rhs_[node] = rhs_value(node);
    if (h_[node] != rhs_[node]) {
        queue_.push({std::min(h_[node], rhs_[node]), node});
    }
}

void ReverseTree::on_edge_added(int edge) {
    const auto& e = graph_->edges[edge];
    if (goal_ < 0) return;
    update_vertex(e.from);
}

void ReverseTree::on_edge_removed(int edge) {
    const auto& e = graph_->edges[edge];
    if (goal_ < 0) return;
    update_vertex(e.from);
}

void ReverseTree::settle() {
    while (!queue_.empty()) {
        const auto [key, node] = queue_.top();
        queue_.pop();
        const double cur_key = std::min(h_[node], rhs_[node]);
        if (h_[node] == rhs_[node]) continue;  // already consistent
        if (key != cur_key) continue;          // stale entry
        if (h_[node] > rhs_[node]) {
            h_[node] = rhs_[node];
            for (int e : graph_->in[node]) {
                if (!graph_->edges[e].removed) update_vertex(graph_->edges[e].from);
            }
        } else {
            h_[node] = kInfCost;
            update_vertex(node);
            for (int e : graph_->in[node]) {
                if (!graph_->edges[e].removed) update_vertex(graph_->edges[e].from);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// HybridPlanner

HybridPlanner::HybridPlanner(const RoadMap& map, const ObstacleSet& obstacles,
                             const VehicleFootprint& footprint, const PlannerConfig& config,
                             PlannerMode mode)
    : map_(map),
      obstacles_(obstacles),
      footprint_(footprint),
      config_(config),
      mode_(mode),
      tree_(graph_),
      rng_(config.rng_seed) {}

HermiteSpline HybridPlanner::edge_spline(int edge) const {
    const auto& e = graph_.edges[edge];
    if (e.map_edge >= 0) return map_.edges()[e.map_edge].spline;
    return hermite_connect(nodes_[e.from].pose, nodes_[e.to].pose);
}

void HybridPlanner::init_search(const Pose2& vehicle_pose, const Pose2& destination) {
    graph_ = SearchGraph{};
    nodes_.clear();
    edge_status_.clear();
    node_index_ = PointIndex{};
    queue_ = {};
    invalid_nodes_.clear();
    checked_edges_.clear();
    incumbent_ = kInfCost;
    diag_ = PlanDiagnostics{};

    const auto snapped = map_.nearest_nodes(destination.position(), 1, kDestinationSnapRadius);
    if (snapped.empty())
        throw DestinationOffMap("no map node within " + std::to_string(kDestinationSnapRadius) +
                                " m of the destination");
    const int goal_map_node = snapped.front();

    if (mode_ != PlannerMode::FreeSpaceOnly) {
        for (const MapNode& n : map_.nodes()) {
            const int idx = graph_.add_node();
            nodes_.push_back({idx, n.pose, OriginKind::Lattice, idx, n.lane_id});
            node_index_.insert(n.pose.position(), idx);
        }
        for (std::size_t e = 0; e < map_.edges().size(); ++e) {
            const MapEdge& me = map_.edges()[e];
            graph_.add_edge(me.from, me.to, me.cost,
                            me.kind == EdgeKind::LaneFollow ? SearchEdgeKind::LaneFollow
                                                            : SearchEdgeKind::LaneChange,
                            static_cast<int>(e));
        }
        goal_ = goal_map_node;
    } else {
        goal_ = add_sample_node(map_.nodes()[goal_map_node].pose, OriginKind::Goal, goal_map_node,
                                map_.nodes()[goal_map_node].lane_id);
    }
    edge_status_.assign(graph_.edges.size(), EdgeStatus::Unknown);

    // Reverse tree over the whole graph, ignoring collisions.
    tree_ = ReverseTree(graph_);
    tree_.set_goal(goal_);

    // Vehicle start: reuse a lattice node when the pose sits exactly on one,
    // otherwise add a start node and connect it under the sampling rules.
    start_ = -1;
    if (mode_ != PlannerMode::FreeSpaceOnly) {
        const auto near = map_.nearest_nodes(vehicle_pose.position(), 1, 1.0);
        if (!near.empty()) {
            const MapNode& n = map_.nodes()[near.front()];
            if ((n.pose.position() - vehicle_pose.position()).norm() <= kStartSnapDistance &&
                std::abs(angle_diff(n.pose.heading, vehicle_pose.heading)) <= kStartSnapDistance) {
                start_ = near.front();
            }
        }
    }
    if (start_ < 0) {
        const int ctx = map_.nearest_node(vehicle_pose.position());
        start_ = add_sample_node(vehicle_pose, OriginKind::VehicleStart, ctx,
                                 map_.nodes()[ctx].lane_id);
        connect_sample(start_);
        tree_.settle();
        bool has_outgoing = false;
        for (int e : graph_.out[start_]) has_outgoing |= !graph_.edges[e].removed;
        // Free-space mode starts with an empty graph; samples connect later.
        if (!has_outgoing && mode_ != PlannerMode::FreeSpaceOnly)
            throw StartUnconnectable("no legal connection from the vehicle pose within " +
                                     std::to_string(config_.connect_radius) + " m");
    }

    g_.assign(graph_.size(), kInfCost);
    parent_edge_.assign(graph_.size(), -1);
    g_[start_] = 0.0;
    push_out_edges(start_);

    // Informed sampling region: bounding box of start, goal, and obstacles,
    // inflated by 10 m and clipped to the map extent.
    sample_lo_ = vehicle_pose.position().cwiseMin(nodes_[goal_].pose.position());
    sample_hi_ = vehicle_pose.position().cwiseMax(nodes_[goal_].pose.position());
    for (const PolygonObstacle& obs : obstacles_.obstacles()) {
        sample_lo_ = sample_lo_.cwiseMin(obs.aabb_min());
        sample_hi_ = sample_hi_.cwiseMax(obs.aabb_max());
    }
    sample_lo_ -= Vec2(10.0, 10.0);
    sample_hi_ += Vec2(10.0, 10.0);
    sample_lo_ = sample_lo_.cwiseMax(map_.bounds_min() - Vec2(1.0, 1.0));
    sample_hi_ = sample_hi_.cwiseMin(map_.bounds_max() + Vec2(1.0, 1.0));

    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(config_.max_planning_time));
    initialized_ = true;
}

int HybridPlanner::add_sample_node(const Pose2& pose, OriginKind origin, int context,
                                   std::string lane) {
    const int idx = graph_.add_node();
    nodes_.push_back({idx, pose, origin, context, std::move(lane)});
    node_index_.insert(pose.position(), idx);
    tree_.on_node_added();
    g_.resize(graph_.size(), kInfCost);
    parent_edge_.resize(graph_.size(), -1);
    return idx;
}

void HybridPlanner::push_edge(int edge) {
    const auto& e = graph_.edges[edge];
    if (e.removed || edge_status_[edge] == EdgeStatus::Blocked) return;
    if (g_[e.from] == kInfCost) return;
    const double h = tree_.cost_to_go(e.to);
    if (h == kInfCost) return;
    queue_.push({g_[e.from] + e.cost + h, e.from, e.to, edge});
}

void HybridPlanner::push_out_edges(int node) {
    for (int e : graph_.out[node]) push_edge(e);
}

void HybridPlanner::reinitialize_queue() {
    queue_ = {};
    for (int n = 0; n < graph_.size(); ++n) {
        if (g_[n] < kInfCost) push_out_edges(n);
    }
}

bool HybridPlanner::deadline_passed() const {
    return std::chrono::steady_clock::now() >= deadline_;
}

PassResult HybridPlanner::forward_pass() {
    if (!initialized_) throw Error("forward_pass before init_search");
    invalid_nodes_.clear();
    bool obstacle_encountered = false;

    while (!queue_.empty()) {
        if (deadline_passed()) break;
        const QueueEntry entry = queue_.top();
        queue_.pop();
        const auto& e = graph_.edges[entry.edge];
        if (e.removed || edge_status_[entry.edge] == EdgeStatus::Blocked) continue;

        const double h = tree_.cost_to_go(e.to);
        if (h == kInfCost || g_[e.from] == kInfCost) continue;
        const double current_key = g_[e.from] + e.cost + h;
        if (std::abs(current_key - entry.key) > kKeyStaleTolerance) {
            queue_.push({current_key, e.from, e.to, entry.edge});
            continue;
        }

        if (entry.key >= incumbent_ - kImprovementEpsilon) continue;  // cannot improve
        if (g_[e.from] + e.cost >= g_[e.to]) continue;                // no better path to `to`

        if (edge_status_[entry.edge] == EdgeStatus::Unknown) {
            const CollisionReport report =
                edge_in_collision(edge_spline(entry.edge), footprint_, obstacles_,
                                  config_.collision_margin);
            ++diag_.edges_checked;
            checked_edges_.push_back(entry.edge);
            if (!report.clear) {
                edge_status_[entry.edge] = EdgeStatus::Blocked;
                invalid_nodes_[e.from].insert(report.obstacle_index);
                invalid_nodes_[e.to].insert(report.obstacle_index);
                obstacle_encountered = true;
                graph_.remove_edge(entry.edge);
                tree_.on_edge_removed(entry.edge);
                tree_.settle();
                continue;
            }
            edge_status_[entry.edge] = EdgeStatus::Clear;
        }

        g_[e.to] = g_[e.from] + e.cost;
        parent_edge_[e.to] = entry.edge;
        if (e.to == goal_ && g_[goal_] < incumbent_) incumbent_ = g_[goal_];
        push_out_edges(e.to);
    }

    PassResult result;
    result.obstacle_encountered = obstacle_encountered;
    if (incumbent_ < kInfCost) result.solution = extract_solution();
    return result;
}

int HybridPlanner::sample_round() {
    if (!initialized_) throw Error("sample_round before init_search");
    const bool free_space = mode_ == PlannerMode::FreeSpaceOnly;
    if (!free_space && invalid_nodes_.empty())
        throw NoInvalidNodes("sample_round requires a forward pass that encountered obstacles");

    std::vector<int> invalid_list;
    invalid_list.reserve(invalid_nodes_.size());
    for (const auto& [node, _] : invalid_nodes_) invalid_list.push_back(node);

    const int gaussian_count = free_space ? 0 : config_.samples_per_round;
    const int uniform_count = free_space
                                  ? config_.samples_per_round + config_.uniform_samples_per_round
                                  : config_.uniform_samples_per_round;

    int added = 0;
    auto try_add = [&](const Pose2& pose, int context, const std::string& lane) {
        ++diag_.samples_drawn;
        if (!map_.on_driveable_area(pose.position())) return;
        if (pose_in_collision(pose, footprint_, obstacles_, config_.collision_margin)) return;
        const int idx = add_sample_node(pose, OriginKind::FreeSample, context, lane);
        connect_sample(idx);
        ++added;
        ++diag_.samples_added;
    };

    for (int i = 0; i < gaussian_count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(0, invalid_list.size() - 1);
        const SearchNode& seed = nodes_[invalid_list[pick(rng_)]];
        std::normal_distribution<double> d_long(0.0, config_.sigma_long);
        std::normal_distribution<double> d_lat(0.0, config_.sigma_lat);
        std::normal_distribution<double> d_yaw(0.0, config_.sigma_yaw);
        const Vec2 dir = seed.pose.direction();
        const Vec2 perp(-dir.y(), dir.x());
        const Vec2 pos = seed.pose.position() + d_long(rng_) * dir + d_lat(rng_) * perp;
        const double yaw = normalize_angle(seed.pose.heading + d_yaw(rng_));
        try_add(Pose2(pos.x(), pos.y(), yaw), seed.context_node, seed.lane_id);
    }

    for (int i = 0; i < uniform_count; ++i) {
        std::uniform_real_distribution<double> ux(sample_lo_.x(), sample_hi_.x());
        std::uniform_real_distribution<double> uy(sample_lo_.y(), sample_hi_.y());
        const Vec2 pos(ux(rng_), uy(rng_));
        const int nn = map_.nearest_node(pos);
        std::uniform_real_distribution<double> uyaw(-0.5 * config_.max_heading_change,
                                                    0.5 * config_.max_heading_change);
        const double yaw = normalize_angle(map_.nodes()[nn].pose.heading + uyaw(rng_));
        try_add(Pose2(pos.x(), pos.y(), yaw), nn, map_.nodes()[nn].lane_id);
    }

    tree_.settle();
    reinitialize_queue();
    return added;
}

int HybridPlanner::connect_sample(int node) {
    const SearchNode& sample = nodes_[node];
    const auto neighbours =
        node_index_.within_radius(sample.pose.position(), config_.connect_radius);

    int created = 0;
    auto try_direction = [&](int from, int to) {
        const Pose2& a = nodes_[from].pose;
        const Pose2& b = nodes_[to].pose;
        const Vec2 delta = b.position() - a.position();
        const double sep = delta.norm();
        if (sep <= 1e-6) return;
        if (std::abs(angle_diff(a.heading, b.heading)) > config_.max_heading_change) return;
        const double bearing = std::atan2(delta.y(), delta.x());
        if (std::abs(angle_diff(bearing, a.heading)) > config_.max_heading_change) return;
        if (std::abs(angle_diff(bearing, b.heading)) > config_.max_heading_change) return;
        if (!map_.manoeuvre_is_legal(nodes_[from].lane_id, nodes_[to].lane_id)) return;
        for (int e : graph_.out[from]) {
            if (graph_.edges[e].to == to) return;  // duplicate
        }
        const double cost = hermite_connect(a, b).arc_length();
        const int id = graph_.add_edge(from, to, cost, SearchEdgeKind::Connection);
        edge_status_.push_back(EdgeStatus::Unknown);
        tree_.on_edge_added(id);
        ++created;
    };

    for (const auto& [other, dist] : neighbours) {
        if (other == node) continue;
        try_direction(node, other);
        try_direction(other, node);
    }
    return created;
}

bool HybridPlanner::edge_checked_clear(int edge) const {
    return edge_status_[edge] == EdgeStatus::Clear;
}

std::vector<int> HybridPlanner::solution_edges() const {
    std::vector<int> chain;
    if (incumbent_ == kInfCost) return chain;
    int node = goal_;
    while (node != start_) {
        const int e = parent_edge_[node];
        chain.push_back(e);
        node = graph_.edges[e].from;
    }
    std::reverse(chain.begin(), chain.end());
    return chain;
}

double HybridPlanner::best_partial_f() const {
    double best = kInfCost;
    for (int n = 0; n < graph_.size(); ++n) {
        if (g_[n] == kInfCost) continue;
        const double h = tree_.cost_to_go(n);
        if (h == kInfCost) continue;
        best = std::min(best, g_[n] + h);
    }
    return best;
}

PlannedPath HybridPlanner::extract_solution() {
    // Walk parent edges goal -> start.
    std::vector<int> edge_chain;
    int node = goal_;
    while (node != start_) {
        const int e = parent_edge_[node];
        edge_chain.push_back(e);
        node = graph_.edges[e].from;
    }
    std::reverse(edge_chain.begin(), edge_chain.end());

    // Concatenate spline samples, tracking the owning edge per point.
    std::vector<Vec2> pts;
    std::vector<int> pt_edge;
    std::vector<double> edge_start_s(edge_chain.size(), 0.0);
    double s_accum = 0.0;
    for (std::size_t i = 0; i < edge_chain.size(); ++i) {
        edge_start_s[i] = s_accum;
        const HermiteSpline spline = edge_spline(edge_chain[i]);
        for (const ArcSample& sm : spline.samples()) {
            const Vec2 p = sm.pose.position();
            if (!pts.empty() && (p - pts.back()).norm() < 1e-9) continue;
            pts.push_back(p);
            pt_edge.push_back(static_cast<int>(i));
        }
        s_accum += spline.arc_length();
    }

    PlannedPath path;
    path.length = g_[goal_];
    path.cost = g_[goal_];

    if (pts.size() < 2) {
        // Degenerate single-point solution (start == goal).
        const SearchNode& sn = nodes_[start_];
        path.points.push_back({sn.pose, sn.origin, sn.context_node, sn.lane_id, false});
        return path;
    }

    const auto poses = resample_arclength(pts, config_.resample_spacing);

    // Annotate each resampled pose from the edge containing its arc length:
    // the nearer endpoint of that edge supplies origin, lane, and boundary
    // context (free-space points use their Gaussian seed's map point).
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + (pts[i] - pts[i - 1]).norm();
    const double total = cum.back();

    double s = 0.0;
    for (std::size_t i = 0; i < poses.size(); ++i) {
        s = (i + 1 == poses.size()) ? total
                                    : std::min(static_cast<double>(i) * config_.resample_spacing,
                                               total);
        std::size_t chain_idx = edge_chain.size() - 1;
        for (std::size_t c = 0; c < edge_chain.size(); ++c) {
            const double end_s =
                (c + 1 < edge_chain.size()) ? edge_start_s[c + 1] : total + 1.0;
            if (s < end_s) {
                chain_idx = c;
                break;
            }
        }
        const auto& edge = graph_.edges[edge_chain[chain_idx]];
        const double end_s =
            (chain_idx + 1 < edge_chain.size()) ? edge_start_s[chain_idx + 1] : total;
        const double mid = 0.5 * (edge_start_s[chain_idx] + end_s);
        const SearchNode& ref = (s <= mid) ? nodes_[edge.from] : nodes_[edge.to];
        path.points.push_back({poses[i], ref.origin, ref.context_node, ref.lane_id,
                               edge.kind == SearchEdgeKind::LaneFollow});
    }
    return path;
}

PlanResult HybridPlanner::plan(const Pose2& vehicle_pose, const Pose2& destination) {
    const auto t0 = std::chrono::steady_clock::now();
    init_search(vehicle_pose, destination);

    PlanResult result;
    while (true) {
        PassResult pass = forward_pass();
        ++diag_.passes;
        if (incumbent_ < kInfCost) {
            result.path = std::move(pass.solution);
            break;
        }
        if (mode_ == PlannerMode::LatticeOnly) break;
        if (deadline_passed()) break;
        if (mode_ != PlannerMode::FreeSpaceOnly && !pass.obstacle_encountered) break;
        if (diag_.rounds >= config_.max_rounds) break;
        sample_round();
        ++diag_.rounds;
    }

    diag_.best_partial_f = best_partial_f();
    diag_.planning_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (result.path) result.path->diag = diag_;
    result.diag = diag_;
    return result;
}

}  // namespace autopath
