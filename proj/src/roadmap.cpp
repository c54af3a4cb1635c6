#include "autopath/roadmap.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

#include "autopath/errors.hpp"
#include "json.hpp"

namespace autopath {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kMapVersion = "autopath-map/1";

EdgeKind parse_edge_kind(const std::string& s) {
    if (s == "lane_follow") return EdgeKind::LaneFollow;
    if (s == "lane_change") return EdgeKind::LaneChange;
    throw SchemaError("unknown edge kind '" + s + "'");
}

std::string edge_kind_name(EdgeKind k) {
    return k == EdgeKind::LaneFollow ? "lane_follow" : "lane_change";
}

BoundaryTag parse_boundary_tag(const std::string& s) {
    if (s == "lane") return BoundaryTag::LaneBoundary;
    if (s == "road") return BoundaryTag::RoadBoundary;
    throw SchemaError("unknown boundary tag '" + s + "'");
}

std::string boundary_tag_name(BoundaryTag t) {
    return t == BoundaryTag::LaneBoundary ? "lane" : "road";
}

double lateral_offset(const Pose2& pose, const Vec2& p) {
    const Vec2 d = pose.direction();
    const Vec2 v = p - pose.position();
    return d.x() * v.y() - d.y() * v.x();
}

double longitudinal_offset(const Pose2& pose, const Vec2& p) {
    return pose.direction().dot(p - pose.position());
}

}  // namespace

RoadMap RoadMap::load(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw SchemaError(std::string("map is not valid JSON: ") + e.what());
    }

    RoadMap map;
    try {
        if (doc.at("meta").at("version").get<std::string>() != kMapVersion)
            throw SchemaError("unsupported map version '" +
                              doc["meta"]["version"].get<std::string>() + "'");
        map.name_ = doc["meta"].value("name", "");

        const auto& jnodes = doc.at("nodes");
        if (!jnodes.is_array() || jnodes.empty()) throw SchemaError("map has an empty node list");
        for (const auto& jn : jnodes) {
            MapNode n;
            n.id = jn.at("id").get<int>();
            n.pose = Pose2(jn.at("x").get<double>(), jn.at("y").get<double>(),
                           jn.at("heading").get<double>());
            n.lane_id = jn.at("lane_id").get<std::string>();
            if (n.lane_id.empty()) throw SchemaError("node " + std::to_string(n.id) + " has an empty lane_id");
            map.nodes_.push_back(std::move(n));
        }
        std::sort(map.nodes_.begin(), map.nodes_.end(),
                  [](const MapNode& a, const MapNode& b) { return a.id < b.id; });

        std::unordered_map<int, int> id2idx;
        for (std::size_t i = 0; i < map.nodes_.size(); ++i) {
            if (!id2idx.emplace(map.nodes_[i].id, static_cast<int>(i)).second)
                throw ValidationError("duplicate node id " + std::to_string(map.nodes_[i].id));
        }

        for (const auto& je : doc.at("edges")) {
            const int from_id = je.at("from").get<int>();
            const int to_id = je.at("to").get<int>();
            const auto fit = id2idx.find(from_id);
            const auto tit = id2idx.find(to_id);
            if (fit == id2idx.end())
                throw ValidationError("edge references missing node id " + std::to_string(from_id));
            if (tit == id2idx.end())
                throw ValidationError("edge references missing node id " + std::to_string(to_id));
            if (fit->second == tit->second)
                throw ValidationError("edge is a self-loop at node " + std::to_string(from_id));
            const MapNode& a = map.nodes_[fit->second];
            const MapNode& b = map.nodes_[tit->second];
            HermiteSpline spline = [&] {
                try {
                    return hermite_connect(a.pose, b.pose);
                } catch (const DegenerateEndpoints&) {
                    throw ValidationError("edge " + std::to_string(from_id) + "->" +
                                          std::to_string(to_id) + " connects coincident nodes");
                }
            }();
            const double cost = spline.arc_length();
            map.edges_.push_back({fit->second, tit->second, std::move(spline), cost,
                                  parse_edge_kind(je.at("kind").get<std::string>())});
        }

        for (const auto& jb : doc.at("boundaries")) {
            std::vector<Vec2> pts;
            for (const auto& jp : jb.at("points")) {
                pts.emplace_back(jp.at(0).get<double>(), jp.at(1).get<double>());
            }
            Boundary b{parse_boundary_tag(jb.at("tag").get<std::string>()), Polyline(std::move(pts)), {}};
            for (const auto& jl : jb.at("lanes")) b.lanes.push_back(jl.get<std::string>());
            map.boundaries_.push_back(std::move(b));
        }

        if (doc.contains("legality")) {
            for (const auto& jr : doc["legality"]) {
                map.legality_rules_[{jr.at("from_lane").get<std::string>(),
                                     jr.at("to_lane").get<std::string>()}] =
                    jr.at("legal").get<bool>();
            }
        }
    } catch (const ordered_json::exception& e) {
        throw SchemaError(std::string("map schema violation: ") + e.what());
    }

    map.build_derived();
    return map;
}

void RoadMap::build_derived() {
    const int n = static_cast<int>(nodes_.size());
    out_.assign(n, {});
    in_.assign(n, {});
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        out_[edges_[e].from].push_back(static_cast<int>(e));
        in_[edges_[e].to].push_back(static_cast<int>(e));
    }

    for (const MapNode& node : nodes_) lane_ids_.insert(node.lane_id);
    for (const auto& rule : legality_rules_) {
        if (!lane_ids_.count(rule.first.first))
            throw ValidationError("legality rule references unknown lane '" + rule.first.first + "'");
        if (!lane_ids_.count(rule.first.second))
            throw ValidationError("legality rule references unknown lane '" + rule.first.second + "'");
    }
    for (const Boundary& b : boundaries_) {
        for (std::size_t i = 0; i < b.lanes.size(); ++i) {
            if (!lane_ids_.count(b.lanes[i]))
                throw ValidationError("boundary references unknown lane '" + b.lanes[i] + "'");
            for (std::size_t j = i + 1; j < b.lanes.size(); ++j) {
                lane_adjacency_.emplace(b.lanes[i], b.lanes[j]);
                lane_adjacency_.emplace(b.lanes[j], b.lanes[i]);
            }
        }
    }

    // Nearest flanking boundary points, restricted to boundaries of the
    // node's own lane, classified with side_of_path (On counts as Right).
    for (MapNode& node : nodes_) {
        double best_left = kInfCost;
        double best_right = kInfCost;
        for (std::size_t bi = 0; bi < boundaries_.size(); ++bi) {
            const Boundary& b = boundaries_[bi];
            if (std::find(b.lanes.begin(), b.lanes.end(), node.lane_id) == b.lanes.end()) continue;
            const auto& pts = b.line.points();
            for (std::size_t pi = 0; pi < pts.size(); ++pi) {
                const double d = (pts[pi] - node.pose.position()).norm();
                const Side side = side_of_path(pts[pi], node.pose);
                if (side == Side::Left) {
                    if (d < best_left) {
                        best_left = d;
                        node.left_boundary = {static_cast<int>(bi), static_cast<int>(pi)};
                    }
                } else {
                    if (d < best_right) {
                        best_right = d;
                        node.right_boundary = {static_cast<int>(bi), static_cast<int>(pi)};
                    }
                }
            }
        }
        if (node.left_boundary.boundary < 0 || node.right_boundary.boundary < 0)
            throw ValidationError("node " + std::to_string(node.id) +
                                  " is not flanked by boundaries of lane '" + node.lane_id + "'");
    }

    // Weak connectivity over the driveable area.
    std::vector<char> seen(n, 0);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = 1;
    while (!bfs.empty()) {
        const int u = bfs.front();
        bfs.pop();
        for (int e : out_[u])
            if (!seen[edges_[e].to]) {
                seen[edges_[e].to] = 1;
                bfs.push(edges_[e].to);
            }
        for (int e : in_[u])
            if (!seen[edges_[e].from]) {
                seen[edges_[e].from] = 1;
                bfs.push(edges_[e].from);
            }
    }
    for (int i = 0; i < n; ++i) {
        if (!seen[i])
            throw ValidationError("map graph is disconnected; node " +
                                  std::to_string(nodes_[i].id) + " is unreachable");
    }

    for (const MapNode& node : nodes_) node_index_.insert(node.pose.position(), node.id);

    std::vector<double> follow_costs;
    for (const MapEdge& e : edges_)
        if (e.kind == EdgeKind::LaneFollow) follow_costs.push_back(e.cost);
    if (!follow_costs.empty()) {
        std::nth_element(follow_costs.begin(), follow_costs.begin() + follow_costs.size() / 2,
                         follow_costs.end());
        node_spacing_ = follow_costs[follow_costs.size() / 2];
    }

    bounds_min_ = nodes_.front().pose.position();
    bounds_max_ = bounds_min_;
    for (const MapNode& node : nodes_) {
        bounds_min_ = bounds_min_.cwiseMin(node.pose.position());
        bounds_max_ = bounds_max_.cwiseMax(node.pose.position());
    }
    for (const Boundary& b : boundaries_) {
        for (const Vec2& p : b.line.points()) {
            bounds_min_ = bounds_min_.cwiseMin(p);
            bounds_max_ = bounds_max_.cwiseMax(p);
        }
    }
}

std::string RoadMap::serialize() const {
    ordered_json doc;
    doc["meta"] = {{"version", kMapVersion}, {"name", name_}};
    doc["nodes"] = ordered_json::array();
    for (const MapNode& n : nodes_) {
        doc["nodes"].push_back({{"id", n.id},
                                {"x", n.pose.x},
                                {"y", n.pose.y},
                                {"heading", n.pose.heading},
                                {"lane_id", n.lane_id}});
    }
    doc["edges"] = ordered_json::array();
    for (const MapEdge& e : edges_) {
        doc["edges"].push_back({{"from", nodes_[e.from].id},
                                {"to", nodes_[e.to].id},
                                {"kind", edge_kind_name(e.kind)}});
    }
    doc["boundaries"] = ordered_json::array();
    for (const Boundary& b : boundaries_) {
        ordered_json jb;
        jb["tag"] = boundary_tag_name(b.tag);
        jb["points"] = ordered_json::array();
        for (const Vec2& p : b.line.points()) jb["points"].push_back({p.x(), p.y()});
        jb["lanes"] = b.lanes;
        doc["boundaries"].push_back(std::move(jb));
    }
    doc["legality"] = ordered_json::array();
    for (const auto& rule : legality_rules_) {
        doc["legality"].push_back({{"from_lane", rule.first.first},
                                   {"to_lane", rule.first.second},
                                   {"legal", rule.second}});
    }
    return doc.dump(2);
}

int RoadMap::initialize_destination(const Pose2& destination) {
    const auto snapped = nearest_nodes(destination.position(), 1, kDestinationSnapRadius);
    if (snapped.empty())
        throw DestinationOffMap("no map node within " + std::to_string(kDestinationSnapRadius) +
                                " m of the destination");
    const int goal = snapped.front();

    for (MapNode& n : nodes_) n.dist_to_goal = kInfCost;
    nodes_[goal].dist_to_goal = 0.0;

    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
    pq.push({0.0, goal});
    while (!pq.empty()) {
        const auto [cost, u] = pq.top();
        pq.pop();
        if (cost > nodes_[u].dist_to_goal) continue;
        for (int e : in_[u]) {
            const int v = edges_[e].from;
            const double alt = cost + edges_[e].cost;
            if (alt < nodes_[v].dist_to_goal) {
                nodes_[v].dist_to_goal = alt;
                pq.push({alt, v});
            }
        }
    }
    return goal;
}

std::vector<int> RoadMap::nearest_nodes(const Vec2& point, int k, double radius) const {
    if (k < 1 || radius <= 0.0) throw Error("nearest_nodes requires k >= 1 and radius > 0");
    auto hits = node_index_.within_radius(point, radius);
    if (static_cast<int>(hits.size()) > k) hits.resize(k);
    std::vector<int> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(h.first);
    return out;
}

int RoadMap::nearest_node(const Vec2& point) const {
    double radius = std::max(node_spacing_, 4.0);
    for (int tries = 0; tries < 16; ++tries) {
        const auto hits = node_index_.within_radius(point, radius);
        if (!hits.empty()) return hits.front().first;
        radius *= 4.0;
    }
    return 0;
}

bool RoadMap::manoeuvre_is_legal(const std::string& from_lane, const std::string& to_lane) const {
    if (!lane_ids_.count(from_lane)) throw UnknownLane("unknown lane '" + from_lane + "'");
    if (!lane_ids_.count(to_lane)) throw UnknownLane("unknown lane '" + to_lane + "'");
    if (from_lane == to_lane) return true;
    const auto rule = legality_rules_.find({from_lane, to_lane});
    if (rule != legality_rules_.end()) return rule->second;
    return lane_adjacency_.count({from_lane, to_lane}) > 0;
}

std::pair<double, double> RoadMap::lateral_bounds(int node) const {
    const MapNode& n = nodes_[node];
    const Vec2 left =
        boundaries_[n.left_boundary.boundary].line.points()[n.left_boundary.point];
    const Vec2 right =
        boundaries_[n.right_boundary.boundary].line.points()[n.right_boundary.point];
    return {lateral_offset(n.pose, left), lateral_offset(n.pose, right)};
}

bool RoadMap::on_driveable_area(const Vec2& point) const {
    const auto hits = node_index_.within_radius(point, std::max(8.0, 2.0 * node_spacing_));
    for (const auto& [id, dist] : hits) {
        const MapNode& n = nodes_[id];
        const double along = longitudinal_offset(n.pose, point);
        if (std::abs(along) > 0.55 * node_spacing_ + 1e-9) continue;
        const auto [left, right] = lateral_bounds(id);
        const double lat = lateral_offset(n.pose, point);
        if (lat >= right - 1e-9 && lat <= left + 1e-9) return true;
    }
    return false;
}

}  // namespace autopath
