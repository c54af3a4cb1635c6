#include "autopath/planner.hpp"

#include <cmath>
#include <queue>
#include <random>

#include "autopath/errors.hpp"
#include "autopath/scenario_gen.hpp"
#include "doctest.h"

using namespace autopath;

namespace {

MapGenConfig straight_cfg(double length = 100.0) {
    MapGenConfig cfg;
    cfg.straight_length = length;
    return cfg;
}

RoadMap straight_map(double length = 100.0) {
    return RoadMap::load(generate_map_json(straight_cfg(length)));
}

// Two barricade walls across the road with a 2 m gap offset into lane L1
// (gap centred 1.2 m left of the road centre).
ObstacleSet narrow_gap_scene(double x) {
    const double gap_lo = 0.2;
    const double gap_hi = 2.2;
    std::vector<PolygonObstacle> obs;
    obs.emplace_back(box_polygon({x, (gap_hi + 3.7) / 2.0}, 0.3, 3.7 - gap_hi), "wall_left");
    obs.emplace_back(box_polygon({x, (gap_lo - 3.7) / 2.0}, 0.3, gap_lo + 3.7), "wall_right");
    return ObstacleSet(std::move(obs));
}

double dijkstra_cost(const SearchGraph& g, int start, int goal,
                     const std::vector<char>* edge_ok = nullptr) {
    std::vector<double> dist(g.size(), kInfCost);
    dist[start] = 0.0;
    using E = std::pair<double, int>;
    std::priority_queue<E, std::vector<E>, std::greater<>> pq;
    pq.push({0.0, start});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int e : g.out[u]) {
            if (g.edges[e].removed) continue;
            if (edge_ok && !(*edge_ok)[e]) continue;
            const double alt = d + g.edges[e].cost;
            if (alt < dist[g.edges[e].to]) {
                dist[g.edges[e].to] = alt;
                pq.push({alt, g.edges[e].to});
            }
        }
    }
    return dist[goal];
}

// Full Dijkstra cost-to-go over live edges, one source array (to goal).
std::vector<double> dijkstra_to_goal(const SearchGraph& g, int goal) {
    std::vector<double> dist(g.size(), kInfCost);
    dist[goal] = 0.0;
    using E = std::pair<double, int>;
    std::priority_queue<E, std::vector<E>, std::greater<>> pq;
    pq.push({0.0, goal});
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (d > dist[u]) continue;
        for (int e : g.in[u]) {
            if (g.edges[e].removed) continue;
            const double alt = d + g.edges[e].cost;
            if (alt < dist[g.edges[e].from]) {
                dist[g.edges[e].from] = alt;
                pq.push({alt, g.edges[e].from});
            }
        }
    }
    return dist;
}

}  // namespace

TEST_CASE("reverse tree repair equals full Dijkstra on randomized graphs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        SearchGraph g;
        std::uniform_int_distribution<int> usize(20, 500);
        const int n = usize(rng);
        for (int i = 0; i < n; ++i) g.add_node();
        std::uniform_int_distribution<int> unode(0, n - 1);
        std::uniform_real_distribution<double> ucost(0.1, 10.0);
        const int m = 4 * n;
        for (int e = 0; e < m; ++e) {
            const int a = unode(rng);
            const int b = unode(rng);
            if (a == b) continue;
            g.add_edge(a, b, ucost(rng), SearchEdgeKind::Connection);
        }
        const int goal = unode(rng);
        ReverseTree tree(g);
        tree.set_goal(goal);

        auto check_exact = [&] {
            const auto want = dijkstra_to_goal(g, goal);
            for (int i = 0; i < n; ++i) {
                CHECK(tree.cost_to_go(i) == want[i]);
            }
        };
        check_exact();

        // Interleave removals and insertions with incremental repairs.
        std::uniform_int_distribution<int> uedge(0, static_cast<int>(g.edges.size()) - 1);
        for (int step = 0; step < 30; ++step) {
            if (step % 3 != 2) {
                const int e = uedge(rng);
                if (!g.edges[e].removed) {
                    g.remove_edge(e);
                    tree.on_edge_removed(e);
                }
            } else {
                const int a = unode(rng);
                const int b = unode(rng);
                if (a == b) continue;
                const int e = g.add_edge(a, b, ucost(rng), SearchEdgeKind::Connection);
                tree.on_edge_added(e);
            }
            tree.settle();
        }
        check_exact();
    }
}

TEST_CASE("init_search connects the vehicle") {
    const RoadMap map = straight_map();
    const ObstacleSet no_obstacles;
    const VehicleFootprint fp;
    PlannerConfig cfg;

    SUBCASE("vehicle exactly on a lattice node reuses it") {
        HybridPlanner planner(map, no_obstacles, fp, cfg);
        planner.init_search(map.nodes()[3].pose, map.nodes()[45].pose);
        CHECK(planner.start_node() == 3);
    }

    SUBCASE("vehicle off the centreline gets connection splines") {
        HybridPlanner planner(map, no_obstacles, fp, cfg);
        const Pose2 off(10.0, -1.35, 0.0);  // 0.5 m left of lane L0 centre
        planner.init_search(off, map.nodes()[45].pose);
        const int start = planner.start_node();
        CHECK(planner.search_nodes()[start].origin == OriginKind::VehicleStart);
        int downstream = 0;
        for (int e : planner.graph().out[start]) {
            const auto& edge = planner.graph().edges[e];
            CHECK(edge.kind == SearchEdgeKind::Connection);
            // Heading-change threshold honoured by construction.
            const Pose2& a = planner.search_nodes()[edge.from].pose;
            const Pose2& b = planner.search_nodes()[edge.to].pose;
            CHECK(std::abs(angle_diff(a.heading, b.heading)) <= cfg.max_heading_change + 1e-12);
            ++downstream;
        }
        CHECK(downstream >= 1);
    }

    SUBCASE("vehicle far off the map is unconnectable") {
        HybridPlanner planner(map, no_obstacles, fp, cfg);
        CHECK_THROWS_AS(planner.init_search(Pose2(50.0, 60.0, 0.0), map.nodes()[45].pose),
                        StartUnconnectable);
    }

    SUBCASE("destination far off the map") {
        HybridPlanner planner(map, no_obstacles, fp, cfg);
        CHECK_THROWS_AS(planner.init_search(map.nodes()[3].pose, Pose2(50.0, 80.0, 0.0)),
                        DestinationOffMap);
    }
}

TEST_CASE("forward pass on an empty road returns the lattice shortest path") {
    const RoadMap map = straight_map();
    const ObstacleSet no_obstacles;
    HybridPlanner planner(map, no_obstacles, VehicleFootprint{}, PlannerConfig{});
    planner.init_search(map.nodes()[0].pose, map.nodes()[45].pose);
    const PassResult pass = planner.forward_pass();
    REQUIRE(pass.solution.has_value());
    CHECK_FALSE(pass.obstacle_encountered);
    CHECK(planner.incumbent_cost() ==
          doctest::Approx(dijkstra_cost(planner.graph(), 0, 45)).epsilon(1e-12));
}

TEST_CASE("narrow gap defeats the lattice but records obstacles") {
    const RoadMap map = straight_map();
    const ObstacleSet walls = narrow_gap_scene(50.0);
    PlannerConfig cfg;
    cfg.collision_margin = 0.05;
    HybridPlanner planner(map, walls, VehicleFootprint{}, cfg, PlannerMode::LatticeOnly);
    planner.init_search(map.nodes()[1].pose, map.nodes()[48].pose);
    const PassResult pass = planner.forward_pass();
    CHECK_FALSE(pass.solution.has_value());
    CHECK(pass.obstacle_encountered);
    CHECK_FALSE(planner.invalid_nodes().empty());
}

TEST_CASE("single blocked lane solved via lane changes matches filtered Dijkstra") {
    const RoadMap map = straight_map();
    // Barrel dead on lane L0 centreline.
    const ObstacleSet barrels({PolygonObstacle(barrel_polygon({50.0, -1.85}, 0.3), "b0")});
    const VehicleFootprint fp;
    PlannerConfig cfg;
    HybridPlanner planner(map, barrels, fp, cfg, PlannerMode::LatticeOnly);
    const PlanResult result = planner.plan(map.nodes()[1].pose, map.nodes()[48].pose);
    REQUIRE(result.path.has_value());

    // Oracle: Dijkstra over the lattice with every edge collision-filtered.
    SearchGraph g;
    for (std::size_t i = 0; i < map.nodes().size(); ++i) g.add_node();
    std::vector<char> ok;
    for (const MapEdge& e : map.edges()) {
        g.add_edge(e.from, e.to, e.cost,
                   e.kind == EdgeKind::LaneFollow ? SearchEdgeKind::LaneFollow
                                                  : SearchEdgeKind::LaneChange);
        ok.push_back(edge_in_collision(e.spline, fp, barrels, cfg.collision_margin).clear ? 1 : 0);
    }
    const double oracle = dijkstra_cost(g, 1, 48, &ok);
    CHECK(result.path->cost == doctest::Approx(oracle).epsilon(1e-12));

    // The solution leaves lane L0 and returns, so it uses lane-change edges.
    bool uses_change = false;
    for (int e : planner.solution_edges()) {
        uses_change |= planner.graph().edges[e].kind == SearchEdgeKind::LaneChange;
        CHECK(planner.edge_checked_clear(e));  // no lazy edge survives unevaluated
    }
    CHECK(uses_change);
}

TEST_CASE("first pass matches an independent lazy A* baseline edge for edge") {
    const RoadMap map = straight_map();
    const ObstacleSet barrels({PolygonObstacle(barrel_polygon({40.0, -1.85}, 0.3), "b0"),
                               PolygonObstacle(barrel_polygon({60.0, 1.85}, 0.3), "b1")});
    const VehicleFootprint fp;
    PlannerConfig cfg;

    HybridPlanner planner(map, barrels, fp, cfg, PlannerMode::LatticeOnly);
    planner.init_search(map.nodes()[1].pose, map.nodes()[48].pose);
    const PassResult pass = planner.forward_pass();
    REQUIRE(pass.solution.has_value());

    // Baseline: identical semantics, but the heuristic is recomputed from
    // scratch with a full Dijkstra after every edge removal.
    SearchGraph g;
    for (std::size_t i = 0; i < map.nodes().size(); ++i) g.add_node();
    for (const MapEdge& e : map.edges()) {
        g.add_edge(e.from, e.to, e.cost,
                   e.kind == EdgeKind::LaneFollow ? SearchEdgeKind::LaneFollow
                                                  : SearchEdgeKind::LaneChange);
    }
    const int start = 1, goal = 48;
    std::vector<double> h = dijkstra_to_goal(g, goal);
    std::vector<double> gs(g.size(), kInfCost);
    std::vector<int> parent(g.size(), -1);
    gs[start] = 0.0;
    double incumbent = kInfCost;
    std::vector<int> checked;

    struct Entry {
        double key;
        int from, to, edge;
        bool operator>(const Entry& o) const {
            if (key != o.key) return key > o.key;
            if (from != o.from) return from > o.from;
            if (to != o.to) return to > o.to;
            return edge > o.edge;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> q;
    auto push_out = [&](int node) {
        for (int e : g.out[node]) {
            if (g.edges[e].removed || h[g.edges[e].to] == kInfCost) continue;
            q.push({gs[node] + g.edges[e].cost + h[g.edges[e].to], node, g.edges[e].to, e});
        }
    };
    push_out(start);
    while (!q.empty()) {
        const Entry en = q.top();
        q.pop();
        const auto& e = g.edges[en.edge];
        if (e.removed) continue;
        if (h[e.to] == kInfCost || gs[e.from] == kInfCost) continue;
        const double cur = gs[e.from] + e.cost + h[e.to];
        if (std::abs(cur - en.key) > 1e-12) {
            if (cur < kInfCost) q.push({cur, e.from, e.to, en.edge});
            continue;
        }
        if (en.key >= incumbent - 1e-6) continue;
        if (gs[e.from] + e.cost >= gs[e.to]) continue;
        checked.push_back(en.edge);
        const auto report =
            edge_in_collision(map.edges()[en.edge].spline, fp, barrels, cfg.collision_margin);
        if (!report.clear) {
            g.remove_edge(en.edge);
            h = dijkstra_to_goal(g, goal);  // brute-force heuristic repair
            continue;
        }
        gs[e.to] = gs[e.from] + e.cost;
        parent[e.to] = en.edge;
        if (e.to == goal && gs[goal] < incumbent) incumbent = gs[goal];
        push_out(e.to);
    }

    CHECK(incumbent == planner.incumbent_cost());
    // Baseline re-checks edges it has already cleared (it keeps no status
    // cache), so compare the planner's trace against the deduplicated
    // baseline trace: same edges, same first-check order.
    std::vector<int> dedup;
    std::set<int> seen;
    for (int e : checked) {
        if (seen.insert(e).second) dedup.push_back(e);
    }
    CHECK(planner.checked_edges() == dedup);

    std::vector<int> oracle_chain;
    for (int node = goal; node != start; node = g.edges[parent[node]].from)
        oracle_chain.push_back(parent[node]);
    std::reverse(oracle_chain.begin(), oracle_chain.end());
    CHECK(planner.solution_edges() == oracle_chain);
}

TEST_CASE("sampling statistics and determinism") {
    const RoadMap map = straight_map();
    const ObstacleSet walls = narrow_gap_scene(50.0);
    PlannerConfig cfg;
    cfg.sigma_lat = 1.0;
    cfg.samples_per_round = 400;
    cfg.uniform_samples_per_round = 0;
    cfg.collision_margin = 0.05;
    cfg.rng_seed = 12345;

    auto run_round = [&](HybridPlanner& planner) {
        planner.init_search(map.nodes()[1].pose, map.nodes()[48].pose);
        planner.forward_pass();
        return planner.sample_round();
    };

    VehicleFootprint fp;
    HybridPlanner planner(map, walls, fp, cfg);
    const int added = run_round(planner);
    CHECK(added >= 100);

    // Empirical lateral std of accepted samples relative to their seed lane
    // centreline; collision and road filtering skew it slightly.
    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (const SearchNode& n : planner.search_nodes()) {
        if (n.origin != OriginKind::FreeSample) continue;
        const Pose2& ctx = map.nodes()[n.context_node].pose;
        const Vec2 d = ctx.direction();
        const Vec2 v = n.pose.position() - ctx.position();
        const double lat = d.x() * v.y() - d.y() * v.x();
        sum += lat;
        sum2 += lat * lat;
        ++count;
    }
    REQUIRE(count >= 100);
    const double mean = sum / count;
    const double stdev = std::sqrt(sum2 / count - mean * mean);
    CHECK(stdev > 0.7);
    CHECK(stdev < 1.3);

    // Same seed, same inputs: bit-identical samples.
    HybridPlanner planner2(map, walls, fp, cfg);
    run_round(planner2);
    REQUIRE(planner.search_nodes().size() == planner2.search_nodes().size());
    for (std::size_t i = 0; i < planner.search_nodes().size(); ++i) {
        CHECK(planner.search_nodes()[i].pose.x == planner2.search_nodes()[i].pose.x);
        CHECK(planner.search_nodes()[i].pose.y == planner2.search_nodes()[i].pose.y);
        CHECK(planner.search_nodes()[i].pose.heading == planner2.search_nodes()[i].pose.heading);
    }

    // Calling sample_round without an obstacle-reporting pass is an error.
    HybridPlanner planner3(map, ObstacleSet{}, fp, cfg);
    planner3.init_search(map.nodes()[1].pose, map.nodes()[48].pose);
    planner3.forward_pass();
    CHECK_THROWS_AS(planner3.sample_round(), NoInvalidNodes);
}

TEST_CASE("connect_sample geometry and legality rules") {
    const RoadMap map = straight_map();
    const ObstacleSet no_obstacles;
    PlannerConfig cfg;
    HybridPlanner planner(map, no_obstacles, VehicleFootprint{}, cfg);
    planner.init_search(map.nodes()[0].pose, map.nodes()[45].pose);

    SUBCASE("aligned sample near the centreline gets edges both ways") {
        // Reuse the planner's start-connection machinery via a fresh search:
        // place the vehicle 1 m left of a mid-lane node.
        HybridPlanner p2(map, no_obstacles, VehicleFootprint{}, cfg);
        p2.init_search(Pose2(40.0, -0.85, 0.0), map.nodes()[45].pose);
        const int start = p2.start_node();
        int outgoing = 0, incoming = 0;
        for (int e : p2.graph().out[start]) (void)e, ++outgoing;
        for (int e : p2.graph().in[start]) (void)e, ++incoming;
        CHECK(outgoing >= 1);
        CHECK(incoming >= 1);
        CHECK(outgoing + incoming >= 2);
    }

    SUBCASE("sample heading far off every neighbour connects nothing") {
        HybridPlanner p2(map, no_obstacles, VehicleFootprint{}, cfg);
        CHECK_THROWS_AS(p2.init_search(Pose2(40.0, -0.85, M_PI / 2.0), map.nodes()[45].pose),
                        StartUnconnectable);
    }
}

TEST_CASE("hybrid plan equals lattice plan when the lattice suffices") {
    // Scenario A analog: four barrels 7 m apart in lane L0.
    MapGenConfig mcfg = straight_cfg(200.0);
    const RoadMap map = RoadMap::load(generate_map_json(mcfg));
    std::vector<PolygonObstacle> obs;
    for (int i = 0; i < 4; ++i) {
        obs.emplace_back(barrel_polygon({60.0 + 7.0 * i, -1.85}, 0.3), "b" + std::to_string(i));
    }
    const ObstacleSet barrels(std::move(obs));
    PlannerConfig cfg;

    HybridPlanner lattice(map, barrels, VehicleFootprint{}, cfg, PlannerMode::LatticeOnly);
    const PlanResult lat = lattice.plan(map.nodes()[1].pose, map.nodes()[95].pose);
    REQUIRE(lat.path.has_value());

    HybridPlanner hybrid(map, barrels, VehicleFootprint{}, cfg, PlannerMode::Hybrid);
    const PlanResult hyb = hybrid.plan(map.nodes()[1].pose, map.nodes()[95].pose);
    REQUIRE(hyb.path.has_value());

    CHECK(hyb.path->cost == lat.path->cost);  // first-pass purity, bit exact
    CHECK(hyb.diag.passes == 1);
    CHECK(hyb.diag.samples_drawn == 0);
}

TEST_CASE("hybrid plan threads the narrow gap where the lattice fails") {
    const RoadMap map = straight_map(120.0);
    const ObstacleSet walls = narrow_gap_scene(60.0);
    PlannerConfig cfg;
    cfg.collision_margin = 0.05;
    cfg.rng_seed = 7;

    HybridPlanner lattice(map, walls, VehicleFootprint{}, cfg, PlannerMode::LatticeOnly);
    const PlanResult lat = lattice.plan(map.nodes()[1].pose, map.nodes()[55].pose);
    CHECK_FALSE(lat.path.has_value());

    HybridPlanner hybrid(map, walls, VehicleFootprint{}, cfg, PlannerMode::Hybrid);
    const PlanResult hyb = hybrid.plan(map.nodes()[1].pose, map.nodes()[55].pose);
    REQUIRE(hyb.path.has_value());
    CHECK(hyb.diag.rounds >= 1);

    // Solution poses thread the gap region (x near 60 => y inside (0.2, 2.2)).
    bool through_gap = false;
    for (const PathPoint& p : hyb.path->points) {
        if (std::abs(p.pose.x - 60.0) < 1.0) {
            CHECK(p.pose.y > 0.2);
            CHECK(p.pose.y < 2.2);
            through_gap = true;
        }
    }
    CHECK(through_gap);

    // Every solution edge was collision-checked.
    for (int e : hybrid.solution_edges()) {
        CHECK(hybrid.edge_checked_clear(e));
    }

    // Free-space points on the path carry their seed's boundary context.
    bool has_free = false;
    for (const PathPoint& p : hyb.path->points) {
        if (p.origin == OriginKind::FreeSample) {
            has_free = true;
            CHECK(p.context_node >= 0);
            CHECK_FALSE(p.on_lane_follow);
        }
    }
    CHECK(has_free);
}

TEST_CASE("plan reports NoPathFound for an unreachable goal") {
    // One-way single lane: goal behind the start is unreachable.
    MapGenConfig cfg1;
    cfg1.lanes = 1;
    cfg1.straight_length = 60.0;
    const RoadMap map = RoadMap::load(generate_map_json(cfg1));
    PlannerConfig cfg;
    HybridPlanner planner(map, ObstacleSet{}, VehicleFootprint{}, cfg);
    const PlanResult result = planner.plan(map.nodes()[20].pose, map.nodes()[2].pose);
    CHECK_FALSE(result.path.has_value());
    CHECK(result.diag.passes >= 1);
}

TEST_CASE("plan output is deterministic for a fixed seed") {
    const RoadMap map = straight_map(120.0);
    const ObstacleSet walls = narrow_gap_scene(60.0);
    PlannerConfig cfg;
    cfg.collision_margin = 0.05;
    cfg.rng_seed = 99;

    auto run = [&] {
        HybridPlanner planner(map, walls, VehicleFootprint{}, cfg);
        return planner.plan(map.nodes()[1].pose, map.nodes()[55].pose);
    };
    const PlanResult a = run();
    const PlanResult b = run();
    REQUIRE(a.path.has_value());
    REQUIRE(b.path.has_value());
    CHECK(a.path->cost == b.path->cost);
    REQUIRE(a.path->points.size() == b.path->points.size());
    for (std::size_t i = 0; i < a.path->points.size(); ++i) {
        CHECK(a.path->points[i].pose.x == b.path->points[i].pose.x);
        CHECK(a.path->points[i].pose.y == b.path->points[i].pose.y);
        CHECK(a.path->points[i].pose.heading == b.path->points[i].pose.heading);
    }
}

TEST_CASE("free-space mode plans without the lattice prior") {
    const RoadMap map = straight_map(60.0);
    PlannerConfig cfg;
    cfg.rng_seed = 3;
    cfg.samples_per_round = 60;
    HybridPlanner planner(map, ObstacleSet{}, VehicleFootprint{}, cfg,
                          PlannerMode::FreeSpaceOnly);
    const PlanResult result = planner.plan(map.nodes()[1].pose, map.nodes()[28].pose);
    REQUIRE(result.path.has_value());
    CHECK(result.diag.rounds >= 1);
    // No lattice-kind edges can appear in a free-space solution.
    for (int e : planner.solution_edges()) {
        CHECK(planner.graph().edges[e].kind == SearchEdgeKind::Connection);
    }
}
