#include "autopath/roadmap.hpp"

#include <random>

#include "autopath/errors.hpp"
#include "autopath/scenario_gen.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace autopath;
using nlohmann::ordered_json;

namespace {

ordered_json tiny_map_doc() {
    ordered_json doc;
    doc["meta"] = {{"version", "autopath-map/1"}, {"name", "tiny"}};
    doc["nodes"] = ordered_json::array();
    for (int i = 0; i < 4; ++i) {
        doc["nodes"].push_back(
            {{"id", i}, {"x", 2.0 * i}, {"y", 0.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    }
    doc["edges"] = ordered_json::array();
    for (int i = 0; i < 3; ++i) {
        doc["edges"].push_back({{"from", i}, {"to", i + 1}, {"kind", "lane_follow"}});
    }
    doc["boundaries"] = ordered_json::array();
    ordered_json left, right;
    left["tag"] = "road";
    left["points"] = {{0.0, 1.85}, {6.0, 1.85}};
    left["lanes"] = {"L0"};
    right["tag"] = "road";
    right["points"] = {{0.0, -1.85}, {6.0, -1.85}};
    right["lanes"] = {"L0"};
    doc["boundaries"].push_back(left);
    doc["boundaries"].push_back(right);
    doc["legality"] = ordered_json::array();
    return doc;
}

RoadMap straight_two_lane(double length = 200.0) {
    MapGenConfig cfg;
    cfg.straight_length = length;
    return RoadMap::load(generate_map_json(cfg));
}

}  // namespace

TEST_CASE("two parallel lanes load with the expected node count") {
    const RoadMap map = straight_two_lane(200.0);
    CHECK(map.nodes().size() == 2 * 101);
    CHECK(map.lane_ids().size() == 2);
    CHECK(map.node_spacing() == doctest::Approx(2.0));
    // Lane-change edges exist in both directions.
    bool change_01 = false, change_10 = false;
    for (const MapEdge& e : map.edges()) {
        if (e.kind != EdgeKind::LaneChange) continue;
        if (map.nodes()[e.from].lane_id == "L0" && map.nodes()[e.to].lane_id == "L1")
            change_01 = true;
        if (map.nodes()[e.from].lane_id == "L1" && map.nodes()[e.to].lane_id == "L0")
            change_10 = true;
    }
    CHECK(change_01);
    CHECK(change_10);
}

TEST_CASE("edge cost equals spline arc length") {
    const RoadMap map = straight_two_lane(40.0);
    for (const MapEdge& e : map.edges()) {
        CHECK(e.cost == doctest::Approx(e.spline.arc_length()).epsilon(1e-3));
        CHECK((e.spline.start().position() - map.nodes()[e.from].pose.position()).norm() < 1e-9);
        CHECK((e.spline.end().position() - map.nodes()[e.to].pose.position()).norm() < 1e-9);
    }
}

TEST_CASE("loader rejects malformed documents") {
    auto doc = tiny_map_doc();
    doc["edges"].push_back({{"from", 2}, {"to", 99}, {"kind", "lane_follow"}});
    CHECK_THROWS_AS(RoadMap::load(doc.dump()), ValidationError);

    doc = tiny_map_doc();
    doc["nodes"] = ordered_json::array();
    CHECK_THROWS_AS(RoadMap::load(doc.dump()), SchemaError);

    doc = tiny_map_doc();
    doc["meta"]["version"] = "autopath-map/9";
    CHECK_THROWS_AS(RoadMap::load(doc.dump()), SchemaError);

    CHECK_THROWS_AS(RoadMap::load("{not json"), SchemaError);

    // Disconnected graph: an island node pair far away.
    doc = tiny_map_doc();
    doc["nodes"].push_back(
        {{"id", 50}, {"x", 500.0}, {"y", 0.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    CHECK_THROWS_AS(RoadMap::load(doc.dump()), ValidationError);
}

TEST_CASE("initialize_destination propagates exact lattice distances") {
    auto doc = tiny_map_doc();
    RoadMap map = RoadMap::load(doc.dump());
    const int goal = map.initialize_destination(Pose2(6.0, 0.0, 0.0));
    CHECK(map.nodes()[goal].dist_to_goal == 0.0);
    CHECK(map.nodes()[1].dist_to_goal == doctest::Approx(4.0));
    CHECK(map.nodes()[0].dist_to_goal == doctest::Approx(6.0));

    CHECK_THROWS_AS(map.initialize_destination(Pose2(50.0, 50.0, 0.0)), DestinationOffMap);
}

TEST_CASE("Y junction takes the cheaper branch") {
    // Two branches into the goal with different lengths; the source before the
    // fork must get the min-path cost. Brute-force enumeration on this graph
    // has exactly two paths: 5+... construct source -> a -> goal (length 5+5)
    // and source -> b -> goal (length 5+7).
    ordered_json doc;
    doc["meta"] = {{"version", "autopath-map/1"}, {"name", "y"}};
    doc["nodes"] = ordered_json::array();
    doc["nodes"].push_back({{"id", 0}, {"x", 0.0}, {"y", 0.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    doc["nodes"].push_back({{"id", 1}, {"x", 5.0}, {"y", 0.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    doc["nodes"].push_back({{"id", 2}, {"x", 0.0}, {"y", 7.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    doc["nodes"].push_back({{"id", 3}, {"x", -5.0}, {"y", 0.0}, {"heading", 0.0}, {"lane_id", "L0"}});
    doc["edges"] = ordered_json::array();
    doc["edges"].push_back({{"from", 3}, {"to", 1}, {"kind", "lane_follow"}});
    doc["edges"].push_back({{"from", 3}, {"to", 2}, {"kind", "lane_follow"}});
    doc["edges"].push_back({{"from", 1}, {"to", 0}, {"kind", "lane_follow"}});
    doc["edges"].push_back({{"from", 2}, {"to", 0}, {"kind", "lane_follow"}});
    doc["boundaries"] = ordered_json::array();
    ordered_json left, right;
    left["tag"] = "road";
    left["points"] = {{-10.0, 10.0}, {10.0, 10.0}};
    left["lanes"] = {"L0"};
    right["tag"] = "road";
    right["points"] = {{-10.0, -2.0}, {10.0, -2.0}};
    right["lanes"] = {"L0"};
    doc["boundaries"].push_back(left);
    doc["boundaries"].push_back(right);

    RoadMap map = RoadMap::load(doc.dump());
    map.initialize_destination(Pose2(0.0, 0.0, 0.0));

    // Brute-force path enumeration oracle over the two routes.
    const double via1 = map.edges()[0].cost + map.edges()[2].cost;
    const double via2 = map.edges()[1].cost + map.edges()[3].cost;
    CHECK(map.nodes()[3].dist_to_goal == doctest::Approx(std::min(via1, via2)));

    // Triangle consistency on every edge.
    for (const MapEdge& e : map.edges()) {
        const double du = map.nodes()[e.from].dist_to_goal;
        const double dv = map.nodes()[e.to].dist_to_goal;
        if (dv == kInfCost) continue;
        CHECK(du <= e.cost + dv + 1e-12);
    }
}

TEST_CASE("dist_to_goal equals Bellman-Ford oracle on random maps") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        MapGenConfig cfg;
        cfg.straight_length = 60.0 + 20.0 * trial;
        cfg.lanes = 2;
        RoadMap map = RoadMap::load(generate_map_json(cfg));
        std::uniform_int_distribution<int> pick(0, static_cast<int>(map.nodes().size()) - 1);
        const int goal_node = pick(rng);
        map.initialize_destination(map.nodes()[goal_node].pose);

        // Bellman-Ford over reversed edges, identical arithmetic.
        std::vector<double> dist(map.nodes().size(), kInfCost);
        dist[goal_node] = 0.0;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const MapEdge& e : map.edges()) {
                if (dist[e.to] == kInfCost) continue;
                const double alt = e.cost + dist[e.to];
                if (alt < dist[e.from]) {
                    dist[e.from] = alt;
                    changed = true;
                }
            }
        }
        for (std::size_t i = 0; i < dist.size(); ++i) {
            CHECK(map.nodes()[i].dist_to_goal == dist[i]);
        }
    }
}

TEST_CASE("nearest_nodes matches a linear scan oracle") {
    const RoadMap map = straight_two_lane(200.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(-10.0, 210.0);
    std::uniform_real_distribution<double> uy(-8.0, 8.0);
    for (int q = 0; q < 200; ++q) {
        const Vec2 p(ux(rng), uy(rng));
        const double radius = 12.0;
        const auto got = map.nearest_nodes(p, 5, radius);

        std::vector<std::pair<double, int>> all;
        for (std::size_t i = 0; i < map.nodes().size(); ++i) {
            const double d = (map.nodes()[i].pose.position() - p).norm();
            if (d <= radius) all.emplace_back(d, static_cast<int>(i));
        }
        std::sort(all.begin(), all.end());
        std::vector<int> expect;
        for (std::size_t i = 0; i < all.size() && i < 5; ++i) expect.push_back(all[i].second);
        CHECK(got == expect);
    }

    // Query exactly on a node.
    const Vec2 on_node = map.nodes()[7].pose.position();
    const auto got = map.nearest_nodes(on_node, 3, 5.0);
    REQUIRE(!got.empty());
    CHECK(got.front() == 7);
}

TEST_CASE("nearest_nodes breaks distance ties by node id") {
    const RoadMap map = straight_two_lane(20.0);
    // Midpoint between node 3 (x=6) and node 4 (x=8) of lane L0.
    const Vec2 mid = 0.5 * (map.nodes()[3].pose.position() + map.nodes()[4].pose.position());
    const auto got = map.nearest_nodes(mid, 2, 5.0);
    REQUIRE(got.size() == 2);
    CHECK(got[0] == 3);
    CHECK(got[1] == 4);
}

TEST_CASE("manoeuvre legality") {
    ordered_json doc = tiny_map_doc();
    // Add an opposing lane marked illegal.
    for (int i = 0; i < 4; ++i) {
        doc["nodes"].push_back({{"id", 10 + i},
                                {"x", 2.0 * (3 - i)},
                                {"y", 3.7},
                                {"heading", M_PI},
                                {"lane_id", "L9"}});
    }
    for (int i = 0; i < 3; ++i) {
        doc["edges"].push_back({{"from", 10 + i}, {"to", 11 + i}, {"kind", "lane_follow"}});
    }
    // Shared boundary so the map stays weakly connected via an edge pair.
    doc["edges"].push_back({{"from", 3}, {"to", 10}, {"kind", "lane_change"}});
    ordered_json shared, upper;
    shared["tag"] = "lane";
    shared["points"] = {{0.0, 1.85}, {6.0, 1.85}};
    shared["lanes"] = {"L0", "L9"};
    upper["tag"] = "road";
    upper["points"] = {{0.0, 5.55}, {6.0, 5.55}};
    upper["lanes"] = {"L9"};
    doc["boundaries"].push_back(shared);
    doc["boundaries"].push_back(upper);
    doc["legality"].push_back({{"from_lane", "L0"}, {"to_lane", "L9"}, {"legal", false}});
    doc["legality"].push_back({{"from_lane", "L9"}, {"to_lane", "L0"}, {"legal", false}});

    const RoadMap map = RoadMap::load(doc.dump());
    CHECK(map.manoeuvre_is_legal("L0", "L0"));
    CHECK_FALSE(map.manoeuvre_is_legal("L0", "L9"));
    CHECK_FALSE(map.manoeuvre_is_legal("L9", "L0"));
    CHECK_THROWS_AS(map.manoeuvre_is_legal("L0", "nope"), UnknownLane);

    // Adjacent same-direction lanes without explicit rules are legal.
    const RoadMap two = straight_two_lane(20.0);
    CHECK(two.manoeuvre_is_legal("L0", "L1"));
    CHECK(two.manoeuvre_is_legal("L1", "L0"));
}

TEST_CASE("serialize round-trips bitwise") {
    const RoadMap map = straight_two_lane(60.0);
    const std::string text = map.serialize();
    const RoadMap again = RoadMap::load(text);
    REQUIRE(map.nodes().size() == again.nodes().size());
    for (std::size_t i = 0; i < map.nodes().size(); ++i) {
        CHECK(map.nodes()[i].id == again.nodes()[i].id);
        CHECK(map.nodes()[i].pose.x == again.nodes()[i].pose.x);
        CHECK(map.nodes()[i].pose.y == again.nodes()[i].pose.y);
        CHECK(map.nodes()[i].pose.heading == again.nodes()[i].pose.heading);
        CHECK(map.nodes()[i].lane_id == again.nodes()[i].lane_id);
        CHECK(map.nodes()[i].left_boundary.boundary == again.nodes()[i].left_boundary.boundary);
        CHECK(map.nodes()[i].left_boundary.point == again.nodes()[i].left_boundary.point);
        CHECK(map.nodes()[i].right_boundary.boundary == again.nodes()[i].right_boundary.boundary);
        CHECK(map.nodes()[i].right_boundary.point == again.nodes()[i].right_boundary.point);
    }
    REQUIRE(map.edges().size() == again.edges().size());
    for (std::size_t i = 0; i < map.edges().size(); ++i) {
        CHECK(map.edges()[i].from == again.edges()[i].from);
        CHECK(map.edges()[i].to == again.edges()[i].to);
        CHECK(map.edges()[i].cost == again.edges()[i].cost);
        CHECK(map.edges()[i].kind == again.edges()[i].kind);
    }
    CHECK(text == again.serialize());
}

TEST_CASE("boundary refs flank each node") {
    const RoadMap map = straight_two_lane(40.0);
    for (const MapNode& n : map.nodes()) {
        const Vec2 left =
            map.boundaries()[n.left_boundary.boundary].line.points()[n.left_boundary.point];
        const Vec2 right =
            map.boundaries()[n.right_boundary.boundary].line.points()[n.right_boundary.point];
        CHECK(side_of_path(left, n.pose) == Side::Left);
        CHECK(side_of_path(right, n.pose) != Side::Left);
        const auto [lo, ro] = map.lateral_bounds(static_cast<int>(&n - map.nodes().data()));
        CHECK(lo > 0.0);
        CHECK(ro < 0.0);
    }
}

TEST_CASE("on_driveable_area separates road from off-road") {
    const RoadMap map = straight_two_lane(100.0);
    CHECK(map.on_driveable_area({50.0, 0.0}));     // between the lanes
    CHECK(map.on_driveable_area({50.0, 1.85}));    // lane centre
    CHECK(map.on_driveable_area({50.0, -3.5}));    // near right road edge
    CHECK_FALSE(map.on_driveable_area({50.0, -4.5}));
    CHECK_FALSE(map.on_driveable_area({50.0, 6.0}));
    CHECK_FALSE(map.on_driveable_area({120.0, 0.0}));  // beyond the course end
}

TEST_CASE("curved course map loads and stays consistent") {
    MapGenConfig cfg;
    cfg.name = "curved";
    cfg.straight_length = 60.0;
    cfg.curve_radius = 40.0;
    cfg.curve_angle = 0.5;
    cfg.tail_length = 20.0;
    const RoadMap map = RoadMap::load(generate_map_json(cfg));
    CHECK(map.nodes().size() > 0);
    // Final nodes head in the arc exit direction.
    const MapNode& last = map.nodes()[map.nodes().size() / 2 - 1];  // end of lane L0
    CHECK(std::abs(angle_diff(last.pose.heading, 0.5)) < 1e-6);
}
