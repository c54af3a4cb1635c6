#include "autopath/geometry.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace autopath;

namespace {

PolygonObstacle unit_square_at_origin() {
    return PolygonObstacle({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, "sq");
}

// Brute-force distance oracle: densely sample every boundary segment.
double polygon_distance_oracle(const Vec2& p, const PolygonObstacle& poly) {
    double best = std::numeric_limits<double>::infinity();
    const auto& v = poly.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        for (int k = 0; k <= 4000; ++k) {
            const Vec2 q = a + (b - a) * (static_cast<double>(k) / 4000.0);
            best = std::min(best, (p - q).norm());
        }
    }
    return best;
}

}  // namespace

TEST_CASE("normalize_angle maps into (-pi, pi]") {
    CHECK(normalize_angle(M_PI) == doctest::Approx(M_PI));
    CHECK(normalize_angle(-M_PI) == doctest::Approx(M_PI));
    CHECK(normalize_angle(3 * M_PI) == doctest::Approx(M_PI));
    CHECK(normalize_angle(0.1 + 4 * M_PI) == doctest::Approx(0.1));
    CHECK(normalize_angle(-0.1 - 6 * M_PI) == doctest::Approx(-0.1));
}

TEST_CASE("side_of_path basic classification") {
    const Pose2 origin(0, 0, 0);
    CHECK(side_of_path({0, 1}, origin) == Side::Left);
    CHECK(side_of_path({0, -1}, origin) == Side::Right);
    CHECK(side_of_path({5, 0}, origin) == Side::On);
}

TEST_CASE("side_of_path is antisymmetric under heading reversal") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    for (int i = 0; i < 500; ++i) {
        const Pose2 pose(u(rng), u(rng), ang(rng));
        const Pose2 flipped(pose.x, pose.y, pose.heading + M_PI);
        const Vec2 p(u(rng), u(rng));
        const Side s = side_of_path(p, pose);
        if (s == Side::On) continue;
        const Side f = side_of_path(p, flipped);
        CHECK(((s == Side::Left && f == Side::Right) || (s == Side::Right && f == Side::Left)));
    }
}

TEST_CASE("hermite_connect straight segment stays on the chord") {
    const auto sp = hermite_connect(Pose2(0, 0, 0), Pose2(10, 0, 0));
    for (int i = 0; i <= 100; ++i) {
        const Vec2 p = sp.position_at(i / 100.0);
        CHECK(std::abs(p.y()) < 1e-12);
    }
    CHECK(sp.arc_length() == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("hermite_connect reproduces endpoint poses") {
    const Pose2 a(0, 0, 0);
    const Pose2 b(10, 2, 0);
    const auto sp = hermite_connect(a, b);
    CHECK((sp.position_at(0.0) - a.position()).norm() == doctest::Approx(0.0));
    CHECK((sp.position_at(1.0) - b.position()).norm() == doctest::Approx(0.0));
    // Endpoint headings from the curve derivative.
    const Vec2 d0 = sp.derivative_at(0.0);
    const Vec2 d1 = sp.derivative_at(1.0);
    CHECK(std::abs(angle_diff(std::atan2(d0.y(), d0.x()), a.heading)) < 1e-6);
    CHECK(std::abs(angle_diff(std::atan2(d1.y(), d1.x()), b.heading)) < 1e-6);
    // Sampled headings at the ends agree as well.
    CHECK(std::abs(angle_diff(sp.samples().front().pose.heading, a.heading)) < 1e-6);
    CHECK(std::abs(angle_diff(sp.samples().back().pose.heading, b.heading)) < 1e-6);
}

TEST_CASE("hermite_connect rejects coincident endpoints") {
    CHECK_THROWS_AS(hermite_connect(Pose2(0, 0, 0), Pose2(0, 0, 0)), DegenerateEndpoints);
}

TEST_CASE("hermite endpoint headings match over random pose pairs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-20.0, 20.0);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    for (int i = 0; i < 200; ++i) {
        const Pose2 a(u(rng), u(rng), ang(rng));
        const Pose2 b(u(rng), u(rng), ang(rng));
        if ((a.position() - b.position()).norm() < 0.5) continue;
        const auto sp = hermite_connect(a, b);
        CHECK((sp.position_at(0.0) - a.position()).norm() < 1e-9);
        CHECK((sp.position_at(1.0) - b.position()).norm() < 1e-9);
        const Vec2 d0 = sp.derivative_at(0.0);
        CHECK(std::abs(angle_diff(std::atan2(d0.y(), d0.x()), a.heading)) < 1e-6);
    }
}

TEST_CASE("min_distance_polygon unit square cases") {
    const auto sq = unit_square_at_origin();
    CHECK(min_distance_polygon({0, 0}, sq) == 0.0);
    CHECK(min_distance_polygon({2, 0}, sq) == doctest::Approx(1.5));
    // Corner case against a brute-force boundary sampling oracle.
    const double d = min_distance_polygon({2, 2}, sq);
    CHECK(d == doctest::Approx(std::sqrt(1.5 * 1.5 + 1.5 * 1.5)).epsilon(1e-9));
    CHECK(d == doctest::Approx(polygon_distance_oracle({2, 2}, sq)).epsilon(1e-6));
}

TEST_CASE("min_distance_polygon nonnegative and zero iff inside") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    const auto sq = unit_square_at_origin();
    for (int i = 0; i < 2000; ++i) {
        const Vec2 p(u(rng), u(rng));
        const double d = min_distance_polygon(p, sq);
        CHECK(d >= 0.0);
        CHECK((d == 0.0) == point_in_polygon(p, sq));
    }
}

TEST_CASE("polygon constructor enforces CCW and simplicity") {
    // Clockwise input gets reversed.
    PolygonObstacle cw({{-0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}, {0.5, -0.5}}, "cw");
    double area = 0.0;
    const auto& v = cw.vertices();
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& p = v[i];
        const Vec2& q = v[(i + 1) % v.size()];
        area += p.x() * q.y() - q.x() * p.y();
    }
    CHECK(area > 0.0);
    CHECK_THROWS_AS(PolygonObstacle({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, "bow"), ValidationError);
    CHECK_THROWS_AS(PolygonObstacle({{0, 0}, {1, 1}}, "2pt"), ValidationError);
}

TEST_CASE("resample_arclength on straight lines") {
    const Polyline line({Vec2(0, 0), Vec2(10, 0)});

    auto poses = resample_arclength(line, 2.0);
    REQUIRE(poses.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(poses[i].x == doctest::Approx(2.0 * i));
        CHECK(poses[i].y == doctest::Approx(0.0));
        CHECK(poses[i].heading == doctest::Approx(0.0));
    }

    poses = resample_arclength(line, 3.0);
    REQUIRE(poses.size() == 5);
    CHECK(poses[3].x == doctest::Approx(9.0));
    CHECK(poses[4].x == doctest::Approx(10.0));
}

TEST_CASE("resample_arclength quarter circle gap spacing") {
    // Dense quarter circle of radius 10; arc-length integration is the oracle.
    std::vector<Vec2> pts;
    const int n = 4000;
    for (int i = 0; i <= n; ++i) {
        const double a = (M_PI / 2.0) * i / n;
        pts.emplace_back(10.0 * std::sin(a), 10.0 * (1.0 - std::cos(a)));
    }
    const auto poses = resample_arclength(pts, 1.0);
    double resampled_total = 0.0;
    for (std::size_t i = 1; i < poses.size(); ++i) {
        const double gap = (poses[i].position() - poses[i - 1].position()).norm();
        resampled_total += gap;
        if (i + 1 < poses.size()) {
            CHECK(std::abs(gap - 1.0) < 1e-3);
        }
    }
    // Total resampled length matches the analytic arc length within 1e-3 relative.
    CHECK(resampled_total == doctest::Approx(10.0 * M_PI / 2.0).epsilon(1e-3));
}

TEST_CASE("hermite samples cover the curve at fixed spacing") {
    const auto sp = hermite_connect(Pose2(0, 0, 0), Pose2(10, 2, 0));
    const auto& samples = sp.samples();
    REQUIRE(samples.size() >= 2);
    CHECK(samples.front().s == 0.0);
    CHECK(samples.back().s == doctest::Approx(sp.arc_length()));
    double gap_sum = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        gap_sum += (samples[i].pose.position() - samples[i - 1].pose.position()).norm();
    }
    CHECK(gap_sum == doctest::Approx(sp.arc_length()).epsilon(1e-3));
}
