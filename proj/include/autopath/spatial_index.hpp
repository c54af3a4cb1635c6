#pragma once

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <utility>
#include <vector>

#include "autopath/geometry.hpp"

namespace autopath {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

// R-tree over 2-D points. Query results are sorted by (distance, id) so
// downstream consumers are deterministic.
class PointIndex {
public:
    using Point = bg::model::point<double, 2, bg::cs::cartesian>;
    using Value = std::pair<Point, int>;

    void insert(const Vec2& p, int id) { tree_.insert({Point(p.x(), p.y()), id}); }

    std::vector<std::pair<int, double>> within_radius(const Vec2& p, double radius) const {
        const bg::model::box<Point> box(Point(p.x() - radius, p.y() - radius),
                                        Point(p.x() + radius, p.y() + radius));
        std::vector<Value> hits;
        tree_.query(bgi::intersects(box), std::back_inserter(hits));
        std::vector<std::pair<int, double>> out;
        out.reserve(hits.size());
        for (const Value& v : hits) {
            const Vec2 q(bg::get<0>(v.first), bg::get<1>(v.first));
            const double d = (q - p).norm();
            if (d <= radius) out.emplace_back(v.second, d);
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second < b.second;
            return a.first < b.first;
        });
        return out;
    }

    std::size_t size() const { return tree_.size(); }

private:
    bgi::rtree<Value, bgi::quadratic<16>> tree_;
};

// R-tree over axis-aligned boxes (obstacle bounds). Returns a superset of the
// truly intersecting ids for any query box, sorted ascending.
class BoxIndex {
public:
    using Point = bg::model::point<double, 2, bg::cs::cartesian>;
    using Box = bg::model::box<Point>;
    using Value = std::pair<Box, int>;

    void insert(const Vec2& lo, const Vec2& hi, int id) {
        tree_.insert({Box(Point(lo.x(), lo.y()), Point(hi.x(), hi.y())), id});
    }

    std::vector<int> intersecting(const Vec2& lo, const Vec2& hi) const {
        const Box box(Point(lo.x(), lo.y()), Point(hi.x(), hi.y()));
        std::vector<Value> hits;
        tree_.query(bgi::intersects(box), std::back_inserter(hits));
        std::vector<int> out;
        out.reserve(hits.size());
        for (const Value& v : hits) out.push_back(v.second);
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t size() const { return tree_.size(); }

private:
    bgi::rtree<Value, bgi::quadratic<16>> tree_;
};

}  // namespace autopath
