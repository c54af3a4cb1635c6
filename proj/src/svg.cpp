#include "autopath/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace autopath {

namespace {
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
}  // namespace

SvgCanvas::SvgCanvas(const Vec2& world_min, const Vec2& world_max, double pixels_per_metre)
    : world_min_(world_min - Vec2(2.0, 2.0)),
      world_max_(world_max + Vec2(2.0, 2.0)),
      scale_(pixels_per_metre) {
    width_px_ = (world_max_.x() - world_min_.x()) * scale_;
    height_px_ = (world_max_.y() - world_min_.y()) * scale_;
}

Vec2 SvgCanvas::to_px(const Vec2& world) const {
    return {(world.x() - world_min_.x()) * scale_,
            height_px_ - (world.y() - world_min_.y()) * scale_};
}

void SvgCanvas::polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width,
                         const std::string& dash) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + px(width) +
             "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += " points=\"";
    for (const Vec2& p : pts) {
        const Vec2 q = to_px(p);
        body_ += px(q.x()) + "," + px(q.y()) + " ";
    }
    body_ += "\"/>\n";
}

void SvgCanvas::polygon(const std::vector<Vec2>& pts, const std::string& fill,
                        const std::string& stroke) {
    body_ += "<polygon fill=\"" + fill + "\" stroke=\"" + stroke + "\" points=\"";
    for (const Vec2& p : pts) {
        const Vec2 q = to_px(p);
        body_ += px(q.x()) + "," + px(q.y()) + " ";
    }
    body_ += "\"/>\n";
}

void SvgCanvas::circle(const Vec2& center, double radius, const std::string& fill) {
    const Vec2 q = to_px(center);
    body_ += "<circle cx=\"" + px(q.x()) + "\" cy=\"" + px(q.y()) + "\" r=\"" +
             px(radius * scale_) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::line(const Vec2& a, const Vec2& b, const std::string& stroke, double width,
                     const std::string& dash) {
    const Vec2 pa = to_px(a);
    const Vec2 pb = to_px(b);
    body_ += "<line x1=\"" + px(pa.x()) + "\" y1=\"" + px(pa.y()) + "\" x2=\"" + px(pb.x()) +
             "\" y2=\"" + px(pb.y()) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
             px(width) + "\"";
    if (!dash.empty()) body_ += " stroke-dasharray=\"" + dash + "\"";
    body_ += "/>\n";
}

void SvgCanvas::text(const Vec2& at, const std::string& content, int font_px) {
    const Vec2 q = to_px(at);
    body_ += "<text x=\"" + px(q.x()) + "\" y=\"" + px(q.y()) + "\" font-size=\"" +
             std::to_string(font_px) + "\" font-family=\"sans-serif\">" + content + "</text>\n";
}

std::string SvgCanvas::finish() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width_px_) +
           "\" height=\"" + px(height_px_) + "\" viewBox=\"0 0 " + px(width_px_) + " " +
           px(height_px_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
}

std::string plan_overlay_svg(const RoadMap& map, const ObstacleSet& obstacles,
                             const PlannedPath& path, const Corridor* corridor,
                             const Pose2& start, const Pose2& destination) {
    SvgCanvas canvas(map.bounds_min(), map.bounds_max(), 6.0);

    for (const Boundary& b : map.boundaries()) {
        canvas.polyline(b.line.points(), b.tag == BoundaryTag::RoadBoundary ? "black" : "#999999",
                        b.tag == BoundaryTag::RoadBoundary ? 1.5 : 0.8,
                        b.tag == BoundaryTag::RoadBoundary ? "" : "6,6");
    }
    for (const PolygonObstacle& o : obstacles.obstacles()) {
        canvas.polygon(o.vertices(), "#f5a142", "#b06000");
    }
    if (corridor) {
        std::vector<Vec2> left_feet, right_feet;
        for (const CorridorStep& step : corridor->steps) {
            const Vec2 p = step.anchor.position();
            const Vec2 nl(step.left.alpha, step.left.beta);
            left_feet.push_back(p + nl * step.left.signed_slack(p));
            const Vec2 nr(step.right.alpha, step.right.beta);
            right_feet.push_back(p + nr * step.right.signed_slack(p));
        }
        canvas.polyline(left_feet, "#2e8b57", 1.2);
        canvas.polyline(right_feet, "#2e8b57", 1.2);
    }
    std::vector<Vec2> pts;
    pts.reserve(path.points.size());
    for (const PathPoint& p : path.points) pts.push_back(p.pose.position());
    if (pts.size() >= 2) canvas.polyline(pts, "#1f4fd8", 1.6);
    canvas.circle(start.position(), 0.5, "#d81f1f");
    canvas.circle(destination.position(), 0.5, "#1fd84f");
    return canvas.finish();
}

std::string command_plot_svg(const std::vector<TraceSample>& trace,
                             const VehicleLimits& limits) {
    // Two stacked strips: accel command and steering angle over time.
    const double t_end = trace.empty() ? 1.0 : std::max(1.0, trace.back().t);
    const double width = 800.0, strip = 180.0, gap = 40.0, left = 50.0;
    std::string body;
    auto map_x = [&](double t) { return left + t / t_end * (width - left - 10.0); };

    struct Series {
        double y0;
        double vmin;
        double vmax;
        double limit;
        const char* label;
    };
    const Series series[2] = {
        {20.0, -limits.long_accel_max * 1.3, limits.long_accel_max * 1.3,
         limits.long_accel_max, "accel command [m/s^2]"},
        {20.0 + strip + gap, -limits.steering_max * 1.3, limits.steering_max * 1.3,
         limits.steering_max, "steering angle [rad]"},
    };

    for (int si = 0; si < 2; ++si) {
        const Series& sr = series[si];
        auto map_y = [&](double v) {
            return sr.y0 + strip * (1.0 - (v - sr.vmin) / (sr.vmax - sr.vmin));
        };
        body += "<text x=\"" + std::to_string(static_cast<int>(left)) + "\" y=\"" +
                std::to_string(static_cast<int>(sr.y0 - 6)) +
                "\" font-size=\"12\" font-family=\"sans-serif\">" + sr.label + "</text>\n";
        for (double lim : {sr.limit, -sr.limit, 0.0}) {
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "<line x1=\"%.1f\" y1=\"%.2f\" x2=\"%.1f\" y2=\"%.2f\" stroke=\"%s\" "
                          "stroke-width=\"0.8\" stroke-dasharray=\"%s\"/>\n",
                          left, map_y(lim), width - 10.0, map_y(lim),
                          lim == 0.0 ? "#cccccc" : "#d81f1f", lim == 0.0 ? "" : "4,4");
            body += buf;
        }
        body += "<polyline fill=\"none\" stroke=\"#1f4fd8\" stroke-width=\"1.2\" points=\"";
        for (const TraceSample& s : trace) {
            const double v = si == 0 ? s.a_cmd : s.psi;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", map_x(s.t), map_y(v));
            body += buf;
        }
        body += "\"/>\n";
    }
    const double total_h = 2 * strip + gap + 60.0;
    char head[256];
    std::snprintf(head, sizeof(head),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n<rect width=\"100%%\" height=\"100%%\" "
                  "fill=\"white\"/>\n",
                  width, total_h, width, total_h);
    return std::string(head) + body + "</svg>\n";
}

}  // namespace autopath
