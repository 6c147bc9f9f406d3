#include "tcbf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace tcbf::io {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

/// Maps data coordinates into a fixed pixel frame with 10% padding.
class Frame {
public:
    Frame(double x_lo, double x_hi, double y_lo, double y_hi, double width, double height)
        : width_(width), height_(height) {
        const double pad_x = 0.1 * std::max(x_hi - x_lo, 1e-9);
        const double pad_y = 0.1 * std::max(y_hi - y_lo, 1e-9);
        x_lo_ = x_lo - pad_x;
        x_hi_ = x_hi + pad_x;
        y_lo_ = y_lo - pad_y;
        y_hi_ = y_hi + pad_y;
    }

    double px(double x) const { return (x - x_lo_) / (x_hi_ - x_lo_) * width_; }
    double py(double y) const { return height_ - (y - y_lo_) / (y_hi_ - y_lo_) * height_; }
    double scale_x() const { return width_ / (x_hi_ - x_lo_); }

private:
    double x_lo_, x_hi_, y_lo_, y_hi_;
    double width_, height_;
};

class SvgWriter {
public:
    SvgWriter(const std::string& path, double width, double height) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
        out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
             << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
        out_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }
    ~SvgWriter() { out_ << "</svg>\n"; }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double stroke, bool dashed = false) {
        if (pts.empty()) return;
        out_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke
             << '"';
        if (dashed) out_ << " stroke-dasharray=\"6,4\"";
        out_ << " points=\"";
        for (const auto& [x, y] : pts) out_ << fmt(x) << ',' << fmt(y) << ' ';
        out_ << "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& stroke, bool dashed = false) {
        out_ << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << '"';
        if (dashed) out_ << " stroke-dasharray=\"4,3\"";
        out_ << "/>\n";
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double stroke = 1.0) {
        out_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
             << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << stroke
             << "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size = 12) {
        out_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\">" << s << "</text>\n";
    }

    void group_offset(double dx, double dy) {
        out_ << "<g transform=\"translate(" << fmt(dx) << ',' << fmt(dy) << ")\">\n";
    }
    void end_group() { out_ << "</g>\n"; }

private:
    std::ofstream out_;
};

struct Curve {
    std::vector<std::pair<double, double>> pts;
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();

    void add(double x, double y) {
        pts.emplace_back(x, y);
        y_min = std::min(y_min, y);
        y_max = std::max(y_max, y);
    }
};

void draw_curves(SvgWriter& svg, const std::vector<Curve>& curves,
                 const std::vector<std::string>& colors, const std::vector<bool>& dashed,
                 double t_end, const std::string& title, double width, double height) {
    double y_lo = 0.0;
    double y_hi = 1.0;
    for (const auto& c : curves) {
        y_lo = std::min(y_lo, c.y_min);
        y_hi = std::max(y_hi, c.y_max);
    }
    const Frame frame(0.0, t_end, y_lo, y_hi, width - 60.0, height - 50.0);
    svg.group_offset(45.0, 15.0);
    svg.line(frame.px(0.0), frame.py(y_lo), frame.px(t_end), frame.py(y_lo), "#888888");
    svg.line(frame.px(0.0), frame.py(y_lo), frame.px(0.0), frame.py(y_hi), "#888888");
    if (y_lo < 0.0 && y_hi > 0.0)
        svg.line(frame.px(0.0), frame.py(0.0), frame.px(t_end), frame.py(0.0), "#cccccc");
    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::vector<std::pair<double, double>> px;
        px.reserve(curves[i].pts.size());
        for (const auto& [x, y] : curves[i].pts) px.emplace_back(frame.px(x), frame.py(y));
        svg.polyline(px, colors[i % colors.size()], 1.4, dashed[i]);
    }
    svg.text(5.0, 12.0, title);
    svg.end_group();
}

}  // namespace

void write_path_svg(const sim::TrajectoryLog& log, const sim::Scenario& sc,
                    const std::string& path) {
    const double width = 760.0;
    const double panel_h = 300.0;
    SvgWriter svg(path, width, 2.0 * panel_h + 40.0);

    for (int panel = 0; panel < 2; ++panel) {
        // panel 0: x-y top view; panel 1: x-z side view
        const auto pick = [panel](const Vec3& v) {
            return std::pair<double, double>{v.x, panel == 0 ? v.y : v.z};
        };
        double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
        const auto grow = [&](std::pair<double, double> p) {
            x_lo = std::min(x_lo, p.first);
            x_hi = std::max(x_hi, p.first);
            y_lo = std::min(y_lo, p.second);
            y_hi = std::max(y_hi, p.second);
        };
        for (const auto& row : log.rows) grow(pick(row.state.p));
        for (const auto& w : log.waypoints) grow(pick(w));
        for (const auto& o : sc.obstacles) {
            const auto c = pick(o.center);
            grow({c.first - o.inflated_radius(), c.second - o.inflated_radius()});
            grow({c.first + o.inflated_radius(), c.second + o.inflated_radius()});
        }

        const Frame frame(x_lo, x_hi, y_lo, y_hi, width - 60.0, panel_h - 40.0);
        svg.group_offset(30.0, panel == 0 ? 20.0 : panel_h + 40.0);

        for (const auto& o : sc.obstacles) {
            const auto c = pick(o.center);
            svg.circle(frame.px(c.first), frame.py(c.second),
                       o.inflated_radius() * frame.scale_x(), "none", "#cc4444", true);
            svg.circle(frame.px(c.first), frame.py(c.second),
                       o.geometric_radius * frame.scale_x(), "#e08080", "#aa2222");
        }

        std::vector<std::pair<double, double>> wp, ref, actual;
        for (const auto& w : log.waypoints) {
            const auto c = pick(w);
            wp.emplace_back(frame.px(c.first), frame.py(c.second));
        }
        const double t_end = log.rows.empty() ? 0.0 : log.rows.back().t;
        for (double t = 0.0; t <= t_end; t += std::max(log.dt * 10.0, 1e-3)) {
            const auto c = pick(nominal::eval_traj(log.reference, t, 0));
            ref.emplace_back(frame.px(c.first), frame.py(c.second));
        }
        for (const auto& row : log.rows) {
            const auto c = pick(row.state.p);
            actual.emplace_back(frame.px(c.first), frame.py(c.second));
        }
        svg.polyline(wp, "#22aa22", 1.2);
        svg.polyline(ref, "#222222", 1.2);
        svg.polyline(actual, "#8844cc", 2.0);
        svg.text(4.0, 12.0, panel == 0 ? "top view (x, y) [m]" : "side view (x, z) [m]");
        svg.end_group();
    }
}

void write_barrier_svg(const sim::TrajectoryLog& log, const std::string& path) {
    const double width = 760.0;
    const double height = 340.0;
    SvgWriter svg(path, width, height);
    if (log.rows.empty() || log.n_obstacles == 0) {
        svg.text(20.0, 30.0, "no barrier data");
        return;
    }

    std::vector<Curve> curves(log.n_obstacles + 1);
    for (const auto& row : log.rows) {
        double mn = 1e300;
        for (std::size_t i = 0; i < log.n_obstacles; ++i) {
            curves[i].add(row.t, row.b2[i]);
            mn = std::min(mn, row.b2[i]);
        }
        curves.back().add(row.t, mn);
    }
    std::vector<std::string> colors{"#4477aa", "#66ccee", "#228833",
                                    "#ccbb44", "#ee6677", "#aa3377"};
    colors.resize(log.n_obstacles, "#4477aa");
    colors.push_back("#000000");
    std::vector<bool> dashed(log.n_obstacles, false);
    dashed.push_back(true);
    draw_curves(svg, curves, colors, dashed, log.rows.back().t,
                "transferred barriers b2_i(t); dashed: pointwise min", width, height);
}

void write_clearance_svg(const sim::TrajectoryLog& log, const sim::Scenario& sc,
                         const std::string& path) {
    const double width = 760.0;
    const double height = 340.0;
    SvgWriter svg(path, width, height);
    if (log.rows.empty() || sc.obstacles.empty()) {
        svg.text(20.0, 30.0, "no clearance data");
        return;
    }

    std::vector<Curve> curves(2);
    for (const auto& row : log.rows) {
        double true_c = 1e300;
        double infl_c = 1e300;
        for (const auto& o : sc.obstacles) {
            const double d = (row.state.p - o.center).norm();
            true_c = std::min(true_c, d - o.geometric_radius);
            infl_c = std::min(infl_c, d - o.inflated_radius());
        }
        curves[0].add(row.t, true_c);
        curves[1].add(row.t, infl_c);
    }
    draw_curves(svg, curves, {"#228833", "#ee6677"}, {false, true}, log.rows.back().t,
                "min clearance [m]: solid true, dashed inflated", width, height);
}

}  // namespace tcbf::io
