#include "harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/errors.hpp"

namespace goblend::harness {

namespace {

constexpr double kScale = 4.0;

struct Mapper {
    const Rect& b;
    double x(double wx) const { return (wx - b.min_x) * kScale; }
    double y(double wy) const { return (b.max_y - wy) * kScale; }  // SVG y grows downward
};

std::string color_for(double t) {
    // Straight blue -> red ramp; t in [0,1].
    const int r = static_cast<int>(std::lround(255.0 * t));
    const int b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x00%02x", r, b);
    return buf;
}

void draw_band(std::ostream& os, const racing::TrackLayout& layout, const Mapper& m,
               double width_m, const char* color) {
    os << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\""
       << width_m * kScale << "\" stroke-linejoin=\"round\" stroke-linecap=\"round\" d=\"";
    bool first = true;
    for (const auto& seg : layout.segments) {
        for (const auto& p : seg.centerline) {
            os << (first ? "M" : "L") << m.x(p.x) << " " << m.y(p.y) << " ";
            first = false;
        }
    }
    os << "Z\"/>\n";
}

}  // namespace

std::string render_trace_svg(const racing::TrackLayout& layout, const std::vector<Vec2>& positions,
                             const std::vector<double>& arousal) {
    if (positions.empty()) throw ValidationError("nothing to render: empty trajectory");
    const Mapper m{layout.bounds};
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
       << layout.bounds.width() * kScale << "\" height=\"" << layout.bounds.height() * kScale
       << "\" viewBox=\"0 0 " << layout.bounds.width() * kScale << " "
       << layout.bounds.height() * kScale << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"#f4f1ea\"/>\n";

    const double road_width = 2.0 * layout.segments.front().half_width;
    draw_band(os, layout, m, 2.0 * racing::kBarrierOffset, "#b8cf9e");  // grass band
    draw_band(os, layout, m, road_width, "#5a5a5a");                    // road

    // Checkpoint gates.
    for (const auto& g : layout.gates()) {
        const Vec2 a = g.pos + g.normal * racing::kGateHalfSpan;
        const Vec2 b = g.pos - g.normal * racing::kGateHalfSpan;
        os << "<line x1=\"" << m.x(a.x) << "\" y1=\"" << m.y(a.y) << "\" x2=\"" << m.x(b.x)
           << "\" y2=\"" << m.y(b.y) << "\" stroke=\"#ffffff\" stroke-width=\"1.5\" "
              "stroke-dasharray=\"4 3\"/>\n";
    }

    // Trajectory skeleton: one polyline vertex per window.
    os << "<polyline fill=\"none\" stroke=\"#30303080\" stroke-width=\"1.2\" points=\"";
    for (const auto& p : positions) os << m.x(p.x) << "," << m.y(p.y) << " ";
    os << "\"/>\n";

    // Waypoint markers colored by arousal, min -> pure blue, max -> pure red.
    double lo = 0.0, hi = 1.0;
    if (!arousal.empty()) {
        const auto [mn, mx] = std::minmax_element(arousal.begin(), arousal.end());
        lo = *mn;
        hi = *mx;
    }
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double a = i < arousal.size() ? arousal[i] : 0.5;
        const double t = hi > lo ? (a - lo) / (hi - lo) : 0.5;
        os << "<circle cx=\"" << m.x(positions[i].x) << "\" cy=\"" << m.y(positions[i].y)
           << "\" r=\"1.6\" fill=\"" << color_for(t) << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_trajectory_svg(const racing::TrackLayout& layout, std::uint64_t seed,
                                  const std::vector<racing::Action>& actions,
                                  const std::vector<double>& arousal) {
    std::vector<Vec2> positions;
    positions.reserve(actions.size());
    racing::GameState st = racing::reset(layout, seed);
    for (const auto& a : actions) {
        st = racing::step(layout, st, a);
        positions.push_back(st.player.pos);
    }
    return render_trace_svg(layout, positions, arousal);
}

void write_text_file(const std::string& content, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f << content;
    if (!f) throw IoError("failed writing file: " + path);
}

}  // namespace goblend::harness
