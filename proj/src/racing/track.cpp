#include "racing/track.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "common/errors.hpp"
#include "common/rng.hpp"
#include "common/text.hpp"

namespace goblend::racing {

namespace {

constexpr double kSampleSpacing = 1.0;       // meters between projection samples
constexpr double kJoinTolerance = 1e-6;
constexpr double kBoundsMargin = 22.0;
constexpr double kWaypointSpacing = 5.0;

}  // namespace

const char* segment_shape_name(SegmentShape s) {
    switch (s) {
        case SegmentShape::Straight: return "straight";
        case SegmentShape::HalfCurve: return "half-curve";
        case SegmentShape::FullCurve: return "full-curve";
    }
    return "straight";
}

SegmentShape segment_shape_from_name(std::string_view name) {
    if (name == "straight") return SegmentShape::Straight;
    if (name == "half-curve") return SegmentShape::HalfCurve;
    if (name == "full-curve") return SegmentShape::FullCurve;
    throw ParseError("unknown segment shape '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Layout construction helpers

namespace {

struct PathCursor {
    Vec2 pos{0.0, 0.0};
    double heading = 0.0;
};

Segment make_straight(PathCursor& c, double length, double half_width) {
    Segment seg;
    seg.shape = SegmentShape::Straight;
    seg.half_width = half_width;
    seg.centerline.push_back(c.pos);
    c.pos = c.pos + unit_from_angle(c.heading) * length;
    seg.centerline.push_back(c.pos);
    return seg;
}

// turn_deg > 0 turns left; |turn_deg| of 90 is a half-curve, 180 a full-curve.
Segment make_arc(PathCursor& c, double turn_deg, double radius, double half_width) {
    Segment seg;
    seg.shape = std::abs(turn_deg) > 135.0 ? SegmentShape::FullCurve : SegmentShape::HalfCurve;
    seg.half_width = half_width;
    const double turn = turn_deg * kPi / 180.0;
    const double side = turn > 0 ? 1.0 : -1.0;
    const Vec2 center = c.pos + left_normal(unit_from_angle(c.heading)) * (side * radius);
    const Vec2 spoke = c.pos - center;
    const int steps = std::max(8, static_cast<int>(std::ceil(std::abs(turn_deg) / 2.0)));
    for (int i = 0; i <= steps; ++i) {
        const double a = turn * static_cast<double>(i) / steps;
        const double ca = std::cos(a), sa = std::sin(a);
        seg.centerline.push_back({center.x + spoke.x * ca - spoke.y * sa,
                                  center.y + spoke.x * sa + spoke.y * ca});
    }
    c.pos = seg.centerline.back();
    c.heading = wrap_angle(c.heading + turn);
    return seg;
}

}  // namespace

TrackLayout default_track() {
    TrackLayout t;
    t.name = "solid-desk";
    const double hw = 6.0;
    PathCursor c;

    t.segments.push_back(make_straight(c, 70.0, hw));
    t.segments.push_back(make_arc(c, 90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 20.0, hw));
    t.segments.push_back(make_arc(c, 90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 25.0, hw));
    t.segments.push_back(make_arc(c, -90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 20.0, hw));
    t.segments.push_back(make_arc(c, -90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 25.0, hw));
    t.segments.push_back(make_arc(c, 90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 25.0, hw));
    t.segments.push_back(make_arc(c, 180.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 10.0, hw));
    t.segments.push_back(make_arc(c, -90.0, 10.0, hw));
    t.segments.push_back(make_straight(c, 60.0, hw));
    t.segments.push_back(make_arc(c, 90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 90.0, hw));
    t.segments.push_back(make_arc(c, 90.0, 15.0, hw));
    t.segments.push_back(make_straight(c, 15.0, hw));

    // Snap the numerically closed loop exactly onto the start point.
    t.segments.back().centerline.back() = t.segments.front().centerline.front();

    t.checkpoint_segments = {0, 1, 4, 8, 11, 13, 15, 17};
    t.finalize();
    return t;
}

// ---------------------------------------------------------------------------
// Derived data

void TrackLayout::finalize() {
    validate();
    build_samples();
    build_grid();
    build_gates();
    if (opponent_waypoints.empty()) {
        for (double s = 0.0; s < lap_length; s += kWaypointSpacing) {
            opponent_waypoints.push_back(point_at(s));
        }
    }
    build_waypoint_table();
    if (bounds.width() <= 0.0 || bounds.height() <= 0.0) {
        double min_x = std::numeric_limits<double>::max(), min_y = min_x;
        double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
        for (const auto& s : samples_) {
            min_x = std::min(min_x, s.pos.x);
            min_y = std::min(min_y, s.pos.y);
            max_x = std::max(max_x, s.pos.x);
            max_y = std::max(max_y, s.pos.y);
        }
        bounds = {min_x - kBoundsMargin, min_y - kBoundsMargin,
                  max_x + kBoundsMargin, max_y + kBoundsMargin};
    }
}

void TrackLayout::validate() const {
    if (segments.empty()) throw ValidationError("track has no segments");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const auto& seg = segments[i];
        if (seg.centerline.size() < 2) {
            throw ValidationError("segment " + std::to_string(i) + " has fewer than 2 points");
        }
        if (!(seg.half_width > 0.0)) {
            throw ValidationError("segment " + std::to_string(i) + " has non-positive half width");
        }
        const Vec2 next_start = segments[(i + 1) % segments.size()].centerline.front();
        if (dist(seg.centerline.back(), next_start) > kJoinTolerance) {
            throw ValidationError("track loop is not closed at segment " + std::to_string(i));
        }
    }
    if (checkpoint_segments.size() != kCheckpointsPerLap) {
        throw ValidationError("expected " + std::to_string(kCheckpointsPerLap) +
                              " checkpoints, got " + std::to_string(checkpoint_segments.size()));
    }
    for (std::size_t i = 0; i < checkpoint_segments.size(); ++i) {
        const int seg = checkpoint_segments[i];
        if (seg < 0 || seg >= segment_count()) {
            throw ValidationError("checkpoint segment index out of range: " + std::to_string(seg));
        }
        if (i > 0 && checkpoint_segments[i] <= checkpoint_segments[i - 1]) {
            throw ValidationError("checkpoint segments must be strictly increasing");
        }
    }
    if (checkpoint_segments.front() != 0) {
        throw ValidationError("first checkpoint must sit on segment 0 (start line)");
    }
}

void TrackLayout::build_samples() {
    samples_.clear();
    segment_start_s.assign(segments.size(), 0.0);
    double s = 0.0;
    for (std::size_t si = 0; si < segments.size(); ++si) {
        segment_start_s[si] = s;
        const auto& line = segments[si].centerline;
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            const Vec2 a = line[i];
            const Vec2 b = line[i + 1];
            const double len = dist(a, b);
            if (len <= 0.0) continue;
            const Vec2 tangent = (b - a) * (1.0 / len);
            const int n = std::max(1, static_cast<int>(std::ceil(len / kSampleSpacing)));
            for (int k = 0; k < n; ++k) {
                const double f = static_cast<double>(k) / n;
                samples_.push_back({a + (b - a) * f, tangent, static_cast<int>(si), s + f * len});
            }
            s += len;
        }
    }
    lap_length = s;
    if (samples_.size() < 8) throw ValidationError("track too short to sample");
}

void TrackLayout::build_grid() {
    grid_x0_ = bounds.min_x;
    grid_y0_ = bounds.min_y;
    double min_x = std::numeric_limits<double>::max(), min_y = min_x;
    double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
    for (const auto& s : samples_) {
        min_x = std::min(min_x, s.pos.x);
        min_y = std::min(min_y, s.pos.y);
        max_x = std::max(max_x, s.pos.x);
        max_y = std::max(max_y, s.pos.y);
    }
    grid_x0_ = min_x - 2.0 * grid_cell_;
    grid_y0_ = min_y - 2.0 * grid_cell_;
    grid_nx_ = static_cast<int>((max_x - grid_x0_) / grid_cell_) + 4;
    grid_ny_ = static_cast<int>((max_y - grid_y0_) / grid_cell_) + 4;
    grid_.assign(static_cast<std::size_t>(grid_nx_) * grid_ny_, {});
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const int cx = static_cast<int>((samples_[i].pos.x - grid_x0_) / grid_cell_);
        const int cy = static_cast<int>((samples_[i].pos.y - grid_y0_) / grid_cell_);
        grid_[static_cast<std::size_t>(cy) * grid_nx_ + cx].push_back(static_cast<std::int32_t>(i));
    }
}

void TrackLayout::build_gates() {
    gates_.clear();
    for (int seg : checkpoint_segments) {
        Gate g;
        g.arc_s = segment_start_s[seg];
        g.pos = segments[seg].centerline.front();
        const Vec2 a = segments[seg].centerline[0];
        const Vec2 b = segments[seg].centerline[1];
        const double len = dist(a, b);
        g.tangent = (b - a) * (1.0 / len);
        g.normal = left_normal(g.tangent);
        gates_.push_back(g);
    }
}

void TrackLayout::build_waypoint_table() {
    if (opponent_waypoints.size() < 3) throw ValidationError("opponent waypoint loop too short");
    waypoint_cum_.assign(opponent_waypoints.size() + 1, 0.0);
    for (std::size_t i = 0; i < opponent_waypoints.size(); ++i) {
        const Vec2 a = opponent_waypoints[i];
        const Vec2 b = opponent_waypoints[(i + 1) % opponent_waypoints.size()];
        waypoint_cum_[i + 1] = waypoint_cum_[i] + dist(a, b);
    }
    waypoint_total_ = waypoint_cum_.back();
}

Vec2 TrackLayout::waypoint_point(double arc_s) const {
    double s = std::fmod(arc_s, waypoint_total_);
    if (s < 0.0) s += waypoint_total_;
    const auto it = std::upper_bound(waypoint_cum_.begin(), waypoint_cum_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - waypoint_cum_.begin()) - 1;
    const Vec2 a = opponent_waypoints[i % opponent_waypoints.size()];
    const Vec2 b = opponent_waypoints[(i + 1) % opponent_waypoints.size()];
    const double len = waypoint_cum_[i + 1] - waypoint_cum_[i];
    const double f = len > 0.0 ? (s - waypoint_cum_[i]) / len : 0.0;
    return a + (b - a) * f;
}

double TrackLayout::waypoint_heading(double arc_s) const {
    double s = std::fmod(arc_s, waypoint_total_);
    if (s < 0.0) s += waypoint_total_;
    const auto it = std::upper_bound(waypoint_cum_.begin(), waypoint_cum_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - waypoint_cum_.begin()) - 1;
    const Vec2 a = opponent_waypoints[i % opponent_waypoints.size()];
    const Vec2 b = opponent_waypoints[(i + 1) % opponent_waypoints.size()];
    return std::atan2(b.y - a.y, b.x - a.x);
}

Vec2 TrackLayout::point_at(double arc_s) const {
    double s = std::fmod(arc_s, lap_length);
    if (s < 0.0) s += lap_length;
    // Samples are ordered by arc_s; binary search then lerp toward the next.
    std::size_t lo = 0, hi = samples_.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (samples_[mid].arc_s <= s) lo = mid; else hi = mid;
    }
    const auto& a = samples_[lo];
    const double next_s = lo + 1 < samples_.size() ? samples_[lo + 1].arc_s : lap_length;
    const double span = next_s - a.arc_s;
    const double f = span > 0.0 ? (s - a.arc_s) : 0.0;
    return a.pos + a.tangent * f;
}

double TrackLayout::tangent_heading_at(double arc_s) const {
    double s = std::fmod(arc_s, lap_length);
    if (s < 0.0) s += lap_length;
    std::size_t lo = 0, hi = samples_.size();
    while (lo + 1 < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (samples_[mid].arc_s <= s) lo = mid; else hi = mid;
    }
    const Vec2 t = samples_[lo].tangent;
    return std::atan2(t.y, t.x);
}

TrackPoint TrackLayout::project(Vec2 p) const {
    // Nearest sample via the grid; fall back to a full scan when the point
    // is far outside the banded area.
    std::int32_t best = -1;
    double best_d2 = std::numeric_limits<double>::max();
    const int cx = static_cast<int>((p.x - grid_x0_) / grid_cell_);
    const int cy = static_cast<int>((p.y - grid_y0_) / grid_cell_);
    for (int ring = 1; ring <= 3 && best < 0; ++ring) {
        for (int dy = -ring; dy <= ring; ++dy) {
            for (int dx = -ring; dx <= ring; ++dx) {
                const int gx = cx + dx, gy = cy + dy;
                if (gx < 0 || gy < 0 || gx >= grid_nx_ || gy >= grid_ny_) continue;
                for (std::int32_t idx : grid_[static_cast<std::size_t>(gy) * grid_nx_ + gx]) {
                    const double d2 = norm2(samples_[idx].pos - p);
                    if (d2 < best_d2 || (d2 == best_d2 && idx < best)) {
                        best_d2 = d2;
                        best = idx;
                    }
                }
            }
        }
    }
    if (best < 0) {
        for (std::size_t i = 0; i < samples_.size(); ++i) {
            const double d2 = norm2(samples_[i].pos - p);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<std::int32_t>(i);
            }
        }
    }

    // Refine on the two sample edges adjacent to the winner.
    const std::size_t n = samples_.size();
    TrackPoint out;
    double refined_d2 = std::numeric_limits<double>::max();
    for (int e = -1; e <= 0; ++e) {
        const std::size_t i0 = (static_cast<std::size_t>(best) + n + e) % n;
        const std::size_t i1 = (i0 + 1) % n;
        const Vec2 a = samples_[i0].pos;
        const Vec2 b = samples_[i1].pos;
        const Vec2 ab = b - a;
        const double len2 = norm2(ab);
        double f = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
        f = std::clamp(f, 0.0, 1.0);
        const Vec2 q = a + ab * f;
        const double d2 = norm2(p - q);
        if (d2 < refined_d2) {
            refined_d2 = d2;
            const Vec2 tangent = samples_[i0].tangent;
            double edge_len = std::sqrt(len2);
            double s = samples_[i0].arc_s + f * edge_len;
            if (s >= lap_length) s -= lap_length;
            out.arc_s = s;
            out.segment = samples_[i0].segment;
            out.lateral = cross(tangent, p - q);
            out.tangent_heading = std::atan2(tangent.y, tangent.x);
            out.distance = std::sqrt(d2);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// File format: "goblend-track v1", key-value lines plus polyline arrays.

void save_track(const TrackLayout& layout, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open track file for writing: " + path);
    f << "goblend-track v1\n";
    f << "name " << layout.name << "\n";
    f << "segments " << layout.segments.size() << "\n";
    for (std::size_t i = 0; i < layout.segments.size(); ++i) {
        const auto& seg = layout.segments[i];
        f << "segment " << i << " " << segment_shape_name(seg.shape) << " "
          << format_double(seg.half_width) << " " << seg.centerline.size();
        for (const Vec2& p : seg.centerline) {
            f << " " << format_double(p.x) << " " << format_double(p.y);
        }
        f << "\n";
    }
    f << "checkpoints";
    for (int c : layout.checkpoint_segments) f << " " << c;
    f << "\n";
    f << "waypoints " << layout.opponent_waypoints.size();
    for (const Vec2& p : layout.opponent_waypoints) {
        f << " " << format_double(p.x) << " " << format_double(p.y);
    }
    f << "\n";
    f << "bounds " << format_double(layout.bounds.min_x) << " " << format_double(layout.bounds.min_y)
      << " " << format_double(layout.bounds.max_x) << " " << format_double(layout.bounds.max_y) << "\n";
    if (!f) throw IoError("failed writing track file: " + path);
}

TrackLayout load_track(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open track file: " + path);
    std::string line;
    if (!std::getline(f, line) || trim(line) != "goblend-track v1") {
        throw ParseError(path + ": missing 'goblend-track v1' header");
    }
    TrackLayout t;
    std::size_t declared_segments = 0;
    int line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        const auto at = [&](const std::string& what) {
            return path + ":" + std::to_string(line_no) + ": " + what;
        };
        auto tokens = split_ws(line);
        if (tokens.empty() || tokens[0].front() == '#') continue;
        const std::string_view key = tokens[0];
        if (key == "name") {
            if (tokens.size() != 2) throw ParseError(at("name expects one token"));
            t.name = std::string(tokens[1]);
        } else if (key == "segments") {
            if (tokens.size() != 2) throw ParseError(at("segments expects a count"));
            declared_segments = static_cast<std::size_t>(parse_int(tokens[1], at("segment count")));
        } else if (key == "segment") {
            if (tokens.size() < 5) throw ParseError(at("segment record too short"));
            const auto idx = static_cast<std::size_t>(parse_int(tokens[1], at("segment index")));
            if (idx != t.segments.size()) throw ParseError(at("segment records out of order"));
            Segment seg;
            seg.shape = segment_shape_from_name(tokens[2]);
            seg.half_width = parse_double(tokens[3], at("half width"));
            const auto npts = static_cast<std::size_t>(parse_int(tokens[4], at("point count")));
            if (tokens.size() != 5 + 2 * npts) throw ParseError(at("segment point list length mismatch"));
            for (std::size_t i = 0; i < npts; ++i) {
                seg.centerline.push_back({parse_double(tokens[5 + 2 * i], at("x")),
                                          parse_double(tokens[6 + 2 * i], at("y"))});
            }
            t.segments.push_back(std::move(seg));
        } else if (key == "checkpoints") {
            for (std::size_t i = 1; i < tokens.size(); ++i) {
                t.checkpoint_segments.push_back(static_cast<int>(parse_int(tokens[i], at("checkpoint"))));
            }
        } else if (key == "waypoints") {
            if (tokens.size() < 2) throw ParseError(at("waypoints record too short"));
            const auto npts = static_cast<std::size_t>(parse_int(tokens[1], at("waypoint count")));
            if (tokens.size() != 2 + 2 * npts) throw ParseError(at("waypoint list length mismatch"));
            for (std::size_t i = 0; i < npts; ++i) {
                t.opponent_waypoints.push_back({parse_double(tokens[2 + 2 * i], at("x")),
                                                parse_double(tokens[3 + 2 * i], at("y"))});
            }
        } else if (key == "bounds") {
            if (tokens.size() != 5) throw ParseError(at("bounds expects 4 numbers"));
            t.bounds = {parse_double(tokens[1], at("min_x")), parse_double(tokens[2], at("min_y")),
                        parse_double(tokens[3], at("max_x")), parse_double(tokens[4], at("max_y"))};
        } else {
            throw ParseError(at("unknown record '" + std::string(key) + "'"));
        }
    }
    if (declared_segments != 0 && declared_segments != t.segments.size()) {
        throw ParseError(path + ": declared " + std::to_string(declared_segments) +
                         " segments, found " + std::to_string(t.segments.size()));
    }
    t.finalize();
    return t;
}

std::uint64_t track_fingerprint(const TrackLayout& layout) {
    std::uint64_t h = splitmix64(layout.segments.size());
    for (const auto& seg : layout.segments) {
        h = splitmix64(h ^ static_cast<std::uint64_t>(seg.centerline.size()));
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(&bits, &seg.centerline.front().x, sizeof(bits));
        h = splitmix64(h ^ bits);
        std::memcpy(&bits, &seg.centerline.back().y, sizeof(bits));
        h = splitmix64(h ^ bits);
    }
    for (int c : layout.checkpoint_segments) h = splitmix64(h ^ static_cast<std::uint64_t>(c + 1));
    return h;
}

std::string sub_segment_label(const TrackLayout& layout, int sub_segment) {
    static const char* variants[] = {"on-road-left", "on-road-right", "off-road-left", "off-road-right"};
    const int seg = sub_segment / kSubSegmentsPerSegment;
    const int variant = sub_segment % kSubSegmentsPerSegment;
    std::ostringstream os;
    os << "segment" << seg << "/" << variants[variant]
       << " (" << segment_shape_name(layout.segments[seg].shape) << ")";
    return os.str();
}

}  // namespace goblend::racing
