#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "common/geom.hpp"

namespace goblend::racing {

enum class SegmentShape { Straight, HalfCurve, FullCurve };

const char* segment_shape_name(SegmentShape s);
SegmentShape segment_shape_from_name(std::string_view name);

struct Segment {
    SegmentShape shape = SegmentShape::Straight;
    double half_width = 6.0;          // road half-width in meters
    std::vector<Vec2> centerline;     // ordered polyline, >= 2 points
};

// 0: on-road-left, 1: on-road-right, 2: off-road-left, 3: off-road-right.
inline constexpr int kSubSegmentsPerSegment = 4;
inline constexpr int kCheckpointsPerLap = 8;

// Result of projecting a point onto the track centerline.
struct TrackPoint {
    double arc_s = 0.0;         // arc length from the start line, [0, lap_length)
    int segment = 0;            // segment the projection lands on
    double lateral = 0.0;       // signed offset, positive = left of travel
    double tangent_heading = 0.0;
    double distance = 0.0;      // unsigned distance to the centerline
};

struct TrackLayout {
    std::string name;
    std::vector<Segment> segments;
    std::vector<int> checkpoint_segments;   // 8 ordered segment indices, gate at segment start
    std::vector<Vec2> opponent_waypoints;   // closed polyline
    Rect bounds;

    // Derived on load/build.
    double lap_length = 0.0;
    std::vector<double> segment_start_s;

    int segment_count() const { return static_cast<int>(segments.size()); }
    int sub_segment_count() const { return segment_count() * kSubSegmentsPerSegment; }
    // lap(2) x sub-segment x speed(2) x rotation(6) x proximity(2)
    long long cell_key_space() const { return 2LL * sub_segment_count() * 2 * 6 * 2; }

    TrackPoint project(Vec2 p) const;
    Vec2 point_at(double arc_s) const;
    double tangent_heading_at(double arc_s) const;

    struct Gate {
        double arc_s = 0.0;
        Vec2 pos;
        Vec2 tangent;   // unit, direction of travel
        Vec2 normal;    // unit, left of travel
    };
    const std::vector<Gate>& gates() const { return gates_; }

    // Opponent waypoint loop helpers.
    double waypoint_loop_length() const { return waypoint_total_; }
    Vec2 waypoint_point(double arc_s) const;
    double waypoint_heading(double arc_s) const;

    // Populates the derived fields; throws ValidationError on a bad layout.
    void finalize();

private:
    struct Sample {
        Vec2 pos;
        Vec2 tangent;
        int segment = 0;
        double arc_s = 0.0;
    };
    std::vector<Sample> samples_;
    std::vector<Gate> gates_;
    std::vector<double> waypoint_cum_;
    double waypoint_total_ = 0.0;

    // Uniform grid over sample indices for nearest-sample lookup.
    double grid_cell_ = 16.0;
    int grid_nx_ = 0, grid_ny_ = 0;
    double grid_x0_ = 0.0, grid_y0_ = 0.0;
    std::vector<std::vector<std::int32_t>> grid_;

    void build_samples();
    void build_grid();
    void build_gates();
    void build_waypoint_table();
    void validate() const;
};

// The bundled 19-segment circuit used by every default configuration.
TrackLayout default_track();

TrackLayout load_track(const std::string& path);
void save_track(const TrackLayout& layout, const std::string& path);

// Stable fingerprint of the geometry; embedded in snapshots so a blob cannot
// be restored against a different track.
std::uint64_t track_fingerprint(const TrackLayout& layout);

std::string sub_segment_label(const TrackLayout& layout, int sub_segment);

}  // namespace goblend::racing
