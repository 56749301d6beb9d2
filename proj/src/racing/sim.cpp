#include "racing/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "common/errors.hpp"
#include "common/rng.hpp"

namespace goblend::racing {

namespace {

// Refresh the derived CarState view of one opponent from its arc position.
void refresh_opponent(const TrackLayout& layout, GameState& st, int k, double window_speed) {
    const double s = st.opponent_arc[k];
    const Vec2 base = layout.waypoint_point(s);
    const double heading = layout.waypoint_heading(s);
    CarState& car = st.opponents[k];
    car.pos = base + left_normal(unit_from_angle(heading)) * kOpponentLateral[k];
    car.heading = heading;
    car.speed = window_speed;
    car.steer_input = 0;
    car.gas_input = 0;
    car.on_grass = false;
    car.crashed_this_window = false;
}

double opponent_window_speed(const GameState& st, int k) {
    const double u = u64_to_unit(counter_hash(st.seed, st.rng_counter, static_cast<std::uint64_t>(k)));
    return kOpponentBaseSpeed[k] * (1.0 + kOpponentSpeedJitter * (2.0 * u - 1.0));
}

// Slide along the barrier: position clamped to the wall, velocity projected
// onto the track tangent, crash flag raised.
void resolve_barrier(const TrackLayout& layout, CarState& car, bool& crashed) {
    const TrackPoint tp = layout.project(car.pos);
    if (std::abs(tp.lateral) <= kBarrierOffset) return;
    const Vec2 tangent = unit_from_angle(tp.tangent_heading);
    const Vec2 center = car.pos - left_normal(tangent) * tp.lateral;
    const double clamped = tp.lateral > 0.0 ? kBarrierOffset : -kBarrierOffset;
    car.pos = center + left_normal(tangent) * clamped;
    const double along = std::cos(car.heading - tp.tangent_heading);
    car.speed = std::abs(car.speed * along);
    car.heading = wrap_angle(along >= 0.0 ? tp.tangent_heading : tp.tangent_heading + kPi);
    crashed = true;
}

void resolve_car_contact(GameState& st, bool& crashed) {
    for (int k = 0; k < kOpponentCount; ++k) {
        const Vec2 d = st.player.pos - st.opponents[k].pos;
        const double d2 = norm2(d);
        if (d2 >= kCarContactDist * kCarContactDist) continue;
        if (d2 > 0.0) {
            const double len = std::sqrt(d2);
            st.player.pos = st.opponents[k].pos + d * (kCarContactDist / len);
        } else {
            st.player.pos = st.opponents[k].pos + Vec2{kCarContactDist, 0.0};
        }
        crashed = true;
    }
}

// Gate crossing test over one substep of player motion. Only the armed gate
// counts, which also makes double-crossings impossible.
void check_gate(const TrackLayout& layout, GameState& st, Vec2 prev_pos) {
    const auto& gate = layout.gates()[static_cast<std::size_t>(st.next_gate)];
    const double before = dot(prev_pos - gate.pos, gate.tangent);
    const double after = dot(st.player.pos - gate.pos, gate.tangent);
    if (!(before < 0.0 && after >= 0.0)) return;
    const double f = before / (before - after);
    const Vec2 crossing = prev_pos + (st.player.pos - prev_pos) * f;
    if (std::abs(dot(crossing - gate.pos, gate.normal)) > kGateHalfSpan) return;

    st.score += 1;
    st.last_gate_window = st.window_index + 1;
    if (st.next_gate == 0) st.lap = std::min(2, st.lap + 1);
    st.next_gate = (st.next_gate + 1) % static_cast<int>(layout.gates().size());
    if (st.score >= kMaxScore) st.finished = true;
}

void substep_player(const TrackLayout& layout, GameState& st, Action action, bool& crashed) {
    CarState& car = st.player;
    const TrackPoint tp = layout.project(car.pos);
    const double hw = layout.segments[static_cast<std::size_t>(tp.segment)].half_width;
    const double grip = std::abs(tp.lateral) > hw ? kGrassFactor : 1.0;

    double accel = 0.0;
    if (action.gas > 0) accel = grip * kEngineAccel;
    else if (action.gas < 0) accel = -grip * kBrakeAccel;
    accel -= kDragCoeff * car.speed;

    const double steer_angle = action.steer * kMaxSteerAngle;
    const double yaw_demand = car.speed / kWheelBase * std::tan(steer_angle);
    const double lat_limit = grip * kMaxLateralAccel;
    const double yaw_cap = lat_limit / std::max(car.speed, 0.5);
    const double yaw = std::clamp(yaw_demand, -yaw_cap, yaw_cap);
    // Drift-lite: demanded lateral acceleration beyond grip scrubs speed.
    const double lat_excess = std::max(0.0, std::abs(yaw_demand) * car.speed - lat_limit);
    accel -= kScrubGain * lat_excess;

    car.speed = std::clamp(car.speed + accel * kSubstepDt, 0.0, kMaxSpeed);
    car.heading = wrap_angle(car.heading + yaw * kSubstepDt);
    car.pos = car.pos + unit_from_angle(car.heading) * (car.speed * kSubstepDt);
    resolve_barrier(layout, car, crashed);
}

}  // namespace

GameState reset(const TrackLayout& layout, std::uint64_t seed) {
    GameState st;
    st.seed = seed;
    st.player.pos = layout.segments.front().centerline.front();
    st.player.heading = layout.tangent_heading_at(0.0);
    for (int k = 0; k < kOpponentCount; ++k) {
        st.opponent_arc[k] = kOpponentStartArc[k];
        refresh_opponent(layout, st, k, kOpponentBaseSpeed[k]);
    }
    const TrackPoint tp = layout.project(st.player.pos);
    st.player.on_grass = std::abs(tp.lateral) >
                         layout.segments[static_cast<std::size_t>(tp.segment)].half_width;
    return st;
}

GameState step(const TrackLayout& layout, const GameState& state, Action action) {
    if (state.finished) throw ContractError("step() called on a finished episode");
    if (action.steer < -1 || action.steer > 1 || action.gas < -1 || action.gas > 1) {
        throw ContractError("action inputs must be in {-1, 0, 1}");
    }

    GameState st = state;
    st.player.steer_input = action.steer;
    st.player.gas_input = action.gas;

    std::array<double, kOpponentCount> opp_speed;
    for (int k = 0; k < kOpponentCount; ++k) opp_speed[k] = opponent_window_speed(st, k);

    bool crashed = false;
    for (int sub = 0; sub < kSubstepsPerWindow && !st.finished; ++sub) {
        const Vec2 prev_pos = st.player.pos;
        substep_player(layout, st, action, crashed);
        for (int k = 0; k < kOpponentCount; ++k) {
            st.opponent_arc[k] = std::fmod(st.opponent_arc[k] + opp_speed[k] * kSubstepDt,
                                           layout.waypoint_loop_length());
            refresh_opponent(layout, st, k, opp_speed[k]);
        }
        resolve_car_contact(st, crashed);
        check_gate(layout, st, prev_pos);
    }

    st.prev_window_speed = state.player.speed;
    st.player.crashed_this_window = crashed;
    if (crashed) st.last_crash_window = st.window_index + 1;
    const TrackPoint tp = layout.project(st.player.pos);
    st.player.on_grass = std::abs(tp.lateral) >
                         layout.segments[static_cast<std::size_t>(tp.segment)].half_width;

    st.window_index += 1;
    st.elapsed_s = st.window_index * kWindowSeconds;
    st.rng_counter += 1;
    if (st.window_index >= kMaxWindows) st.finished = true;
    return st;
}

// ---------------------------------------------------------------------------

const std::array<std::string, kFeatureCount>& feature_names() {
    static const std::array<std::string, kFeatureCount> names = {
        "pos_x", "pos_y", "heading", "speed", "steer_in", "gas_in",
        "on_grass", "crashed", "score", "lap", "sub_segment",
        "opp0_dist", "opp1_dist", "opp2_dist",
        "opp0_speed", "opp1_speed", "opp2_speed",
        "nearest_opp_dist", "lateral_offset", "heading_error",
        "speed_delta", "checkpoint_progress",
        "time_since_crash", "time_since_checkpoint"};
    return names;
}

namespace {

int sub_segment_of(const TrackLayout& layout, const TrackPoint& tp) {
    const double hw = layout.segments[static_cast<std::size_t>(tp.segment)].half_width;
    const bool on_road = std::abs(tp.lateral) <= hw;
    const bool left = tp.lateral >= 0.0;
    const int variant = on_road ? (left ? 0 : 1) : (left ? 2 : 3);
    return tp.segment * kSubSegmentsPerSegment + variant;
}

}  // namespace

FeatureVector features(const TrackLayout& layout, const GameState& st) {
    FeatureVector f{};
    const TrackPoint tp = layout.project(st.player.pos);
    f[kFeatPosX] = st.player.pos.x;
    f[kFeatPosY] = st.player.pos.y;
    f[kFeatHeading] = st.player.heading;
    f[kFeatSpeed] = st.player.speed;
    f[kFeatSteer] = st.player.steer_input;
    f[kFeatGas] = st.player.gas_input;
    f[kFeatOnGrass] = st.player.on_grass ? 1.0 : 0.0;
    f[kFeatCrashed] = st.player.crashed_this_window ? 1.0 : 0.0;
    f[kFeatScore] = st.score;
    f[kFeatLap] = st.lap;
    f[kFeatSubSegment] = sub_segment_of(layout, tp);

    double nearest_visible = kMaxOpponentDist;
    const double cone = kViewConeDeg * kPi / 180.0;
    for (int k = 0; k < kOpponentCount; ++k) {
        const Vec2 d = st.opponents[k].pos - st.player.pos;
        const double dk = norm(d);
        f[kFeatOpp0Dist + k] = dk;
        f[kFeatOpp0Speed + k] = st.opponents[k].speed;
        if (dk > 0.0) {
            const double bearing = wrap_angle(std::atan2(d.y, d.x) - st.player.heading);
            if (std::abs(bearing) <= cone) nearest_visible = std::min(nearest_visible, dk);
        } else {
            nearest_visible = 0.0;
        }
    }
    f[kFeatNearestOppDist] = std::min(nearest_visible, kMaxOpponentDist);
    f[kFeatLateralOffset] = tp.lateral;
    f[kFeatHeadingError] = wrap_angle(st.player.heading - tp.tangent_heading);
    f[kFeatSpeedDelta] = st.player.speed - st.prev_window_speed;
    f[kFeatCheckpointProgress] = tp.arc_s / layout.lap_length;
    f[kFeatTimeSinceCrash] = (st.window_index - st.last_crash_window) * kWindowSeconds;
    f[kFeatTimeSinceCheckpoint] = (st.window_index - st.last_gate_window) * kWindowSeconds;
    return f;
}

CellKey discretize(const TrackLayout& layout, const GameState& st, SimDiagnostics* diag) {
    if (diag && !layout.bounds.contains(st.player.pos)) {
        // Off the playfield: projection still resolves to the nearest
        // sub-segment, but the event is worth surfacing.
        diag->off_playfield_projections += 1;
    }
    const TrackPoint tp = layout.project(st.player.pos);

    CellKey key;
    key.lap = static_cast<std::int8_t>(st.lap);
    key.sub_segment = static_cast<std::int16_t>(sub_segment_of(layout, tp));
    key.speed_bucket = st.player.speed >= kMaxSpeed / 2.0 ? 1 : 0;

    // Heading error clamped to [-90, +90] degrees, six 30-degree buckets;
    // a value exactly on a boundary belongs to the lower bucket.
    const double err_deg = std::clamp(
        wrap_angle(st.player.heading - tp.tangent_heading) * 180.0 / kPi, -90.0, 90.0);
    int bucket = static_cast<int>(std::ceil((err_deg + 90.0) / 30.0)) - 1;
    key.rotation_bucket = static_cast<std::int8_t>(std::clamp(bucket, 0, 5));

    const int player_sub = key.sub_segment;
    bool near_opponent = false;
    for (int k = 0; k < kOpponentCount; ++k) {
        const TrackPoint op = layout.project(st.opponents[k].pos);
        if (sub_segment_of(layout, op) == player_sub) {
            near_opponent = true;
            break;
        }
    }
    key.proximity = near_opponent ? 1 : 0;
    return key;
}

// ---------------------------------------------------------------------------
// Snapshots: fixed little-endian layout, magic + version + track fingerprint.

namespace {

constexpr char kSnapMagic[8] = {'G', 'B', 'S', 'N', 'A', 'P', '0', '1'};

struct Writer {
    std::vector<std::uint8_t>& out;
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void i32(std::int32_t v) { u64(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v))); }
    void b(bool v) { u64(v ? 1 : 0); }
};

struct Reader {
    const std::vector<std::uint8_t>& in;
    std::size_t at = 0;
    std::uint64_t u64() {
        if (at + 8 > in.size()) throw ParseError("snapshot blob truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[at + i]) << (8 * i);
        at += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(u64())); }
    bool b() { return u64() != 0; }
};

void write_car(Writer& w, const CarState& c) {
    w.f64(c.pos.x);
    w.f64(c.pos.y);
    w.f64(c.heading);
    w.f64(c.speed);
    w.i32(c.steer_input);
    w.i32(c.gas_input);
    w.b(c.on_grass);
    w.b(c.crashed_this_window);
}

CarState read_car(Reader& r) {
    CarState c;
    c.pos.x = r.f64();
    c.pos.y = r.f64();
    c.heading = r.f64();
    c.speed = r.f64();
    c.steer_input = r.i32();
    c.gas_input = r.i32();
    c.on_grass = r.b();
    c.crashed_this_window = r.b();
    return c;
}

}  // namespace

std::vector<std::uint8_t> snapshot(const TrackLayout& layout, const GameState& st) {
    std::vector<std::uint8_t> out;
    out.reserve(8 + 8 + 8 * 40);
    out.insert(out.end(), kSnapMagic, kSnapMagic + 8);
    Writer w{out};
    w.u64(track_fingerprint(layout));
    write_car(w, st.player);
    for (const auto& c : st.opponents) write_car(w, c);
    for (double a : st.opponent_arc) w.f64(a);
    w.i32(st.window_index);
    w.i32(st.lap);
    w.i32(st.score);
    w.f64(st.elapsed_s);
    w.b(st.finished);
    w.u64(st.seed);
    w.u64(st.rng_counter);
    w.f64(st.prev_window_speed);
    w.i32(st.last_crash_window);
    w.i32(st.last_gate_window);
    w.i32(st.next_gate);
    return out;
}

GameState restore(const TrackLayout& layout, const std::vector<std::uint8_t>& blob) {
    if (blob.size() < 16 || std::memcmp(blob.data(), kSnapMagic, 8) != 0) {
        throw ParseError("not a snapshot blob");
    }
    Reader r{blob, 8};
    if (r.u64() != track_fingerprint(layout)) {
        throw ValidationError("snapshot belongs to a different track");
    }
    GameState st;
    st.player = read_car(r);
    for (auto& c : st.opponents) c = read_car(r);
    for (auto& a : st.opponent_arc) a = r.f64();
    st.window_index = r.i32();
    st.lap = r.i32();
    st.score = r.i32();
    st.elapsed_s = r.f64();
    st.finished = r.b();
    st.seed = r.u64();
    st.rng_counter = r.u64();
    st.prev_window_speed = r.f64();
    st.last_crash_window = r.i32();
    st.last_gate_window = r.i32();
    st.next_gate = r.i32();
    if (r.at != blob.size()) throw ParseError("snapshot blob has trailing bytes");
    return st;
}

}  // namespace goblend::racing
