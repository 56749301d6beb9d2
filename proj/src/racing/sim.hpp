#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "common/geom.hpp"
#include "racing/track.hpp"

namespace goblend::racing {

// Control window: actions are applied every 250 ms; physics runs on 50 ms
// substeps inside the window.
inline constexpr double kWindowSeconds = 0.25;
inline constexpr int kSubstepsPerWindow = 5;
inline constexpr double kSubstepDt = kWindowSeconds / kSubstepsPerWindow;
inline constexpr int kMaxWindows = 480;          // two minutes
inline constexpr int kMaxScore = 16;             // 8 checkpoints x 2 laps

// Car model constants.
inline constexpr double kMaxSpeed = 30.0;        // hard cap, m/s
inline constexpr double kEngineAccel = 9.0;      // m/s^2 at full gas
inline constexpr double kBrakeAccel = 14.0;
inline constexpr double kDragCoeff = 0.30;       // linear, 1/s
inline constexpr double kWheelBase = 2.6;
inline constexpr double kMaxSteerAngle = 0.42;   // rad
inline constexpr double kMaxLateralAccel = 12.0; // grip limit, m/s^2
inline constexpr double kGrassFactor = 0.6;      // accel/grip multiplier off-road
inline constexpr double kScrubGain = 0.5;        // speed loss per unit of grip excess
inline constexpr double kBarrierOffset = 16.0;   // invisible wall lateral distance
inline constexpr double kCarContactDist = 2.0;
inline constexpr double kGateHalfSpan = 16.0;
inline constexpr double kViewConeDeg = 60.0;     // opponent visibility half-angle
inline constexpr double kMaxOpponentDist = 500.0;

inline constexpr int kOpponentCount = 3;
inline constexpr std::array<double, kOpponentCount> kOpponentBaseSpeed = {15.0, 17.5, 20.0};
inline constexpr std::array<double, kOpponentCount> kOpponentLateral = {-2.0, 0.0, 2.0};
inline constexpr std::array<double, kOpponentCount> kOpponentStartArc = {6.0, 12.0, 18.0};
inline constexpr double kOpponentSpeedJitter = 0.02;  // +/- fraction, per window

struct Action {
    int steer = 0;  // -1, 0, 1
    int gas = 0;    // -1, 0, 1
    bool operator==(const Action&) const = default;
};

inline constexpr int kActionCount = 9;
inline int action_index(Action a) { return (a.steer + 1) * 3 + (a.gas + 1); }
inline Action action_from_index(int idx) { return {idx / 3 - 1, idx % 3 - 1}; }

struct CarState {
    Vec2 pos;
    double heading = 0.0;   // radians, wrapped to (-pi, pi]
    double speed = 0.0;     // m/s, >= 0
    int steer_input = 0;
    int gas_input = 0;
    bool on_grass = false;
    bool crashed_this_window = false;
    bool operator==(const CarState&) const = default;
};

struct GameState {
    CarState player;
    std::array<CarState, kOpponentCount> opponents;
    std::array<double, kOpponentCount> opponent_arc{};  // along the waypoint loop

    int window_index = 0;
    int lap = 1;            // 1 or 2
    int score = 0;          // checkpoint gates crossed, 0..16
    double elapsed_s = 0.0; // window_index * 0.25
    bool finished = false;

    std::uint64_t seed = 0;        // counter-based stream: (seed, rng_counter)
    std::uint64_t rng_counter = 0;

    double prev_window_speed = 0.0;
    int last_crash_window = 0;
    int last_gate_window = 0;
    int next_gate = 1;      // index into layout gates; gate 0 is the lap line

    bool operator==(const GameState&) const = default;
};

GameState reset(const TrackLayout& layout, std::uint64_t seed);

// Advances one 250 ms window. Throws ContractError when called on a finished
// state or with inputs outside {-1, 0, 1}.
GameState step(const TrackLayout& layout, const GameState& state, Action action);

// ---------------------------------------------------------------------------
// Per-window feature vector.

inline constexpr int kFeatureCount = 24;
using FeatureVector = std::array<double, kFeatureCount>;

enum FeatureId : int {
    kFeatPosX = 0,
    kFeatPosY,
    kFeatHeading,
    kFeatSpeed,
    kFeatSteer,
    kFeatGas,
    kFeatOnGrass,
    kFeatCrashed,
    kFeatScore,
    kFeatLap,
    kFeatSubSegment,
    kFeatOpp0Dist,
    kFeatOpp1Dist,
    kFeatOpp2Dist,
    kFeatOpp0Speed,
    kFeatOpp1Speed,
    kFeatOpp2Speed,
    kFeatNearestOppDist,
    kFeatLateralOffset,
    kFeatHeadingError,
    kFeatSpeedDelta,
    kFeatCheckpointProgress,
    kFeatTimeSinceCrash,
    kFeatTimeSinceCheckpoint,
};

const std::array<std::string, kFeatureCount>& feature_names();

FeatureVector features(const TrackLayout& layout, const GameState& state);

// ---------------------------------------------------------------------------
// Categorical cell key.

struct CellKey {
    std::int8_t lap = 1;
    std::int16_t sub_segment = 0;
    std::int8_t speed_bucket = 0;     // 0 slow, 1 fast (>= kMaxSpeed / 2)
    std::int8_t rotation_bucket = 0;  // 0..5, 30 degree buckets of heading error
    std::int8_t proximity = 0;        // opponent on the same sub-segment
    bool operator==(const CellKey&) const = default;

    std::uint64_t packed() const {
        return (static_cast<std::uint64_t>(lap) << 40) |
               (static_cast<std::uint64_t>(static_cast<std::uint16_t>(sub_segment)) << 24) |
               (static_cast<std::uint64_t>(speed_bucket) << 16) |
               (static_cast<std::uint64_t>(rotation_bucket) << 8) |
               static_cast<std::uint64_t>(proximity);
    }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::uint64_t x = k.packed();
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return static_cast<std::size_t>(x ^ (x >> 31));
    }
};

struct SimDiagnostics {
    long long off_playfield_projections = 0;
};

CellKey discretize(const TrackLayout& layout, const GameState& state,
                   SimDiagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Snapshot / restore.

std::vector<std::uint8_t> snapshot(const TrackLayout& layout, const GameState& state);
GameState restore(const TrackLayout& layout, const std::vector<std::uint8_t>& blob);

}  // namespace goblend::racing
