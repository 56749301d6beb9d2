#include "traces/session.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace goblend::traces {

const char* tier_name(SkillTier t) {
    switch (t) {
        case SkillTier::Beginner: return "beginner";
        case SkillTier::Intermediate: return "intermediate";
        case SkillTier::Advanced: return "advanced";
        case SkillTier::Expert: return "expert";
    }
    return "beginner";
}

SkillTier tier_from_name(std::string_view name) {
    if (name == "beginner") return SkillTier::Beginner;
    if (name == "intermediate") return SkillTier::Intermediate;
    if (name == "advanced") return SkillTier::Advanced;
    if (name == "expert") return SkillTier::Expert;
    throw ParseError("unknown skill tier '" + std::string(name) + "'");
}

std::vector<double> normalize_trace(const std::vector<double>& trace) {
    if (trace.empty()) throw ValidationError("cannot normalize an empty trace");
    for (double v : trace) {
        if (!std::isfinite(v)) throw ValidationError("trace contains a non-finite value");
    }
    const auto [mn, mx] = std::minmax_element(trace.begin(), trace.end());
    const double lo = *mn, hi = *mx;
    std::vector<double> out(trace.size());
    if (hi == lo) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double span = hi - lo;
    for (std::size_t i = 0; i < trace.size(); ++i) out[i] = (trace[i] - lo) / span;
    return out;
}

PlaySession truncate_to_laps(const PlaySession& session, int laps) {
    if (laps < 1 || laps > 2) throw ValidationError("laps must be 1 or 2");
    const int target = laps * racing::kCheckpointsPerLap;
    PlaySession out = session;
    for (std::size_t i = 0; i < session.windows.size(); ++i) {
        if (static_cast<int>(session.windows[i].features[racing::kFeatScore]) >= target) {
            out.windows.resize(i + 1);
            out.arousal.resize(i + 1);
            break;
        }
    }
    return out;
}

std::array<double, racing::kActionCount> action_frequency_table(const Dataset& dataset) {
    std::array<double, racing::kActionCount> counts{};
    double total = 0.0;
    for (const auto& s : dataset) {
        for (const auto& w : s.windows) {
            counts[static_cast<std::size_t>(racing::action_index(w.action))] += 1.0;
            total += 1.0;
        }
    }
    if (total <= 0.0) throw ValidationError("dataset has no windows");
    for (double& c : counts) c /= total;
    return counts;
}

// ---------------------------------------------------------------------------
// CSV persistence. One row per 250 ms window:
//   session_id,window_index,<24 features>,steer,gas,arousal
// Session metadata rides on '# session ...' comment lines so the round trip
// is lossless.

namespace {
constexpr const char* kHeader = "# goblend-playtrace v1";
}

void save_sessions(const Dataset& dataset, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open dataset for writing: " + path);
    f << kHeader << "\n";
    f << "session_id,window_index";
    for (const auto& name : racing::feature_names()) f << "," << name;
    f << ",steer,gas,arousal\n";
    for (const auto& s : dataset) {
        if (s.arousal.size() != s.windows.size()) {
            throw ValidationError("session " + s.session_id + ": arousal/window length mismatch");
        }
        f << "# session " << s.session_id << " tier "
          << (s.tier_hint ? tier_name(*s.tier_hint) : "none") << " seed " << s.seed
          << " generator " << s.generator_version << "\n";
        for (std::size_t w = 0; w < s.windows.size(); ++w) {
            f << s.session_id << "," << w;
            for (double v : s.windows[w].features) f << "," << format_double(v);
            f << "," << s.windows[w].action.steer << "," << s.windows[w].action.gas << ","
              << format_double(s.arousal[w]) << "\n";
        }
    }
    if (!f) throw IoError("failed writing dataset: " + path);
}

Dataset load_sessions(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open dataset: " + path);
    std::string line;
    int line_no = 0;
    const auto at = [&](const std::string& what) {
        return path + ":" + std::to_string(line_no) + ": " + what;
    };

    ++line_no;
    if (!std::getline(f, line) || trim(line) != kHeader) {
        throw ParseError(path + ": missing '" + std::string(kHeader) + "' header row");
    }
    ++line_no;
    if (!std::getline(f, line)) throw ParseError(path + ": missing column header");
    {
        auto cols = split(trim(line), ',');
        std::vector<std::string> expected = {"session_id", "window_index"};
        for (const auto& n : racing::feature_names()) expected.push_back(n);
        expected.insert(expected.end(), {"steer", "gas", "arousal"});
        if (cols.size() != expected.size()) {
            throw ParseError(at("expected " + std::to_string(expected.size()) + " columns, got " +
                               std::to_string(cols.size())));
        }
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (trim(cols[i]) != expected[i]) {
                throw ParseError(at("missing or misplaced column '" + expected[i] + "'"));
            }
        }
    }

    Dataset out;
    PlaySession* cur = nullptr;
    while (std::getline(f, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            auto tokens = split_ws(t);
            if (tokens.size() >= 2 && tokens[1] == "session") {
                PlaySession s;
                if (tokens.size() != 9 || tokens[3] != "tier" || tokens[5] != "seed" ||
                    tokens[7] != "generator") {
                    throw ParseError(at("malformed session metadata line"));
                }
                s.session_id = std::string(tokens[2]);
                if (tokens[4] != "none") s.tier_hint = tier_from_name(tokens[4]);
                s.seed = static_cast<std::uint64_t>(parse_int(tokens[6], at("seed")));
                s.generator_version = static_cast<int>(parse_int(tokens[8], at("generator version")));
                out.push_back(std::move(s));
                cur = &out.back();
            }
            continue;
        }
        auto cols = split(t, ',');
        if (cols.size() != 2 + racing::kFeatureCount + 3) {
            throw ParseError(at("wrong column count"));
        }
        const std::string sid(cols[0]);
        if (!cur || cur->session_id != sid) {
            // Data rows for a session we have no metadata for; synthesize it.
            out.push_back(PlaySession{});
            cur = &out.back();
            cur->session_id = sid;
        }
        const auto widx = static_cast<std::size_t>(parse_int(cols[1], at("window_index")));
        if (widx != cur->windows.size()) {
            throw ParseError(at("window_index out of order for session " + sid));
        }
        SessionWindow w;
        for (int i = 0; i < racing::kFeatureCount; ++i) {
            const double v = parse_double(cols[static_cast<std::size_t>(2 + i)],
                                          at(racing::feature_names()[static_cast<std::size_t>(i)]));
            if (!std::isfinite(v)) {
                throw ParseError(at("non-finite value in column " +
                                    racing::feature_names()[static_cast<std::size_t>(i)]));
            }
            w.features[static_cast<std::size_t>(i)] = v;
        }
        const long long steer = parse_int(cols[2 + racing::kFeatureCount], at("steer"));
        const long long gas = parse_int(cols[3 + racing::kFeatureCount], at("gas"));
        if (steer < -1 || steer > 1 || gas < -1 || gas > 1) {
            throw ParseError(at("steer/gas outside {-1,0,1}"));
        }
        w.action = {static_cast<int>(steer), static_cast<int>(gas)};
        const double arousal = parse_double(cols[4 + racing::kFeatureCount], at("arousal"));
        if (!std::isfinite(arousal)) throw ParseError(at("non-finite arousal"));
        cur->windows.push_back(w);
        cur->arousal.push_back(arousal);
    }
    for (const auto& s : out) {
        if (s.windows.empty()) throw ParseError(path + ": session " + s.session_id + " has no rows");
        if (s.windows.size() > racing::kMaxWindows) {
            throw ParseError(path + ": session " + s.session_id + " exceeds 480 windows");
        }
    }
    return out;
}

}  // namespace goblend::traces
