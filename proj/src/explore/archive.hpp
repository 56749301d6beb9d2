#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "explore/reward.hpp"
#include "racing/sim.hpp"

namespace goblend::explore {

// Action log plus the cached per-window behavior/experience traces and their
// running similarity sums against the persona targets.
struct Trajectory {
    std::vector<racing::Action> actions;
    std::vector<double> h_behavior;    // score / 16 per window
    std::vector<double> h_experience;  // kNN arousal estimate per window
    double sum_behavior = 0.0;         // running similarity numerators
    double sum_experience = 0.0;

    std::size_t length() const { return actions.size(); }

    void extend(racing::Action a, double hb, double he, const std::vector<double>& target_b,
                const std::vector<double>& target_e) {
        const std::size_t i = actions.size();
        actions.push_back(a);
        h_behavior.push_back(hb);
        h_experience.push_back(he);
        sum_behavior += similarity_term(hb, target_at(target_b, i));
        sum_experience += similarity_term(he, target_at(target_e, i));
    }

    double reward_behavior() const {
        return actions.empty() ? 0.0 : sum_behavior / static_cast<double>(actions.size());
    }
    double reward_experience() const {
        return actions.empty() ? 0.0 : sum_experience / static_cast<double>(actions.size());
    }
};

struct ArchiveEntry {
    racing::CellKey key;
    Trajectory trajectory;
    std::vector<std::uint8_t> snapshot;
    double r_behavior = 0.0;
    double r_experience = 0.0;
    double r_lambda = 0.0;
    int raw_score = 0;
    std::int64_t discovered_iteration = 0;
};

enum class OfferOutcome { Inserted, ReplacedBetter, ReplacedShorter, Rejected };

// Cell -> best-known-entry map with the replacement rules:
//   * unseen key: insert
//   * strictly higher reward: replace
//   * equal reward (within kRewardEqualTol) and strictly shorter: replace
// Stored rewards never decrease by more than the equality tolerance, and an
// equal-reward replacement always shrinks the trajectory.
class Archive {
public:
    OfferOutcome offer(const racing::CellKey& key, double r_lambda, const Trajectory& trajectory,
                       double r_behavior, double r_experience, int raw_score,
                       std::int64_t iteration, const racing::TrackLayout& layout,
                       const racing::GameState& state);

    std::size_t size() const { return entries_.size(); }
    const std::vector<ArchiveEntry>& entries() const { return entries_; }
    const ArchiveEntry& entry(std::size_t i) const { return entries_[i]; }
    const ArchiveEntry* find(const racing::CellKey& key) const;

    std::int64_t replacements() const { return replacements_; }
    std::size_t lap2_cells() const;

private:
    std::unordered_map<racing::CellKey, std::size_t, racing::CellKeyHash> index_;
    std::vector<ArchiveEntry> entries_;
    std::int64_t replacements_ = 0;
};

// One CSV row per entry plus one action-log file per entry under <dir>/actions.
void dump_archive(const Archive& archive, const std::string& dir);

}  // namespace goblend::explore
