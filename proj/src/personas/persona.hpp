#pragma once

#include <array>
#include <string>
#include <vector>

#include "personas/ward.hpp"
#include "traces/session.hpp"

namespace goblend::personas {

// Cluster artifact: the imitation targets for one group of players.
struct PersonaModel {
    std::string label;                      // expert / advanced / intermediate / beginner
    std::vector<std::string> member_ids;
    std::vector<double> target_score;       // t_b: 480 values in [0,1], non-decreasing
    std::vector<double> target_arousal;     // t_e: 480 values in [0,1]
    std::array<double, racing::kActionCount> action_freq{};
    int member_count = 0;
    double mean_final_score = 0.0;          // raw 0..16
};

// Mean traces over the member sessions. Members that already finished are
// held at their final value before averaging; score is normalized by 16.
PersonaModel build_persona(const std::vector<const traces::PlaySession*>& members);

struct ClusterOutcome {
    Dendrogram dendrogram;
    std::vector<int> assignment;            // per session, 0..k-1
    std::vector<PersonaModel> personas;     // ranked labels, expert first
};

// Full pipeline step: aggregate -> z-score -> ward -> cut -> personas.
// Labels are assigned by ranking clusters on mean final score.
ClusterOutcome cluster_personas(const traces::Dataset& dataset, double cut_threshold);

void save_persona(const PersonaModel& persona, const std::string& path);
PersonaModel load_persona(const std::string& path);

}  // namespace goblend::personas
