#include "personas/persona.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "common/errors.hpp"
#include "common/text.hpp"
#include "personas/aggregate.hpp"

namespace goblend::personas {

namespace {

// Value of a member trace at window i, held at the final value once the
// session has ended.
double held_at(const std::vector<double>& trace, std::size_t i) {
    return trace[std::min(i, trace.size() - 1)];
}

const char* rank_label(std::size_t rank) {
    switch (rank) {
        case 0: return "expert";
        case 1: return "advanced";
        case 2: return "intermediate";
        case 3: return "beginner";
        default: return nullptr;
    }
}

}  // namespace

PersonaModel build_persona(const std::vector<const traces::PlaySession*>& members) {
    if (members.empty()) throw ValidationError("persona needs at least one member session");

    PersonaModel p;
    p.member_count = static_cast<int>(members.size());
    p.target_score.assign(racing::kMaxWindows, 0.0);
    p.target_arousal.assign(racing::kMaxWindows, 0.0);

    std::array<double, racing::kActionCount> action_counts{};
    double total_actions = 0.0;
    for (const auto* m : members) {
        if (m->windows.empty() || m->arousal.size() != m->windows.size()) {
            throw ValidationError("persona member " + m->session_id + " is malformed");
        }
        p.member_ids.push_back(m->session_id);
        p.mean_final_score += m->final_score();

        std::vector<double> score_trace(m->windows.size());
        for (std::size_t i = 0; i < m->windows.size(); ++i) {
            score_trace[i] = m->windows[i].features[racing::kFeatScore] / racing::kMaxScore;
            action_counts[static_cast<std::size_t>(racing::action_index(m->windows[i].action))] += 1.0;
            total_actions += 1.0;
        }
        for (std::size_t i = 0; i < static_cast<std::size_t>(racing::kMaxWindows); ++i) {
            p.target_score[i] += held_at(score_trace, i);
            p.target_arousal[i] += held_at(m->arousal, i);
        }
    }
    const double n = static_cast<double>(members.size());
    p.mean_final_score /= n;
    for (auto& v : p.target_score) v /= n;
    for (auto& v : p.target_arousal) v /= n;
    for (std::size_t i = 0; i < action_counts.size(); ++i) {
        p.action_freq[i] = action_counts[i] / total_actions;
    }
    return p;
}

ClusterOutcome cluster_personas(const traces::Dataset& dataset, double cut_threshold) {
    if (dataset.size() < 2) throw ValidationError("need at least 2 sessions to cluster");

    std::vector<AggregateVector> rows;
    rows.reserve(dataset.size());
    for (const auto& s : dataset) rows.push_back(aggregate(s));
    const auto z = standardize(rows);
    std::vector<std::vector<double>> generic(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) generic[i].assign(z[i].begin(), z[i].end());

    ClusterOutcome out;
    out.dendrogram = ward_cluster(generic);
    out.assignment = cut(out.dendrogram, cut_threshold);

    const int k = *std::max_element(out.assignment.begin(), out.assignment.end()) + 1;
    std::vector<std::vector<const traces::PlaySession*>> groups(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        groups[static_cast<std::size_t>(out.assignment[i])].push_back(&dataset[i]);
    }

    std::vector<PersonaModel> personas;
    personas.reserve(groups.size());
    for (const auto& g : groups) personas.push_back(build_persona(g));

    // Rank clusters on mean final score, best first; stable on ties.
    std::vector<std::size_t> order(personas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return personas[a].mean_final_score > personas[b].mean_final_score;
    });
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const char* label = rank_label(rank);
        personas[order[rank]].label =
            label ? label : "cluster" + std::to_string(rank);
    }
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        out.personas.push_back(personas[order[rank]]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Artifact file: "goblend-persona v1", token records.

void save_persona(const PersonaModel& persona, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open persona file for writing: " + path);
    f << "goblend-persona v1\n";
    f << "label " << persona.label << "\n";
    f << "member_count " << persona.member_count << "\n";
    f << "mean_final_score " << format_double(persona.mean_final_score) << "\n";
    f << "members " << persona.member_ids.size();
    for (const auto& id : persona.member_ids) f << " " << id;
    f << "\n";
    f << "action_freq " << persona.action_freq.size();
    for (double v : persona.action_freq) f << " " << format_double(v);
    f << "\n";
    f << "t_b " << persona.target_score.size();
    for (double v : persona.target_score) f << " " << format_double(v);
    f << "\n";
    f << "t_e " << persona.target_arousal.size();
    for (double v : persona.target_arousal) f << " " << format_double(v);
    f << "\n";
    if (!f) throw IoError("failed writing persona: " + path);
}

PersonaModel load_persona(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open persona file: " + path);
    std::string header;
    std::getline(f, header);
    if (trim(header) != "goblend-persona v1") {
        throw ParseError(path + ": missing 'goblend-persona v1' header");
    }
    PersonaModel p;
    std::string key;
    while (f >> key) {
        if (key == "label") {
            f >> p.label;
        } else if (key == "member_count") {
            f >> p.member_count;
        } else if (key == "mean_final_score") {
            f >> p.mean_final_score;
        } else if (key == "members") {
            std::size_t n = 0;
            f >> n;
            p.member_ids.resize(n);
            for (auto& id : p.member_ids) f >> id;
        } else if (key == "action_freq") {
            std::size_t n = 0;
            f >> n;
            if (n != p.action_freq.size()) throw ParseError(path + ": action_freq size mismatch");
            for (auto& v : p.action_freq) f >> v;
        } else if (key == "t_b") {
            std::size_t n = 0;
            f >> n;
            p.target_score.resize(n);
            for (auto& v : p.target_score) f >> v;
        } else if (key == "t_e") {
            std::size_t n = 0;
            f >> n;
            p.target_arousal.resize(n);
            for (auto& v : p.target_arousal) f >> v;
        } else {
            throw ParseError(path + ": unknown record '" + key + "'");
        }
        if (f.fail()) throw ParseError(path + ": malformed record '" + key + "'");
    }
    if (p.label.empty() || p.target_score.size() != racing::kMaxWindows ||
        p.target_arousal.size() != racing::kMaxWindows) {
        throw ParseError(path + ": incomplete persona artifact");
    }
    return p;
}

}  // namespace goblend::personas
