#include "explore/archive.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace goblend::explore {

const ArchiveEntry* Archive::find(const racing::CellKey& key) const {
    const auto it = index_.find(key);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

std::size_t Archive::lap2_cells() const {
    std::size_t n = 0;
    for (const auto& e : entries_) {
        if (e.key.lap == 2) ++n;
    }
    return n;
}

OfferOutcome Archive::offer(const racing::CellKey& key, double r_lambda,
                            const Trajectory& trajectory, double r_behavior, double r_experience,
                            int raw_score, std::int64_t iteration,
                            const racing::TrackLayout& layout, const racing::GameState& state) {
    const auto it = index_.find(key);
    if (it == index_.end()) {
        ArchiveEntry e;
        e.key = key;
        e.trajectory = trajectory;
        e.snapshot = racing::snapshot(layout, state);
        e.r_behavior = r_behavior;
        e.r_experience = r_experience;
        e.r_lambda = r_lambda;
        e.raw_score = raw_score;
        e.discovered_iteration = iteration;
        index_.emplace(key, entries_.size());
        entries_.push_back(std::move(e));
        return OfferOutcome::Inserted;
    }

    ArchiveEntry& cur = entries_[it->second];
    const bool equal = std::abs(r_lambda - cur.r_lambda) <= kRewardEqualTol;
    const bool better = !equal && r_lambda > cur.r_lambda;
    const bool shorter = trajectory.length() < cur.trajectory.length();
    if (!better && !(equal && shorter)) return OfferOutcome::Rejected;

    if (r_lambda < cur.r_lambda - kRewardEqualTol) {
        throw ContractError("archive replacement would lower the stored reward");
    }
    if (equal && !shorter) {
        throw ContractError("equal-reward replacement must shorten the trajectory");
    }
    cur.trajectory = trajectory;
    cur.snapshot = racing::snapshot(layout, state);
    cur.r_behavior = r_behavior;
    cur.r_experience = r_experience;
    cur.r_lambda = r_lambda;
    cur.raw_score = raw_score;
    cur.discovered_iteration = iteration;
    ++replacements_;
    return better ? OfferOutcome::ReplacedBetter : OfferOutcome::ReplacedShorter;
}

void dump_archive(const Archive& archive, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "actions", ec);
    if (ec) throw IoError("cannot create archive dump directory: " + dir);

    std::ofstream f(fs::path(dir) / "archive.csv");
    if (!f) throw IoError("cannot open archive.csv for writing under " + dir);
    f << "entry,lap,sub_segment,speed_bucket,rotation_bucket,proximity,"
         "r_behavior,r_experience,r_lambda,raw_score,length,discovered_iteration\n";
    for (std::size_t i = 0; i < archive.size(); ++i) {
        const auto& e = archive.entry(i);
        f << i << "," << static_cast<int>(e.key.lap) << "," << e.key.sub_segment << ","
          << static_cast<int>(e.key.speed_bucket) << "," << static_cast<int>(e.key.rotation_bucket)
          << "," << static_cast<int>(e.key.proximity) << "," << format_double(e.r_behavior) << ","
          << format_double(e.r_experience) << "," << format_double(e.r_lambda) << ","
          << e.raw_score << "," << e.trajectory.length() << "," << e.discovered_iteration << "\n";

        std::ofstream log(fs::path(dir) / "actions" / ("entry_" + std::to_string(i) + ".csv"));
        if (!log) throw IoError("cannot open action log for entry " + std::to_string(i));
        log << "steer,gas\n";
        for (const auto& a : e.trajectory.actions) log << a.steer << "," << a.gas << "\n";
    }
    if (!f) throw IoError("failed writing archive.csv under " + dir);
}

}  // namespace goblend::explore
