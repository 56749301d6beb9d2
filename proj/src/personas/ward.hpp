#pragma once

#include <string>
#include <vector>

namespace goblend::personas {

struct Merge {
    int cluster_a = 0;        // smaller cluster id
    int cluster_b = 0;
    double height = 0.0;      // within-cluster variance increase at this merge
    int merged_size = 0;
};

// Agglomerative Ward dendrogram. Leaves are 0..n-1; the merge at step t
// creates cluster id n+t. Heights are non-decreasing.
struct Dendrogram {
    int leaf_count = 0;
    std::vector<Merge> merges;   // n-1 entries
};

// Ward linkage via the Lance-Williams update on half squared Euclidean
// distances, so each height equals the variance increase of that merge.
// Ties are broken toward the lexicographically smallest (min id, max id).
Dendrogram ward_cluster(const std::vector<std::vector<double>>& rows);

// Connected components under all merges with height strictly below the
// threshold. Labels are normalized by first-leaf order, 0..k-1.
std::vector<int> cut(const Dendrogram& dendrogram, double threshold);

void save_dendrogram_csv(const Dendrogram& d, const std::string& path);

}  // namespace goblend::personas
