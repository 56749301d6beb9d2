#include "personas/ward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "common/errors.hpp"
#include "common/text.hpp"

namespace goblend::personas {

Dendrogram ward_cluster(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw ValidationError("clustering needs at least 2 rows");
    const std::size_t dim = rows[0].size();
    for (const auto& r : rows) {
        if (r.size() != dim) throw ValidationError("rows have inconsistent dimensionality");
        for (double v : r) {
            if (!std::isfinite(v)) throw ValidationError("clustering input contains NaN/inf");
        }
    }

    // Active clusters carry their current id and size; dist[i][j] holds the
    // Ward merge cost between active clusters i and j.
    std::vector<int> id(static_cast<std::size_t>(n));
    std::iota(id.begin(), id.end(), 0);
    std::vector<double> size(static_cast<std::size_t>(n), 1.0);
    std::vector<std::vector<double>> dist(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double d2 = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double d = rows[static_cast<std::size_t>(i)][c] -
                                 rows[static_cast<std::size_t>(j)][c];
                d2 += d * d;
            }
            dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = d2 / 2.0;
            dist[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = d2 / 2.0;
        }
    }

    Dendrogram out;
    out.leaf_count = n;
    std::vector<int> active(static_cast<std::size_t>(n));
    std::iota(active.begin(), active.end(), 0);

    double last_height = -std::numeric_limits<double>::infinity();
    for (int step = 0; step < n - 1; ++step) {
        // Smallest cost; ties toward the smallest (min id, max id) pair.
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a) {
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const int i = active[a], j = active[b];
                const double d = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                const int lo = std::min(id[static_cast<std::size_t>(i)], id[static_cast<std::size_t>(j)]);
                const int hi = std::max(id[static_cast<std::size_t>(i)], id[static_cast<std::size_t>(j)]);
                if (bi < 0 || d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                } else if (d == best) {
                    const int clo = std::min(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
                    const int chi = std::max(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
                    if (lo < clo || (lo == clo && hi < chi)) {
                        bi = i;
                        bj = j;
                    }
                }
            }
        }

        // Ward is reducible, so merge heights cannot decrease; treat a
        // violation as a broken invariant rather than data.
        if (best < last_height - 1e-9) throw ContractError("ward merge heights decreased");
        last_height = std::max(last_height, best);

        Merge m;
        m.cluster_a = std::min(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
        m.cluster_b = std::max(id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)]);
        m.height = best;
        m.merged_size = static_cast<int>(size[static_cast<std::size_t>(bi)] +
                                         size[static_cast<std::size_t>(bj)]);
        out.merges.push_back(m);

        // Lance-Williams update; bi absorbs bj.
        const double ni = size[static_cast<std::size_t>(bi)];
        const double nj = size[static_cast<std::size_t>(bj)];
        for (int k : active) {
            if (k == bi || k == bj) continue;
            const double nk = size[static_cast<std::size_t>(k)];
            const double dik = dist[static_cast<std::size_t>(bi)][static_cast<std::size_t>(k)];
            const double djk = dist[static_cast<std::size_t>(bj)][static_cast<std::size_t>(k)];
            const double dij = dist[static_cast<std::size_t>(bi)][static_cast<std::size_t>(bj)];
            const double updated =
                ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk);
            dist[static_cast<std::size_t>(bi)][static_cast<std::size_t>(k)] = updated;
            dist[static_cast<std::size_t>(k)][static_cast<std::size_t>(bi)] = updated;
        }
        size[static_cast<std::size_t>(bi)] = ni + nj;
        id[static_cast<std::size_t>(bi)] = n + step;
        active.erase(std::find(active.begin(), active.end(), bj));
    }
    return out;
}

std::vector<int> cut(const Dendrogram& dendrogram, double threshold) {
    if (!(threshold > 0.0)) throw ValidationError("cut threshold must be > 0");
    const int n = dendrogram.leaf_count;
    std::vector<int> parent(static_cast<std::size_t>(2 * n - 1));
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::size_t t = 0; t < dendrogram.merges.size(); ++t) {
        const Merge& m = dendrogram.merges[t];
        const int merged_id = n + static_cast<int>(t);
        if (m.height < threshold) {
            parent[static_cast<std::size_t>(find(m.cluster_a))] = merged_id;
            parent[static_cast<std::size_t>(find(m.cluster_b))] = merged_id;
        }
    }
    std::vector<int> labels(static_cast<std::size_t>(n), -1);
    std::vector<int> root_label(static_cast<std::size_t>(2 * n - 1), -1);
    int next = 0;
    for (int leaf = 0; leaf < n; ++leaf) {
        const int root = find(leaf);
        if (root_label[static_cast<std::size_t>(root)] < 0) {
            root_label[static_cast<std::size_t>(root)] = next++;
        }
        labels[static_cast<std::size_t>(leaf)] = root_label[static_cast<std::size_t>(root)];
    }
    return labels;
}

void save_dendrogram_csv(const Dendrogram& d, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open dendrogram file for writing: " + path);
    f << "# goblend-dendrogram v1, leaves=" << d.leaf_count << "\n";
    f << "merge_index,cluster_a,cluster_b,height,merged_size\n";
    for (std::size_t t = 0; t < d.merges.size(); ++t) {
        const Merge& m = d.merges[t];
        f << t << "," << m.cluster_a << "," << m.cluster_b << "," << format_double(m.height)
          << "," << m.merged_size << "\n";
    }
    if (!f) throw IoError("failed writing dendrogram: " + path);
}

}  // namespace goblend::personas
