#include "lanefit/cluster.hpp"

#include <algorithm>
#include <cmath>

namespace lanefit {

namespace {

double sq_dist(const double* a, const double* b, int dim) {
    double acc = 0.0;
    for (int k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

// Shared core over flat row-major storage.
std::vector<double> shift_mode(const double* data, std::size_t n, int dim,
                               std::vector<double> mode, double bandwidth, int max_iters,
                               double tol) {
    const double bw2 = bandwidth * bandwidth;
    std::vector<double> next(dim);
    for (int iter = 0; iter < max_iters; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        std::size_t inside = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* p = data + i * dim;
            if (sq_dist(p, mode.data(), dim) <= bw2) {
                for (int k = 0; k < dim; ++k) next[k] += p[k];
                ++inside;
            }
        }
        if (inside == 0) break;  // isolated mode; nothing in the kernel
        double movement2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            next[k] /= static_cast<double>(inside);
            const double d = next[k] - mode[k];
            movement2 += d * d;
        }
        mode = next;
        if (movement2 <= tol * tol) break;
    }
    return mode;
}

}  // namespace

std::vector<double> mean_shift(const std::vector<std::vector<double>>& points,
                               std::size_t seed_index, double bandwidth, int max_iters,
                               double tol) {
    const int dim = static_cast<int>(points[seed_index].size());
    std::vector<double> flat;
    flat.reserve(points.size() * dim);
    for (const auto& p : points) flat.insert(flat.end(), p.begin(), p.end());
    return shift_mode(flat.data(), points.size(), dim, points[seed_index], bandwidth,
                      max_iters, tol);
}

ClusterResult cluster_instances(const EmbeddingSet& set, const ClusterMargins& margins,
                                const ClusterConfig& cfg) {
    ClusterResult result;
    const std::size_t n = set.size();
    result.labels.assign(n, 0);
    if (n == 0) return result;

    const double bandwidth = margins.delta_v;
    const double tol = cfg.tol_factor * margins.delta_v;
    const double assign_r2 = 4.0 * margins.delta_v * margins.delta_v;  // radius 2*delta_v

    std::vector<std::size_t> pending;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (result.labels[seed] != 0) continue;
        // Assigned pixels still shape the density; only unassigned ones are
        // claimed below.
        std::vector<double> mode(set.row(seed).begin(), set.row(seed).end());
        mode = shift_mode(set.data.data(), n, set.dim, std::move(mode), bandwidth,
                          cfg.max_iters, tol);

        pending.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (result.labels[i] == 0 &&
                sq_dist(set.row(i).data(), mode.data(), set.dim) <= assign_r2) {
                pending.push_back(i);
            }
        }
        if (pending.empty()) pending.push_back(seed);  // outlier seed claims itself

        ++result.k;
        const int label = pending.size() >= cfg.min_cluster_size ? result.k : 0;
        if (label == 0) --result.k;
        for (std::size_t i : pending) result.labels[i] = label == 0 ? -1 : label;
        if (label != 0) result.centers.push_back(mode);
    }
    // noise pixels were tagged -1 to keep the scan terminating; report them as 0
    for (int& l : result.labels) {
        if (l == -1) l = 0;
    }
    return result;
}

}  // namespace lanefit
