#pragma once

#include <cstddef>
#include <vector>

#include "lanefit/embed.hpp"

namespace lanefit {

struct ClusterResult {
    std::vector<int> labels;                   // 1..k per pixel, 0 = noise
    int k = 0;
    std::vector<std::vector<double>> centers;  // converged mean-shift modes
};

struct ClusterConfig {
    // Flat kernel with bandwidth delta_v converges inside a guarantee-regime
    // cluster in one step.
    int max_iters = 30;
    double tol_factor = 1e-4;      // tol = tol_factor * delta_v
    std::size_t min_cluster_size = 1;  // clusters below this are marked noise
};

// Flat-kernel mean shift started from points[seed_index]; iterates the mean
// of in-bandwidth points until the shift falls below tol.
std::vector<double> mean_shift(const std::vector<std::vector<double>>& points,
                               std::size_t seed_index, double bandwidth, int max_iters,
                               double tol);

// Iterative assignment: mean shift from the first unassigned pixel, then
// claim every unassigned pixel within 2*delta_v of the mode.  Deterministic
// scan order; first claim wins.
ClusterResult cluster_instances(const EmbeddingSet& set, const ClusterMargins& margins,
                                const ClusterConfig& cfg = {});

}  // namespace lanefit
