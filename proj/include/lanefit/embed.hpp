#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lanefit/errors.hpp"

namespace lanefit {

struct ClusterMargins {
    double delta_v = 0.5;
    double delta_d = 3.0;

    // The thresholding guarantee needs strict separation delta_d > 6*delta_v.
    bool guarantee_regime() const { return delta_d > 6.0 * delta_v; }
};

// Per-pixel embeddings, optionally carrying instance labels and the pixel
// coordinates they came from.
struct EmbeddingSet {
    int dim = 0;
    std::vector<double> data;            // n * dim, row major
    std::vector<int> labels;             // empty when unlabeled
    std::vector<double> pixel_x;         // optional, empty or size n
    std::vector<double> pixel_y;

    std::size_t size() const { return dim > 0 ? data.size() / dim : 0; }
    bool labeled() const { return !labels.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, static_cast<std::size_t>(dim)};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * dim, static_cast<std::size_t>(dim)};
    }
};

struct ClusterMean {
    int label = 0;
    std::vector<double> mean;
    std::size_t count = 0;
};

struct LossTerms {
    double total = 0.0;
    double var = 0.0;
    double dist = 0.0;
};

struct TrainResult {
    EmbeddingSet set;
    std::vector<double> trace;
};

// Arithmetic mean per cluster, ordered by label.  Throws MissingLabels.
std::vector<ClusterMean> cluster_means(const EmbeddingSet& set);

// Hinged variance/distance loss.  L_dist averages over ordered pairs; with a
// single cluster it is 0 by the empty-sum convention.
LossTerms discriminative_loss(const EmbeddingSet& set, const ClusterMargins& margins);

// Exact gradient of the loss with respect to every embedding, including the
// dependence of the cluster means on their members.  Zero subgradient at
// hinge boundaries and at coincident point/mean.
std::vector<double> discriminative_loss_grad(const EmbeddingSet& set,
                                             const ClusterMargins& margins);

// Optimizes free embedding variables directly under the loss gradient;
// init is a seeded standard normal scaled by 0.1.
TrainResult train_free_embeddings(std::span<const int> labels, int dim,
                                  const ClusterMargins& margins, int steps, double step_size,
                                  std::uint64_t seed);

// Text table: header x,y,e1..eN[,label], one pixel per row.
void write_embeddings_text(const EmbeddingSet& set, std::ostream& out);
EmbeddingSet read_embeddings_text(std::istream& in);

// Compact binary form: magic "LFEMB1\n", little-endian u32 dim/count/flags,
// 32-bit floats.
void write_embeddings_binary(const EmbeddingSet& set, std::ostream& out);
EmbeddingSet read_embeddings_binary(std::istream& in);

// Dispatch on the binary magic; falls back to the text reader.
EmbeddingSet read_embeddings_file(const std::string& path);
void write_embeddings_file(const EmbeddingSet& set, const std::string& path, bool binary = false);

}  // namespace lanefit
