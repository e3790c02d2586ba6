#include "lanefit/embed.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

namespace lanefit {

namespace {

double sq_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double d = a[k] - b[k];
        acc += d * d;
    }
    return acc;
}

}  // namespace

std::vector<ClusterMean> cluster_means(const EmbeddingSet& set) {
    if (!set.labeled()) throw MissingLabels("embedding set carries no labels");
    std::map<int, ClusterMean> by_label;
    for (std::size_t i = 0; i < set.size(); ++i) {
        ClusterMean& cm = by_label[set.labels[i]];
        if (cm.mean.empty()) {
            cm.label = set.labels[i];
            cm.mean.assign(set.dim, 0.0);
        }
        const auto row = set.row(i);
        for (int k = 0; k < set.dim; ++k) cm.mean[k] += row[k];
        ++cm.count;
    }
    std::vector<ClusterMean> result;
    result.reserve(by_label.size());
    for (auto& [label, cm] : by_label) {
        for (double& v : cm.mean) v /= static_cast<double>(cm.count);
        result.push_back(std::move(cm));
    }
    return result;
}

LossTerms discriminative_loss(const EmbeddingSet& set, const ClusterMargins& margins) {
    const auto means = cluster_means(set);
    const std::size_t c_count = means.size();
    std::map<int, std::size_t> index;
    for (std::size_t c = 0; c < c_count; ++c) index[means[c].label] = c;

    LossTerms terms;
    std::vector<double> var_by_cluster(c_count, 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::size_t c = index[set.labels[i]];
        const double r = std::sqrt(sq_distance({means[c].mean.data(), means[c].mean.size()},
                                               set.row(i)));
        const double hinge = r - margins.delta_v;
        if (hinge > 0.0) var_by_cluster[c] += hinge * hinge;
    }
    for (std::size_t c = 0; c < c_count; ++c) {
        terms.var += var_by_cluster[c] / static_cast<double>(means[c].count);
    }
    terms.var /= static_cast<double>(c_count);

    if (c_count > 1) {
        double dist = 0.0;
        for (std::size_t ca = 0; ca < c_count; ++ca) {
            for (std::size_t cb = 0; cb < c_count; ++cb) {
                if (ca == cb) continue;
                const double gap = std::sqrt(
                    sq_distance({means[ca].mean.data(), means[ca].mean.size()},
                                {means[cb].mean.data(), means[cb].mean.size()}));
                const double hinge = margins.delta_d - gap;
                if (hinge > 0.0) dist += hinge * hinge;
            }
        }
        terms.dist = dist / (static_cast<double>(c_count) * static_cast<double>(c_count - 1));
    }
    terms.total = terms.var + terms.dist;
    return terms;
}

std::vector<double> discriminative_loss_grad(const EmbeddingSet& set,
                                             const ClusterMargins& margins) {
    const auto means = cluster_means(set);
    const std::size_t c_count = means.size();
    std::map<int, std::size_t> index;
    for (std::size_t c = 0; c < c_count; ++c) index[means[c].label] = c;

    std::vector<double> grad(set.data.size(), 0.0);
    // Accumulated dL/d(mu_c); distributed to members afterwards.
    std::vector<std::vector<double>> mean_grad(c_count, std::vector<double>(set.dim, 0.0));

    const double inv_c = 1.0 / static_cast<double>(c_count);
    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::size_t c = index[set.labels[i]];
        const auto row = set.row(i);
        const auto& mu = means[c].mean;
        const double r = std::sqrt(sq_distance({mu.data(), mu.size()}, row));
        const double hinge = r - margins.delta_v;
        if (hinge <= 0.0 || r == 0.0) continue;  // flat region / zero subgradient
        const double scale = inv_c / static_cast<double>(means[c].count) * 2.0 * hinge / r;
        for (int k = 0; k < set.dim; ++k) {
            const double diff = row[k] - mu[k];  // d r / d x_i
            grad[i * set.dim + k] += scale * diff;
            mean_grad[c][k] -= scale * diff;     // d r / d mu = -(x - mu)/r
        }
    }

    if (c_count > 1) {
        const double pair_norm = 1.0 / (static_cast<double>(c_count) *
                                        static_cast<double>(c_count - 1));
        for (std::size_t ca = 0; ca < c_count; ++ca) {
            for (std::size_t cb = ca + 1; cb < c_count; ++cb) {
                const double gap = std::sqrt(
                    sq_distance({means[ca].mean.data(), means[ca].mean.size()},
                                {means[cb].mean.data(), means[cb].mean.size()}));
                const double hinge = margins.delta_d - gap;
                if (hinge <= 0.0 || gap == 0.0) continue;
                // ordered pairs count each unordered pair twice
                const double scale = pair_norm * 2.0 * 2.0 * hinge / gap;
                for (int k = 0; k < set.dim; ++k) {
                    const double diff = means[ca].mean[k] - means[cb].mean[k];
                    mean_grad[ca][k] -= scale * diff;
                    mean_grad[cb][k] += scale * diff;
                }
            }
        }
    }

    for (std::size_t i = 0; i < set.size(); ++i) {
        const std::size_t c = index[set.labels[i]];
        const double share = 1.0 / static_cast<double>(means[c].count);
        for (int k = 0; k < set.dim; ++k) {
            grad[i * set.dim + k] += share * mean_grad[c][k];
        }
    }
    return grad;
}

TrainResult train_free_embeddings(std::span<const int> labels, int dim,
                                  const ClusterMargins& margins, int steps, double step_size,
                                  std::uint64_t seed) {
    TrainResult result;
    EmbeddingSet& set = result.set;
    set.dim = dim;
    set.labels.assign(labels.begin(), labels.end());
    set.data.resize(labels.size() * static_cast<std::size_t>(dim));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& v : set.data) v = 0.1 * normal(rng);

    result.trace.reserve(steps);
    for (int step = 0; step < steps; ++step) {
        const LossTerms terms = discriminative_loss(set, margins);
        result.trace.push_back(terms.total);
        if (terms.total == 0.0) break;
        const auto grad = discriminative_loss_grad(set, margins);
        for (std::size_t i = 0; i < set.data.size(); ++i) set.data[i] -= step_size * grad[i];
    }
    return result;
}

void write_embeddings_text(const EmbeddingSet& set, std::ostream& out) {
    out << "x,y";
    for (int k = 1; k <= set.dim; ++k) out << ",e" << k;
    if (set.labeled()) out << ",label";
    out << "\n";
    out << std::setprecision(17);
    const bool has_px = set.pixel_x.size() == set.size();
    for (std::size_t i = 0; i < set.size(); ++i) {
        out << (has_px ? set.pixel_x[i] : 0.0) << ',' << (has_px ? set.pixel_y[i] : 0.0);
        const auto row = set.row(i);
        for (int k = 0; k < set.dim; ++k) out << ',' << row[k];
        if (set.labeled()) out << ',' << set.labels[i];
        out << "\n";
    }
}

EmbeddingSet read_embeddings_text(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty embedding file", 1);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) header.push_back(field);
    }
    if (header.size() < 3 || header[0] != "x" || header[1] != "y") {
        throw ParseError("expected header x,y,e1..eN[,label]", 1);
    }
    const bool labeled = header.back() == "label";
    const int dim = static_cast<int>(header.size()) - 2 - (labeled ? 1 : 0);
    if (dim < 1) throw ParseError("no embedding columns in header", 1);

    EmbeddingSet set;
    set.dim = dim;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(ss, field, ',')) values.push_back(std::stod(field));
        if (values.size() != header.size()) {
            throw ParseError("wrong field count", line_no);
        }
        set.pixel_x.push_back(values[0]);
        set.pixel_y.push_back(values[1]);
        for (int k = 0; k < dim; ++k) set.data.push_back(values[2 + k]);
        if (labeled) set.labels.push_back(static_cast<int>(values.back()));
    }
    return set;
}

namespace {
constexpr char kMagic[7] = {'L', 'F', 'E', 'M', 'B', '1', '\n'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}
}  // namespace

void write_embeddings_binary(const EmbeddingSet& set, std::ostream& out) {
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(set.dim));
    put_u32(out, static_cast<std::uint32_t>(set.size()));
    const std::uint32_t flags = (set.labeled() ? 1u : 0u) |
                                (set.pixel_x.size() == set.size() ? 2u : 0u);
    put_u32(out, flags);
    const bool has_px = set.pixel_x.size() == set.size();
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (has_px) {
            put_f32(out, static_cast<float>(set.pixel_x[i]));
            put_f32(out, static_cast<float>(set.pixel_y[i]));
        }
        const auto row = set.row(i);
        for (int k = 0; k < set.dim; ++k) put_f32(out, static_cast<float>(row[k]));
        if (set.labeled()) put_u32(out, static_cast<std::uint32_t>(set.labels[i]));
    }
}

EmbeddingSet read_embeddings_binary(std::istream& in) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("bad embedding binary magic", 1);
    }
    EmbeddingSet set;
    set.dim = static_cast<int>(get_u32(in));
    const std::uint32_t count = get_u32(in);
    const std::uint32_t flags = get_u32(in);
    const bool labeled = flags & 1u;
    const bool has_px = flags & 2u;
    set.data.reserve(static_cast<std::size_t>(count) * set.dim);
    for (std::uint32_t i = 0; i < count; ++i) {
        if (has_px) {
            set.pixel_x.push_back(get_f32(in));
            set.pixel_y.push_back(get_f32(in));
        }
        for (int k = 0; k < set.dim; ++k) set.data.push_back(get_f32(in));
        if (labeled) set.labels.push_back(static_cast<int>(get_u32(in)));
        if (!in) throw ParseError("truncated embedding binary", i + 1);
    }
    return set;
}

EmbeddingSet read_embeddings_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    const std::streamsize got = in.gcount();
    in.clear();
    in.seekg(0);
    if (got == sizeof(kMagic) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0) {
        return read_embeddings_binary(in);
    }
    return read_embeddings_text(in);
}

void write_embeddings_file(const EmbeddingSet& set, const std::string& path, bool binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    if (binary) {
        write_embeddings_binary(set, out);
    } else {
        write_embeddings_text(set, out);
    }
}

}  // namespace lanefit
