#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lanefit/benchmark.hpp"
#include "lanefit/calibration.hpp"
#include "lanefit/cluster.hpp"
#include "lanefit/corpus.hpp"
#include "lanefit/curvefit.hpp"
#include "lanefit/embed.hpp"
#include "lanefit/geometry.hpp"
#include "lanefit/hoptim.hpp"
#include "lanefit/metrics.hpp"
#include "lanefit/scenegen.hpp"

namespace py = pybind11;
using namespace lanefit;

namespace {

EmbeddingSet make_embedding_set(int dim, std::vector<double> data, std::vector<int> labels,
                                std::vector<double> pixel_x, std::vector<double> pixel_y) {
    EmbeddingSet set;
    set.dim = dim;
    set.data = std::move(data);
    set.labels = std::move(labels);
    set.pixel_x = std::move(pixel_x);
    set.pixel_y = std::move(pixel_y);
    return set;
}

}  // namespace

PYBIND11_MODULE(lanefit_ext, m) {
    m.doc() = "lane embedding clustering and constrained-homography curve fitting";

    py::register_exception<HorizonSingularity>(m, "HorizonSingularity");
    py::register_exception<SingularMatrix>(m, "SingularMatrix");
    py::register_exception<RankDeficient>(m, "RankDeficient");
    py::register_exception<InfeasibleStart>(m, "InfeasibleStart");
    py::register_exception<DegenerateCamera>(m, "DegenerateCamera");

    py::class_<Homography>(m, "Homography")
        .def(py::init<>())
        .def(py::init([](double a, double b, double c, double d, double e, double f) {
                 return Homography{a, b, c, d, e, f};
             }),
             py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("e"), py::arg("f"))
        .def_readwrite("a", &Homography::a)
        .def_readwrite("b", &Homography::b)
        .def_readwrite("c", &Homography::c)
        .def_readwrite("d", &Homography::d)
        .def_readwrite("e", &Homography::e)
        .def_readwrite("f", &Homography::f)
        .def("det", &Homography::det)
        .def("invertible", &Homography::invertible)
        .def("__repr__", [](const Homography& h) {
            return "Homography(a=" + std::to_string(h.a) + ", b=" + std::to_string(h.b) +
                   ", c=" + std::to_string(h.c) + ", d=" + std::to_string(h.d) +
                   ", e=" + std::to_string(h.e) + ", f=" + std::to_string(h.f) + ")";
        });

    m.def("invert", &invert, py::arg("h"));
    m.def(
        "transform_point",
        [](const Homography& h, double x, double y) {
            const auto p = transform_point(h, {x, y});
            return std::make_pair(p.x, p.y);
        },
        py::arg("h"), py::arg("x"), py::arg("y"));
    m.def(
        "transform_points",
        [](const Homography& h, const std::vector<std::pair<double, double>>& pts) {
            std::vector<ImagePoint> in;
            in.reserve(pts.size());
            for (const auto& [x, y] : pts) in.push_back({x, y});
            const auto result = transform_points(h, in);
            std::vector<std::pair<double, double>> out;
            out.reserve(result.points.size());
            for (const auto& p : result.points) out.emplace_back(p.x, p.y);
            std::vector<bool> miss(result.miss.begin(), result.miss.end());
            return std::make_tuple(out, miss, result.miss_count);
        },
        py::arg("h"), py::arg("points"),
        "Returns (surviving transformed points, per-input miss flags, miss count).");

    py::class_<Polynomial>(m, "Polynomial")
        .def(py::init([](std::vector<double> coeffs) { return Polynomial{std::move(coeffs)}; }),
             py::arg("coeffs"))
        .def_readwrite("coeffs", &Polynomial::coeffs)
        .def("degree", &Polynomial::degree)
        .def("__call__", &Polynomial::operator());

    m.def(
        "fit_polynomial",
        [](const std::vector<std::pair<double, double>>& pts, int degree) {
            std::vector<TransformedPoint> in;
            in.reserve(pts.size());
            for (const auto& [x, y] : pts) in.push_back({x, y});
            return fit_polynomial(in, degree);
        },
        py::arg("points"), py::arg("degree"), "Least-squares fit x = f(y) on (x, y) pairs.");

    m.def(
        "fit_lane",
        [](const Homography& h, const std::vector<std::pair<double, double>>& pts, int degree,
           const std::vector<double>& rows) {
            std::vector<ImagePoint> in;
            in.reserve(pts.size());
            for (const auto& [x, y] : pts) in.push_back({x, y});
            const auto pred = fit_lane(h, in, degree, rows);
            std::vector<std::tuple<double, double, bool>> samples;
            samples.reserve(pred.samples.size());
            for (const auto& s : pred.samples) samples.emplace_back(s.row, s.x, s.miss);
            return std::make_pair(samples, pred.poly);
        },
        py::arg("h"), py::arg("points"), py::arg("degree"), py::arg("rows"),
        "Transform, fit and reproject one lane; returns ([(row, x, miss)], polynomial).");

    py::class_<ClusterMargins>(m, "ClusterMargins")
        .def(py::init([](double dv, double dd) { return ClusterMargins{dv, dd}; }),
             py::arg("delta_v") = 0.5, py::arg("delta_d") = 3.0)
        .def_readwrite("delta_v", &ClusterMargins::delta_v)
        .def_readwrite("delta_d", &ClusterMargins::delta_d)
        .def("guarantee_regime", &ClusterMargins::guarantee_regime);

    py::class_<EmbeddingSet>(m, "EmbeddingSet")
        .def(py::init(&make_embedding_set), py::arg("dim"), py::arg("data"),
             py::arg("labels") = std::vector<int>{},
             py::arg("pixel_x") = std::vector<double>{},
             py::arg("pixel_y") = std::vector<double>{})
        .def_readwrite("dim", &EmbeddingSet::dim)
        .def_readwrite("data", &EmbeddingSet::data)
        .def_readwrite("labels", &EmbeddingSet::labels)
        .def_readwrite("pixel_x", &EmbeddingSet::pixel_x)
        .def_readwrite("pixel_y", &EmbeddingSet::pixel_y)
        .def("__len__", &EmbeddingSet::size);

    m.def(
        "discriminative_loss",
        [](const EmbeddingSet& set, const ClusterMargins& margins) {
            const auto terms = discriminative_loss(set, margins);
            return std::make_tuple(terms.total, terms.var, terms.dist);
        },
        py::arg("set"), py::arg("margins"), "Returns (total, variance term, distance term).");
    m.def("discriminative_loss_grad", &discriminative_loss_grad, py::arg("set"),
          py::arg("margins"));
    m.def(
        "train_free_embeddings",
        [](const std::vector<int>& labels, int dim, const ClusterMargins& margins, int steps,
           double step_size, std::uint64_t seed) {
            auto result = train_free_embeddings(labels, dim, margins, steps, step_size, seed);
            return std::make_pair(std::move(result.set), std::move(result.trace));
        },
        py::arg("labels"), py::arg("dim"), py::arg("margins"), py::arg("steps") = 5000,
        py::arg("step_size") = 1.0, py::arg("seed") = 0);

    m.def(
        "cluster_instances",
        [](const EmbeddingSet& set, const ClusterMargins& margins) {
            const auto result = cluster_instances(set, margins);
            return std::make_tuple(result.labels, result.k, result.centers);
        },
        py::arg("set"), py::arg("margins"), "Returns (labels, k, mode centers).");
    m.def("mean_shift", &mean_shift, py::arg("points"), py::arg("seed_index"),
          py::arg("bandwidth"), py::arg("max_iters") = 30, py::arg("tol") = 1e-5);

    m.def(
        "reprojection_loss",
        [](const Homography& h, const std::vector<std::vector<std::pair<double, double>>>& lanes,
           int degree) {
            std::vector<GroundTruthLane> in(lanes.size());
            for (std::size_t i = 0; i < lanes.size(); ++i) {
                for (const auto& [x, y] : lanes[i]) in[i].points.push_back({x, y});
            }
            return reprojection_loss(h, in, degree);
        },
        py::arg("h"), py::arg("lanes"), py::arg("degree") = 3);
    m.def(
        "optimize_homography",
        [](const std::vector<std::vector<std::pair<double, double>>>& lanes, int degree,
           int max_iters) {
            std::vector<GroundTruthLane> in(lanes.size());
            for (std::size_t i = 0; i < lanes.size(); ++i) {
                for (const auto& [x, y] : lanes[i]) in[i].points.push_back({x, y});
            }
            HOptimConfig cfg;
            cfg.degree = degree;
            cfg.max_iters = max_iters;
            const auto result = optimize_homography(in, cfg);
            return std::make_tuple(result.h, result.final_loss, result.iterations);
        },
        py::arg("lanes"), py::arg("degree") = 3, py::arg("max_iters") = 2000,
        "Returns (optimized transform, final loss, iterations).");
}
