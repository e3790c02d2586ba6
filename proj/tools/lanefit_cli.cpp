#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "lanefit/annotation.hpp"
#include "lanefit/benchmark.hpp"
#include "lanefit/calibration.hpp"
#include "lanefit/cluster.hpp"
#include "lanefit/corpus.hpp"
#include "lanefit/curvefit.hpp"
#include "lanefit/embed.hpp"
#include "lanefit/errors.hpp"
#include "lanefit/hoptim.hpp"
#include "lanefit/metrics.hpp"
#include "lanefit/scenegen.hpp"

using nlohmann::json;

namespace {

// Median wall time of one call, hot: 10 warm-up runs, then >= 100 timed runs.
template <typename F>
double median_hot_ms(F&& fn, int iters = 100) {
    for (int i = 0; i < 10; ++i) fn();
    std::vector<double> ms;
    ms.reserve(static_cast<std::size_t>(iters));
    for (int i = 0; i < iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    std::sort(ms.begin(), ms.end());
    return ms[ms.size() / 2];
}

std::vector<double> parse_rows(const std::string& spec) {
    // "min:max:step"
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo) {
        throw CLI::ValidationError("--rows", "expected min:max:step with step > 0");
    }
    std::vector<double> rows;
    for (double r = lo; r <= hi + 1e-9; r += step) rows.push_back(r);
    return rows;
}

lanefit::TransformMode parse_mode(const std::string& s) {
    if (s == "none") return lanefit::TransformMode::none;
    if (s == "fixed") return lanefit::TransformMode::fixed;
    if (s == "conditional") return lanefit::TransformMode::conditional;
    throw CLI::ValidationError("--mode", "expected none, fixed or conditional");
}

json homography_json(const lanefit::Homography& h) {
    return json{{"a", h.a}, {"b", h.b}, {"c", h.c}, {"d", h.d}, {"e", h.e}, {"f", h.f}};
}

lanefit::Homography homography_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lanefit::Error("cannot open transform file: " + path);
    json j = json::parse(in);
    lanefit::Homography h;
    h.a = j.at("a").get<double>();
    h.b = j.at("b").get<double>();
    h.c = j.at("c").get<double>();
    h.d = j.at("d").get<double>();
    h.e = j.at("e").get<double>();
    h.f = j.at("f").get<double>();
    return h;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lanefit::Error("cannot open output file: " + path);
    out << text;
}

void emit_report(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (!out_path.empty()) {
        write_text(out_path, text);
    }
    std::cout << text;
}

// Pixels of one labeled embedding file grouped into per-lane point lists,
// in pipeline coordinates (y up from the bottom row).
std::vector<lanefit::GroundTruthLane> lanes_from_pixels(const lanefit::EmbeddingSet& set,
                                                        int image_height) {
    if (!set.labeled()) throw lanefit::MissingLabels("fit input has no labels");
    if (set.pixel_x.size() != set.size()) {
        throw lanefit::Error("fit input has no pixel coordinates");
    }
    std::map<int, lanefit::GroundTruthLane> by_label;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.labels[i] <= 0) continue;  // noise
        by_label[set.labels[i]].points.push_back(
            {set.pixel_x[i], lanefit::row_to_pipeline_y(set.pixel_y[i], image_height)});
    }
    std::vector<lanefit::GroundTruthLane> lanes;
    lanes.reserve(by_label.size());
    for (auto& [label, lane] : by_label) lanes.push_back(std::move(lane));
    return lanes;
}

struct CommonOpts {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string out;
    int degree = 3;
    std::string mode = "none";
    double delta_v = 0.5;
    double delta_d = 3.0;
    int dim = 4;
    double threshold_px = 20.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "output path");
    cmd->add_option("--degree", o.degree, "polynomial degree")->check(CLI::Range(2, 3));
    cmd->add_option("--mode", o.mode, "transform mode")
        ->check(CLI::IsMember({"none", "fixed", "conditional"}));
    cmd->add_option("--delta-v", o.delta_v, "intra-cluster margin")->check(CLI::PositiveNumber);
    cmd->add_option("--delta-d", o.delta_d, "inter-cluster margin")->check(CLI::PositiveNumber);
    cmd->add_option("--dim", o.dim, "embedding dimension")->check(CLI::PositiveNumber);
    cmd->add_option("--threshold-px", o.threshold_px, "point match threshold, px");
    cmd->set_config("--config")->configurable(false);
}

json common_json(const CommonOpts& o) {
    return json{{"seed", o.seed},          {"threads", o.threads},
                {"degree", o.degree},      {"mode", o.mode},
                {"delta_v", o.delta_v},    {"delta_d", o.delta_d},
                {"dim", o.dim},            {"threshold_px", o.threshold_px}};
}

// ---------------------------------------------------------------------------

int cmd_synth(const CommonOpts& o, int scenes, double slope, const std::string& rows_spec,
              const std::string& embeddings_dir, double separation, double radius) {
    lanefit::CorpusParams params;
    params.scenes = scenes;
    params.slope_max_rad = slope;
    params.seed = o.seed;
    const std::vector<double> rows = parse_rows(rows_spec);
    params.row_min = rows.front();
    params.row_max = rows.back();
    params.row_step = rows.size() > 1 ? rows[1] - rows[0] : 1.0;

    const std::vector<lanefit::Scene> corpus = lanefit::generate_mixed_corpus(params);
    std::vector<lanefit::SceneAnnotation> annotations;
    annotations.reserve(corpus.size());
    for (const auto& scene : corpus) annotations.push_back(scene.annotation);
    if (o.out.empty()) throw CLI::ValidationError("--out", "synth requires an output path");
    lanefit::write_annotations(annotations, o.out);

    if (!embeddings_dir.empty()) {
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto set = lanefit::synth_embeddings(corpus[i], o.dim, separation, radius,
                                                       o.seed + 1000 + i);
            lanefit::write_embeddings_file(
                set, embeddings_dir + "/scene_" + std::to_string(i) + ".emb");
        }
    }

    json report = {{"command", "synth"},
                   {"config", common_json(o)},
                   {"scenes", scenes},
                   {"slope_max_rad", slope},
                   {"rows", rows_spec},
                   {"annotations", o.out}};
    if (!embeddings_dir.empty()) report["embeddings_dir"] = embeddings_dir;
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_cluster(const CommonOpts& o, const std::string& in_path, bool time_it) {
    const lanefit::EmbeddingSet set = lanefit::read_embeddings_file(in_path);
    const lanefit::ClusterMargins margins{o.delta_v, o.delta_d};

    lanefit::ClusterResult result;
    json report = {{"command", "cluster"}, {"config", common_json(o)}, {"input", in_path}};
    if (set.size() == 0) {
        report["k"] = 0;
        report["warning"] = "empty input";
        emit_report(report, "");
        if (!o.out.empty()) {
            std::ofstream out(o.out, std::ios::binary);
            lanefit::write_embeddings_text(set, out);
        }
        return 0;
    }
    result = lanefit::cluster_instances(set, margins);
    if (time_it) {
        report["median_hot_ms"] =
            median_hot_ms([&] { lanefit::cluster_instances(set, margins); });
    }

    std::map<int, std::size_t> sizes;
    for (int label : result.labels) ++sizes[label];
    json size_list = json::array();
    for (const auto& [label, count] : sizes) {
        size_list.push_back({{"label", label}, {"count", count}});
    }
    report["k"] = result.k;
    report["pixels"] = set.size();
    report["sizes"] = size_list;

    if (!o.out.empty()) {
        lanefit::EmbeddingSet labeled = set;
        labeled.labels = result.labels;
        lanefit::write_embeddings_file(labeled, o.out);
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_fit(const CommonOpts& o, const std::string& in_path, const std::string& rows_spec,
            const std::string& h_path, int image_height, bool time_it) {
    const lanefit::EmbeddingSet set = lanefit::read_embeddings_file(in_path);
    const std::vector<double> rows = parse_rows(rows_spec);
    const auto lanes = lanes_from_pixels(set, image_height);
    const lanefit::TransformMode mode = parse_mode(o.mode);

    lanefit::Homography h;  // identity for mode none
    if (mode == lanefit::TransformMode::fixed) {
        if (h_path.empty()) throw CLI::ValidationError("--transform", "fixed mode needs a file");
        h = homography_from_file(h_path);
    } else if (mode == lanefit::TransformMode::conditional) {
        lanefit::HOptimConfig opt;
        opt.degree = o.degree;
        opt.seed = o.seed;
        if (!h_path.empty()) {
            opt.init = lanefit::HInit::fixed;
            opt.init_h = homography_from_file(h_path);
        }
        try {
            h = lanefit::optimize_homography(lanes, opt).h;
        } catch (const lanefit::InfeasibleStart&) {
            opt.init = lanefit::HInit::identity;
            h = lanefit::optimize_homography(lanes, opt).h;
        }
    }

    auto fit_all = [&] {
        std::vector<lanefit::LanePrediction> preds;
        preds.reserve(lanes.size());
        std::vector<double> ys(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ys[i] = lanefit::row_to_pipeline_y(rows[i], image_height);
        }
        for (const auto& lane : lanes) {
            preds.push_back(lanefit::fit_lane(h, lane.points, o.degree, ys));
        }
        return preds;
    };
    const auto predictions = fit_all();

    lanefit::SceneAnnotation record;
    record.raw_file = in_path;
    record.h_samples = rows;
    std::size_t misses = 0;
    for (const auto& pred : predictions) {
        std::vector<double> xs(rows.size(), lanefit::SceneAnnotation::kAbsent);
        for (std::size_t i = 0; i < pred.samples.size(); ++i) {
            if (pred.samples[i].miss) {
                ++misses;
            } else {
                xs[i] = pred.samples[i].x;
            }
        }
        record.lanes.push_back(std::move(xs));
    }
    if (o.out.empty()) throw CLI::ValidationError("--out", "fit requires an output path");
    lanefit::write_annotations({record}, o.out);

    json report = {{"command", "fit"},       {"config", common_json(o)},
                   {"input", in_path},       {"lanes", lanes.size()},
                   {"misses", misses},       {"transform", homography_json(h)},
                   {"predictions", o.out}};
    if (time_it) report["median_hot_ms"] = median_hot_ms(fit_all);
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_optimize_h(const CommonOpts& o, const std::string& in_path, int image_height,
                   const std::string& h_path, double step, int iters, const std::string& grad) {
    const auto records = lanefit::read_annotations(in_path);
    lanefit::HOptimConfig opt;
    opt.degree = o.degree;
    opt.step = step;
    opt.max_iters = iters;
    opt.seed = o.seed;
    opt.grad_mode = grad == "fd" ? lanefit::GradientMode::central_difference
                                 : lanefit::GradientMode::analytic;
    if (!h_path.empty()) {
        opt.init = lanefit::HInit::fixed;
        opt.init_h = homography_from_file(h_path);
    }

    json per_image = json::array();
    for (const auto& record : records) {
        const auto lanes = lanefit::lanes_from_annotation(record, image_height);
        const auto result = lanefit::optimize_homography(lanes, opt);
        per_image.push_back({{"raw_file", record.raw_file},
                             {"transform", homography_json(result.h)},
                             {"final_loss", result.final_loss},
                             {"iterations", result.iterations}});
    }
    json report = {{"command", "optimize-h"},
                   {"config", common_json(o)},
                   {"input", in_path},
                   {"step", step},
                   {"max_iters", iters},
                   {"gradient", grad},
                   {"images", per_image}};
    emit_report(report, o.out);
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& pred_path, const std::string& gt_path) {
    const auto pred = lanefit::read_annotations(pred_path);
    const auto gt = lanefit::read_annotations(gt_path);
    lanefit::MetricsConfig cfg;
    cfg.point_threshold_px = o.threshold_px;
    const auto metrics = lanefit::lane_metrics(pred, gt, cfg);

    json report = {{"command", "eval"},
                   {"config", common_json(o)},
                   {"pred", pred_path},
                   {"gt", gt_path},
                   {"acc", metrics.acc},
                   {"fp", metrics.fp},
                   {"fn", metrics.fn},
                   {"images", gt.size()},
                   {"warnings", metrics.warnings}};
    emit_report(report, o.out);
    return 0;
}

int cmd_bench_table3(const CommonOpts& o, int scenes, double slope) {
    lanefit::CorpusParams params;
    params.scenes = scenes;
    params.slope_max_rad = slope;
    params.seed = o.seed;
    const auto corpus = lanefit::generate_mixed_corpus(params);

    lanefit::BenchConfig cfg;
    cfg.threads = o.threads;
    const auto report = lanefit::fit_error_benchmark(corpus, cfg);
    if (!o.out.empty()) lanefit::write_bench_csv(report, o.out);

    json cells = json::array();
    for (const auto& cell : report.cells) {
        cells.push_back({{"mode", lanefit::to_string(cell.mode)},
                         {"degree", cell.degree},
                         {"mse_px2", cell.mse_px2},
                         {"miss_per_lane", cell.miss_per_lane}});
    }
    json out = {{"command", "bench-table3"}, {"config", common_json(o)},
                {"scenes", scenes},          {"slope_max_rad", slope},
                {"cells", cells}};
    if (!o.out.empty()) out["csv"] = o.out;
    std::cout << out.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// Gradient checks against central finite differences.

struct GradCheckWorst {
    double rel_err = 0.0;
    int instance = -1;
    int param = -1;
};

double rel_gap(const std::vector<double>& got, const std::vector<double>& want, int& worst_i) {
    double scale = 1e-6;
    for (double w : want) scale = std::max(scale, std::abs(w));
    double worst = 0.0;
    worst_i = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double gap = std::abs(got[i] - want[i]) / scale;
        if (gap > worst) {
            worst = gap;
            worst_i = static_cast<int>(i);
        }
    }
    return worst;
}

GradCheckWorst gradcheck_embedding(int instances, std::uint64_t seed) {
    GradCheckWorst worst;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < instances; ++t) {
        std::uniform_int_distribution<int> c_dist(2, 4);
        const int clusters = c_dist(rng);
        const int per = 12;
        const int dim = 3;
        lanefit::EmbeddingSet set;
        set.dim = dim;
        std::normal_distribution<double> gauss(0.0, 1.5);
        for (int c = 0; c < clusters; ++c) {
            for (int i = 0; i < per; ++i) {
                set.labels.push_back(c + 1);
                for (int k = 0; k < dim; ++k) set.data.push_back(gauss(rng));
            }
        }
        const lanefit::ClusterMargins margins{0.5, 3.0};
        const auto analytic = lanefit::discriminative_loss_grad(set, margins);

        std::vector<double> fd(analytic.size());
        const double h = 1e-6;
        for (std::size_t i = 0; i < set.data.size(); ++i) {
            lanefit::EmbeddingSet probe = set;
            probe.data[i] += h;
            const double up = lanefit::discriminative_loss(probe, margins).total;
            probe.data[i] = set.data[i] - h;
            const double dn = lanefit::discriminative_loss(probe, margins).total;
            fd[i] = (up - dn) / (2.0 * h);
        }
        int idx = 0;
        const double gap = rel_gap(analytic, fd, idx);
        if (gap > worst.rel_err) worst = {gap, t, idx};
    }
    return worst;
}

GradCheckWorst gradcheck_reprojection(int instances, std::uint64_t seed) {
    GradCheckWorst worst;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < instances; ++t) {
        // Random feasible transform near identity and a couple of noisy lanes.
        lanefit::Homography h;
        h.a = 0.8 + 0.4 * unit(rng);
        h.b = 0.2 * (unit(rng) - 0.5);
        h.c = 20.0 * (unit(rng) - 0.5);
        h.d = 0.8 + 0.4 * unit(rng);
        h.e = 20.0 * (unit(rng) - 0.5);
        h.f = 1e-3 * (unit(rng) - 0.5);

        std::vector<lanefit::GroundTruthLane> lanes(2 + (t % 2));
        for (auto& lane : lanes) {
            const double base = 100.0 + 300.0 * unit(rng);
            for (int i = 0; i < 12; ++i) {
                const double y = 5.0 + 10.0 * i;
                lane.points.push_back({base + 0.3 * y + 8.0 * (unit(rng) - 0.5), y});
            }
        }
        const auto analytic_arr =
            lanefit::loss_gradient(h, lanes, 2, lanefit::GradientMode::analytic);
        const auto fd_arr =
            lanefit::loss_gradient(h, lanes, 2, lanefit::GradientMode::central_difference);
        const std::vector<double> analytic(analytic_arr.begin(), analytic_arr.end());
        const std::vector<double> fd(fd_arr.begin(), fd_arr.end());
        int idx = 0;
        const double gap = rel_gap(analytic, fd, idx);
        if (gap > worst.rel_err) worst = {gap, t, idx};
    }
    return worst;
}

int cmd_gradcheck(const CommonOpts& o, int instances, double tol) {
    const auto embed = gradcheck_embedding(instances, o.seed);
    const auto reproj = gradcheck_reprojection(instances, o.seed + 1);
    const bool pass = embed.rel_err < tol && reproj.rel_err < tol;

    json report = {{"command", "gradcheck"},
                   {"config", common_json(o)},
                   {"instances", instances},
                   {"tolerance", tol},
                   {"embedding_loss",
                    {{"worst_rel_err", embed.rel_err},
                     {"worst_instance", embed.instance},
                     {"worst_param", embed.param}}},
                   {"reprojection_loss",
                    {{"worst_rel_err", reproj.rel_err},
                     {"worst_instance", reproj.instance},
                     {"worst_param", reproj.param}}},
                   {"pass", pass}};
    emit_report(report, o.out);
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lane-fitting toolkit: synthetic scenes, embedding clustering, "
                 "constrained-homography curve fitting and evaluation"};
    app.require_subcommand(1);

    // synth
    CommonOpts synth_opts;
    int synth_scenes = 100;
    double synth_slope = 0.05;
    std::string synth_rows = "100:250:5";
    std::string synth_embed_dir;
    double synth_separation = 4.0;
    double synth_radius = 0.3;
    auto* synth = app.add_subcommand("synth", "generate synthetic scenes");
    add_common(synth, synth_opts);
    synth->add_option("--scenes", synth_scenes, "scene count")->check(CLI::PositiveNumber);
    synth->add_option("--slope", synth_slope, "max uphill slope, rad");
    synth->add_option("--rows", synth_rows, "annotation rows min:max:step");
    synth->add_option("--embeddings-dir", synth_embed_dir, "also write per-scene embeddings");
    synth->add_option("--separation", synth_separation, "embedding center separation");
    synth->add_option("--radius", synth_radius, "embedding cluster radius");

    // cluster
    CommonOpts cluster_opts;
    std::string cluster_in;
    bool cluster_time = false;
    auto* cluster = app.add_subcommand("cluster", "cluster an embedding file");
    add_common(cluster, cluster_opts);
    cluster->add_option("--in", cluster_in, "embedding file")->required();
    cluster->add_flag("--time", cluster_time, "report median hot wall time");

    // fit
    CommonOpts fit_opts;
    std::string fit_in, fit_rows = "100:250:5", fit_h;
    int fit_height = 256;
    bool fit_time = false;
    auto* fit = app.add_subcommand("fit", "fit lane curves from labeled pixels");
    add_common(fit, fit_opts);
    fit->add_option("--in", fit_in, "labeled embedding file with pixel coords")->required();
    fit->add_option("--rows", fit_rows, "evaluation rows min:max:step");
    fit->add_option("--transform", fit_h, "transform JSON (fixed mode / conditional init)");
    fit->add_option("--height", fit_height, "image height, px");
    fit->add_flag("--time", fit_time, "report median hot wall time");

    // optimize-h
    CommonOpts opt_opts;
    std::string opt_in, opt_h, opt_grad = "analytic";
    int opt_height = 256, opt_iters = 2000;
    double opt_step = 1e-2;
    auto* opth = app.add_subcommand("optimize-h", "per-image transform optimization");
    add_common(opth, opt_opts);
    opth->add_option("--in", opt_in, "ground-truth annotation file")->required();
    opth->add_option("--transform", opt_h, "initial transform JSON");
    opth->add_option("--height", opt_height, "image height, px");
    opth->add_option("--step", opt_step, "initial step size");
    opth->add_option("--iters", opt_iters, "max iterations");
    opth->add_option("--grad", opt_grad, "gradient mode")
        ->check(CLI::IsMember({"analytic", "fd"}));

    // eval
    CommonOpts eval_opts;
    std::string eval_pred, eval_gt;
    auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
    add_common(eval, eval_opts);
    eval->add_option("--pred", eval_pred, "prediction annotation file")->required();
    eval->add_option("--gt", eval_gt, "ground-truth annotation file")->required();

    // bench-table3
    CommonOpts bench_opts;
    int bench_scenes = 100;
    double bench_slope = 0.05;
    auto* bench = app.add_subcommand("bench-table3", "fit-error grid over a mixed corpus");
    add_common(bench, bench_opts);
    bench->add_option("--scenes", bench_scenes, "scene count")->check(CLI::PositiveNumber);
    bench->add_option("--slope", bench_slope, "max uphill slope, rad");

    // gradcheck
    CommonOpts grad_opts;
    int grad_instances = 100;
    double grad_tol = 1e-4;
    auto* grad = app.add_subcommand("gradcheck", "gradients vs central finite differences");
    add_common(grad, grad_opts);
    grad->add_option("--instances", grad_instances, "instances per loss")
        ->check(CLI::PositiveNumber);
    grad->add_option("--tol", grad_tol, "max relative error");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(synth_opts, synth_scenes, synth_slope, synth_rows, synth_embed_dir,
                             synth_separation, synth_radius);
        }
        if (cluster->parsed()) return cmd_cluster(cluster_opts, cluster_in, cluster_time);
        if (fit->parsed()) {
            return cmd_fit(fit_opts, fit_in, fit_rows, fit_h, fit_height, fit_time);
        }
        if (opth->parsed()) {
            return cmd_optimize_h(opt_opts, opt_in, opt_height, opt_h, opt_step, opt_iters,
                                  opt_grad);
        }
        if (eval->parsed()) return cmd_eval(eval_opts, eval_pred, eval_gt);
        if (bench->parsed()) return cmd_bench_table3(bench_opts, bench_scenes, bench_slope);
        if (grad->parsed()) return cmd_gradcheck(grad_opts, grad_instances, grad_tol);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
