#include "lanefit/benchmark.hpp"

#include <atomic>
#include <fstream>
#include <iomanip>
#include <thread>

#include "lanefit/curvefit.hpp"

namespace lanefit {

std::string to_string(TransformMode mode) {
    switch (mode) {
        case TransformMode::none: return "none";
        case TransformMode::fixed: return "fixed";
        case TransformMode::conditional: return "conditional";
    }
    return "?";
}

const FitBenchCell& FitBenchReport::cell(TransformMode mode, int degree) const {
    for (const FitBenchCell& c : cells) {
        if (c.mode == mode && c.degree == degree) return c;
    }
    throw Error("no such benchmark cell");
}

namespace {

struct Partial {
    double sse = 0.0;
    std::size_t points = 0;
    std::size_t misses = 0;
    std::size_t lanes = 0;
};

void accumulate_scene(const Scene& scene, const Homography& fixed_h, const BenchConfig& cfg,
                      std::vector<Partial>& partials) {
    const int height = scene.camera.height;
    const auto lanes = lanes_from_annotation(scene.annotation, height);

    std::size_t cell = 0;
    for (TransformMode mode : cfg.modes) {
        for (int degree : cfg.degrees) {
            Homography h;
            switch (mode) {
                case TransformMode::none:
                    h = Homography::identity();
                    break;
                case TransformMode::fixed:
                    h = fixed_h;
                    break;
                case TransformMode::conditional: {
                    HOptimConfig opt = cfg.optimizer;
                    opt.degree = degree;
                    // Start from the calibrated transform when the scene
                    // allows it; scenes with points behind its horizon fall
                    // back to the always-feasible identity.
                    opt.init = HInit::fixed;
                    opt.init_h = fixed_h;
                    try {
                        h = optimize_homography(lanes, opt).h;
                    } catch (const InfeasibleStart&) {
                        opt.init = HInit::identity;
                        h = optimize_homography(lanes, opt).h;
                    }
                    break;
                }
            }
            Partial& part = partials[cell++];
            for (const GroundTruthLane& lane : lanes) {
                std::vector<double> rows;
                rows.reserve(lane.points.size());
                for (const ImagePoint& p : lane.points) rows.push_back(p.y);
                const LanePrediction pred = fit_lane(h, lane.points, degree, rows);
                ++part.lanes;
                for (std::size_t i = 0; i < pred.samples.size(); ++i) {
                    if (pred.samples[i].miss) {
                        ++part.misses;
                        continue;
                    }
                    const double err = pred.samples[i].x - lane.points[i].x;
                    part.sse += err * err;
                    ++part.points;
                }
            }
        }
    }
}

}  // namespace

FitBenchReport fit_error_benchmark(const std::vector<Scene>& scenes, const BenchConfig& cfg) {
    FitBenchReport report;
    if (scenes.empty()) return report;

    // Fixed transform: calibrate once on a flat straight-lane scene with the
    // corpus camera.
    RoadModel calib_road = scenes[0].road;
    calib_road.slope_rad = 0.0;
    for (auto& poly : calib_road.curvature) poly.assign(poly.size(), 0.0);
    const Scene calib = generate_scene(scenes[0].camera, calib_road,
                                       scenes[0].annotation.h_samples);
    const Homography fixed_h = fixed_homography_from_calibration(calib, cfg.degrees.back());

    const std::size_t cell_count = cfg.modes.size() * cfg.degrees.size();
    std::vector<std::vector<Partial>> per_scene(scenes.size(),
                                                std::vector<Partial>(cell_count));

    const int threads = std::max(1, cfg.threads);
    if (threads == 1) {
        for (std::size_t s = 0; s < scenes.size(); ++s) {
            accumulate_scene(scenes[s], fixed_h, cfg, per_scene[s]);
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t s = next.fetch_add(1); s < scenes.size();
                     s = next.fetch_add(1)) {
                    accumulate_scene(scenes[s], fixed_h, cfg, per_scene[s]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::size_t cell = 0;
    for (TransformMode mode : cfg.modes) {
        for (int degree : cfg.degrees) {
            FitBenchCell out;
            out.mode = mode;
            out.degree = degree;
            for (const auto& parts : per_scene) {
                const Partial& p = parts[cell];
                out.mse_px2 += p.sse;  // accumulate SSE first
                out.fitted_points += p.points;
                out.misses += p.misses;
                out.lanes += p.lanes;
            }
            out.mse_px2 = out.fitted_points ? out.mse_px2 / out.fitted_points : 0.0;
            out.miss_per_lane =
                out.lanes ? static_cast<double>(out.misses) / out.lanes : 0.0;
            report.cells.push_back(out);
            ++cell;
        }
    }
    return report;
}

void write_bench_csv(const FitBenchReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "mode,degree,mse_px2,miss_per_lane\n" << std::setprecision(17);
    for (const FitBenchCell& c : report.cells) {
        out << to_string(c.mode) << ',' << c.degree << ',' << c.mse_px2 << ','
            << c.miss_per_lane << "\n";
    }
}

}  // namespace lanefit
