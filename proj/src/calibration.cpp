#include "lanefit/calibration.hpp"

#include <cmath>

namespace lanefit {

std::vector<GroundTruthLane> lanes_from_annotation(const SceneAnnotation& annotation,
                                                   int image_height) {
    std::vector<GroundTruthLane> lanes;
    for (const auto& xs : annotation.lanes) {
        GroundTruthLane lane;
        for (std::size_t r = 0; r < xs.size(); ++r) {
            if (xs[r] == SceneAnnotation::kAbsent) continue;
            lane.points.push_back({xs[r], row_to_pipeline_y(annotation.h_samples[r], image_height)});
        }
        if (!lane.points.empty()) lanes.push_back(std::move(lane));
    }
    return lanes;
}

Homography ground_plane_homography(const CameraModel& cam) {
    const double ct = std::cos(cam.pitch_rad);
    const double st = std::sin(cam.pitch_rad);
    const double bottom = static_cast<double>(cam.height - 1);
    // With y measured up from the bottom row, the image-to-ground map
    // (u, y) -> (lateral x, longitudinal z) stays inside the constrained
    // family; k is its value of the denominator at the bottom row.
    const double k = (bottom - cam.cy) * ct + cam.focal * st;
    if (std::abs(k) <= 1e-9) {
        throw DegenerateCamera("bottom image row lies on the horizon");
    }
    Homography h;
    h.a = cam.height_m / k;
    h.b = 0.0;
    h.c = -cam.height_m * cam.cx / k;
    h.d = cam.height_m * st / k;
    h.e = cam.height_m * (cam.focal * ct - (bottom - cam.cy) * st) / k;
    h.f = -ct / k;
    return h;
}

Homography fixed_homography_from_calibration(const Scene& flat_scene, int degree) {
    const Homography geometric = ground_plane_homography(flat_scene.camera);
    const auto lanes = lanes_from_annotation(flat_scene.annotation, flat_scene.camera.height);
    if (lanes.empty()) return geometric;

    HOptimConfig cfg;
    cfg.degree = degree;
    cfg.init = HInit::fixed;
    cfg.init_h = geometric;
    cfg.max_iters = 200;
    cfg.coord_scale = 1.0 / flat_scene.camera.width;
    return optimize_homography(lanes, cfg).h;
}

}  // namespace lanefit
