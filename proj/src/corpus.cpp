#include "lanefit/corpus.hpp"

#include <random>

namespace lanefit {

std::vector<Scene> generate_mixed_corpus(const CorpusParams& params) {
    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    std::vector<double> rows;
    for (double r = params.row_min; r <= params.row_max + 1e-9; r += params.row_step) {
        rows.push_back(r);
    }

    std::vector<Scene> scenes;
    scenes.reserve(params.scenes);
    for (int i = 0; i < params.scenes; ++i) {
        const int lanes = 3 + static_cast<int>(u(rng) * 3.0);  // 3..5
        const double spacing = 3.2 + 0.6 * u(rng);
        const double c1 = 0.10 * (u(rng) - 0.5);     // heading drift, m per m
        const double c2 = 3e-3 * (u(rng) - 0.5);     // curvature, m per m^2
        const double hinge = 20.0 + 20.0 * u(rng);
        const double slope_draw = params.slope_max_rad * (0.5 + 0.5 * u(rng));
        const double slope = (i % 2 == 0) ? 0.0 : slope_draw;

        RoadModel road = RoadModel::parallel(lanes, spacing, {c1, c2}, hinge, slope, 150.0);
        Scene scene = generate_scene(params.camera, road, rows);
        scene.annotation.raw_file = "synthetic/scene_" + std::to_string(i) + ".jpg";
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

}  // namespace lanefit
