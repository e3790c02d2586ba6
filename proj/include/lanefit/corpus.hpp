#pragma once

#include <cstdint>
#include <vector>

#include "lanefit/scenegen.hpp"

namespace lanefit {

// Mixed-slope synthetic corpus: alternating flat and uphill scenes with
// seeded per-scene lane layout and curvature.
struct CorpusParams {
    CameraModel camera;
    int scenes = 100;
    double slope_max_rad = 0.05;  // uphill scenes draw from [0.5, 1.0] * this
    double row_min = 100.0;
    double row_max = 250.0;
    double row_step = 5.0;
    std::uint64_t seed = 1;
};

std::vector<Scene> generate_mixed_corpus(const CorpusParams& params);

}  // namespace lanefit
