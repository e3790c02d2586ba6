#pragma once

#include <array>
#include <string>
#include <vector>

#include "lanefit/calibration.hpp"
#include "lanefit/hoptim.hpp"
#include "lanefit/scenegen.hpp"

namespace lanefit {

enum class TransformMode { none, fixed, conditional };

std::string to_string(TransformMode mode);

struct FitBenchCell {
    TransformMode mode = TransformMode::none;
    int degree = 2;
    double mse_px2 = 0.0;
    double miss_per_lane = 0.0;
    std::size_t fitted_points = 0;
    std::size_t misses = 0;
    std::size_t lanes = 0;
};

struct FitBenchReport {
    std::vector<FitBenchCell> cells;  // modes x degrees

    const FitBenchCell& cell(TransformMode mode, int degree) const;
};

struct BenchConfig {
    std::vector<TransformMode> modes{TransformMode::none, TransformMode::fixed,
                                     TransformMode::conditional};
    std::vector<int> degrees{2, 3};
    HOptimConfig optimizer;  // used by the conditional mode
    int threads = 1;
};

// Table-style fit-error measurement: per mode and degree, fit every gt lane,
// evaluate at the gt rows, and accumulate squared pixel error over non-miss
// points; untransformable points count as misses per lane instead.
// The fixed transform is calibrated on a zero-slope straight-lane scene
// generated from the first scene's camera.
FitBenchReport fit_error_benchmark(const std::vector<Scene>& scenes, const BenchConfig& cfg = {});

void write_bench_csv(const FitBenchReport& report, const std::string& path);

}  // namespace lanefit
