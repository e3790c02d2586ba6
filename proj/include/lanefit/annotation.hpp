#pragma once

#include <string>
#include <vector>

#include "lanefit/errors.hpp"

namespace lanefit {

// Discretized lane record: x positions at fixed image rows, one object per
// image, line-delimited on disk.  -2 marks "no lane at this row".
struct SceneAnnotation {
    static constexpr double kAbsent = -2.0;

    std::string raw_file;
    std::vector<double> h_samples;             // strictly increasing rows
    std::vector<std::vector<double>> lanes;    // aligned to h_samples

    std::size_t present_points(std::size_t lane) const {
        std::size_t n = 0;
        for (double x : lanes[lane]) {
            if (x != kAbsent) ++n;
        }
        return n;
    }
};

std::vector<SceneAnnotation> read_annotations(const std::string& path);
void write_annotations(const std::vector<SceneAnnotation>& records, const std::string& path);

}  // namespace lanefit
