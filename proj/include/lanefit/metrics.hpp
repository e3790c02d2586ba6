#pragma once

#include <string>
#include <vector>

#include "lanefit/annotation.hpp"

namespace lanefit {

struct PointAccuracy {
    std::size_t correct = 0;  // C: present predictions within the threshold
    std::size_t total = 0;    // S: present ground-truth points
};

struct ImageMetrics {
    std::string raw_file;
    std::size_t correct_points = 0;
    std::size_t gt_points = 0;
    std::size_t false_lanes = 0;
    std::size_t missed_lanes = 0;
    std::size_t pred_lanes = 0;
    std::size_t gt_lanes = 0;
};

struct MetricsReport {
    double acc = 0.0;  // mean over images of C_im / S_im
    double fp = 0.0;   // wrongly predicted lanes / predicted lanes
    double fn = 0.0;   // missed gt lanes / gt lanes
    double point_threshold_px = 20.0;
    double lane_match_fraction = 0.85;
    std::vector<ImageMetrics> per_image;
    std::vector<std::string> warnings;
};

struct MetricsConfig {
    double point_threshold_px = 20.0;
    double lane_match_fraction = 0.85;
    // When false, a gt image without a prediction record counts all its
    // lanes as missed instead of raising MissingImage.
    bool strict_missing_images = false;
};

// C/S count for one aligned lane pair.  Throws MisalignedRows.
PointAccuracy point_accuracy(const std::vector<double>& pred_lane,
                             const std::vector<double>& gt_lane, double threshold_px);

// Per-image optimal one-to-one lane matching on the C/S matrix, then the
// acc / FP / FN aggregates.
MetricsReport lane_metrics(const std::vector<SceneAnnotation>& pred_set,
                           const std::vector<SceneAnnotation>& gt_set,
                           const MetricsConfig& cfg = {});

}  // namespace lanefit
