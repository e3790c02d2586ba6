#pragma once

#include <vector>

#include "lanefit/geometry.hpp"
#include "lanefit/hoptim.hpp"
#include "lanefit/scenegen.hpp"

namespace lanefit {

// Pipeline coordinate convention: lane geometry is fed to the homography
// with y measured upward from the image bottom, so near road is y ~ 0 and
// the projected horizon sits at large positive y.  Annotations keep the
// dataset row convention (y down).
inline double row_to_pipeline_y(double row, int image_height) {
    return static_cast<double>(image_height - 1) - row;
}

inline double pipeline_y_to_row(double y, int image_height) {
    return static_cast<double>(image_height - 1) - y;
}

// Present points of every annotated lane, converted to pipeline coordinates.
std::vector<GroundTruthLane> lanes_from_annotation(const SceneAnnotation& annotation,
                                                   int image_height);

// Transform mapping the flat-ground lane trapezoid to parallel vertical
// lines: the exact ground-plane rectification for the scene's camera, then
// polished by reprojection-loss descent on the scene itself.
Homography fixed_homography_from_calibration(const Scene& flat_scene, int degree = 3);

// Rectification from the camera model alone (no polish step).
Homography ground_plane_homography(const CameraModel& camera);

}  // namespace lanefit
