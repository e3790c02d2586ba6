#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lanefit/annotation.hpp"
#include "lanefit/embed.hpp"
#include "lanefit/errors.hpp"

namespace lanefit {

// Pinhole camera looking down the road.  Image origin top-left, rows grow
// downward (dataset convention).
struct CameraModel {
    double focal = 500.0;       // px
    double cx = 256.0;          // principal point, px
    double cy = 128.0;
    double height_m = 1.5;      // camera height above flat ground
    double pitch_rad = 0.03;    // positive = pitched down
    int width = 512;
    int height = 256;

    // Row of the flat-ground horizon.
    double horizon_row() const;
};

// Piecewise-planar ground: flat up to hinge_z_m, inclined by slope_rad after.
// Lane c runs at lateral position offsets_m[c] + sum_k curvature[c][k] z^(k+1).
struct RoadModel {
    int lane_count = 4;
    std::vector<double> offsets_m;
    std::vector<std::vector<double>> curvature;  // per lane, coefficients of z, z^2, ...
    double hinge_z_m = 30.0;
    double slope_rad = 0.0;
    double extent_m = 120.0;
    double near_m = 3.0;  // nothing annotated closer than this

    // Parallel lanes with one shared curvature polynomial.
    static RoadModel parallel(int lanes, double spacing_m, std::vector<double> shared_curvature,
                              double hinge_z_m, double slope_rad, double extent_m);
};

struct Scene {
    SceneAnnotation annotation;
    CameraModel camera;
    RoadModel road;
};

struct GroundHit {
    double z = 0.0;        // longitudinal distance, m
    double elevation = 0.0;  // ground height at z, m
};

// Ground point whose projection lands on image row v (piecewise solve);
// nullopt when the ray misses the road.
std::optional<GroundHit> solve_row(const CameraModel& camera, const RoadModel& road, double row);

// Exact forward projection of a ground point (lateral x, longitudinal z).
// Returns (column, row).
std::pair<double, double> project_ground(const CameraModel& camera, const RoadModel& road,
                                         double x_m, double z_m);

// Throws DegenerateCamera when no ground is visible at all.
Scene generate_scene(const CameraModel& camera, const RoadModel& road,
                     const std::vector<double>& h_samples);

// One embedding cluster per annotated lane; centers pairwise at least
// center_separation apart, members uniform in a ball of the given radius.
// Ground-truth labels are retained.
EmbeddingSet synth_embeddings(const Scene& scene, int dim, double center_separation,
                              double within_cluster_radius, std::uint64_t seed);

}  // namespace lanefit
