#include "lanefit/scenegen.hpp"

#include <cmath>
#include <random>

namespace lanefit {

double CameraModel::horizon_row() const {
    return cy - focal * std::tan(pitch_rad);
}

RoadModel RoadModel::parallel(int lanes, double spacing_m, std::vector<double> shared_curvature,
                              double hinge_z_m, double slope_rad, double extent_m) {
    RoadModel road;
    road.lane_count = lanes;
    road.hinge_z_m = hinge_z_m;
    road.slope_rad = slope_rad;
    road.extent_m = extent_m;
    for (int c = 0; c < lanes; ++c) {
        road.offsets_m.push_back(spacing_m * (c - 0.5 * (lanes - 1)));
        road.curvature.push_back(shared_curvature);
    }
    return road;
}

namespace {

double lateral_at(const RoadModel& road, int lane, double z) {
    double x = road.offsets_m[lane];
    double zp = z;
    for (double coeff : road.curvature[lane]) {
        x += coeff * zp;
        zp *= z;
    }
    return x;
}

double elevation_at(const RoadModel& road, double z) {
    return z <= road.hinge_z_m ? 0.0 : (z - road.hinge_z_m) * std::tan(road.slope_rad);
}

}  // namespace

std::pair<double, double> project_ground(const CameraModel& cam, const RoadModel& road,
                                         double x_m, double z_m) {
    const double ct = std::cos(cam.pitch_rad);
    const double st = std::sin(cam.pitch_rad);
    const double dy = cam.height_m - elevation_at(road, z_m);
    const double yc = dy * ct - z_m * st;   // camera "down" axis component
    const double zc = dy * st + z_m * ct;   // optical axis component
    return {cam.cx + cam.focal * x_m / zc, cam.cy + cam.focal * yc / zc};
}

std::optional<GroundHit> solve_row(const CameraModel& cam, const RoadModel& road, double row) {
    const double ct = std::cos(cam.pitch_rad);
    const double st = std::sin(cam.pitch_rad);
    const double a = row - cam.cy;
    const double f = cam.focal;
    const double h = cam.height_m;

    // Flat piece: elevation 0 up to the hinge.
    {
        const double denom = a * ct + f * st;
        if (std::abs(denom) > 1e-12) {
            const double z = h * (f * ct - a * st) / denom;
            if (z >= road.near_m && z <= std::min(road.hinge_z_m, road.extent_m)) {
                const double zc = h * st + z * ct;
                if (zc > 0.0) return GroundHit{z, 0.0};
            }
        }
    }
    // Inclined piece after the hinge.
    {
        const double tphi = std::tan(road.slope_rad);
        const double h_eff = h + road.hinge_z_m * tphi;
        const double denom = a * (ct - tphi * st) + f * (st + tphi * ct);
        if (std::abs(denom) > 1e-12) {
            const double z = h_eff * (f * ct - a * st) / denom;
            if (z > road.hinge_z_m && z <= road.extent_m && z >= road.near_m) {
                const double el = elevation_at(road, z);
                const double zc = (h - el) * st + z * ct;
                if (zc > 0.0) return GroundHit{z, el};
            }
        }
    }
    return std::nullopt;
}

Scene generate_scene(const CameraModel& cam, const RoadModel& road,
                     const std::vector<double>& h_samples) {
    if (cam.horizon_row() >= cam.height - 1) {
        throw DegenerateCamera("flat-ground horizon below the image bottom; no road visible");
    }
    Scene scene;
    scene.camera = cam;
    scene.road = road;
    scene.annotation.h_samples = h_samples;
    scene.annotation.lanes.assign(road.lane_count,
                                  std::vector<double>(h_samples.size(), SceneAnnotation::kAbsent));

    const double ct = std::cos(cam.pitch_rad);
    const double st = std::sin(cam.pitch_rad);
    for (std::size_t r = 0; r < h_samples.size(); ++r) {
        const double row = h_samples[r];
        if (row < 0 || row > cam.height - 1) continue;
        const auto hit = solve_row(cam, road, row);
        if (!hit) continue;
        const double zc = (cam.height_m - hit->elevation) * st + hit->z * ct;
        for (int lane = 0; lane < road.lane_count; ++lane) {
            const double u = cam.cx + cam.focal * lateral_at(road, lane, hit->z) / zc;
            if (u >= 0.0 && u <= cam.width - 1) {
                scene.annotation.lanes[lane][r] = u;
            }
        }
    }
    return scene;
}

EmbeddingSet synth_embeddings(const Scene& scene, int dim, double center_separation,
                              double within_cluster_radius, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    auto random_direction = [&] {
        std::vector<double> v(dim);
        double norm2 = 0.0;
        do {
            norm2 = 0.0;
            for (double& x : v) {
                x = normal(rng);
                norm2 += x * x;
            }
        } while (norm2 < 1e-12);
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
        return v;
    };

    // Greedy seeded placement with a pairwise floor of center_separation.
    std::vector<std::vector<double>> centers;
    const std::size_t lane_count = scene.annotation.lanes.size();
    for (std::size_t c = 0; c < lane_count; ++c) {
        if (c == 0) {
            centers.emplace_back(dim, 0.0);
            continue;
        }
        for (int attempt = 0; attempt < 10000; ++attempt) {
            auto dir = random_direction();
            const double scale = center_separation * (1.0 + uniform(rng)) *
                                 std::sqrt(static_cast<double>(c));
            for (double& x : dir) x *= scale;
            bool ok = true;
            for (const auto& other : centers) {
                double d2 = 0.0;
                for (int k = 0; k < dim; ++k) {
                    const double d = dir[k] - other[k];
                    d2 += d * d;
                }
                if (d2 < center_separation * center_separation) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                centers.push_back(std::move(dir));
                break;
            }
        }
        if (centers.size() != c + 1) throw Error("could not place cluster centers");
    }

    EmbeddingSet set;
    set.dim = dim;
    for (std::size_t lane = 0; lane < lane_count; ++lane) {
        const auto& xs = scene.annotation.lanes[lane];
        for (std::size_t r = 0; r < xs.size(); ++r) {
            if (xs[r] == SceneAnnotation::kAbsent) continue;
            auto dir = random_direction();
            const double radius =
                within_cluster_radius * std::pow(uniform(rng), 1.0 / static_cast<double>(dim));
            for (int k = 0; k < dim; ++k) {
                set.data.push_back(centers[lane][k] + radius * dir[k]);
            }
            set.labels.push_back(static_cast<int>(lane) + 1);
            set.pixel_x.push_back(xs[r]);
            set.pixel_y.push_back(scene.annotation.h_samples[r]);
        }
    }
    return set;
}

}  // namespace lanefit
