#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "lanefit/curvefit.hpp"
#include "lanefit/geometry.hpp"

namespace lanefit {

enum class GradientMode { analytic, central_difference };
enum class HInit { identity, fixed };

struct HOptimConfig {
    int degree = 3;
    double step = 1e-2;
    int max_iters = 2000;
    double tol = 1e-10;
    GradientMode grad_mode = GradientMode::analytic;
    HInit init = HInit::identity;
    Homography init_h;          // used when init == HInit::fixed
    double coord_scale = 1.0 / 512.0;  // pixels are multiplied by this internally
    std::uint64_t seed = 0;
};

struct GroundTruthLane {
    std::vector<ImagePoint> points;
};

struct HOptimResult {
    Homography h;
    std::vector<double> trace;  // loss at accepted steps, non-increasing
    double final_loss = 0.0;
    int iterations = 0;
};

// Mean squared reprojection error over all points of all lanes; each lane is
// fitted its own degree-n polynomial under the shared transform.
// Throws HorizonSingularity if any ground-truth point is unprojectable.
double reprojection_loss(const Homography& h, std::span<const GroundTruthLane> lanes, int degree);

// d(loss)/d[a,b,c,d,e,f].
std::array<double, 6> loss_gradient(const Homography& h, std::span<const GroundTruthLane> lanes,
                                    int degree, GradientMode mode = GradientMode::analytic);

// First-order descent with backtracking line search over the six parameters.
// Infeasible steps (horizon crossings, rank collapse) are rejected by the
// line search.  Throws InfeasibleStart if the initial loss is not evaluable.
HOptimResult optimize_homography(std::span<const GroundTruthLane> lanes, const HOptimConfig& cfg);

}  // namespace lanefit
