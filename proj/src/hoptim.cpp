#include "lanefit/hoptim.hpp"

#include <algorithm>
#include <cmath>

#include "lanefit/dual.hpp"

namespace lanefit {

namespace {

template <typename T>
struct HParams {
    T a, b, c, d, e, f;
};

// Templated over double / Dual6 so the analytic gradient differentiates the
// full chain: projective transform -> closed-form solve -> evaluation ->
// inverse reprojection.
template <typename T>
T reprojection_loss_t(const HParams<T>& h, std::span<const GroundTruthLane> lanes, int degree) {
    const T ad = h.a * h.d;
    if (std::abs(value_of(h.a * (h.d - h.e * h.f))) <= kDetEps ||
        std::abs(value_of(ad)) <= kDetEps) {
        throw SingularMatrix("homography not invertible");
    }
    const T inv_a = (h.d - h.e * h.f) / ad;
    const T inv_b = (h.c * h.f - h.b) / ad;
    const T inv_c = (h.b * h.e - h.c * h.d) / ad;
    const T inv_f = T(0.0) - h.f / h.d;

    T total(0.0);
    std::size_t count = 0;
    std::vector<T> ys, xs;
    for (const GroundTruthLane& lane : lanes) {
        const std::size_t n = lane.points.size();
        ys.assign(n, T(0.0));
        xs.assign(n, T(0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const ImagePoint p = lane.points[i];
            const T w = h.f * T(p.y) + T(1.0);
            if (value_of(w) <= kHorizonEps) {
                throw HorizonSingularity("ground-truth point at/behind the projected horizon");
            }
            xs[i] = (h.a * T(p.x) + h.b * T(p.y) + h.c) / w;
            ys[i] = (h.d * T(p.y) + h.e) / w;
        }
        const auto fit = detail::polyfit_scaled<T>(ys, xs, degree);
        for (std::size_t i = 0; i < n; ++i) {
            const T xp_star = fit.eval_at_raw(ys[i]);
            const T w2 = inv_f * ys[i] + T(1.0);
            const T x_star = (inv_a * xp_star + inv_b * ys[i] + inv_c) / w2;
            const T err = x_star - T(lane.points[i].x);
            total += err * err;
        }
        count += n;
    }
    if (count == 0) throw RankDeficient("no ground-truth points");
    return total / T(static_cast<double>(count));
}

HParams<double> to_params(const Homography& h) { return {h.a, h.b, h.c, h.d, h.e, h.f}; }

Homography to_homography(const HParams<double>& p) {
    return Homography{p.a, p.b, p.c, p.d, p.e, p.f};
}

// Homography acting on coordinates scaled by s, expressed from / back to the
// raw-pixel form: conjugation by diag(s, s, 1).
Homography scale_in(const Homography& h, double s) {
    return Homography{h.a, h.b, h.c * s, h.d, h.e * s, h.f / s};
}

Homography scale_out(const Homography& h, double s) {
    return Homography{h.a, h.b, h.c / s, h.d, h.e / s, h.f * s};
}

}  // namespace

double reprojection_loss(const Homography& h, std::span<const GroundTruthLane> lanes, int degree) {
    return reprojection_loss_t<double>(to_params(h), lanes, degree);
}

std::array<double, 6> loss_gradient(const Homography& h, std::span<const GroundTruthLane> lanes,
                                    int degree, GradientMode mode) {
    if (mode == GradientMode::analytic) {
        HParams<Dual6> hp{Dual6::seeded(h.a, 0), Dual6::seeded(h.b, 1), Dual6::seeded(h.c, 2),
                          Dual6::seeded(h.d, 3), Dual6::seeded(h.e, 4), Dual6::seeded(h.f, 5)};
        return reprojection_loss_t<Dual6>(hp, lanes, degree).g;
    }
    const std::array<double, 6> theta{h.a, h.b, h.c, h.d, h.e, h.f};
    std::array<double, 6> grad{};
    for (std::size_t k = 0; k < 6; ++k) {
        const double step = 1e-6 * std::max(1.0, std::abs(theta[k]));
        auto shifted = theta;
        shifted[k] = theta[k] + step;
        const double up = reprojection_loss(
            Homography{shifted[0], shifted[1], shifted[2], shifted[3], shifted[4], shifted[5]},
            lanes, degree);
        shifted[k] = theta[k] - step;
        const double down = reprojection_loss(
            Homography{shifted[0], shifted[1], shifted[2], shifted[3], shifted[4], shifted[5]},
            lanes, degree);
        grad[k] = (up - down) / (2.0 * step);
    }
    return grad;
}

HOptimResult optimize_homography(std::span<const GroundTruthLane> lanes, const HOptimConfig& cfg) {
    const double s = cfg.coord_scale;
    std::vector<GroundTruthLane> scaled(lanes.begin(), lanes.end());
    for (GroundTruthLane& lane : scaled) {
        for (ImagePoint& p : lane.points) {
            p.x *= s;
            p.y *= s;
        }
    }
    Homography h = cfg.init == HInit::identity ? Homography::identity()
                                               : scale_in(cfg.init_h, s);

    HOptimResult result;
    double loss;
    try {
        loss = reprojection_loss(h, scaled, cfg.degree);
    } catch (const Error& err) {
        throw InfeasibleStart(std::string("initial transform infeasible: ") + err.what());
    }
    result.trace.push_back(loss);

    const double initial_step = cfg.step;
    double step = initial_step;
    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        result.iterations = iter + 1;
        const auto grad = loss_gradient(h, scaled, cfg.degree, cfg.grad_mode);
        const std::array<double, 6> theta{h.a, h.b, h.c, h.d, h.e, h.f};

        bool accepted = false;
        double trial_step = step;
        for (int halving = 0; halving <= 20; ++halving) {
            Homography cand{theta[0] - trial_step * grad[0], theta[1] - trial_step * grad[1],
                            theta[2] - trial_step * grad[2], theta[3] - trial_step * grad[3],
                            theta[4] - trial_step * grad[4], theta[5] - trial_step * grad[5]};
            try {
                const double cand_loss = reprojection_loss(cand, scaled, cfg.degree);
                if (cand_loss < loss) {
                    const double drop = loss - cand_loss;
                    h = cand;
                    loss = cand_loss;
                    result.trace.push_back(loss);
                    step = std::min(trial_step * 2.0, initial_step * 1e4);
                    accepted = true;
                    if (drop < cfg.tol) iter = cfg.max_iters;  // converged
                    break;
                }
            } catch (const Error&) {
                // infeasible step: fall through to a shorter one
            }
            trial_step *= 0.5;
        }
        if (!accepted) break;  // no descent direction at line-search resolution
    }

    result.h = scale_out(h, s);
    result.final_loss = loss;
    return result;
}

}  // namespace lanefit
