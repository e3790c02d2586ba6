#include "lanefit/geometry.hpp"

#include <cmath>

namespace lanefit {

bool Homography::invertible() const {
    return std::abs(det()) > kDetEps && std::abs(a * d) > kDetEps;
}

TransformedPoint transform_point(const Homography& h, ImagePoint p) {
    const double w = h.f * p.y + 1.0;
    if (std::abs(w) <= kHorizonEps) {
        throw HorizonSingularity("point projects to infinity (f*y + 1 ~ 0)");
    }
    return {(h.a * p.x + h.b * p.y + h.c) / w, (h.d * p.y + h.e) / w};
}

Homography invert(const Homography& h) {
    if (std::abs(h.det()) <= kDetEps) {
        throw SingularMatrix("homography determinant below bound");
    }
    // Adjugate of the constrained matrix, renormalized by its (3,3) entry a*d.
    // Cofactors at positions (1,2) and (1,3) vanish, so the zero pattern holds.
    const double ad = h.a * h.d;
    if (std::abs(ad) <= kDetEps) {
        throw SingularMatrix("inverse has no unit-normalized form (a*d ~ 0)");
    }
    Homography inv;
    inv.a = (h.d - h.e * h.f) / ad;
    inv.b = (h.c * h.f - h.b) / ad;
    inv.c = (h.b * h.e - h.c * h.d) / ad;
    inv.d = 1.0 / h.d;
    inv.e = -h.e / h.d;
    inv.f = -h.f / h.d;
    return inv;
}

TransformResult transform_points(const Homography& h, std::span<const ImagePoint> points) {
    TransformResult result;
    result.points.reserve(points.size());
    result.miss.reserve(points.size());
    for (const ImagePoint& p : points) {
        const double w = h.f * p.y + 1.0;
        if (w <= kHorizonEps) {
            result.miss.push_back(true);
            ++result.miss_count;
            continue;
        }
        result.miss.push_back(false);
        result.points.push_back({(h.a * p.x + h.b * p.y + h.c) / w, (h.d * p.y + h.e) / w});
    }
    return result;
}

}  // namespace lanefit
