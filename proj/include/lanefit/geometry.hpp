#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lanefit/errors.hpp"

namespace lanefit {

inline constexpr double kHorizonEps = 1e-9;
inline constexpr double kDetEps = 1e-12;

// Perspective transform constrained so that horizontal lines stay horizontal:
//
//   [ a b c ]
//   [ 0 d e ]
//   [ 0 f 1 ]
//
// Six free parameters; the zero pattern is structural and closed under
// inversion.
struct Homography {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 1.0;
    double e = 0.0;
    double f = 0.0;

    static Homography identity() { return {}; }

    double det() const { return a * (d - e * f); }
    bool invertible() const;
};

struct ImagePoint {
    double x = 0.0;
    double y = 0.0;
};

struct TransformedPoint {
    double x = 0.0;
    double y = 0.0;
};

// Throws HorizonSingularity when |f*y + 1| <= kHorizonEps.
TransformedPoint transform_point(const Homography& h, ImagePoint p);

// Inverse, renormalized so the (3,3) entry is 1.  Throws SingularMatrix.
Homography invert(const Homography& h);

struct TransformResult {
    std::vector<TransformedPoint> points;  // one entry per surviving input point
    std::vector<bool> miss;                // aligned to the input; true = excluded
    std::size_t miss_count = 0;
};

// Batch transform.  Points at or behind the projected horizon
// (f*y + 1 <= kHorizonEps) are flagged and excluded from the output.
TransformResult transform_points(const Homography& h, std::span<const ImagePoint> points);

}  // namespace lanefit
