#include "lanefit/curvefit.hpp"

#include <algorithm>

namespace lanefit {

Polynomial fit_polynomial(std::span<const TransformedPoint> points, int degree) {
    std::vector<double> ys(points.size()), xs(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        ys[i] = points[i].y;
        xs[i] = points[i].x;
    }
    const auto fit = detail::polyfit_scaled<double>(ys, xs, degree);

    // Expand sum_k c_k * ((y - mid)/half)^k back into raw powers of y.
    const std::size_t m = fit.coeffs.size();
    const double s = 1.0 / fit.half;
    const double t = -fit.mid / fit.half;  // u = s*y + t
    std::vector<double> raw(m, 0.0);       // ascending
    std::vector<double> basis(m, 0.0);     // (s*y + t)^k, ascending
    basis[0] = 1.0;
    raw[0] = fit.coeffs[0];
    for (std::size_t k = 1; k < m; ++k) {
        for (std::size_t j = k; j-- > 0;) {
            const double b = basis[j];
            basis[j + 1] += b * s;
            basis[j] = b * t;
        }
        for (std::size_t j = 0; j <= k; ++j) raw[j] += fit.coeffs[k] * basis[j];
    }

    Polynomial poly;
    poly.coeffs.assign(raw.rbegin(), raw.rend());
    return poly;
}

LanePrediction evaluate_lane(const Homography& h, const Polynomial& poly,
                             std::span<const double> rows) {
    const Homography inv = invert(h);
    LanePrediction pred;
    pred.poly = poly;
    pred.h = h;
    pred.samples.reserve(rows.size());
    for (double y : rows) {
        LaneSample s;
        s.row = y;
        const double w = h.f * y + 1.0;
        if (w <= kHorizonEps) {
            s.miss = true;
            pred.samples.push_back(s);
            continue;
        }
        const double yp = (h.d * y + h.e) / w;  // the x value is irrelevant here
        const double xp = poly(yp);
        const double w2 = inv.f * yp + 1.0;
        s.x = (inv.a * xp + inv.b * yp + inv.c) / w2;
        pred.samples.push_back(s);
    }
    return pred;
}

LanePrediction fit_lane(const Homography& h, std::span<const ImagePoint> pixels, int degree,
                        std::span<const double> rows) {
    const TransformResult tr = transform_points(h, pixels);
    if (tr.points.size() < static_cast<std::size_t>(degree) + 1) {
        throw RankDeficient("too few points survive the horizon check");
    }
    LanePrediction pred = evaluate_lane(h, fit_polynomial(tr.points, degree), rows);
    pred.excluded_from_fit = tr.miss_count;
    return pred;
}

}  // namespace lanefit
