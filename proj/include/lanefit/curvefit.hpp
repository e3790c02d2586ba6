#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "lanefit/dual.hpp"
#include "lanefit/errors.hpp"
#include "lanefit/geometry.hpp"

namespace lanefit {

// Fitted lane curve x' = f(y').  Coefficients are stored highest degree
// first: w = [w_n, ..., w_1, w_0].
struct Polynomial {
    std::vector<double> coeffs;

    int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    double operator()(double y) const {
        double acc = 0.0;
        for (double c : coeffs) acc = acc * y + c;
        return acc;
    }
};

struct LaneSample {
    double row = 0.0;  // the queried y position in image space
    double x = 0.0;    // reprojected x*, valid when !miss
    bool miss = false;
};

struct LanePrediction {
    std::vector<LaneSample> samples;
    Polynomial poly;
    Homography h;
    std::size_t excluded_from_fit = 0;  // points dropped before fitting
};

// Closed-form least-squares fit of x' = f(y').  The y' values are rescaled
// to [-1,1] internally; coefficients come back in the raw y' basis.
// Throws RankDeficient on degenerate input.
Polynomial fit_polynomial(std::span<const TransformedPoint> points, int degree);

// Evaluates the fitted curve at image rows: row -> y' -> x'* -> reproject
// through the inverse transform.  Rows at/behind the horizon get the miss
// flag.
LanePrediction evaluate_lane(const Homography& h, const Polynomial& poly,
                             std::span<const double> rows);

// transform -> fit (misses excluded) -> evaluate.
LanePrediction fit_lane(const Homography& h, std::span<const ImagePoint> pixels, int degree,
                        std::span<const double> rows);

namespace detail {

// Least-squares polynomial solve on an affinely rescaled basis
// u = (y - mid)/half, shared between the double path and the dual-number
// path of the reprojection loss.
template <typename T>
struct ScaledFit {
    std::vector<T> coeffs;  // ascending powers of u
    T mid{};
    T half{};

    T eval_at_raw(const T& y) const {
        const T u = (y - mid) / half;
        T acc = coeffs.back();
        for (std::size_t k = coeffs.size() - 1; k-- > 0;) acc = acc * u + coeffs[k];
        return acc;
    }
};

template <typename T>
ScaledFit<T> polyfit_scaled(const std::vector<T>& ys, const std::vector<T>& xs, int degree) {
    const std::size_t n = ys.size();
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    if (degree < 1) throw RankDeficient("degree must be >= 1");
    if (n < m) throw RankDeficient("fewer points than coefficients");

    T lo = ys[0], hi = ys[0];
    for (const T& y : ys) {
        if (y < lo) lo = y;
        if (y > hi) hi = y;
    }
    const double span_v = value_of(hi) - value_of(lo);
    const double scale_ref = std::max({1.0, std::abs(value_of(lo)), std::abs(value_of(hi))});
    if (span_v <= 1e-12 * scale_ref) {
        throw RankDeficient("all points share one y value");
    }

    ScaledFit<T> fit;
    fit.mid = (lo + hi) * T(0.5);
    fit.half = (hi - lo) * T(0.5);

    // Normal equations G c = r in the scaled basis.  |u| <= 1 keeps the
    // system well conditioned for the degrees in play.
    std::vector<T> g(m * m, T(0.0));
    std::vector<T> r(m, T(0.0));
    std::vector<T> pow(m);
    for (std::size_t i = 0; i < n; ++i) {
        const T u = (ys[i] - fit.mid) / fit.half;
        pow[0] = T(1.0);
        for (std::size_t k = 1; k < m; ++k) pow[k] = pow[k - 1] * u;
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k < m; ++k) g[j * m + k] += pow[j] * pow[k];
            r[j] += pow[j] * xs[i];
        }
    }

    // Gaussian elimination with partial pivoting.
    const double pivot_tol = 1e-12 * static_cast<double>(n) * static_cast<double>(m);
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t best = col;
        double best_mag = std::abs(value_of(g[col * m + col]));
        for (std::size_t row = col + 1; row < m; ++row) {
            const double mag = std::abs(value_of(g[row * m + col]));
            if (mag > best_mag) {
                best = row;
                best_mag = mag;
            }
        }
        if (best_mag <= pivot_tol) {
            throw RankDeficient("normal equations rank deficient");
        }
        if (best != col) {
            for (std::size_t k = 0; k < m; ++k) std::swap(g[col * m + k], g[best * m + k]);
            std::swap(r[col], r[best]);
        }
        for (std::size_t row = col + 1; row < m; ++row) {
            const T factor = g[row * m + col] / g[col * m + col];
            for (std::size_t k = col; k < m; ++k) g[row * m + k] -= factor * g[col * m + k];
            r[row] -= factor * r[col];
        }
    }
    fit.coeffs.assign(m, T(0.0));
    for (std::size_t row = m; row-- > 0;) {
        T acc = r[row];
        for (std::size_t k = row + 1; k < m; ++k) acc -= g[row * m + k] * fit.coeffs[k];
        fit.coeffs[row] = acc / g[row * m + row];
    }
    return fit;
}

}  // namespace detail

}  // namespace lanefit
