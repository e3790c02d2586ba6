#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lanefit/curvefit.hpp"

using namespace lanefit;

namespace {

// Independent normal-equations solve in extended precision, raw basis.
std::vector<long double> normal_eq_oracle(const std::vector<TransformedPoint>& pts, int degree) {
    const int m = degree + 1;
    std::vector<long double> g(m * m, 0.0L), r(m, 0.0L);
    for (const auto& p : pts) {
        std::vector<long double> pow(m, 1.0L);
        for (int k = 1; k < m; ++k) pow[k] = pow[k - 1] * static_cast<long double>(p.y);
        for (int j = 0; j < m; ++j) {
            for (int k = 0; k < m; ++k) g[j * m + k] += pow[j] * pow[k];
            r[j] += pow[j] * static_cast<long double>(p.x);
        }
    }
    // gaussian elimination with partial pivoting
    for (int col = 0; col < m; ++col) {
        int best = col;
        for (int row = col + 1; row < m; ++row) {
            if (std::abs(g[row * m + col]) > std::abs(g[best * m + col])) best = row;
        }
        for (int k = 0; k < m; ++k) std::swap(g[col * m + k], g[best * m + k]);
        std::swap(r[col], r[best]);
        for (int row = col + 1; row < m; ++row) {
            const long double factor = g[row * m + col] / g[col * m + col];
            for (int k = col; k < m; ++k) g[row * m + k] -= factor * g[col * m + k];
            r[row] -= factor * r[col];
        }
    }
    std::vector<long double> coeffs(m, 0.0L);  // ascending
    for (int row = m - 1; row >= 0; --row) {
        long double acc = r[row];
        for (int k = row + 1; k < m; ++k) acc -= g[row * m + k] * coeffs[k];
        coeffs[row] = acc / g[row * m + row];
    }
    std::reverse(coeffs.begin(), coeffs.end());  // highest first
    return coeffs;
}

double sse(const std::vector<TransformedPoint>& pts, const Polynomial& poly) {
    double acc = 0.0;
    for (const auto& p : pts) {
        const double r = poly(p.y) - p.x;
        acc += r * r;
    }
    return acc;
}

}  // namespace

TEST_CASE("exact interpolation of noise-free quadratic") {
    std::vector<TransformedPoint> pts;
    for (double y : {0.0, 1.0, 2.0, 3.0}) pts.push_back({2.0 * y * y + 3.0 * y + 1.0, y});
    const Polynomial poly = fit_polynomial(pts, 2);
    REQUIRE(poly.coeffs.size() == 3);
    CHECK(std::abs(poly.coeffs[0] - 2.0) < 1e-9);
    CHECK(std::abs(poly.coeffs[1] - 3.0) < 1e-9);
    CHECK(std::abs(poly.coeffs[2] - 1.0) < 1e-9);
}

TEST_CASE("rank-deficient inputs are rejected") {
    std::vector<TransformedPoint> two{{0.0, 0.0}, {1.0, 1.0}};
    CHECK_THROWS_AS(fit_polynomial(two, 2), RankDeficient);

    std::vector<TransformedPoint> one_row{{0.0, 5.0}, {1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}};
    CHECK_THROWS_AS(fit_polynomial(one_row, 2), RankDeficient);
}

TEST_CASE("noisy fit matches the extended-precision oracle") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> yd(100.0, 600.0);
    std::normal_distribution<double> noise(0.0, 2.0);
    for (int degree : {2, 3}) {
        std::vector<TransformedPoint> pts;
        for (int i = 0; i < 50; ++i) {
            const double y = yd(rng);
            const double x = 1e-4 * y * y - 0.3 * y + 40.0 + noise(rng);
            pts.push_back({x, y});
        }
        const Polynomial poly = fit_polynomial(pts, degree);
        const auto oracle = normal_eq_oracle(pts, degree);
        for (std::size_t k = 0; k < poly.coeffs.size(); ++k) {
            const double expected = static_cast<double>(oracle[k]);
            CHECK(std::abs(poly.coeffs[k] - expected) <=
                  1e-7 * std::max(1e-6, std::abs(expected)));
        }
    }
}

TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> yd(0.0, 250.0);
    std::vector<TransformedPoint> pts;
    for (int i = 0; i < 40; ++i) {
        const double y = yd(rng);
        pts.push_back({0.01 * y * y + y, y});
    }
    const Polynomial a = fit_polynomial(pts, 3);
    std::shuffle(pts.begin(), pts.end(), rng);
    const Polynomial b = fit_polynomial(pts, 3);
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        CHECK(std::abs(a.coeffs[k] - b.coeffs[k]) <=
              1e-12 * std::max(1.0, std::abs(a.coeffs[k])));
    }
}

TEST_CASE("returned coefficients are a local optimum") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> yd(50.0, 200.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<TransformedPoint> pts;
    for (int i = 0; i < 30; ++i) {
        const double y = yd(rng);
        pts.push_back({0.002 * y * y - 0.1 * y + 3.0 + noise(rng), y});
    }
    const Polynomial poly = fit_polynomial(pts, 2);
    const double base = sse(pts, poly);
    for (std::size_t k = 0; k < poly.coeffs.size(); ++k) {
        for (double delta : {1e-4, -1e-4}) {
            Polynomial perturbed = poly;
            perturbed.coeffs[k] += delta;
            CHECK(sse(pts, perturbed) >= base);
        }
    }
}

TEST_CASE("exact recovery leaves residual below 1e-9") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> yd(100.0, 900.0);
    std::vector<TransformedPoint> pts;
    for (int i = 0; i < 25; ++i) {
        const double y = yd(rng);
        pts.push_back({-2e-7 * y * y * y + 3e-4 * y * y + 0.2 * y - 7.0, y});
    }
    const Polynomial poly = fit_polynomial(pts, 3);
    for (const auto& p : pts) CHECK(std::abs(poly(p.y) - p.x) < 1e-9);
}

TEST_CASE("evaluate_lane under the identity transform") {
    Polynomial linear{{1.0, 0.0}};  // x' = y'
    std::vector<double> rows{10.0, 20.0, 30.0};
    const auto pred = evaluate_lane(Homography::identity(), linear, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK_FALSE(pred.samples[i].miss);
        CHECK(pred.samples[i].x == doctest::Approx(rows[i]).epsilon(1e-12));
    }

    Polynomial quad{{2.0, 3.0, 1.0}};
    std::vector<double> row2{2.0};
    const auto pred2 = evaluate_lane(Homography::identity(), quad, row2);
    CHECK(pred2.samples[0].x == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("fit_lane reproduces image-space cubic data") {
    std::vector<ImagePoint> pixels;
    std::vector<double> rows;
    for (double y = 100.0; y <= 250.0; y += 10.0) {
        pixels.push_back({1e-5 * y * y * y - 0.004 * y * y + y * 0.5 + 60.0, y});
        rows.push_back(y);
    }
    const auto pred = fit_lane(Homography::identity(), pixels, 3, rows);
    CHECK(pred.excluded_from_fit == 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK_FALSE(pred.samples[i].miss);
        CHECK(std::abs(pred.samples[i].x - pixels[i].x) < 1e-6);
    }
}
