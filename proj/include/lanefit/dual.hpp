#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace lanefit {

// Forward-mode scalar carrying a 6-wide gradient, sized for the six
// homography parameters.  One templated evaluation of the loss yields the
// full gradient in a single pass.
struct Dual6 {
    double v = 0.0;
    std::array<double, 6> g{};

    Dual6() = default;
    Dual6(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
    static Dual6 seeded(double value, std::size_t k) {
        Dual6 d(value);
        d.g[k] = 1.0;
        return d;
    }
};

inline Dual6 operator-(const Dual6& x) {
    Dual6 r(-x.v);
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = -x.g[i];
    return r;
}

inline Dual6 operator+(const Dual6& x, const Dual6& y) {
    Dual6 r(x.v + y.v);
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = x.g[i] + y.g[i];
    return r;
}

inline Dual6 operator-(const Dual6& x, const Dual6& y) {
    Dual6 r(x.v - y.v);
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = x.g[i] - y.g[i];
    return r;
}

inline Dual6 operator*(const Dual6& x, const Dual6& y) {
    Dual6 r(x.v * y.v);
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = x.g[i] * y.v + x.v * y.g[i];
    return r;
}

inline Dual6 operator/(const Dual6& x, const Dual6& y) {
    const double inv = 1.0 / y.v;
    Dual6 r(x.v * inv);
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = (x.g[i] - r.v * y.g[i]) * inv;
    return r;
}

inline Dual6& operator+=(Dual6& x, const Dual6& y) { return x = x + y; }
inline Dual6& operator-=(Dual6& x, const Dual6& y) { return x = x - y; }
inline Dual6& operator*=(Dual6& x, const Dual6& y) { return x = x * y; }
inline Dual6& operator/=(Dual6& x, const Dual6& y) { return x = x / y; }

inline bool operator<(const Dual6& x, const Dual6& y) { return x.v < y.v; }
inline bool operator>(const Dual6& x, const Dual6& y) { return x.v > y.v; }
inline bool operator<=(const Dual6& x, const Dual6& y) { return x.v <= y.v; }
inline bool operator>=(const Dual6& x, const Dual6& y) { return x.v >= y.v; }

inline Dual6 sqrt(const Dual6& x) {
    Dual6 r(std::sqrt(x.v));
    const double s = 0.5 / r.v;
    for (std::size_t i = 0; i < 6; ++i) r.g[i] = x.g[i] * s;
    return r;
}

// Value extraction usable from templated code with T = double or Dual6.
inline double value_of(double x) { return x; }
inline double value_of(const Dual6& x) { return x.v; }

}  // namespace lanefit
