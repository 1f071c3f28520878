#pragma once

// Uniform periodic grid on S^1 ~ [0,1) and real sample fields over it.
// Fields are plain value types; arithmetic is only defined between fields
// living on the same grid.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "muflow/errors.hpp"

namespace muflow {

struct PeriodicGrid {
    int n = 0;

    double point(int j) const { return static_cast<double>(j) / n; }

    std::vector<double> points() const {
        std::vector<double> x(n);
        for (int j = 0; j < n; ++j) x[j] = point(j);
        return x;
    }

    double spacing() const { return 1.0 / n; }

    bool operator==(const PeriodicGrid& o) const { return n == o.n; }
};

/// n must be even (the real spectral transform pairs +/- modes) and at
/// least 8.
inline PeriodicGrid make_grid(int n) {
    if (n % 2 != 0) throw Error("make_grid: n must be even (got " + std::to_string(n) + ")");
    if (n < 8) throw Error("make_grid: n must be >= 8 (got " + std::to_string(n) + ")");
    return PeriodicGrid{n};
}

struct PeriodicField {
    PeriodicGrid grid;
    std::vector<double> v;

    PeriodicField() = default;
    explicit PeriodicField(PeriodicGrid g) : grid(g), v(static_cast<std::size_t>(g.n), 0.0) {}
    PeriodicField(PeriodicGrid g, std::vector<double> values) : grid(g), v(std::move(values)) {
        if (static_cast<int>(v.size()) != g.n)
            throw Error("PeriodicField: sample count does not match grid");
    }

    int size() const { return grid.n; }
    double& operator[](int j) { return v[static_cast<std::size_t>(j)]; }
    double operator[](int j) const { return v[static_cast<std::size_t>(j)]; }
};

namespace detail {
inline void require_same_grid(const PeriodicField& a, const PeriodicField& b) {
    if (!(a.grid == b.grid)) throw Error("field arithmetic requires identical grids");
}
} // namespace detail

inline PeriodicField field_from(const PeriodicGrid& g, const std::function<double(double)>& f) {
    PeriodicField out(g);
    for (int j = 0; j < g.n; ++j) out[j] = f(g.point(j));
    return out;
}

inline PeriodicField constant_field(const PeriodicGrid& g, double c) {
    PeriodicField out(g);
    std::fill(out.v.begin(), out.v.end(), c);
    return out;
}

/// Arithmetic average of the samples = periodic trapezoid rule, which is the
/// spectrally accurate quadrature on a uniform grid. Kahan-compensated: the
/// finite-difference oracles difference functional values at the last digit,
/// so quadrature roundoff must stay at a couple of ulps.
inline double mean(const PeriodicField& f) {
    double s = 0.0, c = 0.0;
    for (double x : f.v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s / f.grid.n;
}

inline double sup_norm(const PeriodicField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}

inline double min_value(const PeriodicField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::min(m, x);
    return m;
}

inline double max_value(const PeriodicField& f) {
    double m = f.v.empty() ? 0.0 : f.v[0];
    for (double x : f.v) m = std::max(m, x);
    return m;
}

inline bool all_finite(const PeriodicField& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline PeriodicField operator+(PeriodicField a, const PeriodicField& b) {
    detail::require_same_grid(a, b);
    for (int j = 0; j < a.size(); ++j) a[j] += b[j];
    return a;
}

inline PeriodicField operator-(PeriodicField a, const PeriodicField& b) {
    detail::require_same_grid(a, b);
    for (int j = 0; j < a.size(); ++j) a[j] -= b[j];
    return a;
}

inline PeriodicField operator-(PeriodicField a) {
    for (double& x : a.v) x = -x;
    return a;
}

/// Pointwise product.
inline PeriodicField operator*(PeriodicField a, const PeriodicField& b) {
    detail::require_same_grid(a, b);
    for (int j = 0; j < a.size(); ++j) a[j] *= b[j];
    return a;
}

inline PeriodicField operator*(double c, PeriodicField a) {
    for (double& x : a.v) x *= c;
    return a;
}

inline PeriodicField operator*(PeriodicField a, double c) { return c * std::move(a); }

inline PeriodicField operator+(PeriodicField a, double c) {
    for (double& x : a.v) x += c;
    return a;
}

inline PeriodicField operator+(double c, PeriodicField a) { return std::move(a) + c; }

inline PeriodicField operator-(PeriodicField a, double c) { return std::move(a) + (-c); }

inline PeriodicField operator-(double c, PeriodicField a) {
    for (double& x : a.v) x = c - x;
    return a;
}

inline PeriodicField map(const PeriodicField& f, const std::function<double(double)>& fn) {
    PeriodicField out = f;
    for (double& x : out.v) x = fn(x);
    return out;
}

inline double sup_diff(const PeriodicField& a, const PeriodicField& b) {
    detail::require_same_grid(a, b);
    double m = 0.0;
    for (int j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

} // namespace muflow
