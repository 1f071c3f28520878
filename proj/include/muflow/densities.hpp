#pragma once

// Inertia operators A, the explicit inverse of Lambda_mu^2 = mu - dxx, the
// periodic Green's functions of both equation families, the convolution
// identity suite, and the Diff(S^1) action on lambda-densities with its
// orbit invariants.

#include <cmath>
#include <numbers>
#include <vector>

#include "muflow/errors.hpp"
#include "muflow/grid.hpp"
#include "muflow/spectral.hpp"

namespace muflow {

enum class InertiaOperator { MuMinusDxx, OneMinusDxx, MinusDxx };
enum class GreensFamily { Mu, Classical };
enum class InverseMethod { ClosedForm, Spectral };
enum class InterpKind { Trig, Linear };

/// Family weight lambda. The peakon formulas and the H0 normalization need
/// lambda outside {0, 1}; callers validate per use.
struct DensityWeight {
    double lambda = 3.0;
};

/// m = A u for A = mu - dxx, 1 - dxx, or -dxx.
inline PeriodicField apply_A(InertiaOperator op, const PeriodicField& u) {
    PeriodicField uxx = deriv(u, 2);
    switch (op) {
        case InertiaOperator::MuMinusDxx: return mean(u) - uxx;
        case InertiaOperator::OneMinusDxx: return u - uxx;
        case InertiaOperator::MinusDxx: return -uxx;
    }
    throw Error("apply_A: bad operator");
}

namespace detail {

// x reduced to [0, 1).
inline double reduce01(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0;  // guards the r == 1.0 rounding case
    return r;
}

} // namespace detail

/// Green's function with A g = delta in the periodic sense.
/// Mu: g(x) = x(x-1)/2 + 13/12. Classical: cosh(x-1/2) / (2 sinh(1/2)).
inline double greens_eval(GreensFamily fam, double x) {
    double r = detail::reduce01(x);
    if (fam == GreensFamily::Mu) return 0.5 * r * (r - 1.0) + 13.0 / 12.0;
    return std::cosh(r - 0.5) / (2.0 * std::sinh(0.5));
}

/// g'(x) with the regularized value g'(0) := 0 (midpoint of the one-sided
/// limits); for 0 < x < 1 the Mu family has g' = x - 1/2.
inline double greens_deriv(GreensFamily fam, double x) {
    double r = detail::reduce01(x);
    if (r == 0.0) return 0.0;
    if (fam == GreensFamily::Mu) return r - 0.5;
    return std::sinh(r - 0.5) / (2.0 * std::sinh(0.5));
}

/// G(x) = int_0^x g, on the representative interval [-1, 1] (odd in x).
inline double greens_antideriv(GreensFamily fam, double x) {
    if (x < -1.0 || x > 1.0)
        throw DomainError("greens_antideriv: argument must lie in [-1, 1]");
    double a = std::abs(x);
    double G;
    if (fam == GreensFamily::Mu) {
        G = a * a * a / 6.0 - a * a / 4.0 + 13.0 * a / 12.0;
    } else {
        G = (std::sinh(a - 0.5) + std::sinh(0.5)) / (2.0 * std::sinh(0.5));
    }
    return x < 0.0 ? -G : G;
}

/// Inverse of Lambda_mu^2 = mu - dxx.
///
/// Spectral: divide mode k != 0 by 4 pi^2 k^2, keep the mean. ClosedForm
/// evaluates the four-term antiderivative formula
///   (x^2/2 - x/2 + 13/12) I0 + (x - 1/2) I1 - C(x) + I2
/// with I0 = int v, I1 = int int v, C(x) = int_0^x int_0^y v, I2 = int C,
/// all cumulative integrals taken spectrally. The two routes share only the
/// antiderivative primitive, so their agreement checks the formula itself.
inline PeriodicField invert_A_mu(const PeriodicField& m, InverseMethod method = InverseMethod::Spectral) {
    const PeriodicGrid g = m.grid;
    if (method == InverseMethod::Spectral) {
        const int n = g.n;
        Spectrum c = spectrum(m);
        for (int k = 1; k < n; ++k) {
            int ks = detail::signed_wavenumber(k, n);
            c[k] /= 4.0 * std::numbers::pi * std::numbers::pi * static_cast<double>(ks) * ks;
        }
        return field_from_spectrum(g, std::move(c));
    }

    const double I0 = mean(m);
    PeriodicField vt = m - I0;
    // tolerance floored by the scale of m itself: vt can be tiny (near-constant
    // m) while its mean carries roundoff from the subtraction
    const double tol = 1e-12 * (1.0 + sup_norm(m));
    PeriodicField F1 = antideriv_zero_mean(vt, tol);
    PeriodicField F2 = antideriv_zero_mean(F1, tol);
    const double F10 = F1[0], F20 = F2[0];
    const double I1 = I0 / 2.0 - F10;
    const double I2 = I0 / 6.0 - F10 / 2.0 - F20;

    PeriodicField out(g);
    for (int j = 0; j < g.n; ++j) {
        double x = g.point(j);
        double cum2 = I0 * x * x / 2.0 - F10 * x + F2[j] - F20;  // C(x)
        out[j] = (x * x / 2.0 - x / 2.0 + 13.0 / 12.0) * I0 + (x - 0.5) * I1 - cum2 + I2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convolution identity suite
// ---------------------------------------------------------------------------

struct IdentityResiduals {
    PeriodicField a1, a2, a3, a4;

    double max_residual() const {
        return std::max(std::max(sup_norm(a1), sup_norm(a2)), std::max(sup_norm(a3), sup_norm(a4)));
    }
};

namespace detail {

// (g' * h)(x) by the periodic trapezoid rule over the grid. The integrand
// jumps where the argument of g' crosses 0; with q_i, q_j on grid nodes the
// jump lands on a node and the g'(0) = 0 midpoint value keeps the rule at
// O(1/n^2).
inline double conv_gprime_at(GreensFamily fam, double x, const std::vector<double>& h,
                             const PeriodicGrid& g) {
    double s = 0.0;
    for (int j = 0; j < g.n; ++j) s += greens_deriv(fam, x - g.point(j)) * h[j];
    return s / g.n;
}

// (g' * g_j')(x). At a node where both factors jump (y = x = q_j mod 1) the
// integrand is continuous with limit -1/4; the product of the two midpoint
// values would give 0 there and cost an O(1/n) defect.
inline double conv_gprime_gprime_at(GreensFamily fam, double x, double qj,
                                    const PeriodicGrid& g) {
    double s = 0.0;
    for (int j = 0; j < g.n; ++j) {
        double y = g.point(j);
        double a = reduce01(x - y), b = reduce01(y - qj);
        if (a == 0.0 && b == 0.0) {
            s += -0.25;
        } else {
            s += greens_deriv(fam, a) * greens_deriv(fam, b);
        }
    }
    return s / g.n;
}

} // namespace detail

/// Pointwise residuals LHS - RHS of the four Green's-function identities
///   (1) g' * g_j           = -(1/3)(g_j - 13/12) g_j'
///   (2) g' * g_j'          = 1 - g_j
///   (3) -(g_i - g_j)(g_i' - g_j') = 2 g'(q_i - q_j) g_i + 2 g'(q_j - q_i) g_j
///                            + (g(q_i-q_j) - 13/12) g_i' + (g(q_j-q_i) - 13/12) g_j'
///   (4) g_i' g_j'          = g_i + g_j + g'(q_i-q_j)(g_i' - g_j') + g(q_i-q_j) - 3
/// with g_j = g(. - q_j). Identity (4) fails only at x = q_i = q_j; that
/// point is excluded (residual set to 0). Snapping q_i, q_j to grid nodes
/// keeps the quadrature error of (1)-(2) at O(1/n^2).
inline IdentityResiduals identity_suite(double qi, double qj, const PeriodicGrid& grid) {
    const GreensFamily fam = GreensFamily::Mu;
    const int n = grid.n;

    std::vector<double> gi(n), gj(n), gip(n), gjp(n);
    for (int k = 0; k < n; ++k) {
        double x = grid.point(k);
        gi[k] = greens_eval(fam, x - qi);
        gj[k] = greens_eval(fam, x - qj);
        gip[k] = greens_deriv(fam, x - qi);
        gjp[k] = greens_deriv(fam, x - qj);
    }

    IdentityResiduals out{PeriodicField(grid), PeriodicField(grid), PeriodicField(grid),
                          PeriodicField(grid)};

    const double g_ij = greens_eval(fam, qi - qj);
    const double g_ji = greens_eval(fam, qj - qi);
    const double gp_ij = greens_deriv(fam, qi - qj);
    const double gp_ji = greens_deriv(fam, qj - qi);
    const double c = 13.0 / 12.0;

    for (int k = 0; k < n; ++k) {
        double x = grid.point(k);
        out.a1[k] = detail::conv_gprime_at(fam, x, gj, grid) + (gj[k] - c) * gjp[k] / 3.0;
        out.a2[k] = detail::conv_gprime_gprime_at(fam, x, qj, grid) - (1.0 - gj[k]);
        out.a3[k] = -(gi[k] - gj[k]) * (gip[k] - gjp[k]) -
                    (2.0 * gp_ij * gi[k] + 2.0 * gp_ji * gj[k] + (g_ij - c) * gip[k] +
                     (g_ji - c) * gjp[k]);
        bool excluded = (qi == qj) && (x == detail::reduce01(qi));
        out.a4[k] = excluded ? 0.0
                             : gip[k] * gjp[k] -
                                   (gi[k] + gj[k] + gp_ij * (gip[k] - gjp[k]) + g_ij - 3.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Diff(S^1) action on lambda-densities
// ---------------------------------------------------------------------------

/// Orientation-preserving circle map, stored as the periodic displacement
/// xi(x) - x sampled on a grid; xi(x + 1) = xi(x) + 1 by construction.
struct CircleMap {
    PeriodicField disp;

    static CircleMap identity(const PeriodicGrid& g) { return CircleMap{PeriodicField(g)}; }

    static CircleMap from_displacement(PeriodicField d) { return CircleMap{std::move(d)}; }

    /// xi evaluated at grid node j.
    double value(int j) const { return disp.grid.point(j) + disp[j]; }

    std::vector<double> values() const {
        std::vector<double> xi(static_cast<std::size_t>(disp.grid.n));
        for (int j = 0; j < disp.grid.n; ++j) xi[j] = value(j);
        return xi;
    }

    /// dxi/dx sampled on the grid (spectral derivative of the displacement).
    PeriodicField dxi() const { return deriv(disp, 1) + 1.0; }

    bool is_monotone() const { return min_value(dxi()) > 0.0; }
};

/// Composition (outer o inner)(x) = outer(inner(x)).
inline CircleMap compose(const CircleMap& outer, const CircleMap& inner) {
    const PeriodicGrid g = inner.disp.grid;
    TrigInterpolant od(outer.disp);
    PeriodicField d(g);
    for (int j = 0; j < g.n; ++j) {
        double xi1 = inner.value(j);
        d[j] = inner.disp[j] + od.value(xi1);
    }
    return CircleMap{std::move(d)};
}

/// Push-forward action on a lambda-density: m o xi * (dxi)^lambda.
/// m o xi uses trigonometric interpolation by default; Linear is a fallback
/// for rough m.
inline PeriodicField act_density(const CircleMap& xi, const PeriodicField& m, DensityWeight w,
                                 InterpKind interp = InterpKind::Trig) {
    detail::require_same_grid(xi.disp, m);
    PeriodicField dxi = xi.dxi();
    if (min_value(dxi) <= 0.0)
        throw NotADiffeoError("act_density: map is not orientation-preserving (dxi <= 0)");

    const PeriodicGrid g = m.grid;
    PeriodicField out(g);
    if (interp == InterpKind::Trig) {
        TrigInterpolant mi(m);
        for (int j = 0; j < g.n; ++j)
            out[j] = mi.value(xi.value(j)) * std::pow(dxi[j], w.lambda);
    } else {
        for (int j = 0; j < g.n; ++j) {
            double t = detail::reduce01(xi.value(j)) * g.n;
            int j0 = static_cast<int>(t) % g.n;
            int j1 = (j0 + 1) % g.n;
            double f = t - std::floor(t);
            out[j] = ((1.0 - f) * m[j0] + f * m[j1]) * std::pow(dxi[j], w.lambda);
        }
    }
    return out;
}

/// H_{-1}[m] = int |m|^{1/lambda} dx, the orbit invariant of the action.
inline double h_minus1(const PeriodicField& m, DensityWeight w) {
    if (w.lambda == 0.0) throw Error("h_minus1: lambda must be nonzero");
    double s = 0.0;
    for (double x : m.v) s += std::pow(std::abs(x), 1.0 / w.lambda);
    return s / m.grid.n;
}

/// The diffeomorphism xi(x) = (1/H_{-1}) int_0^x |m|^{1/lambda} that carries
/// the constant density sgn(m) H_{-1}^lambda to m. Requires m bounded away
/// from zero: min|m| > 1e-8 max|m| and no sign change.
inline CircleMap canonical_diffeo(const PeriodicField& m, DensityWeight w) {
    if (w.lambda == 0.0) throw Error("canonical_diffeo: lambda must be nonzero");
    double lo = min_value(m), hi = max_value(m);
    if (lo <= 0.0 && hi >= 0.0)
        throw NotInMLambdaError("canonical_diffeo: density changes sign or vanishes");
    double amin = std::min(std::abs(lo), std::abs(hi));
    double amax = std::max(std::abs(lo), std::abs(hi));
    if (amin <= 1e-8 * amax)
        throw NotInMLambdaError("canonical_diffeo: density too close to zero for |m|^{1/lambda}");

    PeriodicField wgt = map(m, [&](double y) { return std::pow(std::abs(y), 1.0 / w.lambda); });
    double H = mean(wgt);
    PeriodicField Fw = antideriv_zero_mean(wgt - H, 1e-12 * (1.0 + sup_norm(wgt)));
    PeriodicField d = (Fw - Fw[0]) * (1.0 / H);
    return CircleMap::from_displacement(std::move(d));
}

} // namespace muflow
