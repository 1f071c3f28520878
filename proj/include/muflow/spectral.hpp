#pragma once

// Fourier-side operations on periodic fields.
//
// Coefficient convention: c_k = (1/n) sum_j v_j e^{-2 pi i jk/n} for
// k = 0..n-1, with c_{n-k} = conj(c_k) for real data. Signed wavenumbers run
// over -n/2+1..n/2; the Nyquist mode k = n/2 is kept for even-order
// derivatives and zeroed for odd orders so derivatives of real fields stay
// real. antideriv_zero_mean also drops the Nyquist mode (its true
// antiderivative is not representable on the grid).

#include <complex>
#include <vector>

#include "muflow/fft.hpp"
#include "muflow/grid.hpp"

namespace muflow {

using Spectrum = std::vector<std::complex<double>>;

inline Spectrum spectrum(const PeriodicField& f) {
    const int n = f.grid.n;
    Spectrum c(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) c[j] = f[j];
    detail::fft(c, /*inverse=*/false);
    for (auto& z : c) z /= n;
    return c;
}

inline PeriodicField field_from_spectrum(const PeriodicGrid& g, Spectrum c) {
    detail::fft(c, /*inverse=*/true);
    PeriodicField out(g);
    for (int j = 0; j < g.n; ++j) out[j] = c[j].real();
    return out;
}

namespace detail {

inline int signed_wavenumber(int k, int n) { return (k <= n / 2) ? k : k - n; }

// (2 pi i k)^order as an exact complex value, Nyquist handled by caller.
inline cplx deriv_multiplier(int ks, int order) {
    double w = 2.0 * std::numbers::pi * ks;
    double mag = 1.0;
    for (int i = 0; i < order; ++i) mag *= w;
    switch (order % 4) {
        case 0: return cplx(mag, 0.0);
        case 1: return cplx(0.0, mag);
        case 2: return cplx(-mag, 0.0);
        default: return cplx(0.0, -mag);
    }
}

} // namespace detail

/// Fourier-multiplier derivative of the given order (order >= 1).
inline PeriodicField deriv(const PeriodicField& f, int order) {
    if (order < 1) throw Error("deriv: order must be >= 1");
    const int n = f.grid.n;
    Spectrum c = spectrum(f);
    for (int k = 0; k < n; ++k) {
        int ks = detail::signed_wavenumber(k, n);
        if (k == n / 2 && order % 2 == 1) {
            c[k] = 0.0;  // odd-order Nyquist convention
        } else {
            c[k] *= detail::deriv_multiplier(ks, order);
        }
    }
    return field_from_spectrum(f.grid, std::move(c));
}

/// Antiderivative F with dF/dx = f (spectrally) and mean(F) = 0. The input
/// must have zero mean up to tol_mean (default 1e-10 * sup|f|); otherwise the
/// inversion is ill-posed on the circle and MeanNotZeroError is thrown.
inline PeriodicField antideriv_zero_mean(const PeriodicField& f, double tol_mean = -1.0) {
    const int n = f.grid.n;
    if (tol_mean < 0.0) tol_mean = 1e-10 * sup_norm(f);
    double mu = mean(f);
    if (std::abs(mu) > tol_mean)
        throw MeanNotZeroError("antideriv_zero_mean: input mean " + std::to_string(mu) +
                               " exceeds tolerance " + std::to_string(tol_mean));
    Spectrum c = spectrum(f);
    c[0] = 0.0;
    for (int k = 1; k < n; ++k) {
        if (k == n / 2) {
            c[k] = 0.0;
            continue;
        }
        int ks = detail::signed_wavenumber(k, n);
        c[k] /= detail::deriv_multiplier(ks, 1);
    }
    return field_from_spectrum(f.grid, std::move(c));
}

/// Derivative restricted to the modes |k| <= kmax, in a single spectral
/// pass. For high orders this is the only way to differentiate a field that
/// is smooth up to a rounding floor: a separate lowpass would reintroduce
/// an O(eps) floor at every mode through the sample round trip, and the
/// multiplier at the Nyquist mode would amplify it by (pi n)^order.
inline PeriodicField deriv_truncated(const PeriodicField& f, int order, int kmax) {
    if (order < 1) throw Error("deriv_truncated: order must be >= 1");
    const int n = f.grid.n;
    Spectrum c = spectrum(f);
    for (int k = 0; k < n; ++k) {
        int ks = detail::signed_wavenumber(k, n);
        if (std::abs(ks) > kmax || (k == n / 2 && order % 2 == 1)) {
            c[k] = 0.0;
        } else {
            c[k] *= detail::deriv_multiplier(ks, order);
        }
    }
    return field_from_spectrum(f.grid, std::move(c));
}

/// Keep modes |k| <= kmax, zero the rest.
inline PeriodicField lowpass(const PeriodicField& f, int kmax) {
    const int n = f.grid.n;
    Spectrum c = spectrum(f);
    for (int k = 0; k < n; ++k) {
        int ks = detail::signed_wavenumber(k, n);
        if (std::abs(ks) > kmax) c[k] = 0.0;
    }
    return field_from_spectrum(f.grid, std::move(c));
}

/// 2/3-rule truncation for quadratic products.
inline PeriodicField dealias_23(const PeriodicField& f) { return lowpass(f, f.grid.n / 3); }

/// Trigonometric-interpolation evaluator for a sampled field: evaluates the
/// band-limited interpolant and its first derivative at arbitrary points.
/// Cost is O(n) complex multiplies per point (one sin/cos pair per point).
struct TrigInterpolant {
    explicit TrigInterpolant(const PeriodicField& f) : n(f.grid.n), c(spectrum(f)) {}

    double value(double x) const {
        double u, ux;
        eval(x, u, ux);
        return u;
    }

    double deriv1(double x) const {
        double u, ux;
        eval(x, u, ux);
        return ux;
    }

    void eval(double x, double& u, double& ux) const {
        const double two_pi = 2.0 * std::numbers::pi;
        std::complex<double> z(std::cos(two_pi * x), std::sin(two_pi * x));
        std::complex<double> w = z;  // w = z^k
        u = c[0].real();
        ux = 0.0;
        for (int k = 1; k < n / 2; ++k) {
            double re = w.real(), im = w.imag();
            double a = c[k].real(), b = c[k].imag();
            u += 2.0 * (a * re - b * im);
            ux += -2.0 * two_pi * k * (a * im + b * re);
            w *= z;
        }
        // Nyquist: cos(pi n x) continuation, derivative dropped.
        u += c[n / 2].real() * w.real();
    }

    int n;
    Spectrum c;
};

} // namespace muflow
