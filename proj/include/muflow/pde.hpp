#pragma once

// Method-of-lines evolution of the mu-family weak form (L1) and the
// muBurgers equation: classical RK4 in time, Fourier-multiplier derivatives
// in space. Includes flow-map integration, the pointwise density law,
// blow-up prediction/detection, and the global-existence bound monitor.

#include <cmath>
#include <limits>
#include <vector>

#include "muflow/family.hpp"
#include "muflow/hamiltonian.hpp"

namespace muflow {

struct SolverParams {
    int n = 0;  // 0: take the grid from the initial field
    double dt = 1e-3;
    double t_end = 1.0;
    bool dealias = false;  // 2/3-rule truncation of quadratic products
    double blowup_slope_threshold = 1e3;
    int record_every = 1;
    bool track_flow = false;      // co-integrate xi, dxi with the RK4 stages
    bool adaptive_blowup = false; // halve dt as the slope grows
    double cfl_max = 0.3;         // adaptive trigger: dt * |u_x|_inf > cfl_max
};

struct Termination {
    enum class Kind { Completed, BlowupDetected, NonFinite };
    Kind kind = Kind::Completed;
    double t = 0.0;
    double t_est = std::numeric_limits<double>::quiet_NaN();  // fitted T_c for blow-up
};

/// Flow map at one record time: xi samples (unwrapped, xi(0,x) = x) and
/// dxi/dx samples. The record stays a diffeomorphism while min dxi > 0.
struct FlowMapState {
    std::vector<double> xi;
    std::vector<double> dxi;
};

struct SimulationRecord {
    FamilyConfig config;
    PeriodicGrid grid;
    SolverParams params;
    std::vector<double> times;
    std::vector<PeriodicField> snapshots;
    std::vector<FlowMapState> flow;  // nonempty iff params.track_flow
    std::vector<double> mean_series, h0_series, h1_series, h2_series, ux_inf_series,
        pointwise_dev_series;
    Termination termination;
};

namespace detail {

inline PeriodicField quad_product(const PeriodicField& a, const PeriodicField& b, bool dealias) {
    PeriodicField p = a * b;
    return dealias ? dealias_23(p) : p;
}

} // namespace detail

/// Right-hand side of (L1):
///   u_t = -(1/2)(u^2)_x - Lambda_mu^{-2} dx( lambda mu(u) u + (3-lambda)/2 u_x^2 ).
/// The advection term is kept in divergence form so the k = 0 mode of the
/// right-hand side vanishes identically and the mean is conserved to
/// rounding. For lambda = 3 the u_x^2 flux drops and this is the muDP
/// Cauchy form.
inline PeriodicField rhs_mu_family(const PeriodicField& u, double lambda, bool dealias = false) {
    PeriodicField adv = -0.5 * deriv(detail::quad_product(u, u, dealias), 1);
    PeriodicField flux = lambda * mean(u) * u;
    if (lambda != 3.0) {
        PeriodicField ux = deriv(u, 1);
        flux = flux + 0.5 * (3.0 - lambda) * detail::quad_product(ux, ux, dealias);
    }
    return adv - invert_A_mu(deriv(flux, 1), InverseMethod::Spectral);
}

/// muBurgers with gauge value c = mu(u_t):  u_t = -(1/2)(u^2)_x + c.
inline PeriodicField rhs_muburgers(const PeriodicField& u, double c, bool dealias = false) {
    return -0.5 * deriv(detail::quad_product(u, u, dealias), 1) + c;
}

/// Blow-up time of the zero-mean muDP mechanism: T_c = -1 / min u0_x
/// (the Riccati solution w = 1/(t + 1/u0_x) along characteristics).
/// Returns +inf when u0_x >= 0 everywhere (rest state).
inline double predict_blowup_time(const PeriodicField& u0) {
    double tol = 1e-10 * sup_norm(u0);
    if (std::abs(mean(u0)) > tol)
        throw MeanNotZeroError("predict_blowup_time: formula needs zero-mean data");
    double mn = min_value(deriv(u0, 1));
    if (mn >= -1e-14) return std::numeric_limits<double>::infinity();
    return -1.0 / mn;
}

/// Least-squares fit of 1/|u_x(t)|_inf ~ b (T_c - t) over the steep tail of
/// a run that terminated with BlowupDetected; returns the fitted T_c.
inline double detect_blowup(const SimulationRecord& rec, double window_lo = 20.0,
                            double window_hi = std::numeric_limits<double>::infinity()) {
    if (rec.termination.kind != Termination::Kind::BlowupDetected)
        throw Error("detect_blowup: record did not terminate with BlowupDetected");
    std::vector<double> ts, ys;
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        if (rec.ux_inf_series[i] >= window_lo && rec.ux_inf_series[i] <= window_hi) {
            ts.push_back(rec.times[i]);
            ys.push_back(1.0 / rec.ux_inf_series[i]);
        }
    }
    if (ts.size() < 5) throw FitFailedError("detect_blowup: too few samples in the fit window");
    for (std::size_t i = 1; i < ys.size(); ++i)
        if (ys[i] > ys[i - 1] * (1.0 + 1e-6))
            throw FitFailedError("detect_blowup: reciprocal slope series is not decreasing");

    // y = a - b t, T_c = a/b
    double n = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sy += ys[i];
        stt += ts[i] * ts[i];
        sty += ts[i] * ys[i];
    }
    double denom = n * stt - st * st;
    double slope = (n * sty - st * sy) / denom;  // = -b
    double a = (sy - slope * st) / n;
    if (slope >= 0.0) throw FitFailedError("detect_blowup: fitted slope is not negative");
    return -a / slope;
}

namespace detail {

struct FlowState {
    std::vector<double> xi, w;
};

// d/dt of (xi, w) given the interpolant of the current velocity field.
inline void flow_rhs(const TrigInterpolant& ui, const std::vector<double>& xi,
                     const std::vector<double>& w, std::vector<double>& dxi,
                     std::vector<double>& dw) {
    const std::size_t n = xi.size();
    dxi.resize(n);
    dw.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double u, ux;
        ui.eval(xi[j], u, ux);
        dxi[j] = u;
        dw[j] = ux * w[j];
    }
}

} // namespace detail

/// Evolve u0 under the configured family up to t_end (or early termination).
/// Invariants are sampled at t = 0, every record_every steps, and at the
/// final time. With track_flow the flow map (xi, dxi) is advanced inside the
/// same RK4 stages as u, so the pointwise-law deviation inherits the full
/// O(dt^4) accuracy.
inline SimulationRecord integrate(const FamilyConfig& config, const PeriodicField& u0,
                                  const SolverParams& params) {
    if (params.dt <= 0.0 || params.t_end <= 0.0)
        throw ConfigError("integrate: dt and t_end must be positive");
    if (params.n != 0 && params.n != u0.grid.n)
        throw ConfigError("integrate: params.n does not match the initial field");
    if (params.record_every < 1) throw ConfigError("integrate: record_every must be >= 1");
    if (config.op == InertiaOperator::OneMinusDxx)
        throw ConfigError("integrate: classical A = 1 - dxx evolution is not supported");
    const bool mub = config.is_muburgers();

    SimulationRecord rec;
    rec.config = config;
    rec.grid = u0.grid;
    rec.params = params;

    const int n = u0.grid.n;
    const double lambda = config.lambda;
    PeriodicField u = u0;
    PeriodicField m0 = apply_A(config.op, u0);

    detail::FlowState fs;
    if (params.track_flow) {
        fs.xi.resize(n);
        fs.w.assign(n, 1.0);
        for (int j = 0; j < n; ++j) fs.xi[j] = u0.grid.point(j);
    }

    auto rhs_u = [&](const PeriodicField& uu, double t) {
        return mub ? rhs_muburgers(uu, config.gauge(t), params.dealias)
                   : rhs_mu_family(uu, lambda, params.dealias);
    };

    auto record_state = [&](double t) {
        rec.times.push_back(t);
        rec.snapshots.push_back(u);
        rec.mean_series.push_back(mean(u));
        double h0 = std::numeric_limits<double>::quiet_NaN();
        double h2 = std::numeric_limits<double>::quiet_NaN();
        if (lambda != 1.0) h0 = eval_functional(Functional::h0(), u, config);
        if (lambda == 3.0) h2 = eval_functional(Functional::h2(), u, config);
        rec.h0_series.push_back(h0);
        rec.h1_series.push_back(eval_functional(Functional::h1(), u, config));
        rec.h2_series.push_back(h2);
        rec.ux_inf_series.push_back(sup_norm(deriv(u, 1)));
        double dev = std::numeric_limits<double>::quiet_NaN();
        if (params.track_flow) {
            rec.flow.push_back(FlowMapState{fs.xi, fs.w});
            PeriodicField mt = apply_A(config.op, u);
            TrigInterpolant mi(mt);
            dev = 0.0;
            for (int j = 0; j < n; ++j) {
                double val = mi.value(fs.xi[j]) * std::pow(fs.w[j], lambda) - m0[j];
                dev = std::max(dev, std::abs(val));
            }
        }
        rec.pointwise_dev_series.push_back(dev);
    };

    double t = 0.0;
    double dt = params.dt;
    long step = 0;
    record_state(t);

    std::vector<double> xi1, w1, xi2, w2, xi3, w3, xi4, w4, kxi, kw;
    while (t < params.t_end - 1e-12) {
        if (params.adaptive_blowup) {
            double slope = sup_norm(deriv(u, 1));
            while (dt * slope > params.cfl_max && dt > params.dt * 0x1p-40) dt *= 0.5;
        }
        double h = std::min(dt, params.t_end - t);

        PeriodicField k1 = rhs_u(u, t);
        PeriodicField u2 = u + 0.5 * h * k1;
        PeriodicField k2 = rhs_u(u2, t + 0.5 * h);
        PeriodicField u3 = u + 0.5 * h * k2;
        PeriodicField k3 = rhs_u(u3, t + 0.5 * h);
        PeriodicField u4 = u + h * k3;
        PeriodicField k4 = rhs_u(u4, t + h);

        if (params.track_flow) {
            TrigInterpolant i1(u), i2(u2), i3(u3), i4(u4);
            detail::flow_rhs(i1, fs.xi, fs.w, xi1, w1);
            kxi = fs.xi;
            kw = fs.w;
            for (int j = 0; j < n; ++j) {
                kxi[j] = fs.xi[j] + 0.5 * h * xi1[j];
                kw[j] = fs.w[j] + 0.5 * h * w1[j];
            }
            detail::flow_rhs(i2, kxi, kw, xi2, w2);
            for (int j = 0; j < n; ++j) {
                kxi[j] = fs.xi[j] + 0.5 * h * xi2[j];
                kw[j] = fs.w[j] + 0.5 * h * w2[j];
            }
            detail::flow_rhs(i3, kxi, kw, xi3, w3);
            for (int j = 0; j < n; ++j) {
                kxi[j] = fs.xi[j] + h * xi3[j];
                kw[j] = fs.w[j] + h * w3[j];
            }
            detail::flow_rhs(i4, kxi, kw, xi4, w4);
            for (int j = 0; j < n; ++j) {
                fs.xi[j] += h / 6.0 * (xi1[j] + 2.0 * xi2[j] + 2.0 * xi3[j] + xi4[j]);
                fs.w[j] += h / 6.0 * (w1[j] + 2.0 * w2[j] + 2.0 * w3[j] + w4[j]);
            }
        }

        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        ++step;

        if (!all_finite(u)) {
            rec.termination = {Termination::Kind::NonFinite, t, std::numeric_limits<double>::quiet_NaN()};
            return rec;
        }

        bool at_end = t >= params.t_end - 1e-12;
        bool recorded = (step % params.record_every == 0) || at_end;
        if (recorded) record_state(t);

        double slope = recorded ? rec.ux_inf_series.back() : sup_norm(deriv(u, 1));
        if (slope > params.blowup_slope_threshold) {
            if (!recorded) record_state(t);
            rec.termination.kind = Termination::Kind::BlowupDetected;
            rec.termination.t = t;
            try {
                // fit below the slope the grid can resolve; past ~0.4x the
                // threshold the recorded slope saturates and would bias T_c
                rec.termination.t_est =
                    detect_blowup(rec, std::max(10.0, 0.02 * params.blowup_slope_threshold),
                                  0.4 * params.blowup_slope_threshold);
            } catch (const FitFailedError&) {
                // leave t_est as NaN; callers can still inspect the series
            }
            return rec;
        }
    }

    rec.termination = {Termination::Kind::Completed, t, std::numeric_limits<double>::quiet_NaN()};
    return rec;
}

/// Post-hoc flow map from a record: integrates xi_dot = u(t, xi) with the
/// same RK4 stepping, u interpolated linearly in time between snapshots and
/// trigonometrically in space. One RK4 step per record interval, so accuracy
/// is set by the recording density (the co-integrated flow inside integrate
/// is the high-accuracy path). Throws NotADiffeoError when dxi <= 0 is
/// detected.
inline std::vector<FlowMapState> flow_map(const SimulationRecord& rec) {
    const int n = rec.grid.n;
    const std::size_t nt = rec.times.size();
    std::vector<FlowMapState> out;
    out.reserve(nt);

    std::vector<double> xi(n), w(n, 1.0);
    for (int j = 0; j < n; ++j) xi[j] = rec.grid.point(j);
    out.push_back({xi, w});

    std::vector<double> d1x, d1w, d2x, d2w, d3x, d3w, d4x, d4w, tx, tw;
    for (std::size_t i = 0; i + 1 < nt; ++i) {
        double h = rec.times[i + 1] - rec.times[i];
        PeriodicField umid = 0.5 * (rec.snapshots[i] + rec.snapshots[i + 1]);
        TrigInterpolant ia(rec.snapshots[i]), im(umid), ib(rec.snapshots[i + 1]);

        detail::flow_rhs(ia, xi, w, d1x, d1w);
        tx = xi;
        tw = w;
        for (int j = 0; j < n; ++j) {
            tx[j] = xi[j] + 0.5 * h * d1x[j];
            tw[j] = w[j] + 0.5 * h * d1w[j];
        }
        detail::flow_rhs(im, tx, tw, d2x, d2w);
        for (int j = 0; j < n; ++j) {
            tx[j] = xi[j] + 0.5 * h * d2x[j];
            tw[j] = w[j] + 0.5 * h * d2w[j];
        }
        detail::flow_rhs(im, tx, tw, d3x, d3w);
        for (int j = 0; j < n; ++j) {
            tx[j] = xi[j] + h * d3x[j];
            tw[j] = w[j] + h * d3w[j];
        }
        detail::flow_rhs(ib, tx, tw, d4x, d4w);
        for (int j = 0; j < n; ++j) {
            xi[j] += h / 6.0 * (d1x[j] + 2.0 * d2x[j] + 2.0 * d3x[j] + d4x[j]);
            w[j] += h / 6.0 * (d1w[j] + 2.0 * d2w[j] + 2.0 * d3w[j] + d4w[j]);
        }
        for (int j = 0; j < n; ++j)
            if (w[j] <= 0.0)
                throw NotADiffeoError("flow_map: dxi <= 0, flow left the diffeomorphism group");
        out.push_back({xi, w});
    }
    return out;
}

/// max_x | m(t, xi(t,x)) (dxi)^lambda - m(0,x) | per recorded time; the
/// pointwise conservation law says this is zero along exact solutions.
inline std::vector<double> pointwise_law_deviation(const SimulationRecord& rec,
                                                   const std::vector<FlowMapState>& flow,
                                                   double lambda) {
    if (rec.config.op == InertiaOperator::OneMinusDxx)
        throw ConfigError("pointwise_law_deviation: operator must be mu-dxx or -dxx");
    const int n = rec.grid.n;
    PeriodicField m0 = apply_A(rec.config.op, rec.snapshots.front());
    std::vector<double> dev;
    dev.reserve(flow.size());
    for (std::size_t i = 0; i < flow.size() && i < rec.snapshots.size(); ++i) {
        PeriodicField mt = apply_A(rec.config.op, rec.snapshots[i]);
        TrigInterpolant mi(mt);
        double d = 0.0;
        for (int j = 0; j < n; ++j) {
            double val = mi.value(flow[i].xi[j]) * std::pow(flow[i].dxi[j], lambda) - m0[j];
            d = std::max(d, std::abs(val));
        }
        dev.push_back(d);
    }
    return dev;
}

struct GlobalBoundReport {
    bool ok = false;
    double margin = 0.0;  // min over t of C mu(u0) - |u_x|_inf
};

/// Global-existence monitor for Lambda_mu^2 u0 >= 0 data. Differentiating
/// the closed-form inverse gives
///   u_x(x) = (x - 1/2) mu(m) + int_0^1 int_0^x' m - int_0^x m,
/// and for m >= 0 the three pieces are bounded by mu/2, mu, mu, so
/// |u_x|_inf <= (3/2) mu(m); C = 2 is used with margin. Checks that
/// min_x m(t) stays nonnegative (within tol_sign) and that the bound holds
/// throughout the record.
inline GlobalBoundReport global_bound_monitor(const SimulationRecord& rec,
                                              double tol_sign = -1.0) {
    if (rec.config.op != InertiaOperator::MuMinusDxx)
        throw ConfigError("global_bound_monitor: needs the mu - dxx family");
    PeriodicField m0 = apply_A(rec.config.op, rec.snapshots.front());
    double scale = sup_norm(m0);
    if (tol_sign < 0.0) tol_sign = 1e-8 * std::max(1.0, scale);
    if (min_value(m0) < -1e-12 * std::max(1.0, scale))
        throw HypothesisViolatedError("global_bound_monitor: Lambda_mu^2 u0 changes sign");
    double mu0 = mean(rec.snapshots.front());
    if (std::abs(mu0) < 1e-12 * std::max(1.0, sup_norm(rec.snapshots.front())))
        throw HypothesisViolatedError("global_bound_monitor: mu(u0) must be nonzero");

    const double C = 2.0;
    GlobalBoundReport rep;
    rep.ok = true;
    rep.margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
        PeriodicField mt = apply_A(rec.config.op, rec.snapshots[i]);
        if (min_value(mt) < -tol_sign) rep.ok = false;
        double margin = C * std::abs(mu0) - rec.ux_inf_series[i];
        rep.margin = std::min(rep.margin, margin);
        if (margin < 0.0) rep.ok = false;
    }
    return rep;
}

} // namespace muflow
