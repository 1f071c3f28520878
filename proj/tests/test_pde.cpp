#include <doctest.h>

#include <cmath>
#include <numbers>

#include "muflow/io.hpp"
#include "muflow/pde.hpp"

using namespace muflow;
namespace nb = std::numbers;

namespace {

PeriodicField m0_standard(const PeriodicGrid& g) {
    return field_from(g, [](double x) { return 2.0 + std::sin(2.0 * nb::pi * x); });
}

} // namespace

TEST_CASE("rhs_mu_family: constants are steady, mu(u)=0 reduces to -u u_x") {
    PeriodicGrid g = make_grid(128);
    for (double lambda : {2.0, 3.0, 5.0})
        CHECK(sup_norm(rhs_mu_family(constant_field(g, 1.3), lambda)) < 1e-12);

    PeriodicField u = field_from(g, [](double x) { return std::cos(2.0 * nb::pi * x); });
    PeriodicField want = field_from(g, [](double x) { return nb::pi * std::sin(4.0 * nb::pi * x); });
    CHECK(sup_diff(rhs_mu_family(u, 3.0), want) < 1e-9);
}

TEST_CASE("rhs lambda=2 matches the strong-form oracle") {
    // oracle: solve mu(u_t) - u_txx + 2 mu(u) u_x - 2 u_x u_xx - u u_xxx = 0
    // for u_t by applying Lambda_mu^{-2} to the strong right-hand side
    PeriodicGrid g = make_grid(256);
    PeriodicField u = field_from(g, [](double x) {
        return 2.0 + 0.3 * std::sin(2.0 * nb::pi * x) + 0.1 * std::cos(4.0 * nb::pi * x);
    });
    PeriodicField ux = deriv(u, 1), uxx = deriv(u, 2), uxxx = deriv(u, 3);
    PeriodicField strong = -2.0 * mean(u) * ux + 2.0 * (ux * uxx) + u * uxxx;
    PeriodicField want = invert_A_mu(strong);
    CHECK(sup_diff(rhs_mu_family(u, 2.0), want) < 1e-9);
}

TEST_CASE("rhs_muburgers: constant, harmonic, gauge linearity") {
    PeriodicGrid g = make_grid(128);
    CHECK(sup_norm(rhs_muburgers(constant_field(g, 2.0), 0.0)) < 1e-13);

    PeriodicField u = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x); });
    PeriodicField want = field_from(g, [](double x) { return -nb::pi * std::sin(4.0 * nb::pi * x); });
    CHECK(sup_diff(rhs_muburgers(u, 0.0), want) < 1e-10);

    PeriodicField withc = rhs_muburgers(u, 1.0);
    CHECK(sup_diff(withc, rhs_muburgers(u, 0.0) + 1.0) < 1e-15);
}

TEST_CASE("integrate: constant initial data is a fixed point with zero drifts") {
    PeriodicGrid g = make_grid(64);
    SolverParams p;
    p.dt = 1e-2;
    p.t_end = 1.0;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), constant_field(g, 2.0), p);
    CHECK(rec.termination.kind == Termination::Kind::Completed);
    CHECK(sup_diff(rec.snapshots.back(), constant_field(g, 2.0)) < 1e-12);
    for (double h0 : rec.h0_series) CHECK(h0 == doctest::Approx(-9.0).epsilon(1e-12));
}

TEST_CASE("integrate: muDP conservation over a short run") {
    PeriodicGrid g = make_grid(256);
    PeriodicField u0 = invert_A_mu(m0_standard(g));
    SolverParams p;
    p.dt = 1e-3;
    p.t_end = 1.0;
    p.record_every = 10;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), u0, p);
    REQUIRE(rec.termination.kind == Termination::Kind::Completed);

    auto drift = [](const std::vector<double>& s) {
        double worst = 0.0;
        for (double v : s) worst = std::max(worst, std::abs(v - s.front()) / std::abs(s.front()));
        return worst;
    };
    CHECK(drift(rec.h0_series) < 1e-8);
    CHECK(drift(rec.h1_series) < 1e-8);
    CHECK(drift(rec.h2_series) < 1e-8);
    double mean_drift = 0.0;
    for (double v : rec.mean_series) mean_drift = std::max(mean_drift, std::abs(v - rec.mean_series.front()));
    CHECK(mean_drift < 1e-11);

    // h_{-1}(m(t)) rides along as an orbit invariant
    double h0 = h_minus1(apply_A(InertiaOperator::MuMinusDxx, rec.snapshots.front()), DensityWeight{3.0});
    double hT = h_minus1(apply_A(InertiaOperator::MuMinusDxx, rec.snapshots.back()), DensityWeight{3.0});
    CHECK(std::abs(hT - h0) < 1e-6 * std::abs(h0));
}

TEST_CASE("temporal convergence is fourth order") {
    PeriodicGrid g = make_grid(128);
    PeriodicField u0 = invert_A_mu(m0_standard(g));
    auto run = [&](double dt) {
        SolverParams p;
        p.dt = dt;
        p.t_end = 1.0;
        p.record_every = 1 << 20;  // only endpoints
        return integrate(FamilyConfig::mudp(), u0, p).snapshots.back();
    };
    PeriodicField ref = run(2.5e-4 / 8.0);
    double e1 = sup_diff(run(2e-3), ref);
    double e2 = sup_diff(run(1e-3), ref);
    double ratio = e1 / e2;
    CHECK(ratio > 10.0);
    CHECK(ratio < 24.0);
}

TEST_CASE("spatial refinement converges spectrally") {
    auto run_n = [&](int n) {
        PeriodicGrid g = make_grid(n);
        PeriodicField u0 = field_from(g, [](double x) { return 2.0 + 0.5 * std::exp(std::sin(2.0 * nb::pi * x)) / 2.0; });
        SolverParams p;
        p.dt = 1e-3;
        p.t_end = 0.2;
        p.record_every = 1 << 20;
        return integrate(FamilyConfig::mudp(), u0, p).snapshots.back();
    };
    PeriodicField ref = run_n(256);
    auto err_against_ref = [&](const PeriodicField& u) {
        double worst = 0.0;
        int stride = 256 / u.grid.n;
        for (int j = 0; j < u.grid.n; ++j) worst = std::max(worst, std::abs(u[j] - ref[j * stride]));
        return worst;
    };
    double e32 = err_against_ref(run_n(32));
    double e64 = err_against_ref(run_n(64));
    CHECK(e64 < e32 / 100.0);
}

TEST_CASE("muB blow-up is detected near the characteristic crossing time") {
    PeriodicGrid g = make_grid(512);
    PeriodicField u0 = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x) / (2.0 * nb::pi); });
    CHECK(predict_blowup_time(u0) == doctest::Approx(1.0).epsilon(1e-10));

    SolverParams p;
    p.dt = 5e-4;
    p.t_end = 1.5;
    p.dealias = true;
    p.adaptive_blowup = true;
    p.blowup_slope_threshold = 100.0;  // resolvable at n = 512
    SimulationRecord rec = integrate(FamilyConfig::muburgers(), u0, p);
    REQUIRE(rec.termination.kind == Termination::Kind::BlowupDetected);
    CHECK(std::abs(rec.termination.t_est - 1.0) < 0.02);
}

TEST_CASE("predict_blowup_time formula and contracts") {
    PeriodicGrid g = make_grid(128);
    for (double a : {1.0 / (2.0 * nb::pi), 1.0 / (4.0 * nb::pi), 0.5}) {
        PeriodicField u0 = field_from(g, [a](double x) { return a * std::sin(2.0 * nb::pi * x); });
        CHECK(predict_blowup_time(u0) == doctest::Approx(1.0 / (2.0 * nb::pi * a)).epsilon(1e-9));
    }
    CHECK(std::isinf(predict_blowup_time(PeriodicField(g))));
    CHECK_THROWS_AS(predict_blowup_time(constant_field(g, 1.0)), MeanNotZeroError);
}

TEST_CASE("detect_blowup requires a blown-up record") {
    PeriodicGrid g = make_grid(64);
    SolverParams p;
    p.dt = 1e-2;
    p.t_end = 0.5;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), constant_field(g, 1.0), p);
    CHECK_THROWS_AS(detect_blowup(rec), Error);
}

TEST_CASE("flow map: uniform translation and rest") {
    PeriodicGrid g = make_grid(64);
    SolverParams p;
    p.dt = 1e-2;
    p.t_end = 0.5;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), constant_field(g, 2.0), p);
    auto flow = flow_map(rec);
    for (int j = 0; j < g.n; ++j) {
        CHECK(flow.back().xi[j] == doctest::Approx(g.point(j) + 2.0 * 0.5).epsilon(1e-12));
        CHECK(flow.back().dxi[j] == doctest::Approx(1.0).epsilon(1e-12));
    }

    SimulationRecord rest = integrate(FamilyConfig::mudp(), PeriodicField(g), p);
    auto flow0 = flow_map(rest);
    for (int j = 0; j < g.n; ++j)
        CHECK(flow0.back().xi[j] == doctest::Approx(g.point(j)).epsilon(1e-13));
}

TEST_CASE("muB explicit flow formula holds before blow-up") {
    PeriodicGrid g = make_grid(256);
    PeriodicField u0 = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x); });
    SolverParams p;
    p.dt = 1e-4;
    p.t_end = 0.02;
    p.record_every = 1;
    SimulationRecord rec = integrate(FamilyConfig::muburgers(), u0, p);
    auto flow = flow_map(rec);
    const auto& last = flow.back();
    double t = rec.times.back();
    double worst = 0.0;
    for (int j = 0; j < g.n; ++j) {
        double want = g.point(j) + t * (u0[j] - u0[0]);
        worst = std::max(worst, std::abs((last.xi[j] - last.xi[0]) - want));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("pointwise law: tight for the evolved weight, O(1) for a mismatch") {
    PeriodicGrid g = make_grid(256);
    PeriodicField u0 = invert_A_mu(m0_standard(g));
    SolverParams p;
    p.dt = 1e-3;
    p.t_end = 1.0;
    p.track_flow = true;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), u0, p);
    double dev = 0.0;
    for (double d : rec.pointwise_dev_series) dev = std::max(dev, d);
    CHECK(dev < 1e-5);

    // same flow monitored with the wrong weight
    std::vector<FlowMapState> flow;
    for (auto& fst : rec.flow) flow.push_back(fst);
    auto bad = pointwise_law_deviation(rec, flow, 2.0);
    double worst = 0.0;
    for (double d : bad) worst = std::max(worst, d);
    CHECK(worst > 1e-2);
}

TEST_CASE("muB invariants int (u - mu)^p are conserved") {
    PeriodicGrid g = make_grid(256);
    PeriodicField u0 = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x); });
    SolverParams p;
    p.dt = 1e-4;
    p.t_end = 0.1;
    p.record_every = 100;
    SimulationRecord rec = integrate(FamilyConfig::muburgers(), u0, p);
    FamilyConfig cfg = FamilyConfig::muburgers();
    for (int pw : {1, 2, 3}) {
        double i0 = eval_functional(Functional::mub_moment(pw), rec.snapshots.front(), cfg);
        double iT = eval_functional(Functional::mub_moment(pw), rec.snapshots.back(), cfg);
        CHECK(std::abs(iT - i0) < 1e-8);
    }
}

TEST_CASE("global bound monitor") {
    PeriodicGrid g = make_grid(256);
    SolverParams p;
    p.dt = 1e-3;
    p.t_end = 2.0;
    p.record_every = 50;

    SimulationRecord good = integrate(FamilyConfig::mudp(), invert_A_mu(m0_standard(g)), p);
    GlobalBoundReport rep = global_bound_monitor(good);
    CHECK(rep.ok);
    CHECK(rep.margin > 0.0);

    SimulationRecord flat = integrate(FamilyConfig::mudp(), constant_field(g, 1.0), p);
    CHECK(global_bound_monitor(flat).ok);

    PeriodicField bad0 = invert_A_mu(field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x); }));
    SolverParams q = p;
    q.t_end = 0.1;
    SimulationRecord bad = integrate(FamilyConfig::mudp(), bad0, q);
    CHECK_THROWS_AS(global_bound_monitor(bad), HypothesisViolatedError);
}

TEST_CASE("integrate rejects bad configs") {
    PeriodicGrid g = make_grid(64);
    SolverParams p;
    p.dt = -1.0;
    CHECK_THROWS_AS(integrate(FamilyConfig::mudp(), PeriodicField(g), p), ConfigError);
    SolverParams q;
    FamilyConfig classical{2.0, InertiaOperator::OneMinusDxx, {}};
    CHECK_THROWS_AS(integrate(classical, PeriodicField(g), q), ConfigError);
}

TEST_CASE("muB agrees with the method of characteristics before blow-up") {
    // u(t, x + t u0(x)) = u0(x) for the gauge-0 flow
    PeriodicGrid g = make_grid(256);
    PeriodicField u0 = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x); });
    SolverParams p;
    p.dt = 1e-4;
    p.t_end = 0.1;
    p.record_every = 1 << 20;
    SimulationRecord rec = integrate(FamilyConfig::muburgers(), u0, p);
    TrigInterpolant ut(rec.snapshots.back());
    double t = rec.times.back();
    double worst = 0.0;
    for (int j = 0; j < g.n; ++j)
        worst = std::max(worst, std::abs(ut.value(g.point(j) + t * u0[j]) - u0[j]));
    CHECK(worst < 1e-8);
}

TEST_CASE("pointwise law is tight across family weights") {
    for (double lambda : {2.0, 5.0, -1.0}) {
        PeriodicGrid g = make_grid(128);
        PeriodicField u0 = invert_A_mu(m0_standard(g));
        SolverParams p;
        p.dt = 1e-3;
        p.t_end = 0.5;
        p.record_every = 25;
        p.track_flow = true;
        SimulationRecord rec = integrate(FamilyConfig::mu_lambda(lambda), u0, p);
        REQUIRE(rec.termination.kind == Termination::Kind::Completed);
        double dev = 0.0;
        for (double d : rec.pointwise_dev_series) dev = std::max(dev, d);
        CAPTURE(lambda);
        CHECK(dev < 1e-6);
    }
}

TEST_CASE("blow-up estimate holds for a third amplitude") {
    // a = 1/pi gives T_c = 1/(2 pi a) = 0.5
    PeriodicGrid g = make_grid(512);
    PeriodicField u0 = field_from(g, [](double x) { return std::sin(2.0 * nb::pi * x) / nb::pi; });
    SolverParams p;
    p.dt = 2e-4;
    p.t_end = 0.8;
    p.dealias = true;
    p.adaptive_blowup = true;
    p.blowup_slope_threshold = 200.0;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), u0, p);
    REQUIRE(rec.termination.kind == Termination::Kind::BlowupDetected);
    CHECK(std::abs(rec.termination.t_est - 0.5) < 0.01);
}

TEST_CASE("wildly unstable step ends in NonFinite termination") {
    PeriodicGrid g = make_grid(64);
    PeriodicField u0 = field_from(g, [](double x) { return 5.0 * std::sin(2.0 * nb::pi * x); });
    SolverParams p;
    p.dt = 0.5;
    p.t_end = 50.0;
    p.blowup_slope_threshold = 1e300;  // keep the slope guard out of the way
    SimulationRecord rec = integrate(FamilyConfig::muburgers(), u0, p);
    CHECK(rec.termination.kind == Termination::Kind::NonFinite);
    CHECK(rec.termination.t < 50.0);
}

TEST_CASE("conservation drift shrinks at least fourth order in dt") {
    PeriodicGrid g = make_grid(128);
    PeriodicField u0 = invert_A_mu(m0_standard(g));
    auto h2_drift = [&](double dt) {
        SolverParams p;
        p.dt = dt;
        p.t_end = 1.0;
        p.record_every = 1 << 20;
        SimulationRecord rec = integrate(FamilyConfig::mudp(), u0, p);
        return std::abs(rec.h2_series.back() - rec.h2_series.front()) /
               std::abs(rec.h2_series.front());
    };
    double coarse = h2_drift(3e-3);
    double fine = h2_drift(1.5e-3);
    CHECK(coarse / fine > 10.0);
    CHECK(coarse / fine < 100.0);
}
