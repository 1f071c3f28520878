#include <doctest.h>

#include <cmath>
#include <numbers>

#include "muflow/peakon.hpp"

using namespace muflow;
namespace nb = std::numbers;

TEST_CASE("reconstruct_u pinned values") {
    PeakonState one{{0.0}, {1.0}};
    CHECK(peakon_u(one, GreensFamily::Mu, 0.0) == doctest::Approx(13.0 / 12.0).epsilon(1e-14));

    // p = 12c/13 gives peak height c and mean 12c/13
    double c = 0.75;
    PeakonState pk{{0.0}, {12.0 * c / 13.0}};
    CHECK(peakon_u(pk, GreensFamily::Mu, 0.0) == doctest::Approx(c).epsilon(1e-15));
    PeriodicGrid g = make_grid(2048);
    CHECK(mean(reconstruct_u(pk, GreensFamily::Mu, g)) ==
          doctest::Approx(12.0 * c / 13.0).epsilon(1e-7));

    PeakonState two{{0.0, 0.5}, {1.0, -1.0}};
    CHECK(peakon_u(two, GreensFamily::Mu, 0.0) == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
}

TEST_CASE("regularized_ux") {
    PeakonState one{{0.3}, {2.0}};
    CHECK(regularized_ux(one, GreensFamily::Mu, 0) == 0.0);

    PeakonState half{{0.0, 0.5}, {0.7, 1.3}};
    CHECK(regularized_ux(half, GreensFamily::Mu, 0) == doctest::Approx(0.0).epsilon(1e-15));

    PeakonState quarter{{0.0, 0.25}, {1.0, 1.0}};
    CHECK(regularized_ux(quarter, GreensFamily::Mu, 0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("peakon_rhs: single peak, symmetric pair, collisions, excluded weights") {
    PeakonState one{{0.2}, {0.9}};
    PeakonDeriv d = peakon_rhs(one, 3.0, GreensFamily::Mu);
    CHECK(d.dq[0] == doctest::Approx(13.0 * 0.9 / 12.0).epsilon(1e-15));
    CHECK(d.dp[0] == 0.0);

    PeakonState sym{{0.0, 0.5}, {0.4, 0.4}};
    PeakonDeriv ds = peakon_rhs(sym, 5.0, GreensFamily::Mu);
    CHECK(ds.dp[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ds.dp[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(ds.dq[0] == doctest::Approx(0.4 * 49.0 / 24.0).epsilon(1e-15));
    CHECK(ds.dq[1] == doctest::Approx(0.4 * 49.0 / 24.0).epsilon(1e-15));

    PeakonState collide{{0.1, 0.1 + 1e-12}, {1.0, 1.0}};
    CHECK_THROWS_AS(peakon_rhs(collide, 3.0, GreensFamily::Mu), CollisionError);
    CHECK_THROWS_AS(peakon_rhs(one, 1.0, GreensFamily::Mu), Error);
}

TEST_CASE("lambda=2 peakon system is canonically Hamiltonian for h") {
    // oracle: hand gradient of h = (1/2) sum p_i p_j g(q_i - q_j)
    PeakonState st{{0.12, 0.43, 0.77}, {0.8, -0.3, 0.5}};
    PeakonDeriv d = peakon_rhs(st, 2.0, GreensFamily::Mu);
    for (int i = 0; i < 3; ++i) {
        double dq = 0.0, dp = 0.0;
        for (int j = 0; j < 3; ++j) {
            dq += st.p[j] * greens_eval(GreensFamily::Mu, st.q[i] - st.q[j]);
            dp += st.p[j] * greens_deriv(GreensFamily::Mu, st.q[i] - st.q[j]);
        }
        dp *= -st.p[i];
        CHECK(d.dq[i] == doctest::Approx(dq).epsilon(1e-14));
        CHECK(d.dp[i] == doctest::Approx(dp).epsilon(1e-14));
    }
}

TEST_CASE("antipodal antisymmetric pair: momentum transfer vanishes") {
    PeakonState st{{0.0, 0.5}, {0.6, -0.6}};
    PeakonDeriv d = peakon_rhs(st, 2.0, GreensFamily::Mu);
    CHECK(d.dp[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d.dp[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("one-peakon travels at speed c = 13p/12 and wraps") {
    double p = 12.0 / 13.0;  // c = 1
    PeakonTrajectory traj = integrate_peakons(PeakonState{{0.0}, {p}}, 3.0, GreensFamily::Mu, 1.0, 1e-3);
    CHECK(traj.status == TrajectoryStatus::Completed);
    CHECK(traj.q_raw.back()[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(traj.states.back().q[0] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(traj.states.back().p[0] == doctest::Approx(p).epsilon(1e-14));
}

TEST_CASE("muCH two-peakon conserves h and sum p") {
    PeakonState st{{0.15, 0.55}, {0.6, 0.25}};
    PeakonTrajectory traj = integrate_peakons(st, 2.0, GreensFamily::Mu, 2.0, 1e-3);
    REQUIRE(traj.status == TrajectoryStatus::Completed);
    double h0 = peakon_h(traj.states.front(), GreensFamily::Mu);
    double P0 = sum_p(traj.states.front());
    for (const auto& s : traj.states) {
        CHECK(std::abs(peakon_h(s, GreensFamily::Mu) - h0) < 1e-10);
        CHECK(std::abs(sum_p(s) - P0) < 1e-12);
    }
}

TEST_CASE("one_peakon_profile pinned values and identity with p g") {
    CHECK(one_peakon_profile(26.0, 0.0) == doctest::Approx(23.0).epsilon(1e-14));
    CHECK(one_peakon_profile(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(one_peakon_profile(1.0, -0.5) == doctest::Approx(1.0).epsilon(1e-15));

    double c = 1.7;
    for (double x = -0.5; x <= 0.5; x += 1.0 / 64.0) {
        double viag = 12.0 * c / 13.0 * greens_eval(GreensFamily::Mu, x - 0.5);
        CHECK(one_peakon_profile(c, x) == doctest::Approx(viag).epsilon(1e-14));
    }
}

TEST_CASE("reconstructed one-peakon equals the traveling profile up to the shift") {
    double c = 1.0, p = 12.0 / 13.0;
    PeakonState st{{0.0}, {p}};
    for (double x = 0.0; x < 1.0; x += 1.0 / 128.0) {
        double u = peakon_u(st, GreensFamily::Mu, x);
        double phi = one_peakon_profile(c, x - 0.5);
        CHECK(u == doctest::Approx(phi).epsilon(1e-14));
    }
}

TEST_CASE("poisson brackets: diagonals, pinned value, antisymmetry") {
    PeakonState st{{0.0, 0.25}, {1.0, 1.0}};
    PoissonBrackets B = poisson_brackets(st, 3.0);
    CHECK(B.qq[0][0] == 0.0);
    CHECK(B.pp[0][0] == 0.0);
    CHECK(B.qp[0][1] == doctest::Approx(-(2.0 / 9.0) * (95.0 / 96.0)).epsilon(1e-15));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(B.qq[i][j] == doctest::Approx(-B.qq[j][i]).epsilon(1e-14));
            CHECK(B.pp[i][j] == doctest::Approx(-B.pp[j][i]).epsilon(1e-14));
        }
}

TEST_CASE("bracket flow of H0 reproduces the peakon system") {
    PeakonState st{{0.05, 0.33, 0.61, 0.9}, {0.4, -0.2, 0.7, 0.1}};
    for (double lambda : {-2.0, 2.0, 3.0, 5.0})
        CHECK(hamiltonian_flow_check(st, lambda) < 1e-12);
    // single peak: both sides give (13p/12, 0)
    PeakonState one{{0.4}, {0.6}};
    CHECK(hamiltonian_flow_check(one, 3.0) < 1e-15);
}

TEST_CASE("reduced two-peakon: degenerate cases and second-order residual") {
    ReducedTwoPeakon r;
    r.Q = 0.3;
    r.P = 0.0;
    r.h = 0.8;
    r.H0 = -2.0;
    CHECK(reduced_two_peakon_rhs(r).dQ == 0.0);

    // p2 = 0 makes alpha vanish, so P freezes
    PeakonState st{{0.1, 0.4}, {0.9, 0.0}};
    ReducedTwoPeakon rz = ReducedTwoPeakon::from_state(st);
    CHECK(rz.alpha() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(reduced_two_peakon_rhs(rz).dP == doctest::Approx(0.0).epsilon(1e-13));

    ReducedTwoPeakon rr;
    rr.Q = -0.41;
    rr.P = 0.7;
    rr.h = 0.33;
    rr.H0 = -1.1;
    CHECK(std::abs(reduced_second_order_residual(rr)) < 1e-13);

    rr.Q = 0.0;
    CHECK_THROWS_AS(reduced_two_peakon_rhs(rr), DegenerateQError);
}

TEST_CASE("reduced system tracks the full two-peakon dynamics") {
    PeakonState st{{0.15, 0.55}, {0.6, 0.25}};
    double T = 2.0, dt = 1e-3;
    PeakonTrajectory full = integrate_peakons(st, 2.0, GreensFamily::Mu, T, dt);
    REQUIRE(full.status == TrajectoryStatus::Completed);
    ReducedTrajectory red = integrate_reduced(ReducedTwoPeakon::from_state(st), T, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < full.times.size(); ++i) {
        double Q = full.q_raw[i][1] - full.q_raw[i][0];
        double P = full.states[i].p[1] - full.states[i].p[0];
        worst = std::max(worst, std::abs(Q - red.Q[i]));
        worst = std::max(worst, std::abs(P - red.P[i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("shock-peakon right-hand side pinned values") {
    // N=1, p=0: pure decay sdot = -s^2
    ShockPeakonState dec{{0.5}, {0.0}, {1.0}};
    ShockDeriv d = shock_rhs(dec);
    CHECK(d.dq[0] == 0.0);
    CHECK(d.dp[0] == 0.0);
    CHECK(d.ds[0] == doctest::Approx(-1.0).epsilon(1e-14));

    // s = 0 reduces to the lambda=3 peakon system
    ShockPeakonState nos{{0.2}, {0.8}, {0.0}};
    ShockDeriv d2 = shock_rhs(nos);
    PeakonDeriv d3 = peakon_rhs(PeakonState{{0.2}, {0.8}}, 3.0, GreensFamily::Mu);
    CHECK(d2.dq[0] == doctest::Approx(d3.dq[0]).epsilon(1e-15));
    CHECK(d2.dp[0] == doctest::Approx(d3.dp[0]).epsilon(1e-15));

    // p = s = 1: {u_x} = 1, {u_xx} = 1, so pdot = 0 and sdot = -1
    ShockPeakonState mix{{0.0}, {1.0}, {1.0}};
    ShockDeriv d4 = shock_rhs(mix);
    CHECK(d4.dp[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(d4.ds[0] == doctest::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("single shock decays as s0/(1 + s0 t)") {
    ShockTrajectory traj = integrate_shocks(ShockPeakonState{{0.5}, {0.0}, {1.0}}, 3.0, 1e-3);
    REQUIRE(traj.status == TrajectoryStatus::Completed);
    for (std::size_t i = 0; i < traj.times.size(); i += 250) {
        double t = traj.times[i];
        CHECK(std::abs(traj.states[i].s[0] - 1.0 / (1.0 + t)) < 1e-8);
    }
    CHECK(traj.states.back().s[0] == doctest::Approx(0.25).epsilon(1e-8));
}

TEST_CASE("weak form residual vanishes along peakon trajectories") {
    // 2-peakon muCH over a short window
    PeakonState st{{0.15, 0.55}, {0.6, 0.25}};
    PeakonTrajectory traj = integrate_peakons(st, 2.0, GreensFamily::Mu, 0.8, 1e-3);
    REQUIRE(traj.status == TrajectoryStatus::Completed);
    auto tests = make_test_functions(99, 6, 0.8);
    auto res = weak_form_residual(traj, 2.0, GreensFamily::Mu, tests);
    for (double r : res) CHECK(std::abs(r) < 1e-6);
}

TEST_CASE("weak form flags a perturbed trajectory") {
    // integrate the wrong system: pdot scaled by 1.1 (3-peakon muDP, where
    // the momentum exchange is strong enough for the pairing to see it)
    const double lambda = 3.0;
    PeakonState y{{0.1, 0.45, 0.8}, {2.0, -1.2, 0.7}};
    double T = 0.8, dt = 2e-4, t = 0.0;
    PeakonTrajectory traj;
    traj.lambda = lambda;
    traj.family = GreensFamily::Mu;
    traj.dt = dt;
    auto add = [](const PeakonState& a, const PeakonDeriv& d, double c) {
        PeakonState r = a;
        for (int i = 0; i < a.size(); ++i) {
            r.q[i] += c * d.dq[i];
            r.p[i] += c * 1.1 * d.dp[i];
        }
        return r;
    };
    auto push = [&]() {
        traj.times.push_back(t);
        traj.q_raw.push_back(y.q);
        traj.states.push_back(y);
    };
    push();
    while (t < T - 1e-12) {
        PeakonDeriv k1 = peakon_rhs(y, lambda, GreensFamily::Mu);
        PeakonDeriv k2 = peakon_rhs(add(y, k1, 0.5 * dt), lambda, GreensFamily::Mu);
        PeakonDeriv k3 = peakon_rhs(add(y, k2, 0.5 * dt), lambda, GreensFamily::Mu);
        PeakonDeriv k4 = peakon_rhs(add(y, k3, dt), lambda, GreensFamily::Mu);
        for (int i = 0; i < y.size(); ++i) {
            y.q[i] += dt / 6.0 * (k1.dq[i] + 2 * k2.dq[i] + 2 * k3.dq[i] + k4.dq[i]);
            y.p[i] += dt / 6.0 * 1.1 * (k1.dp[i] + 2 * k2.dp[i] + 2 * k3.dp[i] + k4.dp[i]);
        }
        t += dt;
        push();
    }
    auto tests = make_test_functions(123, 20, T, 4, 4.0, 10.0);
    auto res = weak_form_residual(traj, lambda, GreensFamily::Mu, tests);
    double worst = 0.0;
    for (double r : res) worst = std::max(worst, std::abs(r));
    CHECK(worst > 1e-2);
}

TEST_CASE("weak form residual vanishes along a shock trajectory") {
    ShockPeakonState st{{0.3}, {0.5}, {0.4}};
    ShockTrajectory traj = integrate_shocks(st, 0.8, 1e-3);
    REQUIRE(traj.status == TrajectoryStatus::Completed);
    auto tests = make_test_functions(7, 6, 0.8);
    auto res = weak_form_residual_shock(traj, tests);
    for (double r : res) CHECK(std::abs(r) < 1e-5);
}

TEST_CASE("weak form needs the Mu family") {
    PeakonTrajectory traj;
    traj.family = GreensFamily::Classical;
    CHECK_THROWS_AS(weak_form_residual(traj, 2.0, GreensFamily::Classical, {}), Error);
}

TEST_CASE("classical-family peakons use the hyperbolic Green's function") {
    // single classical peakon travels at speed p cosh(1/2)/(2 sinh(1/2))
    double p = 0.8;
    PeakonState st{{0.25}, {p}};
    PeakonDeriv d = peakon_rhs(st, 2.0, GreensFamily::Classical);
    double g0 = std::cosh(0.5) / (2.0 * std::sinh(0.5));
    CHECK(d.dq[0] == doctest::Approx(p * g0).epsilon(1e-14));
    CHECK(d.dp[0] == 0.0);

    // two-peakon momentum exchange antisymmetry holds there too
    PeakonState two{{0.2, 0.7}, {1.0, 0.5}};
    PeakonDeriv d2 = peakon_rhs(two, 2.0, GreensFamily::Classical);
    CHECK(d2.dp[0] == doctest::Approx(-d2.dp[1]).epsilon(1e-13));
}
