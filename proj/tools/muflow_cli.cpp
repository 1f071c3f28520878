// muflow command-line front end: run simulations and checks, emit JSON/CSV
// artifacts. Exit codes: 0 success, 2 configuration error, 3 non-finite
// termination, 4 collision termination, 5 check failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "muflow/expr.hpp"
#include "muflow/io.hpp"
#include "muflow/lax.hpp"
#include "muflow/pde.hpp"
#include "muflow/peakon.hpp"
#include "muflow/sampling.hpp"

using json = nlohmann::json;
using namespace muflow;

namespace {

std::uint64_t seed_fallback() {
    if (const char* env = std::getenv("MUFLOW_SEED")) {
        char* end = nullptr;
        std::uint64_t s = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return s;
    }
    return 20240101;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t comma = csv.find(',', pos);
        std::string tok =
            csv.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!tok.empty()) out.push_back(std::strtod(tok.c_str(), nullptr));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// Values from --config serve as defaults; explicit flags override them.
json load_config(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--config") {
            std::ifstream f(argv[i + 1]);
            if (!f) throw ConfigError(std::string("cannot read config file ") + argv[i + 1]);
            json j;
            f >> j;
            return j;
        }
    }
    return json::object();
}

template <class T>
void from_config(const json& cfg, const char* key, T& var) {
    if (cfg.contains(key)) var = cfg.at(key).get<T>();
}

std::filesystem::path out_path(const std::string& dir, const char* name) {
    std::filesystem::create_directories(dir);
    return std::filesystem::path(dir) / name;
}

PeriodicField initial_from_fourier(const PeriodicGrid& g, const std::vector<double>& coeffs) {
    // c0, a1, b1, a2, b2, ... for c0 + sum a_k cos(2 pi k x) + b_k sin(2 pi k x)
    PeriodicField u0 = constant_field(g, coeffs.empty() ? 0.0 : coeffs[0]);
    for (std::size_t i = 1; i < coeffs.size(); i += 2) {
        std::size_t k = (i + 1) / 2;
        double a = coeffs[i];
        double b = (i + 1 < coeffs.size()) ? coeffs[i + 1] : 0.0;
        for (int j = 0; j < g.n; ++j) {
            double w = 2.0 * std::numbers::pi * static_cast<double>(k) * g.point(j);
            u0[j] += a * std::cos(w) + b * std::sin(w);
        }
    }
    return u0;
}

struct CheckReport {
    std::string name;
    bool pass = true;
    std::vector<std::pair<std::string, double>> values;
    std::vector<std::pair<std::string, double>> tolerances;

    void require(const std::string& key, double value, double tol) {
        values.emplace_back(key, value);
        tolerances.emplace_back(key + "_tol", tol);
        if (!(value < tol)) pass = false;
    }

    int emit() const {
        std::cout << "{\n  \"check\": \"" << name << "\",\n  \"pass\": "
                  << (pass ? "true" : "false") << ",\n  \"measured\": {";
        for (std::size_t i = 0; i < values.size(); ++i)
            std::cout << (i ? ", " : "") << "\"" << values[i].first
                      << "\": " << fmt_g17(values[i].second);
        std::cout << "},\n  \"tolerance\": {";
        for (std::size_t i = 0; i < tolerances.size(); ++i)
            std::cout << (i ? ", " : "") << "\"" << tolerances[i].first
                      << "\": " << fmt_g17(tolerances[i].second);
        std::cout << "}\n}\n";
        return pass ? 0 : 5;
    }
};

struct SimulateArgs {
    std::string family = "mudp", initial, initial_m, fourier, out = ".", config_path;
    double lambda = 3.0, dt = 1e-3, t_end = 1.0, threshold = 1e3, gauge = 0.0;
    int n = 256, record_every = 1;
    bool dealias = false, track_flow = false, adaptive = false;
    bool lambda_given = false;
};

int do_simulate(const SimulateArgs& a) {
    FamilyConfig config;
    if (a.family == "mudp") config = FamilyConfig::mudp();
    else if (a.family == "much") config = FamilyConfig::much();
    else if (a.family == "mulambda") config = FamilyConfig::mu_lambda(a.lambda);
    else if (a.family == "muburgers") {
        double c = a.gauge;
        config = FamilyConfig::muburgers([c](double) { return c; });
    } else {
        throw ConfigError("unknown family: " + a.family);
    }
    if (a.family != "mulambda" && a.lambda_given && a.lambda != config.lambda)
        throw ConfigError(
            "--lambda " + std::to_string(a.lambda) + " conflicts with --family " + a.family +
            (a.lambda == 1.0 ? " (lambda=1 not admissible for H0 normalization)" : ""));
    if (!config.is_muburgers() && config.lambda == 1.0)
        throw ConfigError("lambda=1 not admissible for H0 normalization");

    PeriodicGrid g = make_grid(a.n);
    PeriodicField u0;
    int sources = (!a.initial.empty()) + (!a.initial_m.empty()) + (!a.fourier.empty());
    if (sources != 1)
        throw ConfigError("exactly one of --initial, --initial-m, --initial-fourier required");
    if (!a.initial.empty()) u0 = parse_initial(a.initial, g);
    else if (!a.fourier.empty()) u0 = initial_from_fourier(g, parse_list(a.fourier));
    else {
        if (config.is_muburgers())
            throw ConfigError("--initial-m cannot recover the mean of u for muburgers");
        u0 = invert_A_mu(parse_initial(a.initial_m, g));
    }

    SolverParams params;
    params.n = a.n;
    params.dt = a.dt;
    params.t_end = a.t_end;
    params.dealias = a.dealias;
    params.record_every = a.record_every;
    params.track_flow = a.track_flow;
    params.blowup_slope_threshold = a.threshold;
    params.adaptive_blowup = a.adaptive;

    SimulationRecord rec = integrate(config, u0, params);
    write_run_jsonl(out_path(a.out, "run.jsonl").string(), rec);
    write_invariants_csv(out_path(a.out, "invariants.csv").string(), rec);
    write_summary_json(out_path(a.out, "summary.json").string(), rec);
    std::cout << "termination: " << termination_name(rec.termination.kind)
              << " at t = " << fmt_g17(rec.termination.t);
    if (rec.termination.kind == Termination::Kind::BlowupDetected)
        std::cout << ", T_c estimate " << fmt_g17(rec.termination.t_est);
    std::cout << "\n";
    return rec.termination.kind == Termination::Kind::NonFinite ? 3 : 0;
}

struct PeakonArgs {
    std::string qs, ps, family = "mu", out = ".", config_path;
    double lambda = 3.0, dt = 1e-3, t_end = 1.0;
    int tests = 20;
    bool verify = false;
    std::uint64_t seed = seed_fallback();
};

int do_peakon(const PeakonArgs& a) {
    if (a.lambda == 0.0 || a.lambda == 1.0)
        throw ConfigError("peakons require lambda outside {0, 1}");
    if (a.qs.empty() || a.ps.empty()) throw ConfigError("peakon needs --q and --p");
    GreensFamily fam = a.family == "classical" ? GreensFamily::Classical : GreensFamily::Mu;
    PeakonState st{parse_list(a.qs), parse_list(a.ps)};
    st.validate();
    PeakonTrajectory traj = integrate_peakons(st, a.lambda, fam, a.t_end, a.dt);
    write_peakon_trajectory_jsonl(out_path(a.out, "trajectory.jsonl").string(), traj);
    write_conserved_csv(out_path(a.out, "conserved.csv").string(), traj);
    if (a.verify) {
        auto tf = make_test_functions(a.seed, a.tests, a.t_end);
        auto res = weak_form_residual(traj, a.lambda, fam, tf);
        std::ofstream f(out_path(a.out, "weak_residuals.json"));
        f << "{\"pairings\":" << detail::json_array(res) << "}\n";
        double worst = 0;
        for (double r : res) worst = std::max(worst, std::abs(r));
        std::cout << "weak-form max |pairing| = " << fmt_g17(worst) << "\n";
    }
    std::cout << "status: "
              << (traj.status == TrajectoryStatus::Completed ? "Completed" : "CollisionDetected")
              << ", final state " << peakon_state_json(traj.states.back()) << "\n";
    return traj.status == TrajectoryStatus::CollisionDetected ? 4 : 0;
}

struct ShockArgs {
    std::string qs, ps, ss, out = ".", config_path;
    double dt = 1e-3, t_end = 1.0;
};

int do_shock(const ShockArgs& a) {
    if (a.qs.empty() || a.ps.empty() || a.ss.empty())
        throw ConfigError("shock needs --q, --p and --s");
    ShockPeakonState st{parse_list(a.qs), parse_list(a.ps), parse_list(a.ss)};
    st.validate();
    ShockTrajectory traj = integrate_shocks(st, a.t_end, a.dt);
    write_shock_trajectory_jsonl(out_path(a.out, "trajectory.jsonl").string(), traj);
    write_shock_conserved_csv(out_path(a.out, "conserved.csv").string(), traj);
    std::cout << "status: "
              << (traj.status == TrajectoryStatus::Completed ? "Completed" : "CollisionDetected")
              << ", final state " << shock_state_json(traj.states.back()) << "\n";
    return traj.status == TrajectoryStatus::CollisionDetected ? 4 : 0;
}

struct Reduced2Args {
    std::string qs, ps, out = ".", config_path;
    double dt = 1e-3, t_end = 1.0;
};

int do_reduced2(const Reduced2Args& a) {
    if (a.qs.empty() || a.ps.empty()) throw ConfigError("reduced2 needs --q and --p");
    PeakonState st{parse_list(a.qs), parse_list(a.ps)};
    if (st.size() != 2) throw ConfigError("reduced2 needs exactly two peaks");
    st.validate();
    PeakonTrajectory full = integrate_peakons(st, 2.0, GreensFamily::Mu, a.t_end, a.dt);
    ReducedTrajectory red = integrate_reduced(ReducedTwoPeakon::from_state(st), a.t_end, a.dt);

    std::ofstream f(out_path(a.out, "reduced2.csv"));
    f << "t,Q_full,P_full,Q_reduced,P_reduced\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < full.times.size() && i < red.times.size(); ++i) {
        double Q = full.q_raw[i][1] - full.q_raw[i][0];
        double P = full.states[i].p[1] - full.states[i].p[0];
        f << fmt_g17(full.times[i]) << ',' << fmt_g17(Q) << ',' << fmt_g17(P) << ','
          << fmt_g17(red.Q[i]) << ',' << fmt_g17(red.P[i]) << '\n';
        worst = std::max(worst, std::max(std::abs(Q - red.Q[i]), std::abs(P - red.P[i])));
    }
    std::cout << "max |full - reduced| over (Q, P): " << fmt_g17(worst) << "\n";
    return full.status == TrajectoryStatus::CollisionDetected ? 4 : 0;
}

int check_identities(int n, int trials, std::uint64_t seed) {
    PeriodicGrid g = make_grid(n);
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        double qi = g.point(rng.uniform_int(0, n - 1));
        double qj = g.point(rng.uniform_int(0, n - 1));
        worst = std::max(worst, identity_suite(qi, qj, g).max_residual());
    }
    CheckReport rep;
    rep.name = "identities";
    rep.require("max_residual", worst, 1e-6);
    return rep.emit();
}

int check_lax(int n, std::uint64_t seed, bool wrong_coefficient) {
    PeriodicGrid g = make_grid(n);
    PeriodicField m = parse_initial("2+sin(2*pi*x)", g);
    PeriodicField u = invert_A_mu(m);
    double coeff = wrong_coefficient ? 2.0 : 3.0;
    CheckReport rep;
    rep.name = wrong_coefficient ? "lax (wrong-coefficient control)" : "lax";
    for (double k : {0.5, 1.0, 2.0}) {
        LaxProbe probe{k, make_lax_probe_field(g, seed)};
        double r = sup_norm(lax_residual(u, m, FamilyConfig::mudp(), probe, coeff));
        rep.require("residual_k" + fmt_g17(k), r, 1e-8);
    }
    return rep.emit();
}

int check_bihamiltonian(const std::string& m_expr, int n, int jobs) {
    PeriodicGrid g = make_grid(n);
    PeriodicField m = parse_initial(m_expr, g);
    BihamiltonianOptions opt;
    opt.threads = jobs;
    BihamiltonianResiduals r = bihamiltonian_residual(m, opt);
    PeriodicField ub = parse_initial("sin(2*pi*x)+cos(4*pi*x)/2", g);
    BihamiltonianResiduals rb = bihamiltonian_residual_mub(ub, opt);
    CheckReport rep;
    rep.name = "bihamiltonian";
    rep.require("mudp_j0", r.j0, 1e-4);
    rep.require("mudp_j2", r.j2, 1e-4);
    rep.require("mub_j0", rb.j0, 1e-4);
    rep.require("mub_j2", rb.j2, 1e-4);
    return rep.emit();
}

int check_negative_flow(const std::string& m_expr, int n, int jobs) {
    PeriodicGrid g = make_grid(n);
    PeriodicField m = parse_initial(m_expr, g);
    CheckReport rep;
    rep.name = "negative-flow";
    rep.require("relative_sup_error", negative_flow_residual(m, 3e-6, 20, jobs), 1e-4);
    return rep.emit();
}

int check_orbit(int n, int trials, std::uint64_t seed) {
    PeriodicGrid g = make_grid(n);
    Rng rng(seed);
    DensityWeight w{3.0};
    PeriodicField m = random_positive_density(g, rng);
    double h = h_minus1(m, w);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        CircleMap xi = random_diffeo(g, rng);
        worst = std::max(worst, std::abs(h_minus1(act_density(xi, m, w), w) - h) / std::abs(h));
    }
    PeriodicField cube =
        map(parse_initial("1+0.5*sin(2*pi*x)", g), [](double y) { return y * y * y; });
    CircleMap xi = canonical_diffeo(cube, w);
    double H = h_minus1(cube, w);
    double roundtrip = sup_diff(act_density(xi, constant_field(g, H * H * H), w), cube);
    CheckReport rep;
    rep.name = "orbit";
    rep.require("h_minus1_drift", worst, 1e-8);
    rep.require("canonical_roundtrip", roundtrip, 1e-8);
    return rep.emit();
}

int check_conservation(const std::string& m_expr, int n, double dt, double t_end) {
    PeriodicGrid g = make_grid(n);
    PeriodicField u0 = invert_A_mu(parse_initial(m_expr, g));
    SolverParams p;
    p.dt = dt;
    p.t_end = t_end;
    p.record_every = 10;
    SimulationRecord rec = integrate(FamilyConfig::mudp(), u0, p);
    auto drift = [](const std::vector<double>& s) {
        double worst = 0.0;
        for (double v : s) worst = std::max(worst, std::abs(v - s.front()) / std::abs(s.front()));
        return worst;
    };
    double mean_drift = 0.0;
    for (double v : rec.mean_series)
        mean_drift = std::max(mean_drift, std::abs(v - rec.mean_series.front()));
    CheckReport rep;
    rep.name = "conservation";
    rep.require("H0_drift", drift(rec.h0_series), 1e-6);
    rep.require("H1_drift", drift(rec.h1_series), 1e-6);
    rep.require("H2_drift", drift(rec.h2_series), 1e-6);
    rep.require("mean_drift", mean_drift, 1e-10);
    return rep.emit();
}

} // namespace

int main(int argc, char** argv) {
    try {
        json cfg = load_config(argc, argv);

        CLI::App app{"muflow: mu-family evolution equations on the circle"};
        app.require_subcommand(1);
        int status = 0;

        auto* sim = app.add_subcommand("simulate", "evolve the PDE and write run artifacts");
        SimulateArgs sa;
        from_config(cfg, "family", sa.family);
        from_config(cfg, "lambda", sa.lambda);
        from_config(cfg, "initial", sa.initial);
        from_config(cfg, "initial-m", sa.initial_m);
        from_config(cfg, "n", sa.n);
        from_config(cfg, "dt", sa.dt);
        from_config(cfg, "t-end", sa.t_end);
        from_config(cfg, "threshold", sa.threshold);
        from_config(cfg, "gauge", sa.gauge);
        from_config(cfg, "record-every", sa.record_every);
        from_config(cfg, "dealias", sa.dealias);
        from_config(cfg, "track-flow", sa.track_flow);
        from_config(cfg, "adaptive", sa.adaptive);
        from_config(cfg, "out", sa.out);
        sim->add_option("--family", sa.family, "mudp | much | mulambda | muburgers");
        sim->add_option("--lambda", sa.lambda, "family weight for --family mulambda");
        sim->add_option("--initial", sa.initial, "initial velocity u0 as an expression in x");
        sim->add_option("--initial-m", sa.initial_m, "initial momentum m0 (u0 by inversion)");
        sim->add_option("--initial-fourier", sa.fourier, "c0,a1,b1,... coefficients of u0");
        sim->add_option("--n", sa.n, "grid size (even, >= 8)");
        sim->add_option("--dt", sa.dt, "time step");
        sim->add_option("--t-end", sa.t_end, "final time");
        sim->add_flag("--dealias", sa.dealias, "2/3-rule truncation of products");
        sim->add_option("--record-every", sa.record_every, "record every k steps");
        sim->add_flag("--track-flow", sa.track_flow, "co-integrate the flow map");
        sim->add_option("--threshold", sa.threshold, "blow-up threshold on |u_x|_inf");
        sim->add_flag("--adaptive", sa.adaptive, "halve dt as the slope grows");
        sim->add_option("--gauge", sa.gauge, "muBurgers gauge value c = mu(u_t)");
        sim->add_option("--out", sa.out, "output directory");
        sim->add_option("--config", sa.config_path, "JSON config file (defaults under flags)");
        sim->callback([&]() {
            sa.lambda_given = sim->count("--lambda") > 0;
            status = do_simulate(sa);
        });

        auto* pk = app.add_subcommand("peakon", "integrate a multi-peakon state");
        PeakonArgs pa;
        from_config(cfg, "lambda", pa.lambda);
        from_config(cfg, "q", pa.qs);
        from_config(cfg, "p", pa.ps);
        from_config(cfg, "dt", pa.dt);
        from_config(cfg, "t-end", pa.t_end);
        from_config(cfg, "out", pa.out);
        pk->add_option("--lambda", pa.lambda, "family weight (not 0 or 1)");
        pk->add_option("--q", pa.qs, "comma-separated positions in [0,1)");
        pk->add_option("--p", pa.ps, "comma-separated momenta");
        pk->add_option("--family", pa.family, "mu | classical Green's function");
        pk->add_option("--dt", pa.dt, "time step");
        pk->add_option("--t-end", pa.t_end, "final time");
        pk->add_flag("--verify", pa.verify, "weak-form residual report");
        pk->add_option("--tests", pa.tests, "seeded test functions for --verify");
        pk->add_option("--seed", pa.seed, "seed for the test-function generator");
        pk->add_option("--out", pa.out, "output directory");
        pk->add_option("--config", pa.config_path, "JSON config file");
        pk->callback([&]() { status = do_peakon(pa); });

        auto* sh = app.add_subcommand("shock", "integrate a shock-peakon state (muDP)");
        ShockArgs ha;
        from_config(cfg, "q", ha.qs);
        from_config(cfg, "p", ha.ps);
        from_config(cfg, "s", ha.ss);
        from_config(cfg, "dt", ha.dt);
        from_config(cfg, "t-end", ha.t_end);
        from_config(cfg, "out", ha.out);
        sh->add_option("--q", ha.qs, "positions");
        sh->add_option("--p", ha.ps, "momenta");
        sh->add_option("--s", ha.ss, "shock strengths");
        sh->add_option("--dt", ha.dt, "time step");
        sh->add_option("--t-end", ha.t_end, "final time");
        sh->add_option("--out", ha.out, "output directory");
        sh->add_option("--config", ha.config_path, "JSON config file");
        sh->callback([&]() { status = do_shock(ha); });

        auto* r2 = app.add_subcommand("reduced2", "muCH two-peakon against its (Q,P) reduction");
        Reduced2Args ra;
        from_config(cfg, "q", ra.qs);
        from_config(cfg, "p", ra.ps);
        from_config(cfg, "dt", ra.dt);
        from_config(cfg, "t-end", ra.t_end);
        from_config(cfg, "out", ra.out);
        r2->add_option("--q", ra.qs, "two positions");
        r2->add_option("--p", ra.ps, "two momenta");
        r2->add_option("--dt", ra.dt, "time step");
        r2->add_option("--t-end", ra.t_end, "final time");
        r2->add_option("--out", ra.out, "output directory");
        r2->add_option("--config", ra.config_path, "JSON config file");
        r2->callback([&]() { status = do_reduced2(ra); });

        auto* chk = app.add_subcommand("check", "run a verification suite");
        std::string which, m_expr = "2+sin(2*pi*x)", chk_config;
        int n = 0, trials = 100, jobs = 0;
        double dt = 1e-3, t_end = 1.0;
        bool wrong_coefficient = false;
        std::uint64_t seed = seed_fallback();
        chk->add_option("which", which,
                        "identities | lax | bihamiltonian | negative-flow | orbit | conservation")
            ->required();
        chk->add_option("--n", n, "grid size (default depends on the check)");
        chk->add_option("--trials", trials, "number of random trials");
        chk->add_option("--seed", seed, "seed");
        chk->add_option("--m", m_expr, "density expression");
        chk->add_flag("--wrong-coefficient", wrong_coefficient, "negative control for lax");
        chk->add_option("--jobs", jobs, "threads for the variational oracle");
        chk->add_option("--dt", dt, "time step (conservation)");
        chk->add_option("--t-end", t_end, "final time (conservation)");
        chk->add_option("--config", chk_config, "JSON config file");
        chk->callback([&]() {
            if (which == "identities") status = check_identities(n ? n : 1024, trials, seed);
            else if (which == "lax") status = check_lax(n ? n : 256, seed, wrong_coefficient);
            else if (which == "bihamiltonian") status = check_bihamiltonian(m_expr, n ? n : 256, jobs);
            else if (which == "negative-flow") status = check_negative_flow(m_expr, n ? n : 256, jobs);
            else if (which == "orbit") status = check_orbit(n ? n : 256, trials, seed);
            else if (which == "conservation") status = check_conservation(m_expr, n ? n : 256, dt, t_end);
            else throw ConfigError("unknown check: " + which);
        });

        try {
            app.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e);
        } catch (const CLI::ParseError& e) {
            app.exit(e);
            return 2;
        }
        return status;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
