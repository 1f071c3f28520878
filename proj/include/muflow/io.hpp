#pragma once

// Artifact serialization: JSON-lines for snapshots and trajectories, CSV for
// invariant series. Every floating-point value is written with 17
// significant digits so files round-trip bit-exactly and identical
// (config, seed) pairs produce byte-identical artifacts.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "muflow/pde.hpp"
#include "muflow/peakon.hpp"

namespace muflow {

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

inline std::string json_array(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += fmt_g17(v[i]);
    }
    s += "]";
    return s;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open output file: " + path);
    return f;
}

} // namespace detail

inline const char* termination_name(Termination::Kind k) {
    switch (k) {
        case Termination::Kind::Completed: return "Completed";
        case Termination::Kind::BlowupDetected: return "BlowupDetected";
        case Termination::Kind::NonFinite: return "NonFinite";
    }
    return "?";
}

/// One snapshot per line: {"t":...,"u":[...]}.
inline void write_run_jsonl(const std::string& path, const SimulationRecord& rec) {
    auto f = detail::open_out(path);
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        f << "{\"t\":" << fmt_g17(rec.times[i]) << ",\"u\":" << detail::json_array(rec.snapshots[i].v)
          << "}\n";
}

/// Header: t,mean,H0,H1,H2,ux_inf,pointwise_dev.
inline void write_invariants_csv(const std::string& path, const SimulationRecord& rec) {
    auto f = detail::open_out(path);
    f << "t,mean,H0,H1,H2,ux_inf,pointwise_dev\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        f << fmt_g17(rec.times[i]) << ',' << fmt_g17(rec.mean_series[i]) << ','
          << fmt_g17(rec.h0_series[i]) << ',' << fmt_g17(rec.h1_series[i]) << ','
          << fmt_g17(rec.h2_series[i]) << ',' << fmt_g17(rec.ux_inf_series[i]) << ','
          << fmt_g17(rec.pointwise_dev_series[i]) << '\n';
}

namespace detail {

inline double relative_drift(const std::vector<double>& series) {
    if (series.empty() || !std::isfinite(series.front())) return std::numeric_limits<double>::quiet_NaN();
    double ref = series.front();
    double scale = std::max(1e-30, std::abs(ref));
    double worst = 0.0;
    for (double v : series) worst = std::max(worst, std::abs(v - ref) / scale);
    return worst;
}

} // namespace detail

/// Termination status, drift table, and the blow-up estimate when present.
inline void write_summary_json(const std::string& path, const SimulationRecord& rec) {
    auto f = detail::open_out(path);
    f << "{\n";
    f << "  \"termination\": \"" << termination_name(rec.termination.kind) << "\",\n";
    f << "  \"t_final\": " << fmt_g17(rec.termination.t) << ",\n";
    f << "  \"blowup_t_est\": " << fmt_g17(rec.termination.t_est) << ",\n";
    f << "  \"drift\": {\n";
    f << "    \"mean\": " << fmt_g17(detail::relative_drift(rec.mean_series)) << ",\n";
    f << "    \"H0\": " << fmt_g17(detail::relative_drift(rec.h0_series)) << ",\n";
    f << "    \"H1\": " << fmt_g17(detail::relative_drift(rec.h1_series)) << ",\n";
    f << "    \"H2\": " << fmt_g17(detail::relative_drift(rec.h2_series)) << "\n";
    f << "  },\n";
    double dev = 0.0;
    bool have_dev = false;
    for (double d : rec.pointwise_dev_series)
        if (std::isfinite(d)) {
            dev = std::max(dev, d);
            have_dev = true;
        }
    f << "  \"pointwise_dev_max\": "
      << (have_dev ? fmt_g17(dev) : std::string("null")) << ",\n";
    f << "  \"ux_inf_max\": " << fmt_g17(*std::max_element(rec.ux_inf_series.begin(),
                                                           rec.ux_inf_series.end()))
      << "\n";
    f << "}\n";
}

/// Peakon state as {"q":[...],"p":[...]} (plus "s" for shocks).
inline std::string peakon_state_json(const PeakonState& st) {
    return "{\"q\":" + detail::json_array(st.q) + ",\"p\":" + detail::json_array(st.p) + "}";
}

inline std::string shock_state_json(const ShockPeakonState& st) {
    return "{\"q\":" + detail::json_array(st.q) + ",\"p\":" + detail::json_array(st.p) +
           ",\"s\":" + detail::json_array(st.s) + "}";
}

inline void write_peakon_trajectory_jsonl(const std::string& path, const PeakonTrajectory& traj) {
    auto f = detail::open_out(path);
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        f << "{\"t\":" << fmt_g17(traj.times[i]) << ",\"q\":" << detail::json_array(traj.states[i].q)
          << ",\"p\":" << detail::json_array(traj.states[i].p) << "}\n";
}

inline void write_shock_trajectory_jsonl(const std::string& path, const ShockTrajectory& traj) {
    auto f = detail::open_out(path);
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        f << "{\"t\":" << fmt_g17(traj.times[i]) << ",\"q\":" << detail::json_array(traj.states[i].q)
          << ",\"p\":" << detail::json_array(traj.states[i].p)
          << ",\"s\":" << detail::json_array(traj.states[i].s) << "}\n";
}

/// t, sum p, and (for lambda = 2) the canonical Hamiltonian h.
inline void write_conserved_csv(const std::string& path, const PeakonTrajectory& traj) {
    auto f = detail::open_out(path);
    bool with_h = traj.lambda == 2.0;
    f << (with_h ? "t,sum_p,h\n" : "t,sum_p\n");
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        f << fmt_g17(traj.times[i]) << ',' << fmt_g17(sum_p(traj.states[i]));
        if (with_h) f << ',' << fmt_g17(peakon_h(traj.states[i], traj.family));
        f << '\n';
    }
}

/// t, total momentum, total shock strength.
inline void write_shock_conserved_csv(const std::string& path, const ShockTrajectory& traj) {
    auto f = detail::open_out(path);
    f << "t,sum_p,sum_s\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        double sp = 0.0, ss = 0.0;
        for (double v : traj.states[i].p) sp += v;
        for (double v : traj.states[i].s) ss += v;
        f << fmt_g17(traj.times[i]) << ',' << fmt_g17(sp) << ',' << fmt_g17(ss) << '\n';
    }
}

} // namespace muflow
