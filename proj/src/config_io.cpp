#include "sgi/config_io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sgi/errors.hpp"

namespace sgi {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "mass_kg",
        "chi_m_m3_per_kg",
        "B0_T",
        "eta_T_per_m",
        "delta_Hz",
        "epsilon_T",
        "omega_L_min_rad_s",
        "B1_over_epsilon",
        "switch_window_over_delta",
        "switch_alignment",
        "mu_eff_J_per_T",
        "sample_dt_s",
        "integrator_rel_tol",
        "closure_rel_tol",
        "phase_tolerance_rad",
        "x0_m",
        "v0_m_per_s",
    };
    return keys;
}

double need_number(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key))
        fail(ErrorCode::invalid_spec, "config is missing required key '" + key + "'");
    if (!j.at(key).is_number())
        fail(ErrorCode::invalid_spec, "config key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

double opt_number(const nlohmann::json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number())
        fail(ErrorCode::invalid_spec, "config key '" + key + "' must be a number");
    return j.at(key).get<double>();
}

} // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(ErrorCode::invalid_spec, "config root must be an object");
    for (const auto& item : j.items()) {
        if (!known_keys().count(item.key()))
            fail(ErrorCode::invalid_spec, "unknown config key '" + item.key() + "'");
    }

    RunConfig c;
    c.mass_kg = need_number(j, "mass_kg");
    c.chi_m_m3_per_kg = opt_number(j, "chi_m_m3_per_kg", c.chi_m_m3_per_kg);
    c.B0_T = need_number(j, "B0_T");
    c.eta_T_per_m = need_number(j, "eta_T_per_m");
    c.delta_Hz = need_number(j, "delta_Hz");
    c.epsilon_T = opt_number(j, "epsilon_T", 0.0);
    c.omega_L_min_rad_s = opt_number(j, "omega_L_min_rad_s", 0.0);
    bool has_eps = j.contains("epsilon_T");
    bool has_wl = j.contains("omega_L_min_rad_s");
    if (has_eps == has_wl)
        fail(ErrorCode::invalid_spec,
             "exactly one of epsilon_T / omega_L_min_rad_s must be given");
    c.B1_over_epsilon = opt_number(j, "B1_over_epsilon", c.B1_over_epsilon);
    c.switch_window_over_delta =
        opt_number(j, "switch_window_over_delta", c.switch_window_over_delta);
    if (j.contains("switch_alignment")) {
        if (!j.at("switch_alignment").is_string())
            fail(ErrorCode::invalid_spec, "switch_alignment must be a string");
        c.switch_alignment = j.at("switch_alignment").get<std::string>();
    }
    if (c.switch_alignment != "begin" && c.switch_alignment != "center")
        fail(ErrorCode::invalid_spec,
             "switch_alignment must be 'begin' or 'center', got '" +
                 c.switch_alignment + "'");
    c.mu_eff_J_per_T = opt_number(j, "mu_eff_J_per_T", 0.0);
    c.sample_dt_s = opt_number(j, "sample_dt_s", 0.0);
    c.integrator_rel_tol = opt_number(j, "integrator_rel_tol", c.integrator_rel_tol);
    c.closure_rel_tol = opt_number(j, "closure_rel_tol", c.closure_rel_tol);
    c.phase_tolerance_rad = opt_number(j, "phase_tolerance_rad", c.phase_tolerance_rad);
    c.x0_m = opt_number(j, "x0_m", 0.0);
    c.v0_m_per_s = opt_number(j, "v0_m_per_s", 0.0);
    return c;
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j;
    j["mass_kg"] = mass_kg;
    j["chi_m_m3_per_kg"] = chi_m_m3_per_kg;
    j["B0_T"] = B0_T;
    j["eta_T_per_m"] = eta_T_per_m;
    j["delta_Hz"] = delta_Hz;
    if (epsilon_T > 0.0) j["epsilon_T"] = epsilon_T;
    else j["omega_L_min_rad_s"] = omega_L_min_rad_s;
    j["B1_over_epsilon"] = B1_over_epsilon;
    j["switch_window_over_delta"] = switch_window_over_delta;
    j["switch_alignment"] = switch_alignment;
    if (mu_eff_J_per_T > 0.0) j["mu_eff_J_per_T"] = mu_eff_J_per_T;
    if (sample_dt_s > 0.0) j["sample_dt_s"] = sample_dt_s;
    j["integrator_rel_tol"] = integrator_rel_tol;
    j["closure_rel_tol"] = closure_rel_tol;
    j["phase_tolerance_rad"] = phase_tolerance_rad;
    if (x0_m != 0.0) j["x0_m"] = x0_m;
    if (v0_m_per_s != 0.0) j["v0_m_per_s"] = v0_m_per_s;
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::invalid_spec,
             "config " + path.string() + " is not valid JSON: " + e.what());
    }
    return RunConfig::from_json(j);
}

void save_config(const RunConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write config file " + path.string());
    out << c.to_json().dump(2) << "\n";
}

RunSpec to_run_spec(const RunConfig& c) {
    RunSpec run;
    run.particle.mass = c.mass_kg;
    run.particle.chi_m = c.chi_m_m3_per_kg;
    run.particle.mu_eff = c.mu_eff_J_per_T;
    run.field.B0 = c.B0_T;
    run.field.eta = c.eta_T_per_m;
    run.field.delta = c.delta_Hz;
    run.field.epsilon = c.epsilon_T;
    run.field.omega_L_min = c.omega_L_min_rad_s;
    run.numerics.sample_dt = c.sample_dt_s;
    run.numerics.integrator_rel_tol = c.integrator_rel_tol;
    run.numerics.closure_rel_tol = c.closure_rel_tol;
    run.numerics.phase_tolerance = c.phase_tolerance_rad;
    run.numerics.b1_over_epsilon = c.B1_over_epsilon;
    run.numerics.switch_window_over_delta = c.switch_window_over_delta;
    run.numerics.alignment = c.switch_alignment == "center"
                                 ? SwitchAlignment::centered_on_event
                                 : SwitchAlignment::begin_at_event;
    run.numerics.x0 = c.x0_m;
    run.numerics.v0 = c.v0_m_per_s;
    run.resolve();
    return run;
}

RunConfig from_run_spec(const RunSpec& run) {
    RunConfig c;
    c.mass_kg = run.particle.mass;
    c.chi_m_m3_per_kg = run.particle.chi_m;
    c.B0_T = run.field.B0;
    c.eta_T_per_m = run.field.eta;
    c.delta_Hz = run.field.delta;
    c.epsilon_T = run.field.epsilon;
    c.omega_L_min_rad_s = 0.0; // epsilon is the canonical serialised form
    c.B1_over_epsilon = run.numerics.b1_over_epsilon;
    c.switch_window_over_delta = run.numerics.switch_window_over_delta;
    c.switch_alignment = run.numerics.alignment == SwitchAlignment::centered_on_event
                             ? "center"
                             : "begin";
    c.mu_eff_J_per_T = run.particle.mu_eff;
    c.sample_dt_s = run.numerics.sample_dt;
    c.integrator_rel_tol = run.numerics.integrator_rel_tol;
    c.closure_rel_tol = run.numerics.closure_rel_tol;
    c.phase_tolerance_rad = run.numerics.phase_tolerance;
    c.x0_m = run.numerics.x0;
    c.v0_m_per_s = run.numerics.v0;
    return c;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t_s,x_plus_m,v_plus_mps,x_minus_m,v_minus_mps,Bx_plus_T,Bx_minus_T,"
           "dx_m,dv_mps\n";
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        out << format_double(traj.t[i]) << ',' << format_double(traj.x_plus[i]) << ','
            << format_double(traj.v_plus[i]) << ',' << format_double(traj.x_minus[i])
            << ',' << format_double(traj.v_minus[i]) << ','
            << format_double(traj.bx_plus[i]) << ',' << format_double(traj.bx_minus[i])
            << ',' << format_double(traj.dx[i]) << ',' << format_double(traj.dv[i])
            << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    write_trajectory_csv(out, traj);
    if (!out) fail(ErrorCode::io, "short write to " + path.string());
}

void write_table_csv(std::ostream& out, const Table& table) {
    for (std::size_t i = 0; i < table.header.size(); ++i)
        out << (i ? "," : "") << table.header[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << '\n';
    }
}

void write_table_csv(const std::filesystem::path& path, const Table& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    write_table_csv(out, table);
    if (!out) fail(ErrorCode::io, "short write to " + path.string());
}

nlohmann::json stage_times_json(const StageTimes& t) {
    return {{"tau1_s", t.tau1}, {"tau2_s", t.tau2}, {"tau3_s", t.tau3},
            {"tau4_s", t.tau4}, {"tau5_s", t.tau5}, {"tau6_s", t.tau6}};
}

nlohmann::json phase_report_json(const PhaseReport& p) {
    return {{"dtheta_exact_rad", p.dtheta_exact},
            {"dtheta_numeric_rad", p.dtheta_numeric},
            {"dtheta_approx_rad", p.dtheta_approx},
            {"dtheta_windows_rad", p.dtheta_windows},
            {"duty_factor", p.duty_factor},
            {"prefactor_rad_per_T_s", p.prefactor},
            {"dt_max_s", p.dt_max},
            {"dB0_max_T", p.db0_max}};
}

nlohmann::json summary_json(const Trajectory& traj, const ClosureResult& closure,
                            const PhaseReport& phase, const AdiabaticityReport& adia) {
    nlohmann::json j;
    j["stage_times"] = stage_times_json(traj.times);
    j["closure"] = {{"tau5_s", closure.tau5},
                    {"tau6_s", closure.tau6},
                    {"residual_dx_m", closure.residual_dx},
                    {"residual_dv_mps", closure.residual_dv},
                    {"dx_max_m", closure.dx_max},
                    {"t_at_dx_max_s", closure.t_at_dx_max},
                    {"max_abs_dv_mps", closure.max_abs_dv},
                    {"iterations", closure.iterations},
                    {"degenerate", closure.degenerate},
                    {"majorana_end_ok", closure.majorana_ok}};
    j["phase"] = phase_report_json(phase);
    j["adiabaticity"] = {{"min_abs_B_T", adia.min_abs_b},
                         {"min_omega_L_rad_s", adia.min_omega_l},
                         {"max_rate_ratio", adia.max_rate_ratio},
                         {"delta_over_min_omega_L", adia.delta_over_min_omega_l},
                         {"field_floor_ok", adia.field_floor_ok},
                         {"precession_ok", adia.precession_ok},
                         {"switching_ok", adia.switching_ok}};
    j["config_echo"] = from_run_spec(traj.run).to_json();
    return j;
}

} // namespace sgi
