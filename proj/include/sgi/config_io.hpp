#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sgi/closure.hpp"
#include "sgi/diagnostics.hpp"
#include "sgi/experiment.hpp"
#include "sgi/phase.hpp"

namespace sgi {

/// Flat run configuration mirroring the JSON file. Units live in the key
/// names; unknown keys are rejected, absent optional keys take the
/// documented defaults.
struct RunConfig {
    double mass_kg = 0.0;
    double chi_m_m3_per_kg = -6.2e-9;
    double B0_T = 0.0;
    double eta_T_per_m = 0.0;
    double delta_Hz = 0.0;
    double epsilon_T = 0.0;          // exactly one of epsilon_T /
    double omega_L_min_rad_s = 0.0;  // omega_L_min_rad_s must be set
    double B1_over_epsilon = 100.0;
    double switch_window_over_delta = 10.0;
    std::string switch_alignment = "begin"; // "begin" | "center"
    double mu_eff_J_per_T = 0.0;            // 0 = g mu_B default
    double sample_dt_s = 0.0;               // 0 = trap period / 2000
    double integrator_rel_tol = 1e-10;
    double closure_rel_tol = 1e-3;
    double phase_tolerance_rad = 1.0;
    double x0_m = 0.0;
    double v0_m_per_s = 0.0;

    static RunConfig from_json(const nlohmann::json&);
    [[nodiscard]] nlohmann::json to_json() const;
};

RunConfig load_config(const std::filesystem::path&);
void save_config(const RunConfig&, const std::filesystem::path&);

RunSpec to_run_spec(const RunConfig&);
RunConfig from_run_spec(const RunSpec&);

/// Shortest-exact decimal at 17 significant digits, locale independent.
std::string format_double(double v);

void write_trajectory_csv(std::ostream&, const Trajectory&);
void write_trajectory_csv(const std::filesystem::path&, const Trajectory&);
void write_table_csv(std::ostream&, const Table&);
void write_table_csv(const std::filesystem::path&, const Table&);

nlohmann::json summary_json(const Trajectory&, const ClosureResult&,
                            const PhaseReport&, const AdiabaticityReport&);
nlohmann::json phase_report_json(const PhaseReport&);
nlohmann::json stage_times_json(const StageTimes&);

} // namespace sgi
