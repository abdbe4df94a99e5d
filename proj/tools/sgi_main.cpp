#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgi/config_io.hpp"
#include "sgi/diagnostics.hpp"
#include "sgi/errors.hpp"
#include "sgi/experiment.hpp"

namespace fs = std::filesystem;
using namespace sgi;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
    case ErrorCode::invalid_spec: return 1;
    case ErrorCode::io: return 3;
    default: return 2; // physics failures: no event/closure, forbidden region, ...
    }
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) fail(ErrorCode::invalid_spec, "--values list is empty");
    return out;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create output directory " + dir.string());
}

// closure metrics for a trajectory simulated at an imposed tau5
ClosureResult closure_from_trajectory(const Trajectory& traj) {
    ClosureResult res;
    res.tau5 = traj.times.tau5;
    res.tau6 = traj.times.tau6;
    res.degenerate = traj.tau6_degenerate;
    res.residual_dx = traj.plus.x_at(res.tau6) - traj.minus.x_at(res.tau6);
    res.residual_dv = traj.plus.v_at(res.tau6) - traj.minus.v_at(res.tau6);
    SuperpositionMax sup = max_superposition(traj);
    res.dx_max = sup.dx_max;
    res.t_at_dx_max = sup.t_at;
    for (std::size_t i = 0; i < traj.t.size(); ++i)
        if (traj.t[i] <= res.tau6)
            res.max_abs_dv = std::max(res.max_abs_dv, std::abs(traj.dv[i]));
    res.majorana_ok =
        traj.plus.x_at(res.tau6) >
        (traj.run.field.B0 + traj.run.field.epsilon) / traj.run.field.eta;
    return res;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 double tau5_override) {
    RunSpec run = to_run_spec(load_config(config_path));
    require_valid(run);

    StagePlan plan = build_plan(run);
    Trajectory traj;
    ClosureResult closure;
    if (tau5_override > 0.0) {
        traj = simulate(plan, tau5_override);
        closure = closure_from_trajectory(traj);
    } else {
        closure = solve_closure(plan, traj);
    }
    PhaseReport phase = make_phase_report(traj);
    AdiabaticityReport adia = adiabaticity_report(traj);

    ensure_dir(out_dir);
    write_trajectory_csv(fs::path(out_dir) / "trajectory.csv", traj);
    std::ofstream js(fs::path(out_dir) / "summary.json", std::ios::binary);
    if (!js) fail(ErrorCode::io, "cannot write summary.json in " + out_dir);
    js << summary_json(traj, closure, phase, adia).dump(2) << "\n";
    std::cout << "wrote " << (fs::path(out_dir) / "trajectory.csv").string() << " and "
              << (fs::path(out_dir) / "summary.json").string() << "\n";
    return 0;
}

int cmd_sweep(const std::string& param, const std::string& values_csv,
              const std::string& config_path, const std::string& out_dir) {
    RunSpec run = to_run_spec(load_config(config_path));
    require_valid(run);
    std::vector<double> values = parse_values(values_csv);
    ensure_dir(out_dir);

    Table table;
    table.header = {"value",    "epsilon_T", "tau1_s",  "tau2_s",      "tau3_s",
                    "tau4_s",   "tau5_s",    "tau6_s",  "dx_max_m",    "dtheta_rad",
                    "tau6_eta", "ok"};
    nlohmann::json fit;

    std::vector<SweepRecord> records;
    if (param == "eta") {
        EtaSweep sweep = sweep_eta(values, run);
        records = sweep.records;
        fit = {{"tau6_eta_mean", sweep.tau6_eta_mean},
               {"tau6_eta_max_rel_dev", sweep.tau6_eta_max_rel_dev}};
    } else if (param == "mass") {
        MassSweep sweep = sweep_mass(values, run);
        records = sweep.records;
        fit = {{"coefficient_kg_m_per_s", sweep.coefficient},
               {"exponent", sweep.exponent}};
    } else {
        fail(ErrorCode::invalid_spec, "--param must be 'eta' or 'mass'");
    }

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (!r.error.empty())
            std::cerr << "run " << values[i] << " failed: " << r.error << "\n";
        table.rows.push_back({values[i], r.epsilon, r.times.tau1, r.times.tau2,
                              r.times.tau3, r.times.tau4, r.times.tau5, r.times.tau6,
                              r.dx_max, r.dtheta_exact, r.times.tau6 * r.eta,
                              r.ok() ? 1.0 : 0.0});
    }
    write_table_csv(fs::path(out_dir) / "sweep.csv", table);
    std::ofstream js(fs::path(out_dir) / "sweep_summary.json", std::ios::binary);
    if (!js) fail(ErrorCode::io, "cannot write sweep_summary.json in " + out_dir);
    js << fit.dump(2) << "\n";
    std::cout << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << "\n";
    bool all_ok = true;
    for (const auto& r : records) all_ok = all_ok && r.ok();
    return all_ok ? 0 : 2;
}

int cmd_calibrate(double target_tau1, double eta, const std::string& config_path) {
    RunSpec base;
    if (!config_path.empty()) {
        base = to_run_spec(load_config(config_path));
    } else {
        base.particle = ParticleSpec::diamond(1e-17, base.constants);
        base.field.epsilon = 1e-6; // placeholder, replaced by the calibration
        base.resolve();
    }
    CalibrationResult cal = calibrate_epsilon(target_tau1, eta, base);
    std::cout << "epsilon_T " << format_double(cal.epsilon) << "\n"
              << "omega_L_min_rad_s " << format_double(cal.implied_omega_l_min) << "\n"
              << "achieved_tau1_s " << format_double(cal.achieved_tau1) << "\n";
    return 0;
}

int cmd_phase(const std::string& config_path, const std::string& out_file) {
    RunSpec run = to_run_spec(load_config(config_path));
    require_valid(run);
    StagePlan plan = build_plan(run);
    Trajectory traj;
    solve_closure(plan, traj);
    PhaseReport report = make_phase_report(traj);
    nlohmann::json j = phase_report_json(report);
    j["stage_times"] = stage_times_json(traj.times);
    if (out_file.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) fail(ErrorCode::io, "cannot write " + out_file);
        out << j.dump(2) << "\n";
    }
    return 0;
}

int cmd_validate(const std::string& config_path) {
    RunSpec run = to_run_spec(load_config(config_path));
    auto violations = validate_spec(run);
    if (violations.empty()) {
        std::cout << "ok\n";
        return 0;
    }
    for (const auto& v : violations)
        std::cout << v.invariant << " (value " << format_double(v.value)
                  << "): " << v.detail << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stern-Gerlach interferometer trajectory simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir, out_file, param, values_csv;
    double tau5 = 0.0, target_tau1 = 0.0, eta = 0.0;

    auto* sim = app.add_subcommand("simulate", "solve one run and write CSV + JSON");
    sim->add_option("--config", config_path, "run configuration JSON")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--tau5", tau5, "impose the spin-flip time instead of solving");

    auto* sweep = app.add_subcommand("sweep", "closure solve across eta or mass values");
    sweep->add_option("--param", param, "eta | mass")->required();
    sweep->add_option("--values", values_csv, "comma-separated list")->required();
    sweep->add_option("--config", config_path, "template configuration")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();

    auto* cal = app.add_subcommand("calibrate-epsilon",
                                   "find the field floor reproducing a target tau1");
    cal->add_option("--target-tau1", target_tau1, "target stage boundary [s]")->required();
    cal->add_option("--eta", eta, "gradient [T/m]")->required();
    cal->add_option("--config", config_path, "optional template configuration");

    auto* phase = app.add_subcommand("phase", "phase report for a closed run");
    phase->add_option("--config", config_path, "run configuration JSON")->required();
    phase->add_option("--out", out_file, "write the report here instead of stdout");

    auto* val = app.add_subcommand("validate", "check a configuration and exit");
    val->add_option("--config", config_path, "run configuration JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, tau5);
        if (sweep->parsed()) return cmd_sweep(param, values_csv, config_path, out_dir);
        if (cal->parsed()) return cmd_calibrate(target_tau1, eta, config_path);
        if (phase->parsed()) return cmd_phase(config_path, out_file);
        if (val->parsed()) return cmd_validate(config_path);
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
