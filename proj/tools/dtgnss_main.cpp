// dtgnss command-line workflow: synthetic scene/constellation generation,
// correction database build, receiver simulation, correction, and evaluation.

#include "dtgnss/correction.hpp"
#include "dtgnss/errors.hpp"
#include "dtgnss/evaluation.hpp"
#include "dtgnss/io_util.hpp"
#include "dtgnss/synthetic.hpp"
#include "dtgnss/version.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

namespace fs = std::filesystem;
using namespace dtgnss;

struct GlobalOptions {
    std::uint64_t seed = 0;
    std::string output_dir;
};

fs::path resolve_output(const GlobalOptions& global, const std::string& path) {
    fs::path p(path);
    if (!global.output_dir.empty() && p.is_relative()) {
        p = fs::path(global.output_dir) / p;
    }
    if (p.has_parent_path()) {
        fs::create_directories(p.parent_path());
    }
    return p;
}

SolverChoice parse_solver(const std::string& name) {
    if (name == "wls") {
        return SolverChoice::Wls;
    }
    if (name == "ols") {
        return SolverChoice::Ols;
    }
    throw ValidationError("unknown solver '" + name + "' (expected wls or ols)");
}

void write_measurement_log(const fs::path& path, const Scene& scene,
                           const EphemerisTable& table,
                           const std::vector<TrackPoint>& track,
                           const NoiseModel& noise) {
    std::string log{kMeasurementLogHeader};
    log += '\n';
    for (const auto& point : track) {
        const auto sats = satellites_at(table, point.epoch_s);
        const auto cell = snap_to_cell(point.truth, scene.grid).value_or(CellIndex{-1, -1});
        const auto meas = simulate_point_epoch(point.truth, sats, scene, noise, cell);
        for (const auto& m : meas) {
            log += format_measurement_log_row(point.epoch_s, cell, m);
            log += '\n';
        }
    }
    atomic_write_file(path, log);
}

int run(int argc, char** argv) {
    CLI::App app{"Digital-twin GNSS correction toolkit"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.set_config("--config", "", "Read options from a config file");
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--seed", global.seed, "Noise stream seed")->capture_default_str();
    app.add_option("--output-dir", global.output_dir,
                   "Directory prefix for relative output paths");

    // gen-scene
    auto* gen_scene_cmd = app.add_subcommand("gen-scene", "Generate a preset scene file");
    std::string preset_name = "canyon";
    ScenePresetParams preset_params;
    std::string scene_out = "scene.json";
    gen_scene_cmd->add_option("--preset", preset_name, "open_sky, canyon, or street")
        ->capture_default_str();
    gen_scene_cmd->add_option("--width", preset_params.street_width_m, "Street width [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--height", preset_params.building_height_m, "Building height [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--length", preset_params.street_length_m, "Street length [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--depth", preset_params.building_depth_m, "Building depth [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--block-length", preset_params.block_length_m,
                     "Block length for the street preset [m]")
        ->capture_default_str();
    gen_scene_cmd->add_option("--gap", preset_params.gap_m,
                              "Gap between street-preset blocks [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--margin", preset_params.grid_margin_m,
                     "Grid margin beyond the built strip [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--resolution", preset_params.resolution_m, "Grid resolution [m]")
        ->capture_default_str();
    gen_scene_cmd
        ->add_option("--receiver-height", preset_params.receiver_height_m,
                     "Receiver height above terrain [m]")
        ->capture_default_str();
    gen_scene_cmd->add_option("--lat", preset_params.origin.latitude_deg,
                              "Scene origin latitude [deg]")
        ->capture_default_str();
    gen_scene_cmd->add_option("--lon", preset_params.origin.longitude_deg,
                              "Scene origin longitude [deg]")
        ->capture_default_str();
    gen_scene_cmd->add_option("--alt", preset_params.origin.height_m,
                              "Scene origin ellipsoid height [m]")
        ->capture_default_str();
    gen_scene_cmd->add_option("--out", scene_out, "Output scene file")
        ->capture_default_str();

    // gen-constellation
    auto* gen_const_cmd =
        app.add_subcommand("gen-constellation", "Generate a synthetic MEO ephemeris file");
    std::string const_scene;
    GeodeticPoint const_origin{22.3, 114.18, 5.0};
    int const_count = 10;
    int const_epochs = 241;
    double const_step = 30.0;
    std::string const_out = "ephemeris.csv";
    gen_const_cmd->add_option("--scene", const_scene,
                              "Scene file providing the origin (overrides --lat/--lon)");
    gen_const_cmd->add_option("--lat", const_origin.latitude_deg, "Origin latitude [deg]")
        ->capture_default_str();
    gen_const_cmd->add_option("--lon", const_origin.longitude_deg, "Origin longitude [deg]")
        ->capture_default_str();
    gen_const_cmd->add_option("--alt", const_origin.height_m, "Origin height [m]")
        ->capture_default_str();
    gen_const_cmd->add_option("--count", const_count, "Number of satellites (>= 4)")
        ->capture_default_str();
    gen_const_cmd->add_option("--epochs", const_epochs, "Number of tabulated epochs")
        ->capture_default_str();
    gen_const_cmd->add_option("--step", const_step, "Epoch spacing [s]")
        ->capture_default_str();
    gen_const_cmd->add_option("--out", const_out, "Output ephemeris file")
        ->capture_default_str();

    // build-db
    auto* build_cmd = app.add_subcommand("build-db", "Build the correction database");
    std::string build_scene, build_eph;
    std::string build_out = "corrections.db";
    double build_slot = kDefaultSlotLength;
    double build_step = 30.0;
    unsigned build_threads = 0;
    std::string build_meas_log;
    build_cmd->add_option("--scene", build_scene, "Scene file")->required();
    build_cmd->add_option("--ephemeris", build_eph, "Ephemeris file")->required();
    build_cmd->add_option("--slot-length", build_slot, "Time slot length [s]")
        ->capture_default_str();
    build_cmd->add_option("--step", build_step, "Epoch sampling step within a slot [s]")
        ->capture_default_str();
    build_cmd->add_option("--threads", build_threads,
                          "Worker threads (0 = hardware concurrency)")
        ->capture_default_str();
    build_cmd->add_option("--measurement-log", build_meas_log,
                          "Optional per-cell measurement log (large)");
    build_cmd->add_option("--out", build_out, "Output database file")
        ->capture_default_str();

    // simulate-rx
    auto* simrx_cmd = app.add_subcommand(
        "simulate-rx", "Simulate receiver measurements and fixes along a truth track");
    std::string simrx_scene, simrx_eph, simrx_track;
    std::string simrx_out = "fixes.csv";
    std::string simrx_solver = "wls";
    std::string simrx_meas_log;
    double simrx_sigma = 0.0;
    double simrx_clock = 0.0;
    simrx_cmd->add_option("--scene", simrx_scene, "Scene file")->required();
    simrx_cmd->add_option("--ephemeris", simrx_eph, "Ephemeris file")->required();
    simrx_cmd->add_option("--track", simrx_track, "Truth track file")->required();
    simrx_cmd->add_option("--solver", simrx_solver, "Baseline solver: wls or ols")
        ->capture_default_str();
    simrx_cmd
        ->add_option("--noise-sigma", simrx_sigma, "Gaussian pseudorange sigma [m]")
        ->capture_default_str();
    simrx_cmd
        ->add_option("--clock-bias", simrx_clock, "Injected receiver clock bias [m]")
        ->capture_default_str();
    simrx_cmd->add_option("--measurement-log", simrx_meas_log,
                          "Optional measurement log file");
    simrx_cmd->add_option("--out", simrx_out, "Output fixes file")->capture_default_str();

    // correct
    auto* correct_cmd =
        app.add_subcommand("correct", "Apply a correction database to receiver fixes");
    std::string correct_db, correct_fixes;
    std::string correct_out = "corrected.csv";
    correct_cmd->add_option("--db", correct_db, "Correction database file")->required();
    correct_cmd->add_option("--fixes", correct_fixes, "Receiver fixes file")->required();
    correct_cmd->add_option("--out", correct_out, "Output corrected fixes file")
        ->capture_default_str();

    // evaluate
    auto* eval_cmd = app.add_subcommand(
        "evaluate", "Run the closed-loop evaluation and emit report + stats");
    std::string eval_scene, eval_eph, eval_track, eval_db, eval_fixes;
    std::string eval_report = "report.csv";
    std::string eval_stats = "stats.txt";
    std::string eval_solver = "wls";
    double eval_sigma = 0.0;
    double eval_clock = 0.0;
    double eval_slot = kDefaultSlotLength;
    double eval_step = 30.0;
    unsigned eval_threads = 0;
    std::string eval_db_out;
    eval_cmd->add_option("--scene", eval_scene, "Scene file")->required();
    eval_cmd->add_option("--ephemeris", eval_eph, "Ephemeris file")->required();
    eval_cmd->add_option("--track", eval_track, "Truth track file")->required();
    eval_cmd->add_option("--db", eval_db,
                         "Correction database (built from inputs when omitted)");
    eval_cmd->add_option("--fixes", eval_fixes,
                         "Evaluate externally produced fixes instead of simulating");
    eval_cmd->add_option("--solver", eval_solver, "Baseline solver: wls or ols")
        ->capture_default_str();
    eval_cmd->add_option("--noise-sigma", eval_sigma, "Gaussian pseudorange sigma [m]")
        ->capture_default_str();
    eval_cmd->add_option("--clock-bias", eval_clock, "Injected receiver clock bias [m]")
        ->capture_default_str();
    eval_cmd->add_option("--slot-length", eval_slot, "Slot length when building [s]")
        ->capture_default_str();
    eval_cmd->add_option("--step", eval_step, "Sampling step when building [s]")
        ->capture_default_str();
    eval_cmd->add_option("--threads", eval_threads, "Worker threads when building")
        ->capture_default_str();
    eval_cmd->add_option("--save-db", eval_db_out, "Save the built database here");
    eval_cmd->add_option("--report", eval_report, "Output per-epoch report file")
        ->capture_default_str();
    eval_cmd->add_option("--stats", eval_stats, "Output stats table file")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (gen_scene_cmd->parsed()) {
        const Scene scene = gen_scene(scene_preset_from_name(preset_name), preset_params);
        const auto path = resolve_output(global, scene_out);
        save_scene(scene, path);
        std::cout << "wrote " << path.string() << " (" << scene.buildings.size()
                  << " buildings, " << scene.surfaces.size() << " surfaces)\n";
        return 0;
    }

    if (gen_const_cmd->parsed()) {
        GeodeticPoint origin = const_origin;
        if (!const_scene.empty()) {
            origin = load_scene(const_scene).origin;
        }
        const EphemerisTable table =
            gen_constellation(origin, const_count, const_epochs, const_step);
        const auto path = resolve_output(global, const_out);
        save_ephemeris(table, path);
        std::cout << "wrote " << path.string() << " (" << table.records.size()
                  << " records)\n";
        return 0;
    }

    if (build_cmd->parsed()) {
        const Scene scene = load_scene(build_scene);
        const EphemerisTable table = load_ephemeris(build_eph);
        const CorrectionDatabase db =
            build_database(scene, scene.grid, table, build_slot, build_step, build_threads);
        const auto path = resolve_output(global, build_out);
        save_database(db, path);
        std::cout << "wrote " << path.string() << " (" << db.entries.size()
                  << " entries; " << db.stats.contributing << " contributing fixes, "
                  << db.stats.dropped_outside << " dropped outside, "
                  << db.stats.skipped << " skipped)\n";
        if (!build_meas_log.empty()) {
            // Log the grid simulation at every covered slot sample epoch.
            std::string log{kMeasurementLogHeader};
            log += '\n';
            const auto cells = build_grid(scene, scene.grid);
            const NoiseModel noise_free{};
            for (const auto& slot : covered_slots(table, build_slot, build_step)) {
                for (const double t : slot_sample_epochs(slot, build_step)) {
                    const auto sats = satellites_at(table, t);
                    for (const auto& cell : cells) {
                        for (const auto& m :
                             simulate_cell_epoch(cell, sats, scene, noise_free)) {
                            log += format_measurement_log_row(t, cell.index, m);
                            log += '\n';
                        }
                    }
                }
            }
            const auto log_path = resolve_output(global, build_meas_log);
            atomic_write_file(log_path, log);
            std::cout << "wrote " << log_path.string() << "\n";
        }
        return 0;
    }

    if (simrx_cmd->parsed()) {
        const Scene scene = load_scene(simrx_scene);
        const EphemerisTable table = load_ephemeris(simrx_eph);
        const auto track = load_track(simrx_track);
        PipelineOptions options;
        options.solver = parse_solver(simrx_solver);
        options.clock_bias_m = simrx_clock;
        if (simrx_sigma > 0.0) {
            options.noise = {NoiseMode::Gaussian, simrx_sigma, global.seed};
        }
        const auto fixes = simulate_receiver_fixes(scene, table, track, options);
        const auto path = resolve_output(global, simrx_out);
        atomic_write_file(path, serialize_fixes(fixes));
        std::cout << "wrote " << path.string() << " (" << fixes.size() << " fixes)\n";
        if (!simrx_meas_log.empty()) {
            write_measurement_log(resolve_output(global, simrx_meas_log), scene, table,
                                  track, options.noise);
        }
        return 0;
    }

    if (correct_cmd->parsed()) {
        const CorrectionDatabase db = load_database(correct_db);
        const auto fixes = load_fixes(correct_fixes);
        std::string out = "epoch_s,east_m,north_m,up_m,applied\n";
        long applied_count = 0;
        for (const auto& fix : fixes) {
            if (!fix.solved) {
                out += format_double(fix.epoch_s) + ",nan,nan,nan,0\n";
                continue;
            }
            const auto result = correct_position(fix.position, fix.epoch_s, db);
            applied_count += result.applied ? 1 : 0;
            out += format_double(fix.epoch_s) + "," +
                   format_fixed(result.corrected.east, 6) + "," +
                   format_fixed(result.corrected.north, 6) + "," +
                   format_fixed(result.corrected.up, 6) + "," +
                   (result.applied ? "1" : "0") + "\n";
        }
        const auto path = resolve_output(global, correct_out);
        atomic_write_file(path, out);
        std::cout << "wrote " << path.string() << " (" << applied_count << "/"
                  << fixes.size() << " corrected)\n";
        return 0;
    }

    if (eval_cmd->parsed()) {
        const Scene scene = load_scene(eval_scene);
        const EphemerisTable table = load_ephemeris(eval_eph);
        const auto track = load_track(eval_track);

        CorrectionDatabase db;
        if (!eval_db.empty()) {
            db = load_database(eval_db);
        } else {
            db = build_database(scene, scene.grid, table, eval_slot, eval_step,
                                eval_threads);
            if (!eval_db_out.empty()) {
                save_database(db, resolve_output(global, eval_db_out));
            }
        }

        PipelineResult result;
        if (!eval_fixes.empty()) {
            result = evaluate_fixes(track, load_fixes(eval_fixes), db);
        } else {
            PipelineOptions options;
            options.solver = parse_solver(eval_solver);
            options.clock_bias_m = eval_clock;
            if (eval_sigma > 0.0) {
                options.noise = {NoiseMode::Gaussian, eval_sigma, global.seed};
            }
            result = run_pipeline(scene, table, track, db, options);
        }

        const auto report_path = resolve_output(global, eval_report);
        atomic_write_file(report_path, serialize_report(result.records));

        const std::string solver_label = eval_solver == "ols" ? "OLS" : "WLS";
        const std::string table_text = format_stats_table(
            {{solver_label, result.raw_stats}, {"DT-corrected", result.corrected_stats}});
        std::string stats_text = table_text;
        stats_text += "applied " + std::to_string(result.applied_count) + "/" +
                      std::to_string(result.records.size() - result.unsolved_count) +
                      " epochs";
        if (result.unsolved_count > 0) {
            stats_text += " (" + std::to_string(result.unsolved_count) + " unsolved)";
        }
        stats_text += "\n";
        atomic_write_file(resolve_output(global, eval_stats), stats_text);

        std::cout << table_text;
        std::cout << "applied " << result.applied_count << "/"
                  << (result.records.size() - result.unsolved_count) << " epochs\n";
        std::cout << "wrote " << report_path.string() << "\n";
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const dtgnss::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dtgnss::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const dtgnss::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
