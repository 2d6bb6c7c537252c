#include "dtgnss/evaluation.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dtgnss {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> data_lines(const std::string& content,
                                    const std::string& expected_header,
                                    const std::string& what) {
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(what + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != expected_header) {
        throw ParseError(what + ": bad header '" + line + "'");
    }
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            lines.push_back(line);
        }
    }
    return lines;
}

} // namespace

double horizontal_error(const EnuPoint& a, const EnuPoint& b) {
    return std::hypot(a.east - b.east, a.north - b.north);
}

ErrorStats error_stats(const std::vector<double>& errors) {
    if (errors.empty()) {
        throw ValidationError("error_stats: empty input");
    }
    const double n = static_cast<double>(errors.size());
    double sum = 0.0;
    double sum_sq = 0.0;
    double max = errors.front();
    double min = errors.front();
    for (const double e : errors) {
        sum += e;
        sum_sq += e * e;
        max = std::max(max, e);
        min = std::min(min, e);
    }
    ErrorStats stats;
    stats.mean = sum / n;
    stats.rms = std::sqrt(sum_sq / n);
    stats.stddev = std::sqrt(std::max(0.0, sum_sq / n - stats.mean * stats.mean));
    stats.max = max;
    stats.min = min;
    return stats;
}

std::vector<TrackPoint> load_track(const std::filesystem::path& path) {
    const auto lines =
        data_lines(read_file(path), "epoch_s,east_m,north_m,up_m", "track");
    std::vector<TrackPoint> track;
    int row = 1;
    for (const auto& line : lines) {
        ++row;
        const auto fields = split(line, ',');
        if (fields.size() != 4) {
            throw ParseError("track: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected 4");
        }
        const std::string ctx = "track row " + std::to_string(row);
        TrackPoint point;
        point.epoch_s = parse_double(fields[0], ctx);
        point.truth = {parse_double(fields[1], ctx), parse_double(fields[2], ctx),
                       parse_double(fields[3], ctx)};
        if (!track.empty() && point.epoch_s <= track.back().epoch_s) {
            throw ValidationError("track: epochs must be strictly increasing (row " +
                                  std::to_string(row) + ")");
        }
        track.push_back(point);
    }
    return track;
}

std::string serialize_track(const std::vector<TrackPoint>& track) {
    std::string out = "epoch_s,east_m,north_m,up_m\n";
    for (const auto& p : track) {
        out += format_double(p.epoch_s) + "," + format_fixed(p.truth.east, 6) + "," +
               format_fixed(p.truth.north, 6) + "," + format_fixed(p.truth.up, 6) + "\n";
    }
    return out;
}

std::vector<ReceiverFix> simulate_receiver_fixes(const Scene& scene,
                                                 const EphemerisTable& table,
                                                 const std::vector<TrackPoint>& track,
                                                 const PipelineOptions& options) {
    const PositionSolution init = default_init(scene.grid, scene.terrain);
    std::vector<ReceiverFix> fixes;
    fixes.reserve(track.size());

    for (const auto& point : track) {
        const auto sats = satellites_at(table, point.epoch_s);
        const auto key_cell = snap_to_cell(point.truth, scene.grid);
        auto meas = simulate_point_epoch(point.truth, sats, scene, options.noise,
                                         key_cell.value_or(CellIndex{-1, -1}));
        for (auto& m : meas) {
            m.pseudorange_m += options.clock_bias_m;
        }

        ReceiverFix fix;
        fix.epoch_s = point.epoch_s;
        fix.satellites = static_cast<int>(meas.size());
        if (meas.size() < 4) {
            fix.solved = false;
            fix.position = {kNan, kNan, kNan};
            fixes.push_back(fix);
            continue;
        }
        try {
            PositionSolution solution;
            if (options.solver == SolverChoice::Wls) {
                const auto weights = elevation_weights(meas, init.position, scene.origin);
                solution = solve_wls(meas, weights, init, scene.origin);
            } else {
                solution = solve_ols(meas, init, scene.origin);
            }
            if (!solution.converged) {
                fix.solved = false;
                fix.position = {kNan, kNan, kNan};
            } else {
                fix.position = solution.position;
            }
        } catch (const SolverError&) {
            fix.solved = false;
            fix.position = {kNan, kNan, kNan};
        }
        fixes.push_back(fix);
    }
    return fixes;
}

PipelineResult evaluate_fixes(const std::vector<TrackPoint>& track,
                              const std::vector<ReceiverFix>& fixes,
                              const CorrectionDatabase& db) {
    if (track.size() != fixes.size()) {
        throw ValidationError("evaluate: track and fixes must have equal length");
    }
    PipelineResult result;
    std::vector<double> raw_errors;
    std::vector<double> corrected_errors;

    for (std::size_t i = 0; i < track.size(); ++i) {
        if (track[i].epoch_s != fixes[i].epoch_s) {
            throw ValidationError("evaluate: track/fix epoch mismatch at index " +
                                  std::to_string(i));
        }
        TrajectoryRecord rec;
        rec.epoch_s = track[i].epoch_s;
        rec.truth = track[i].truth;
        rec.satellites = fixes[i].satellites;
        rec.solved = fixes[i].solved;
        if (!fixes[i].solved) {
            rec.raw_fix = rec.corrected_fix = fixes[i].position;
            ++result.unsolved_count;
            result.records.push_back(rec);
            continue;
        }
        rec.raw_fix = fixes[i].position;
        const auto correction = correct_position(rec.raw_fix, rec.epoch_s, db);
        rec.corrected_fix = correction.corrected;
        rec.applied = correction.applied;
        if (rec.applied) {
            ++result.applied_count;
        }
        raw_errors.push_back(horizontal_error(rec.raw_fix, rec.truth));
        corrected_errors.push_back(horizontal_error(rec.corrected_fix, rec.truth));
        result.records.push_back(rec);
    }

    if (!raw_errors.empty()) {
        result.raw_stats = error_stats(raw_errors);
        result.corrected_stats = error_stats(corrected_errors);
    }
    return result;
}

PipelineResult run_pipeline(const Scene& scene, const EphemerisTable& table,
                            const std::vector<TrackPoint>& track,
                            const CorrectionDatabase& db,
                            const PipelineOptions& options) {
    return evaluate_fixes(track, simulate_receiver_fixes(scene, table, track, options),
                          db);
}

std::string serialize_report(const std::vector<TrajectoryRecord>& records) {
    std::string out{kReportHeader};
    out += '\n';
    for (const auto& r : records) {
        const double raw_err = r.solved ? horizontal_error(r.raw_fix, r.truth) : kNan;
        const double corr_err =
            r.solved ? horizontal_error(r.corrected_fix, r.truth) : kNan;
        out += format_double(r.epoch_s) + "," + format_fixed(r.truth.east, 6) + "," +
               format_fixed(r.truth.north, 6) + "," + format_fixed(r.raw_fix.east, 6) +
               "," + format_fixed(r.raw_fix.north, 6) + "," + format_fixed(raw_err, 6) +
               "," + format_fixed(r.corrected_fix.east, 6) + "," +
               format_fixed(r.corrected_fix.north, 6) + "," + format_fixed(corr_err, 6) +
               "," + (r.applied ? "1" : "0") + "," + std::to_string(r.satellites) + "\n";
    }
    return out;
}

std::string format_stats_row(std::string_view label, const ErrorStats& stats) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-14s %8.1f %8.1f %8.1f %8.1f %8.1f",
                  std::string(label).c_str(), stats.mean, stats.stddev, stats.rms,
                  stats.max, stats.min);
    return buf;
}

std::string format_stats_table(
    const std::vector<std::pair<std::string, ErrorStats>>& rows) {
    char header[160];
    std::snprintf(header, sizeof(header), "%-14s %8s %8s %8s %8s %8s", "Algorithm",
                  "Mean", "STD", "RMS", "Max", "Min");
    std::string out = header;
    out += '\n';
    for (const auto& [label, stats] : rows) {
        out += format_stats_row(label, stats);
        out += '\n';
    }
    return out;
}

std::string serialize_fixes(const std::vector<ReceiverFix>& fixes) {
    std::string out = "epoch_s,east_m,north_m,up_m,sats,solved\n";
    for (const auto& f : fixes) {
        out += format_double(f.epoch_s) + "," + format_fixed(f.position.east, 6) + "," +
               format_fixed(f.position.north, 6) + "," + format_fixed(f.position.up, 6) +
               "," + std::to_string(f.satellites) + "," + (f.solved ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<ReceiverFix> load_fixes(const std::filesystem::path& path) {
    const auto lines = data_lines(read_file(path),
                                  "epoch_s,east_m,north_m,up_m,sats,solved", "fixes");
    std::vector<ReceiverFix> fixes;
    int row = 1;
    for (const auto& line : lines) {
        ++row;
        const auto fields = split(line, ',');
        if (fields.size() != 6) {
            throw ParseError("fixes: row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected 6");
        }
        const std::string ctx = "fixes row " + std::to_string(row);
        ReceiverFix fix;
        fix.epoch_s = parse_double(fields[0], ctx);
        fix.solved = fields[5] == "1";
        fix.position = fix.solved
                           ? EnuPoint{parse_double(fields[1], ctx),
                                      parse_double(fields[2], ctx),
                                      parse_double(fields[3], ctx)}
                           : EnuPoint{kNan, kNan, kNan};
        fix.satellites = static_cast<int>(parse_long(fields[4], ctx));
        fixes.push_back(fix);
    }
    return fixes;
}

} // namespace dtgnss
