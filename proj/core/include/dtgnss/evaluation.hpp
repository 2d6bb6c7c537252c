#pragma once

#include "dtgnss/correction.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dtgnss {

/// One evaluation epoch: truth, the raw solver fix, and the corrected fix.
struct TrajectoryRecord {
    double epoch_s = 0.0;
    EnuPoint truth;
    EnuPoint raw_fix;
    EnuPoint corrected_fix;
    bool applied = false;
    int satellites = 0;
    bool solved = true;
};

/// 2D horizontal error statistics (population convention, so
/// rms^2 = mean^2 + std^2 exactly).
struct ErrorStats {
    double mean = 0.0;
    double stddev = 0.0;
    double rms = 0.0;
    double max = 0.0;
    double min = 0.0;
};

/// Euclidean norm of the (east, north) difference; up is ignored.
double horizontal_error(const EnuPoint& a, const EnuPoint& b);

/// Throws ValidationError on an empty list.
ErrorStats error_stats(const std::vector<double>& errors);

enum class SolverChoice { Wls, Ols };

struct PipelineOptions {
    NoiseModel noise;
    SolverChoice solver = SolverChoice::Wls;
    double clock_bias_m = 0.0; // constant receiver clock offset added to every rho
};

struct TrackPoint {
    double epoch_s = 0.0;
    EnuPoint truth;
};

/// Delimited truth track `epoch_s,east_m,north_m,up_m`; epochs must be
/// strictly increasing.
std::vector<TrackPoint> load_track(const std::filesystem::path& path);
std::string serialize_track(const std::vector<TrackPoint>& track);

struct ReceiverFix {
    double epoch_s = 0.0;
    EnuPoint position;
    int satellites = 0;
    bool solved = true;
};

/// Simulates measurements at each truth point and solves the baseline fix.
/// Epochs where no fix is possible are marked unsolved (NaN position).
std::vector<ReceiverFix> simulate_receiver_fixes(const Scene& scene,
                                                 const EphemerisTable& table,
                                                 const std::vector<TrackPoint>& track,
                                                 const PipelineOptions& options = {});

struct PipelineResult {
    std::vector<TrajectoryRecord> records;
    ErrorStats raw_stats;
    ErrorStats corrected_stats;
    long applied_count = 0;
    long unsolved_count = 0;
};

/// Full closed loop: simulate fixes at the truth track, apply the correction
/// database, and compute the two stats rows.
PipelineResult run_pipeline(const Scene& scene, const EphemerisTable& table,
                            const std::vector<TrackPoint>& track,
                            const CorrectionDatabase& db,
                            const PipelineOptions& options = {});

/// Correction-only variant for externally produced fixes.
PipelineResult evaluate_fixes(const std::vector<TrackPoint>& track,
                              const std::vector<ReceiverFix>& fixes,
                              const CorrectionDatabase& db);

inline constexpr std::string_view kReportHeader =
    "epoch_s,truth_e,truth_n,raw_e,raw_n,raw_err2d,corr_e,corr_n,corr_err2d,applied,sats";

std::string serialize_report(const std::vector<TrajectoryRecord>& records);

/// Stats table with the five columns Mean/STD/RMS/Max/Min, one decimal place.
std::string format_stats_row(std::string_view label, const ErrorStats& stats);
std::string format_stats_table(const std::vector<std::pair<std::string, ErrorStats>>& rows);

std::string serialize_fixes(const std::vector<ReceiverFix>& fixes);
std::vector<ReceiverFix> load_fixes(const std::filesystem::path& path);

} // namespace dtgnss
