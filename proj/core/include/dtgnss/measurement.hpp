#pragma once

#include "dtgnss/ephemeris.hpp"
#include "dtgnss/raytrace.hpp"
#include "dtgnss/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dtgnss {

enum class NoiseMode { None, Gaussian };

/// The aggregate pseudorange bias term. With Gaussian mode, draws come from a
/// stream keyed by (seed, cell, epoch, satellite id) so execution order and
/// parallel scheduling do not change results.
struct NoiseModel {
    NoiseMode mode = NoiseMode::None;
    double sigma_m = 0.0;
    std::uint64_t seed = 0;
};

struct NoiseKey {
    int cell_col = -1;
    int cell_row = -1;
    double epoch_s = 0.0;
    std::string_view sat_id;
};

/// One N(0, sigma^2) draw for the key; 0 in mode None.
double noise_draw(const NoiseModel& noise, const NoiseKey& key);

struct SimulatedMeasurement {
    std::string sat_id;
    EcefPoint sat_position;
    double pseudorange_m = 0.0;
    ReceptionPath path; // retained for diagnostics
};

/// rho = r + d + eps.
double simulate_pseudorange(const ReceptionPath& path, const NoiseModel& noise,
                            const NoiseKey& key = {});

/// Measurements for one receiver position and one epoch's satellite set.
/// Satellites below the horizon or without a valid reception are omitted;
/// output is sorted by satellite id. `key_cell` feeds the noise stream
/// ({-1,-1} for free receivers off the candidate grid).
std::vector<SimulatedMeasurement> simulate_point_epoch(
    const EnuPoint& receiver, const std::vector<SatelliteEpoch>& sats,
    const Scene& scene, const NoiseModel& noise, const CellIndex& key_cell);

std::vector<SimulatedMeasurement> simulate_cell_epoch(
    const GridCell& cell, const std::vector<SatelliteEpoch>& sats,
    const Scene& scene, const NoiseModel& noise);

/// Measurement-log export format.
inline constexpr std::string_view kMeasurementLogHeader =
    "epoch_s,cell_col,cell_row,sat_id,rho_m,kind,d_m";

std::string format_measurement_log_row(double epoch_s, const CellIndex& cell,
                                       const SimulatedMeasurement& meas);

} // namespace dtgnss
