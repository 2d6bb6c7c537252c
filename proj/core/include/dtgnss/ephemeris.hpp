#pragma once

#include "dtgnss/geo.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace dtgnss {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDefaultSlotLength = 300.0; // seconds

/// One tabulated satellite position. Epoch is seconds of day; the position
/// norm must lie in the MEO/GEO sanity band [2.0e7, 5.0e7] m.
struct SatelliteEpoch {
    double epoch_s = 0.0;
    std::string sat_id;
    EcefPoint position;
};

/// Precomputed satellite positions, sorted by (epoch, sat_id), no duplicates.
struct EphemerisTable {
    std::vector<SatelliteEpoch> records;
    double epoch_step_s = 0.0; // min spacing of distinct epochs; 0 for a single epoch
    std::uint32_t content_hash = 0;

    std::vector<double> distinct_epochs() const;
};

/// Validates, sorts and stamps a table built in memory.
EphemerisTable make_ephemeris(std::vector<SatelliteEpoch> records);

/// Reads the delimited text format: header `epoch_s,sat_id,x_m,y_m,z_m`,
/// one record per line. Errors carry the offending row number.
EphemerisTable load_ephemeris(const std::filesystem::path& path);

void save_ephemeris(const EphemerisTable& table, const std::filesystem::path& path);
std::string serialize_ephemeris(const EphemerisTable& table);

/// Records at the nearest tabulated epoch within half the epoch step; there is
/// no interpolation. Throws CoverageError otherwise.
std::vector<SatelliteEpoch> satellites_at(const EphemerisTable& table, double epoch_s);

/// True when satellites_at would succeed.
bool has_coverage(const EphemerisTable& table, double epoch_s);

struct SlotIndex {
    int slot = 0;
    double slot_length_s = kDefaultSlotLength;

    friend bool operator==(const SlotIndex&, const SlotIndex&) = default;
};

/// slot = floor(epoch / slot_length); epoch must lie in [0, 86400).
SlotIndex slot_of_epoch(double epoch_s, double slot_length_s);

/// Elevation/azimuth of the receiver->satellite direction in the local frame.
/// Azimuth is clockwise from north in [0, 360); elevation in [-90, 90].
std::pair<double, double> elevation_azimuth(const EcefPoint& sat,
                                            const EnuPoint& receiver,
                                            const GeodeticPoint& origin);

} // namespace dtgnss
