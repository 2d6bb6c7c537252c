#include "dtgnss/measurement.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace dtgnss {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t size) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t key_state(const NoiseModel& noise, const NoiseKey& key) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    h = fnv1a(h, &noise.seed, sizeof(noise.seed));
    h = fnv1a(h, &key.cell_col, sizeof(key.cell_col));
    h = fnv1a(h, &key.cell_row, sizeof(key.cell_row));
    const std::uint64_t epoch_bits = std::bit_cast<std::uint64_t>(key.epoch_s);
    h = fnv1a(h, &epoch_bits, sizeof(epoch_bits));
    h = fnv1a(h, key.sat_id.data(), key.sat_id.size());
    return h;
}

double to_unit_interval(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53; // [0, 1)
}

} // namespace

double noise_draw(const NoiseModel& noise, const NoiseKey& key) {
    if (noise.mode == NoiseMode::None) {
        return 0.0;
    }
    if (noise.sigma_m < 0.0) {
        throw ValidationError("noise sigma must be >= 0");
    }
    std::uint64_t state = key_state(noise, key);
    const std::uint64_t a = splitmix64(state);
    const std::uint64_t b = splitmix64(a);
    const double u1 = 1.0 - to_unit_interval(a); // (0, 1]
    const double u2 = to_unit_interval(b);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    return noise.sigma_m * z;
}

double simulate_pseudorange(const ReceptionPath& path, const NoiseModel& noise,
                            const NoiseKey& key) {
    return path.range_m + path.extra_delay_m + noise_draw(noise, key);
}

std::vector<SimulatedMeasurement> simulate_point_epoch(
    const EnuPoint& receiver, const std::vector<SatelliteEpoch>& sats,
    const Scene& scene, const NoiseModel& noise, const CellIndex& key_cell) {
    std::vector<SimulatedMeasurement> out;
    out.reserve(sats.size());
    for (const auto& sat : sats) {
        const EnuPoint sat_enu = ecef_to_enu(sat.position, scene.origin);
        if ((sat_enu.vec() - receiver.vec()).z() <= 0.0) {
            // below-horizon satellites are dropped before tracing
            continue;
        }
        const auto path = simulate_reception(receiver, sat_enu, scene);
        if (!path) {
            continue;
        }
        SimulatedMeasurement meas;
        meas.sat_id = sat.sat_id;
        meas.sat_position = sat.position;
        meas.pseudorange_m = simulate_pseudorange(
            *path, noise,
            NoiseKey{key_cell.col, key_cell.row, sat.epoch_s, sat.sat_id});
        meas.path = *path;
        out.push_back(std::move(meas));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.sat_id < b.sat_id;
    });
    return out;
}

std::vector<SimulatedMeasurement> simulate_cell_epoch(
    const GridCell& cell, const std::vector<SatelliteEpoch>& sats,
    const Scene& scene, const NoiseModel& noise) {
    return simulate_point_epoch(cell.center, sats, scene, noise, cell.index);
}

std::string format_measurement_log_row(double epoch_s, const CellIndex& cell,
                                       const SimulatedMeasurement& meas) {
    std::string row = format_double(epoch_s);
    row += ',';
    row += std::to_string(cell.col);
    row += ',';
    row += std::to_string(cell.row);
    row += ',';
    row += meas.sat_id;
    row += ',';
    row += format_fixed(meas.pseudorange_m, 6);
    row += ',';
    row += meas.path.kind == PathKind::Los ? "LOS" : "NLOS";
    row += ',';
    row += format_fixed(meas.path.extra_delay_m, 6);
    return row;
}

} // namespace dtgnss
