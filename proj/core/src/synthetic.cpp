#include "dtgnss/synthetic.hpp"

#include "dtgnss/errors.hpp"
#include "dtgnss/io_util.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <cstdio>

namespace dtgnss {

namespace {

constexpr double kOrbitRadius = 26560e3;            // meters
constexpr double kMu = 3.986004418e14;              // m^3/s^2
constexpr double kMinElevationDeg = 15.0;
constexpr double kDegToRad = M_PI / 180.0;

std::vector<Building> canyon_rows(const ScenePresetParams& p, bool segmented) {
    std::vector<Building> buildings;
    const double half = p.street_width_m / 2.0;
    auto add_block = [&](double e0, double e1, double n0, double n1) {
        Building b;
        b.id = static_cast<int>(buildings.size()) + 1;
        b.base_altitude_m = p.ground_altitude_m;
        b.height_m = p.building_height_m;
        b.footprint = {{e0, n0}, {e1, n0}, {e1, n1}, {e0, n1}};
        buildings.push_back(std::move(b));
    };
    auto add_row = [&](double n0, double n1) {
        if (!segmented) {
            add_block(0.0, p.street_length_m, n0, n1);
            return;
        }
        double e = 0.0;
        while (e < p.street_length_m - 1e-9) {
            const double e1 = std::min(e + p.block_length_m, p.street_length_m);
            add_block(e, e1, n0, n1);
            e = e1 + p.gap_m;
        }
    };
    add_row(-half - p.building_depth_m, -half); // south row
    add_row(half, half + p.building_depth_m);   // north row
    return buildings;
}

} // namespace

ScenePreset scene_preset_from_name(const std::string& name) {
    if (name == "open_sky") {
        return ScenePreset::OpenSky;
    }
    if (name == "canyon") {
        return ScenePreset::Canyon;
    }
    if (name == "street") {
        return ScenePreset::Street;
    }
    throw ValidationError("unknown scene preset '" + name +
                          "' (expected open_sky, canyon, or street)");
}

Scene gen_scene(ScenePreset preset, const ScenePresetParams& p) {
    if (!(p.street_width_m > 0.0) || !(p.street_length_m > 0.0) ||
        !(p.building_height_m > 0.0) || !(p.building_depth_m > 0.0)) {
        throw ValidationError("scene preset: dimensions must be positive");
    }
    if (!(p.grid_margin_m >= 0.0)) {
        throw ValidationError("scene preset: grid margin must be >= 0");
    }
    if (preset == ScenePreset::Street &&
        (!(p.block_length_m > 0.0) || !(p.gap_m >= 0.0))) {
        throw ValidationError("scene preset: block length must be positive");
    }

    std::vector<Building> buildings;
    switch (preset) {
    case ScenePreset::OpenSky:
        break;
    case ScenePreset::Canyon:
        buildings = canyon_rows(p, /*segmented=*/false);
        break;
    case ScenePreset::Street:
        buildings = canyon_rows(p, /*segmented=*/true);
        break;
    }

    const double strip = p.street_width_m / 2.0 + p.building_depth_m;
    GridSpec grid;
    grid.east_min = -p.grid_margin_m;
    grid.east_max = p.street_length_m + p.grid_margin_m;
    grid.north_min = preset == ScenePreset::OpenSky ? -p.grid_margin_m
                                                    : -strip - p.grid_margin_m;
    grid.north_max = preset == ScenePreset::OpenSky ? p.grid_margin_m
                                                    : strip + p.grid_margin_m;
    grid.resolution_m = p.resolution_m;
    grid.receiver_height_m = p.receiver_height_m;

    return make_scene(p.origin, std::move(buildings), p.ground_altitude_m, grid);
}

EphemerisTable gen_constellation(const GeodeticPoint& origin, int count,
                                 int epoch_count, double step_s) {
    if (count < 4) {
        throw ValidationError("constellation: need at least 4 satellites");
    }
    if (epoch_count < 1 || !(step_s > 0.0)) {
        throw ValidationError("constellation: need at least 1 epoch and step > 0");
    }
    const double span = (epoch_count - 1) * step_s;
    if (span >= kSecondsPerDay) {
        throw ValidationError("constellation: window exceeds one day");
    }
    validate(origin);

    // Local sky basis at the origin, in ECEF.
    const Eigen::Vector3d radial = geodetic_to_ecef(origin).vec().normalized();
    const Eigen::Matrix3d rot = enu_rotation(origin);
    const Eigen::Vector3d east = rot.row(0);
    const Eigen::Vector3d north = rot.row(1);

    const double angular_rate = std::sqrt(kMu / (kOrbitRadius * kOrbitRadius * kOrbitRadius));
    const double t_mid = span / 2.0;

    std::vector<SatelliteEpoch> records;
    records.reserve(static_cast<std::size_t>(count) * epoch_count);
    const double drift_deg = angular_rate * t_mid / kDegToRad; // half-window sweep
    for (int j = 0; j < count; ++j) {
        // Closest-approach direction: staggered zenith offsets (golden-ratio
        // spacing) fanned around the compass. Each orbit also gets a phase
        // offset so any single epoch sees a spread of elevations; the budget
        // zenith + |phase| + drift <= 61 deg keeps everything above the
        // 15 deg mask.
        const double zenith_deg = 16.0 + 15.0 * std::fmod(0.6180339887498949 * j, 1.0);
        const double phase_budget_deg = std::max(0.0, 61.0 - drift_deg - zenith_deg);
        const double phase_offset_deg =
            (2.0 * std::fmod(0.3819660112501051 * j + 0.25, 1.0) - 1.0) *
            phase_budget_deg;
        const double azimuth = (j + 0.5) * (2.0 * M_PI / count);
        const double zenith = zenith_deg * kDegToRad;
        const Eigen::Vector3d closest =
            (std::cos(zenith) * radial +
             std::sin(zenith) * (std::sin(azimuth) * east + std::cos(azimuth) * north))
                .normalized();
        // Orbit plane through the closest-approach direction.
        Eigen::Vector3d axis = closest.cross(Eigen::Vector3d::UnitZ());
        if (axis.norm() < 1e-6) {
            axis = closest.cross(Eigen::Vector3d::UnitX());
        }
        const Eigen::Vector3d along = axis.normalized();

        char id[16];
        std::snprintf(id, sizeof(id), "S%02d", j + 1);
        for (int k = 0; k < epoch_count; ++k) {
            const double t = k * step_s;
            const double phase =
                angular_rate * (t - t_mid) + phase_offset_deg * kDegToRad;
            SatelliteEpoch rec;
            rec.epoch_s = t;
            rec.sat_id = id;
            rec.position = EcefPoint::from_vec(
                kOrbitRadius * (std::cos(phase) * closest + std::sin(phase) * along));
            records.push_back(std::move(rec));
        }
    }

    EphemerisTable table = make_ephemeris(std::move(records));
    for (const auto& rec : table.records) {
        const auto [elevation, azimuth] =
            elevation_azimuth(rec.position, EnuPoint{0, 0, 0}, origin);
        if (elevation < kMinElevationDeg) {
            throw ValidationError(
                "constellation: infeasible parameters, satellite " + rec.sat_id +
                " drops to " + format_double(elevation) + " deg elevation at epoch " +
                format_double(rec.epoch_s) + "; shorten the window");
        }
    }
    return table;
}

} // namespace dtgnss
