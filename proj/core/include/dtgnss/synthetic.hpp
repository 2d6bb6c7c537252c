#pragma once

#include "dtgnss/ephemeris.hpp"
#include "dtgnss/scene.hpp"

#include <string>

namespace dtgnss {

enum class ScenePreset { OpenSky, Canyon, Street };

ScenePreset scene_preset_from_name(const std::string& name);

/// Parameters for the desk-scale scene presets. The canyon preset builds two
/// solid building rows flanking an east-west street; the street preset breaks
/// the rows into blocks separated by gaps.
struct ScenePresetParams {
    GeodeticPoint origin{22.3, 114.18, 5.0};
    double street_width_m = 20.0;
    double building_height_m = 40.0;
    double street_length_m = 120.0;
    double building_depth_m = 20.0;
    double block_length_m = 25.0;
    double gap_m = 10.0;
    double grid_margin_m = 45.0; // grid extension beyond the built strip
    double resolution_m = 3.0;
    double receiver_height_m = 1.0;
    double ground_altitude_m = 0.0;
};

Scene gen_scene(ScenePreset preset, const ScenePresetParams& params);

/// Deterministic synthetic MEO constellation: circular 26,560 km orbits in
/// staggered planes chosen so all `count` satellites stay above 15 deg
/// elevation at the scene origin for the whole tabulated window. Throws
/// ValidationError when the requested window makes that infeasible.
EphemerisTable gen_constellation(const GeodeticPoint& origin, int count,
                                 int epoch_count, double step_s);

} // namespace dtgnss
