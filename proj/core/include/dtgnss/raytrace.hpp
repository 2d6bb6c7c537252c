#pragma once

#include "dtgnss/geo.hpp"
#include "dtgnss/scene.hpp"

#include <optional>
#include <vector>

namespace dtgnss {

enum class PathKind { Los, Nlos };

/// A valid signal path from satellite to receiver. `range_m` is the straight
/// receiver-satellite distance; `extra_delay_m` the added travel distance for
/// a reflected path (0 for LOS).
struct ReceptionPath {
    PathKind kind = PathKind::Los;
    double range_m = 0.0;
    double extra_delay_m = 0.0;
    std::optional<int> surface_id;
    std::optional<EnuPoint> reflection_point;
};

/// True iff the receiver-satellite segment crosses no scene surface.
bool classify_los(const EnuPoint& receiver, const EnuPoint& sat, const Scene& scene);

/// All valid single-reflection paths, one candidate per surface. A candidate
/// exists when the satellite-to-mirrored-receiver segment crosses the surface
/// polygon, the receiver lies on the surface's front side, and both legs are
/// unobstructed.
std::vector<ReceptionPath> trace_single_reflection(const EnuPoint& receiver,
                                                   const EnuPoint& sat,
                                                   const Scene& scene);

/// LOS path when the direct segment is clear; otherwise the single-reflection
/// candidate with the smallest extra delay; nullopt when nothing is received.
/// The satellite must be above the receiver's horizon.
std::optional<ReceptionPath> simulate_reception(const EnuPoint& receiver,
                                                const EnuPoint& sat,
                                                const Scene& scene);

} // namespace dtgnss
