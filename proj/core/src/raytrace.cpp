#include "dtgnss/raytrace.hpp"

#include <algorithm>
#include <cmath>

namespace dtgnss {

namespace {

/// Open-segment occlusion against every surface except `skip_id`.
bool segment_obstructed(const EnuPoint& a, const EnuPoint& b, const Scene& scene,
                        int skip_id) {
    for (const auto& surface : scene.surfaces) {
        if (surface.id == skip_id) {
            continue;
        }
        if (segment_crosses_polygon(a, b, surface)) {
            return true;
        }
    }
    return false;
}

} // namespace

bool classify_los(const EnuPoint& receiver, const EnuPoint& sat, const Scene& scene) {
    return !segment_obstructed(receiver, sat, scene, /*skip_id=*/-1);
}

std::vector<ReceptionPath> trace_single_reflection(const EnuPoint& receiver,
                                                   const EnuPoint& sat,
                                                   const Scene& scene) {
    std::vector<ReceptionPath> candidates;
    const double direct_range = (sat.vec() - receiver.vec()).norm();

    for (const auto& surface : scene.surfaces) {
        // Receiver must face the reflecting side.
        if (surface.signed_distance(receiver) <= kMinHitDistance) {
            continue;
        }
        const EnuPoint mirrored = mirror_across_plane(receiver, surface);
        const Eigen::Vector3d to_mirror = mirrored.vec() - sat.vec();
        const double mirror_range = to_mirror.norm();
        const auto hit =
            ray_intersect_polygon(sat, to_mirror / mirror_range, surface);
        if (!hit || hit->distance >= mirror_range - kMinHitDistance) {
            continue; // mirror segment misses the finite polygon
        }
        const EnuPoint reflection = hit->point;
        if (segment_obstructed(sat, reflection, scene, surface.id) ||
            segment_obstructed(reflection, receiver, scene, surface.id)) {
            continue;
        }

        ReceptionPath path;
        path.kind = PathKind::Nlos;
        path.range_m = direct_range;
        path.extra_delay_m = mirror_range - direct_range;
        path.surface_id = surface.id;
        path.reflection_point = reflection;
        candidates.push_back(std::move(path));
    }
    return candidates;
}

std::optional<ReceptionPath> simulate_reception(const EnuPoint& receiver,
                                                const EnuPoint& sat,
                                                const Scene& scene) {
    if (classify_los(receiver, sat, scene)) {
        ReceptionPath path;
        path.kind = PathKind::Los;
        path.range_m = (sat.vec() - receiver.vec()).norm();
        return path;
    }
    auto candidates = trace_single_reflection(receiver, sat, scene);
    if (candidates.empty()) {
        return std::nullopt;
    }
    // Shortest echo wins; surface order breaks exact ties deterministically.
    auto best = std::min_element(candidates.begin(), candidates.end(),
                                 [](const ReceptionPath& a, const ReceptionPath& b) {
                                     return a.extra_delay_m < b.extra_delay_m;
                                 });
    return *best;
}

} // namespace dtgnss
