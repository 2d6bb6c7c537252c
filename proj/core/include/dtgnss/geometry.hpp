#pragma once

#include "dtgnss/geo.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace dtgnss {

/// Minimum ray-hit distance; excludes self-intersection at a reflection point.
inline constexpr double kMinHitDistance = 1e-9;

/// Planar convex polygon with an outward unit normal, in the scene ENU frame.
/// Vertex winding is counter-clockwise seen from the normal side.
struct SurfacePolygon {
    std::vector<EnuPoint> vertices;
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    int id = 0;

    /// Signed distance of p from the polygon plane, positive on the normal side.
    double signed_distance(const EnuPoint& p) const {
        return normal.dot(p.vec() - vertices.front().vec());
    }
};

/// Builds a polygon from vertices, deriving the unit normal from the winding
/// (Newell's method). Throws ValidationError when the vertices are fewer than
/// three, not coplanar within 1e-6 m, degenerate, or not convex.
SurfacePolygon make_surface_polygon(std::vector<EnuPoint> vertices, int id);

/// Reflects p across the polygon's supporting plane.
EnuPoint mirror_across_plane(const EnuPoint& p, const SurfacePolygon& surface);

struct RayHit {
    EnuPoint point;
    double distance = 0.0;
};

/// Intersection of the ray with the polygon: requires distance > 1e-9 m and
/// the hit point inside the polygon (boundary counts as inside).
/// `direction` must have unit length within 1e-9.
std::optional<RayHit> ray_intersect_polygon(const EnuPoint& origin,
                                            const Eigen::Vector3d& direction,
                                            const SurfacePolygon& surface);

/// True when the open segment (a, b) crosses the polygon; endpoints within
/// kMinHitDistance of the surface do not count.
bool segment_crosses_polygon(const EnuPoint& a, const EnuPoint& b,
                             const SurfacePolygon& surface);

} // namespace dtgnss
