#include "dtgnss/geometry.hpp"

#include "dtgnss/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace dtgnss {

namespace {

constexpr double kCoplanarTolerance = 1e-6;
constexpr double kInsideTolerance = 1e-9;

Eigen::Vector3d newell_normal(const std::vector<EnuPoint>& vertices) {
    Eigen::Vector3d n = Eigen::Vector3d::Zero();
    const std::size_t count = vertices.size();
    for (std::size_t i = 0; i < count; ++i) {
        const Eigen::Vector3d a = vertices[i].vec();
        const Eigen::Vector3d b = vertices[(i + 1) % count].vec();
        n.x() += (a.y() - b.y()) * (a.z() + b.z());
        n.y() += (a.z() - b.z()) * (a.x() + b.x());
        n.z() += (a.x() - b.x()) * (a.y() + b.y());
    }
    return n;
}

bool point_inside_convex(const Eigen::Vector3d& p, const SurfacePolygon& surface) {
    const std::size_t count = surface.vertices.size();
    for (std::size_t i = 0; i < count; ++i) {
        const Eigen::Vector3d a = surface.vertices[i].vec();
        const Eigen::Vector3d b = surface.vertices[(i + 1) % count].vec();
        const double side = (b - a).cross(p - a).dot(surface.normal);
        if (side < -kInsideTolerance) {
            return false;
        }
    }
    return true;
}

} // namespace

SurfacePolygon make_surface_polygon(std::vector<EnuPoint> vertices, int id) {
    if (vertices.size() < 3) {
        throw ValidationError("surface polygon " + std::to_string(id) +
                              ": fewer than 3 vertices");
    }
    const Eigen::Vector3d raw = newell_normal(vertices);
    const double norm = raw.norm();
    if (norm < 1e-12) {
        throw ValidationError("surface polygon " + std::to_string(id) +
                              ": degenerate (zero area)");
    }

    SurfacePolygon surface;
    surface.vertices = std::move(vertices);
    surface.normal = raw / norm;
    surface.id = id;

    const Eigen::Vector3d q = surface.vertices.front().vec();
    for (const auto& v : surface.vertices) {
        if (std::abs(surface.normal.dot(v.vec() - q)) > kCoplanarTolerance) {
            throw ValidationError("surface polygon " + std::to_string(id) +
                                  ": vertices not coplanar within 1e-6 m");
        }
    }

    const std::size_t count = surface.vertices.size();
    for (std::size_t i = 0; i < count; ++i) {
        const Eigen::Vector3d a = surface.vertices[i].vec();
        const Eigen::Vector3d b = surface.vertices[(i + 1) % count].vec();
        const Eigen::Vector3d c = surface.vertices[(i + 2) % count].vec();
        if ((b - a).norm() < 1e-12) {
            throw ValidationError("surface polygon " + std::to_string(id) +
                                  ": repeated vertex");
        }
        if ((b - a).cross(c - b).dot(surface.normal) < -kInsideTolerance) {
            throw ValidationError("surface polygon " + std::to_string(id) +
                                  ": not convex");
        }
    }
    return surface;
}

EnuPoint mirror_across_plane(const EnuPoint& p, const SurfacePolygon& surface) {
    const Eigen::Vector3d q = surface.vertices.front().vec();
    const Eigen::Vector3d v = p.vec();
    const double dist = surface.normal.dot(v - q);
    return EnuPoint::from_vec(v - 2.0 * dist * surface.normal);
}

std::optional<RayHit> ray_intersect_polygon(const EnuPoint& origin,
                                            const Eigen::Vector3d& direction,
                                            const SurfacePolygon& surface) {
    if (std::abs(direction.norm() - 1.0) > 1e-9) {
        throw ValidationError("ray direction must have unit length");
    }
    const double denom = surface.normal.dot(direction);
    if (std::abs(denom) < 1e-15) {
        return std::nullopt; // parallel to the plane
    }
    const Eigen::Vector3d q = surface.vertices.front().vec();
    const double t = surface.normal.dot(q - origin.vec()) / denom;
    if (t <= kMinHitDistance) {
        return std::nullopt;
    }
    const Eigen::Vector3d hit = origin.vec() + t * direction;
    if (!point_inside_convex(hit, surface)) {
        return std::nullopt;
    }
    return RayHit{EnuPoint::from_vec(hit), t};
}

bool segment_crosses_polygon(const EnuPoint& a, const EnuPoint& b,
                             const SurfacePolygon& surface) {
    const Eigen::Vector3d delta = b.vec() - a.vec();
    const double length = delta.norm();
    if (length < kMinHitDistance) {
        return false;
    }
    const auto hit = ray_intersect_polygon(a, delta / length, surface);
    return hit && hit->distance < length - kMinHitDistance;
}

} // namespace dtgnss
