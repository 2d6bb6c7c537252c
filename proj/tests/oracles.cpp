#include "oracles.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {
constexpr double kA = 6378137.0;
constexpr double kF = 1.0 / 298.257223563;
constexpr double kE2 = kF * (2.0 - kF);
constexpr double kDeg = M_PI / 180.0;
} // namespace

dtgnss::EcefPoint geodetic_to_ecef_reference(const dtgnss::GeodeticPoint& p) {
    const double lat = p.latitude_deg * kDeg;
    const double lon = p.longitude_deg * kDeg;
    const double slat = std::sin(lat);
    const double n = kA / std::sqrt(1.0 - kE2 * slat * slat);
    dtgnss::EcefPoint out;
    out.x = (n + p.height_m) * std::cos(lat) * std::cos(lon);
    out.y = (n + p.height_m) * std::cos(lat) * std::sin(lon);
    out.z = (n * (1.0 - kE2) + p.height_m) * slat;
    return out;
}

dtgnss::GeodeticPoint ecef_to_geodetic_reference(const dtgnss::EcefPoint& p) {
    const double lon = std::atan2(p.y, p.x);
    const double hor = std::hypot(p.x, p.y);
    double lat = std::atan2(p.z, hor * (1.0 - kE2));
    double height = 0.0;
    for (int i = 0; i < 20; ++i) {
        const double slat = std::sin(lat);
        const double n = kA / std::sqrt(1.0 - kE2 * slat * slat);
        height = hor / std::cos(lat) - n;
        lat = std::atan2(p.z, hor * (1.0 - kE2 * n / (n + height)));
    }
    return {lat / kDeg, lon / kDeg, height};
}

dtgnss::EnuPoint ecef_to_enu_reference(const dtgnss::EcefPoint& p,
                                       const dtgnss::GeodeticPoint& origin) {
    const dtgnss::EcefPoint o = geodetic_to_ecef_reference(origin);
    const double dx = p.x - o.x;
    const double dy = p.y - o.y;
    const double dz = p.z - o.z;
    const double lat = origin.latitude_deg * kDeg;
    const double lon = origin.longitude_deg * kDeg;
    const double sl = std::sin(lat), cl = std::cos(lat);
    const double so = std::sin(lon), co = std::cos(lon);
    dtgnss::EnuPoint out;
    out.east = -so * dx + co * dy;
    out.north = -sl * co * dx - sl * so * dy + cl * dz;
    out.up = cl * co * dx + cl * so * dy + sl * dz;
    return out;
}

namespace {

Eigen::Vector3d plane_normal_from_vertices(const dtgnss::SurfacePolygon& surface) {
    const Eigen::Vector3d a = surface.vertices[0].vec();
    const Eigen::Vector3d b = surface.vertices[1].vec();
    const Eigen::Vector3d c = surface.vertices[2].vec();
    return (b - a).cross(c - a).normalized();
}

} // namespace

Eigen::Vector3d mirror_reference(const Eigen::Vector3d& p,
                                 const dtgnss::SurfacePolygon& surface) {
    const Eigen::Vector3d n = plane_normal_from_vertices(surface);
    const Eigen::Vector3d q = surface.vertices[0].vec();
    return p - 2.0 * n.dot(p - q) * n;
}

double reflection_delay_reference(const Eigen::Vector3d& sat, const Eigen::Vector3d& rx,
                                  const dtgnss::SurfacePolygon& surface) {
    return (sat - mirror_reference(rx, surface)).norm() - (sat - rx).norm();
}

bool point_in_box(const Box& box, const Eigen::Vector3d& p) {
    if (p.z() <= box.base || p.z() >= box.top) {
        return false;
    }
    const double c = std::cos(-box.rotation_rad);
    const double s = std::sin(-box.rotation_rad);
    const double dx = p.x() - box.center.x();
    const double dy = p.y() - box.center.y();
    const double lx = c * dx - s * dy;
    const double ly = s * dx + c * dy;
    return std::abs(lx) < box.half_east && std::abs(ly) < box.half_north;
}

double distance_to_box_surface(const Box& box, const Eigen::Vector3d& p) {
    const double c = std::cos(-box.rotation_rad);
    const double s = std::sin(-box.rotation_rad);
    const double dx = p.x() - box.center.x();
    const double dy = p.y() - box.center.y();
    const double lx = c * dx - s * dy;
    const double ly = s * dx + c * dy;
    // Signed distances to the three slabs (negative inside).
    const double ax = std::abs(lx) - box.half_east;
    const double ay = std::abs(ly) - box.half_north;
    const double az = std::max(box.base - p.z(), p.z() - box.top);
    const Eigen::Vector3d outside(std::max(ax, 0.0), std::max(ay, 0.0), std::max(az, 0.0));
    if (outside.norm() > 0.0) {
        return outside.norm();
    }
    return std::abs(std::max({ax, ay, az})); // inside: distance to nearest face
}

double distance_to_nearest_box_surface(const std::vector<Box>& boxes,
                                       const Eigen::Vector3d& p) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& box : boxes) {
        best = std::min(best, distance_to_box_surface(box, p));
    }
    return best;
}

namespace {

/// Parameter interval of the segment a+t(b-a), t in [0,1], within the box's
/// inflated axis-aligned bounds. Empty when the segment misses entirely.
std::optional<std::pair<double, double>> clip_to_box_bounds(const Eigen::Vector3d& a,
                                                            const Eigen::Vector3d& b,
                                                            const Box& box) {
    const double radius = std::hypot(box.half_east, box.half_north) + 1.0;
    const Eigen::Vector3d lo(box.center.x() - radius, box.center.y() - radius,
                             box.base - 1.0);
    const Eigen::Vector3d hi(box.center.x() + radius, box.center.y() + radius,
                             box.top + 1.0);
    double t0 = 0.0, t1 = 1.0;
    const Eigen::Vector3d d = b - a;
    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(d[axis]) < 1e-15) {
            if (a[axis] < lo[axis] || a[axis] > hi[axis]) {
                return std::nullopt;
            }
            continue;
        }
        double u0 = (lo[axis] - a[axis]) / d[axis];
        double u1 = (hi[axis] - a[axis]) / d[axis];
        if (u0 > u1) {
            std::swap(u0, u1);
        }
        t0 = std::max(t0, u0);
        t1 = std::min(t1, u1);
        if (t0 > t1) {
            return std::nullopt;
        }
    }
    return std::make_pair(t0, t1);
}

bool box_blocks_sampled(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        const Box& box, double spacing_m) {
    const auto range = clip_to_box_bounds(a, b, box);
    if (!range) {
        return false;
    }
    const double length = (b - a).norm() * (range->second - range->first);
    if (length <= 0.0) {
        return false;
    }
    const long samples =
        std::clamp(static_cast<long>(length / spacing_m) + 1, 16L, 200'000'000L);
    for (long i = 0; i < samples; ++i) {
        const double t = range->first +
                         (range->second - range->first) * (i + 0.5) /
                             static_cast<double>(samples);
        if (point_in_box(box, a + t * (b - a))) {
            return true;
        }
    }
    return false;
}

} // namespace

bool segment_blocked_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const std::vector<Box>& boxes, double spacing_hint_m) {
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& box) {
        return box_blocks_sampled(a, b, box, spacing_hint_m);
    });
}

namespace {

struct PlaneFrame {
    Eigen::Vector3d origin;
    Eigen::Vector3d u;
    Eigen::Vector3d v;
    Eigen::Vector3d normal;
    std::vector<Eigen::Vector2d> poly2d;
};

PlaneFrame plane_frame(const dtgnss::SurfacePolygon& surface) {
    PlaneFrame frame;
    frame.origin = surface.vertices[0].vec();
    frame.normal = plane_normal_from_vertices(surface);
    frame.u = (surface.vertices[1].vec() - frame.origin).normalized();
    frame.v = frame.normal.cross(frame.u);
    for (const auto& vertex : surface.vertices) {
        const Eigen::Vector3d d = vertex.vec() - frame.origin;
        frame.poly2d.emplace_back(d.dot(frame.u), d.dot(frame.v));
    }
    return frame;
}

bool inside_2d(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const auto& a = poly[i];
        const auto& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x()) {
            inside = !inside;
        }
    }
    return inside;
}

double boundary_distance_2d(const std::vector<Eigen::Vector2d>& poly,
                            const Eigen::Vector2d& p) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        const Eigen::Vector2d ab = b - a;
        const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
        best = std::min(best, (a + t * ab - p).norm());
    }
    return best;
}

} // namespace

bool polygon_membership_reference(const dtgnss::SurfacePolygon& surface,
                                  const Eigen::Vector3d& p, double* boundary_dist) {
    const PlaneFrame frame = plane_frame(surface);
    const Eigen::Vector3d d = p - frame.origin;
    const Eigen::Vector2d p2(d.dot(frame.u), d.dot(frame.v));
    if (boundary_dist != nullptr) {
        *boundary_dist = boundary_distance_2d(frame.poly2d, p2);
    }
    return inside_2d(frame.poly2d, p2);
}

EchoSearchResult echo_search(const Eigen::Vector3d& sat, const Eigen::Vector3d& rx,
                             const dtgnss::SurfacePolygon& surface,
                             const std::vector<Box>& boxes) {
    EchoSearchResult result;
    const PlaneFrame frame = plane_frame(surface);

    // Both endpoints must face the reflecting side.
    const double rx_side = frame.normal.dot(rx - frame.origin);
    const double sat_side = frame.normal.dot(sat - frame.origin);
    if (std::abs(rx_side) < 1e-6) {
        result.verdict = EchoVerdict::Boundary;
        return result;
    }
    if (rx_side < 0.0 || sat_side <= 0.0) {
        result.verdict = EchoVerdict::None;
        return result;
    }

    auto path_length = [&](const Eigen::Vector2d& q2) {
        const Eigen::Vector3d q = frame.origin + q2.x() * frame.u + q2.y() * frame.v;
        return (sat - q).norm() + (q - rx).norm();
    };

    // The total path length is convex over the plane, so iterated grid
    // shrinkage converges to the specular point; no membership constraint yet.
    Eigen::Vector2d lo = frame.poly2d.front();
    Eigen::Vector2d hi = frame.poly2d.front();
    for (const auto& v : frame.poly2d) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    Eigen::Vector2d best2d = 0.5 * (lo + hi);
    double half_width = std::max(hi.x() - lo.x(), hi.y() - lo.y());
    double best_path = path_length(best2d);
    const int radius = 12;
    while (half_width > 2e-8) {
        const double pitch = half_width / radius;
        Eigen::Vector2d round_best = best2d;
        double round_path = best_path;
        for (int i = -radius; i <= radius; ++i) {
            for (int j = -radius; j <= radius; ++j) {
                const Eigen::Vector2d q2 = best2d + Eigen::Vector2d(i * pitch, j * pitch);
                const double path = path_length(q2);
                if (path < round_path) {
                    round_path = path;
                    round_best = q2;
                }
            }
        }
        best2d = round_best;
        best_path = round_path;
        half_width /= 4.0;
    }

    result.total_path = best_path;
    result.point = frame.origin + best2d.x() * frame.u + best2d.y() * frame.v;
    const double boundary = boundary_distance_2d(frame.poly2d, best2d);
    result.polygon_margin = inside_2d(frame.poly2d, best2d) ? boundary : -boundary;

    if (std::abs(result.polygon_margin) <= 1e-6) {
        result.verdict = EchoVerdict::Boundary;
        return result;
    }
    if (result.polygon_margin < 0.0) {
        result.verdict = EchoVerdict::None; // specular point misses the polygon
        return result;
    }

    const bool blocked = segment_blocked_volume(sat, result.point, boxes, 0.02) ||
                         segment_blocked_volume(result.point, rx, boxes, 0.02);
    result.verdict = blocked ? EchoVerdict::None : EchoVerdict::Exists;
    return result;
}

double leg_min_clearance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const std::vector<Box>& boxes) {
    auto clearance_at = [&](double t) {
        return distance_to_nearest_box_surface(boxes, a + t * (b - a));
    };
    const int coarse = 4096;
    double best_t = 0.5;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= coarse; ++i) {
        const double t = i / static_cast<double>(coarse);
        const double c = clearance_at(t);
        if (c < best) {
            best = c;
            best_t = t;
        }
    }
    double window = 1.0 / coarse;
    for (int round = 0; round < 12; ++round) {
        for (int i = -16; i <= 16; ++i) {
            const double t = std::clamp(best_t + i * window / 16.0, 0.0, 1.0);
            const double c = clearance_at(t);
            if (c < best) {
                best = c;
                best_t = t;
            }
        }
        window /= 4.0;
    }
    return best;
}

BoxScene random_box_scene(std::mt19937_64& rng, int max_boxes) {
    std::uniform_int_distribution<int> count_dist(1, max_boxes);
    std::uniform_real_distribution<double> center_dist(-45.0, 45.0);
    std::uniform_real_distribution<double> half_dist(2.0, 10.0);
    std::uniform_real_distribution<double> rot_dist(0.0, M_PI);
    std::uniform_real_distribution<double> height_dist(4.0, 45.0);

    BoxScene out;
    const int count = count_dist(rng);
    std::vector<dtgnss::Building> buildings;
    for (int i = 0; i < count; ++i) {
        Box box;
        box.center = {center_dist(rng), center_dist(rng)};
        box.half_east = half_dist(rng);
        box.half_north = half_dist(rng);
        box.rotation_rad = rot_dist(rng);
        box.base = 0.0;
        box.top = height_dist(rng);
        out.boxes.push_back(box);

        const double c = std::cos(box.rotation_rad);
        const double s = std::sin(box.rotation_rad);
        auto corner = [&](double sx, double sy) {
            const double lx = sx * box.half_east;
            const double ly = sy * box.half_north;
            return Eigen::Vector2d(box.center.x() + c * lx - s * ly,
                                   box.center.y() + s * lx + c * ly);
        };
        dtgnss::Building b;
        b.id = i + 1;
        b.base_altitude_m = box.base;
        b.height_m = box.top - box.base;
        b.footprint = {corner(-1, -1), corner(1, -1), corner(1, 1), corner(-1, 1)};
        buildings.push_back(std::move(b));
    }

    dtgnss::GridSpec grid;
    grid.east_min = -60.0;
    grid.east_max = 60.0;
    grid.north_min = -60.0;
    grid.north_max = 60.0;
    out.scene = dtgnss::make_scene({22.3, 114.18, 5.0}, std::move(buildings), 0.0, grid);
    return out;
}

Eigen::Vector3d random_receiver(std::mt19937_64& rng, const std::vector<Box>& boxes,
                                bool near_box) {
    std::uniform_real_distribution<double> pos_dist(-40.0, 40.0);
    std::uniform_real_distribution<double> height_dist(1.0, 3.5);
    auto clear_of_boxes = [&](const Eigen::Vector3d& p) {
        return std::none_of(boxes.begin(), boxes.end(), [&](const Box& box) {
            return point_in_box(box, p) || distance_to_box_surface(box, p) < 0.05;
        });
    };
    if (near_box && !boxes.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, boxes.size() - 1);
        std::uniform_real_distribution<double> offset_dist(1.0, 8.0);
        std::uniform_real_distribution<double> slide_dist(-1.0, 1.0);
        for (int attempt = 0; attempt < 50; ++attempt) {
            const Box& box = boxes[pick(rng)];
            const double c = std::cos(box.rotation_rad);
            const double s = std::sin(box.rotation_rad);
            // One of the four side faces, offset outward.
            const int face = std::uniform_int_distribution<int>(0, 3)(rng);
            const double sign = face % 2 == 0 ? 1.0 : -1.0;
            Eigen::Vector2d local;
            if (face < 2) {
                local = {sign * (box.half_east + offset_dist(rng)),
                         slide_dist(rng) * box.half_north};
            } else {
                local = {slide_dist(rng) * box.half_east,
                         sign * (box.half_north + offset_dist(rng))};
            }
            const Eigen::Vector3d p(box.center.x() + c * local.x() - s * local.y(),
                                    box.center.y() + s * local.x() + c * local.y(),
                                    height_dist(rng));
            if (std::abs(p.x()) < 55.0 && std::abs(p.y()) < 55.0 && clear_of_boxes(p)) {
                return p;
            }
        }
    }
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const Eigen::Vector3d p(pos_dist(rng), pos_dist(rng), height_dist(rng));
        if (clear_of_boxes(p)) {
            return p;
        }
    }
    return {55.0, 55.0, 1.5}; // region corner is always free
}

Eigen::Vector3d random_satellite_enu(std::mt19937_64& rng, double max_elevation_deg) {
    std::uniform_real_distribution<double> az_dist(0.0, 2.0 * M_PI);
    std::uniform_real_distribution<double> el_dist(5.0 * kDeg, max_elevation_deg * kDeg);
    std::uniform_real_distribution<double> range_dist(2.2e7, 2.6e7);
    const double az = az_dist(rng);
    const double el = el_dist(rng);
    const double range = range_dist(rng);
    return {range * std::cos(el) * std::sin(az), range * std::cos(el) * std::cos(az),
            range * std::sin(el)};
}

dtgnss::PositionSolution gauss_newton_reference(
    const std::vector<dtgnss::SimulatedMeasurement>& meas,
    const std::vector<double>& weights, const dtgnss::PositionSolution& init,
    const dtgnss::GeodeticPoint& origin) {
    const auto m = static_cast<Eigen::Index>(meas.size());
    std::vector<Eigen::Vector3d> sats;
    sats.reserve(meas.size());
    for (const auto& measurement : meas) {
        sats.push_back(dtgnss::ecef_to_enu(measurement.sat_position, origin).vec());
    }

    Eigen::Vector3d x = init.position.vec();
    double clock = init.clock_bias_m;
    dtgnss::PositionSolution solution;
    solution.satellite_count = static_cast<int>(meas.size());

    for (int iter = 1; iter <= 100; ++iter) {
        Eigen::MatrixXd jac(m, 4);
        Eigen::VectorXd residual(m);
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::Vector3d offset = sats[static_cast<std::size_t>(j)] - x;
            const double range = offset.norm();
            jac.block<1, 3>(j, 0) = -(offset / range).transpose();
            jac(j, 3) = 1.0;
            residual(j) =
                meas[static_cast<std::size_t>(j)].pseudorange_m - (range + clock);
            const double w = std::sqrt(weights[static_cast<std::size_t>(j)]);
            jac.row(j) *= w;
            residual(j) *= w;
        }
        const Eigen::Vector4d delta = jac.colPivHouseholderQr().solve(residual);
        x += delta.head<3>();
        clock += delta(3);
        solution.iterations = iter;
        if (delta.norm() < 1e-7) {
            solution.converged = true;
            break;
        }
    }
    solution.position = dtgnss::EnuPoint::from_vec(x);
    solution.clock_bias_m = clock;
    return solution;
}

} // namespace oracle
