// Independent reference implementations used only by tests. Each oracle takes
// a different algebraic or brute-force route than the library code it checks.
#pragma once

#include <dtgnss/estimator.hpp>
#include <dtgnss/geo.hpp>
#include <dtgnss/geometry.hpp>
#include <dtgnss/scene.hpp>

#include <Eigen/Core>

#include <optional>
#include <random>
#include <vector>

namespace oracle {

// --- geodesy -----------------------------------------------------------

/// Separate transcription of the WGS-84 closed form.
dtgnss::EcefPoint geodetic_to_ecef_reference(const dtgnss::GeodeticPoint& p);

/// Iterative (Bowring-style) ECEF -> geodetic inverse; the library has no
/// inverse, so round-trip checks rest entirely on this.
dtgnss::GeodeticPoint ecef_to_geodetic_reference(const dtgnss::EcefPoint& p);

/// Explicit component-by-component rotation into the tangent frame.
dtgnss::EnuPoint ecef_to_enu_reference(const dtgnss::EcefPoint& p,
                                       const dtgnss::GeodeticPoint& origin);

// --- reflection --------------------------------------------------------

/// Householder-style reflection, with the plane normal recomputed from the
/// first three polygon vertices rather than taken from the surface.
Eigen::Vector3d mirror_reference(const Eigen::Vector3d& p,
                                 const dtgnss::SurfacePolygon& surface);

/// Extra path length of the specular echo by the mirror construction.
double reflection_delay_reference(const Eigen::Vector3d& sat, const Eigen::Vector3d& rx,
                                  const dtgnss::SurfacePolygon& surface);

// --- brute-force geometry oracle ---------------------------------------

/// Axis-independent rotated box (extruded rotated rectangle).
struct Box {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double half_east = 1.0;  // half extent along the box's local x
    double half_north = 1.0; // half extent along the box's local y
    double rotation_rad = 0.0;
    double base = 0.0;
    double top = 1.0;
};

bool point_in_box(const Box& box, const Eigen::Vector3d& p);

/// Dense-sampling occlusion: true when the open segment passes through any
/// box interior. `spacing_hint_m` controls the sample pitch.
bool segment_blocked_volume(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                            const std::vector<Box>& boxes, double spacing_hint_m);

/// Distance from a point to the nearest box surface (0 on a face).
double distance_to_box_surface(const Box& box, const Eigen::Vector3d& p);
double distance_to_nearest_box_surface(const std::vector<Box>& boxes,
                                       const Eigen::Vector3d& p);

enum class EchoVerdict { Exists, None, Boundary };

struct EchoSearchResult {
    EchoVerdict verdict = EchoVerdict::None;
    double total_path = 0.0;               // |sat - p*| + |p* - rx| at the specular point
    Eigen::Vector3d point = Eigen::Vector3d::Zero();
    double polygon_margin = 0.0;           // signed: >0 inside the polygon
};

/// Fermat-principle search for a single-reflection echo off one surface: the
/// total path length is minimized over the whole supporting plane (convex, so
/// iterated grid refinement finds the specular point without any mirror
/// construction), the minimizer is tested against the polygon with its own
/// membership test, and the legs are occlusion-checked by volume sampling.
/// Verdict Boundary means the specular point lies within 1e-6 m of the
/// polygon boundary and the case is genuinely ambiguous.
EchoSearchResult echo_search(const Eigen::Vector3d& sat, const Eigen::Vector3d& rx,
                             const dtgnss::SurfacePolygon& surface,
                             const std::vector<Box>& boxes);

/// Minimum clearance between the open segment and any box surface, refined to
/// micrometer accuracy; classifies grazing-contact disagreements.
double leg_min_clearance(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                         const std::vector<Box>& boxes);

/// Strict-interior membership of a point in the polygon plane via its own
/// crossing-number test; used by the ray-intersection unit oracle.
bool polygon_membership_reference(const dtgnss::SurfacePolygon& surface,
                                  const Eigen::Vector3d& p, double* boundary_dist = nullptr);

// --- random scenes -----------------------------------------------------

struct BoxScene {
    dtgnss::Scene scene;
    std::vector<Box> boxes;
};

/// Up to `max_boxes` rotated boxes in a ~120 m square region, ground at 0.
BoxScene random_box_scene(std::mt19937_64& rng, int max_boxes = 5);

/// Receiver placed outside every box, 1-3.5 m above ground. With
/// `near_box` it is dropped 1-8 m off a random box face so reflections
/// actually occur.
Eigen::Vector3d random_receiver(std::mt19937_64& rng, const std::vector<Box>& boxes,
                                bool near_box = false);

/// Satellite direction drawn over azimuth x elevation(5..max), MEO range.
Eigen::Vector3d random_satellite_enu(std::mt19937_64& rng, double max_elevation_deg = 85.0);

// --- estimation --------------------------------------------------------

/// Independently coded Gauss-Newton: true Jacobian rows [-u, 1], residual
/// measured-minus-predicted, QR on the Jacobian (not normal equations),
/// iterated to 1e-10.
dtgnss::PositionSolution gauss_newton_reference(
    const std::vector<dtgnss::SimulatedMeasurement>& meas,
    const std::vector<double>& weights, const dtgnss::PositionSolution& init,
    const dtgnss::GeodeticPoint& origin);

} // namespace oracle
