#pragma once

#include <Eigen/Core>

namespace dtgnss {

// WGS-84 ellipsoid
inline constexpr double kWgs84SemiMajorAxis = 6378137.0;          // meters
inline constexpr double kWgs84Flattening = 1.0 / 298.257223563;
inline constexpr double kWgs84EccentricitySq =
    kWgs84Flattening * (2.0 - kWgs84Flattening);

/// Geodetic position on the WGS-84 ellipsoid. Angles in degrees, height in
/// meters above the ellipsoid.
struct GeodeticPoint {
    double latitude_deg = 0.0;   // [-90, 90]
    double longitude_deg = 0.0;  // [-180, 180]
    double height_m = 0.0;
};

/// Earth-centered Earth-fixed Cartesian position, meters.
struct EcefPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Eigen::Vector3d vec() const { return {x, y, z}; }
    static EcefPoint from_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Local east-north-up position relative to a scene origin, meters.
struct EnuPoint {
    double east = 0.0;
    double north = 0.0;
    double up = 0.0;

    Eigen::Vector3d vec() const { return {east, north, up}; }
    static EnuPoint from_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

/// Throws ValidationError when latitude/longitude are out of range or any
/// component is non-finite.
void validate(const GeodeticPoint& p);

EcefPoint geodetic_to_ecef(const GeodeticPoint& p);

/// Rotation from ECEF deltas into the local tangent frame at `origin`;
/// rows are east, north, up.
Eigen::Matrix3d enu_rotation(const GeodeticPoint& origin);

EnuPoint ecef_to_enu(const EcefPoint& p, const GeodeticPoint& origin);
EcefPoint enu_to_ecef(const EnuPoint& p, const GeodeticPoint& origin);

} // namespace dtgnss
