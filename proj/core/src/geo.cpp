#include "dtgnss/geo.hpp"

#include "dtgnss/errors.hpp"

#include <cmath>

namespace dtgnss {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

void validate(const GeodeticPoint& p) {
    if (!std::isfinite(p.latitude_deg) || !std::isfinite(p.longitude_deg) ||
        !std::isfinite(p.height_m)) {
        throw ValidationError("geodetic point has non-finite component");
    }
    if (p.latitude_deg < -90.0 || p.latitude_deg > 90.0) {
        throw ValidationError("latitude out of range [-90, 90]");
    }
    if (p.longitude_deg < -180.0 || p.longitude_deg > 180.0) {
        throw ValidationError("longitude out of range [-180, 180]");
    }
}

EcefPoint geodetic_to_ecef(const GeodeticPoint& p) {
    const double lat = p.latitude_deg * kDegToRad;
    const double lon = p.longitude_deg * kDegToRad;
    const double sin_lat = std::sin(lat);
    const double cos_lat = std::cos(lat);

    // Prime-vertical radius of curvature
    const double n = kWgs84SemiMajorAxis /
                     std::sqrt(1.0 - kWgs84EccentricitySq * sin_lat * sin_lat);

    return {(n + p.height_m) * cos_lat * std::cos(lon),
            (n + p.height_m) * cos_lat * std::sin(lon),
            (n * (1.0 - kWgs84EccentricitySq) + p.height_m) * sin_lat};
}

Eigen::Matrix3d enu_rotation(const GeodeticPoint& origin) {
    const double lat = origin.latitude_deg * kDegToRad;
    const double lon = origin.longitude_deg * kDegToRad;
    const double sl = std::sin(lat), cl = std::cos(lat);
    const double so = std::sin(lon), co = std::cos(lon);

    Eigen::Matrix3d r;
    r << -so, co, 0.0,
         -sl * co, -sl * so, cl,
          cl * co, cl * so, sl;
    return r;
}

EnuPoint ecef_to_enu(const EcefPoint& p, const GeodeticPoint& origin) {
    const Eigen::Vector3d delta = p.vec() - geodetic_to_ecef(origin).vec();
    return EnuPoint::from_vec(enu_rotation(origin) * delta);
}

EcefPoint enu_to_ecef(const EnuPoint& p, const GeodeticPoint& origin) {
    const Eigen::Vector3d ecef =
        geodetic_to_ecef(origin).vec() + enu_rotation(origin).transpose() * p.vec();
    return EcefPoint::from_vec(ecef);
}

} // namespace dtgnss
