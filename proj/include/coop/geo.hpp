// Geodetic -> ECEF -> local scene frame coordinate pipeline (WGS-84).
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace coop::geo {

struct Ellipsoid {
    double semi_major_a = 6378137.0;        // WGS-84 [m]
    double semi_minor_b = 6356752.314245;   // WGS-84 [m]
};

inline constexpr Ellipsoid kWgs84{};

struct GeodeticPosition {
    double latitude_rad = 0.0;   // [-pi/2, pi/2]
    double longitude_rad = 0.0;  // (-pi, pi]
    double altitude_m = 0.0;
};

struct EcefPosition {
    double x_m = 0.0;
    double y_m = 0.0;
    double z_m = 0.0;

    Eigen::Vector3d vec() const { return {x_m, y_m, z_m}; }
};

struct ScenePosition {
    double x_m = 0.0;
    double y_m = 0.0;
    double z_m = 0.0;

    Eigen::Vector3d vec() const { return {x_m, y_m, z_m}; }
};

// Radius of curvature in the prime vertical, N(lat) = a^2 / sqrt(a^2 cos^2 + b^2 sin^2).
inline double prime_vertical_radius(double lat_rad, const Ellipsoid& e = kWgs84) {
    const double a = e.semi_major_a;
    const double b = e.semi_minor_b;
    const double c = std::cos(lat_rad);
    const double s = std::sin(lat_rad);
    return a * a / std::sqrt(a * a * c * c + b * b * s * s);
}

inline EcefPosition geodetic_to_ecef(const GeodeticPosition& g, const Ellipsoid& e = kWgs84) {
    const double n = prime_vertical_radius(g.latitude_rad, e);
    const double a = e.semi_major_a;
    const double b = e.semi_minor_b;
    const double cl = std::cos(g.latitude_rad);
    const double sl = std::sin(g.latitude_rad);
    EcefPosition p;
    p.x_m = (n + g.altitude_m) * cl * std::cos(g.longitude_rad);
    p.y_m = (n + g.altitude_m) * cl * std::sin(g.longitude_rad);
    p.z_m = ((b * b) / (a * a) * n + g.altitude_m) * sl;
    return p;
}

inline Eigen::Vector3d ecef_to_local(const EcefPosition& p, const EcefPosition& origin) {
    return {p.x_m - origin.x_m, p.y_m - origin.y_m, p.z_m - origin.z_m};
}

inline Eigen::Matrix3d rotation_x(double t) {
    Eigen::Matrix3d r;
    r << 1, 0, 0,
         0, std::cos(t), -std::sin(t),
         0, std::sin(t), std::cos(t);
    return r;
}

inline Eigen::Matrix3d rotation_y(double t) {
    Eigen::Matrix3d r;
    r << std::cos(t), 0, std::sin(t),
         0, 1, 0,
         -std::sin(t), 0, std::cos(t);
    return r;
}

inline Eigen::Matrix3d rotation_z(double t) {
    Eigen::Matrix3d r;
    r << std::cos(t), -std::sin(t), 0,
         std::sin(t), std::cos(t), 0,
         0, 0, 1;
    return r;
}

// Local scene frame anchored at a geodetic origin. Rotation is the
// composition R_x(lat0) * R_y(lon0) * R_z(gamma); gamma aligns the frame
// with a chosen local direction.
struct SceneFrame {
    GeodeticPosition origin_geodetic;
    EcefPosition origin_ecef;
    double gamma_rad = 0.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
};

inline SceneFrame build_scene_frame(const GeodeticPosition& origin, double gamma_rad,
                                    const Ellipsoid& e = kWgs84) {
    SceneFrame f;
    f.origin_geodetic = origin;
    f.origin_ecef = geodetic_to_ecef(origin, e);
    f.gamma_rad = gamma_rad;
    f.rotation = rotation_x(origin.latitude_rad) * rotation_y(origin.longitude_rad) *
                 rotation_z(gamma_rad);
    return f;
}

inline ScenePosition geodetic_to_scene(const GeodeticPosition& g, const SceneFrame& f,
                                       const Ellipsoid& e = kWgs84) {
    const Eigen::Vector3d local = ecef_to_local(geodetic_to_ecef(g, e), f.origin_ecef);
    const Eigen::Vector3d s = f.rotation * local;
    return {s.x(), s.y(), s.z()};
}

}  // namespace coop::geo
