// Ground-truth actors: waypoint trajectories with piecewise-linear interpolation.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "coop/geo.hpp"

namespace coop::actors {

struct Waypoint {
    double time_s = 0.0;
    double x_m = 0.0;
    double y_m = 0.0;
    double heading_rad = 0.0;  // CCW from scene +x
    double speed_mps = 0.0;
};

struct ActorSpec {
    int actor_id = 0;
    double length_m = 4.7;
    double width_m = 1.8;
    bool v2v_equipped = true;
    std::vector<Waypoint> waypoints;
};

struct ActorState {
    int actor_id = 0;
    geo::ScenePosition position;          // z = 0 for ground vehicles
    Eigen::Vector2d velocity{0.0, 0.0};   // [m/s]
    double heading_rad = 0.0;
    double length_m = 4.7;
    double width_m = 1.8;

    // Bounding-box corners in scene XY, CCW starting front-left.
    std::array<Eigen::Vector2d, 4> corners() const {
        const double c = std::cos(heading_rad);
        const double s = std::sin(heading_rad);
        const double hl = 0.5 * length_m;
        const double hw = 0.5 * width_m;
        auto pt = [&](double dl, double dw) {
            return Eigen::Vector2d{position.x_m + dl * c - dw * s,
                                   position.y_m + dl * s + dw * c};
        };
        return {pt(hl, hw), pt(-hl, hw), pt(-hl, -hw), pt(hl, -hw)};
    }

    Eigen::Vector2d center() const { return {position.x_m, position.y_m}; }
};

inline double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

// Linear interpolation between waypoints; heading along the shortest arc,
// velocity from the segment slope. Pure, deterministic.
inline ActorState state_at(const ActorSpec& spec, double t) {
    if (spec.waypoints.empty()) throw std::invalid_argument("actor has no waypoints");
    const auto& wps = spec.waypoints;
    ActorState st;
    st.actor_id = spec.actor_id;
    st.length_m = spec.length_m;
    st.width_m = spec.width_m;

    auto fill = [&](const Waypoint& w, const Eigen::Vector2d& vel) {
        st.position = {w.x_m, w.y_m, 0.0};
        st.heading_rad = w.heading_rad;
        st.velocity = vel;
    };

    if (t <= wps.front().time_s) {
        fill(wps.front(), Eigen::Vector2d::Zero());
        return st;
    }
    if (t >= wps.back().time_s) {
        fill(wps.back(), Eigen::Vector2d::Zero());
        return st;
    }
    for (std::size_t i = 0; i + 1 < wps.size(); ++i) {
        const Waypoint& w0 = wps[i];
        const Waypoint& w1 = wps[i + 1];
        if (t > w1.time_s) continue;
        const double dt = w1.time_s - w0.time_s;
        const double s = (t - w0.time_s) / dt;
        st.position = {w0.x_m + s * (w1.x_m - w0.x_m), w0.y_m + s * (w1.y_m - w0.y_m), 0.0};
        st.velocity = Eigen::Vector2d{(w1.x_m - w0.x_m) / dt, (w1.y_m - w0.y_m) / dt};
        st.heading_rad = w0.heading_rad + s * wrap_angle(w1.heading_rad - w0.heading_rad);
        return st;
    }
    fill(wps.back(), Eigen::Vector2d::Zero());
    return st;
}

}  // namespace coop::actors
