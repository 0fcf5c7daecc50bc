// Parametric radar/camera detection models with occlusion, plus DBSCAN clustering.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop/actors.hpp"
#include "coop/geo.hpp"

namespace coop::sensors {

enum class SensorKind { Radar, Camera };

struct SensorModel {
    SensorKind kind = SensorKind::Radar;
    double fov_rad = 2.0 * M_PI / 3.0;   // total azimuth FOV, centered on ego heading
    double max_range_m = 80.0;
    double noise_std_m = 0.5;            // position noise per axis
    double detection_prob = 0.9;
    double false_alarm_rate = 0.0;       // expected false detections per frame
    int returns_per_vehicle = 3;         // radar only
    double classification_accuracy = 0.9;  // camera only
};

enum class ClassLabel { Vehicle, Unknown };

struct Detection {
    int source = 0;            // sensor id
    double t = 0.0;
    geo::ScenePosition position;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
    ClassLabel class_label = ClassLabel::Unknown;

    Eigen::Vector2d xy() const { return {position.x_m, position.y_m}; }
};

struct ClusterResult {
    std::vector<int> labels;  // -1 = noise
    int cluster_count = 0;
};

namespace detail {

inline bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                               const Eigen::Vector2d& p3, const Eigen::Vector2d& p4) {
    auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    const double d1 = cross(p3, p4, p1);
    const double d2 = cross(p3, p4, p2);
    const double d3 = cross(p1, p2, p3);
    const double d4 = cross(p1, p2, p4);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

inline bool ray_blocked(const Eigen::Vector2d& from, const Eigen::Vector2d& to,
                        const actors::ActorState& occluder) {
    const auto c = occluder.corners();
    for (int e = 0; e < 4; ++e) {
        if (segments_intersect(from, to, c[e], c[(e + 1) % 4])) return true;
    }
    return false;
}

// Silhouette endpoints: the target corners with extreme bearing as seen from `from`.
inline std::pair<Eigen::Vector2d, Eigen::Vector2d> silhouette(const Eigen::Vector2d& from,
                                                              const actors::ActorState& target) {
    const auto c = target.corners();
    const double ref = std::atan2(c[0].y() - from.y(), c[0].x() - from.x());
    int lo = 0, hi = 0;
    double lo_a = 0.0, hi_a = 0.0;
    for (int i = 1; i < 4; ++i) {
        const double a =
            actors::wrap_angle(std::atan2(c[i].y() - from.y(), c[i].x() - from.x()) - ref);
        if (a < lo_a) { lo_a = a; lo = i; }
        if (a > hi_a) { hi_a = a; hi = i; }
    }
    return {c[lo], c[hi]};
}

// Midpoint of the bounding-box edge closest to the sensor origin.
inline Eigen::Vector2d nearest_face_point(const Eigen::Vector2d& from,
                                          const actors::ActorState& target) {
    const auto c = target.corners();
    Eigen::Vector2d best = 0.5 * (c[0] + c[1]);
    double best_d = (best - from).norm();
    for (int e = 1; e < 4; ++e) {
        const Eigen::Vector2d mid = 0.5 * (c[e] + c[(e + 1) % 4]);
        const double d = (mid - from).norm();
        if (d < best_d) {
            best_d = d;
            best = mid;
        }
    }
    return best;
}

inline double gaussian(std::mt19937_64& rng, double std_dev) {
    if (std_dev <= 0.0) return 0.0;
    std::normal_distribution<double> n(0.0, std_dev);
    return n(rng);
}

}  // namespace detail

// Fraction of the target silhouette visible from the ego sensor origin must
// exceed `visibility_threshold`. Sight rays are tested against occluder
// bounding-box edges in 2-D.
inline bool line_of_sight_visible(const actors::ActorState& ego,
                                  const actors::ActorState& target,
                                  const std::vector<actors::ActorState>& occluders,
                                  double visibility_threshold = 0.4) {
    const Eigen::Vector2d from = ego.center();
    const auto [p_lo, p_hi] = detail::silhouette(from, target);
    constexpr int kRays = 11;
    int free_rays = 0;
    for (int k = 0; k < kRays; ++k) {
        const double s = static_cast<double>(k) / (kRays - 1);
        const Eigen::Vector2d to = p_lo + s * (p_hi - p_lo);
        bool blocked = false;
        for (const auto& occ : occluders) {
            if (occ.actor_id == ego.actor_id || occ.actor_id == target.actor_id) continue;
            if (detail::ray_blocked(from, to, occ)) {
                blocked = true;
                break;
            }
        }
        if (!blocked) ++free_rays;
    }
    return static_cast<double>(free_rays) / kRays >= visibility_threshold;
}

inline bool in_field_of_view(const SensorModel& m, const actors::ActorState& ego,
                             const Eigen::Vector2d& point) {
    const Eigen::Vector2d d = point - ego.center();
    const double range = d.norm();
    if (range > m.max_range_m) return false;
    const double bearing = actors::wrap_angle(std::atan2(d.y(), d.x()) - ego.heading_rad);
    return std::abs(bearing) <= 0.5 * m.fov_rad;
}

inline std::vector<Detection> simulate_radar(const SensorModel& m, int sensor_id,
                                             const actors::ActorState& ego,
                                             const std::vector<actors::ActorState>& others,
                                             double t, std::mt19937_64& rng) {
    if (m.kind != SensorKind::Radar) throw std::invalid_argument("sensor is not a radar");
    std::vector<Detection> out;
    const Eigen::Matrix3d cov =
        Eigen::Vector3d(m.noise_std_m * m.noise_std_m + 1e-4,
                        m.noise_std_m * m.noise_std_m + 1e-4, 1e-2)
            .asDiagonal();
    for (const auto& target : others) {
        if (target.actor_id == ego.actor_id) continue;
        if (!in_field_of_view(m, ego, target.center())) continue;
        if (!line_of_sight_visible(ego, target, others)) continue;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) > m.detection_prob) continue;
        const Eigen::Vector2d face = detail::nearest_face_point(ego.center(), target);
        for (int r = 0; r < m.returns_per_vehicle; ++r) {
            Detection d;
            d.source = sensor_id;
            d.t = t;
            d.position = {face.x() + detail::gaussian(rng, m.noise_std_m),
                          face.y() + detail::gaussian(rng, m.noise_std_m), 0.0};
            d.covariance = cov;
            d.class_label = ClassLabel::Unknown;
            out.push_back(d);
        }
    }
    // Clutter: Poisson count, uniform over the FOV sector.
    if (m.false_alarm_rate > 0.0) {
        std::poisson_distribution<int> pois(m.false_alarm_rate);
        const int n_false = pois(rng);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int i = 0; i < n_false; ++i) {
            const double range = m.max_range_m * std::sqrt(u(rng));
            const double bearing = ego.heading_rad + (u(rng) - 0.5) * m.fov_rad;
            Detection d;
            d.source = sensor_id;
            d.t = t;
            d.position = {ego.position.x_m + range * std::cos(bearing),
                          ego.position.y_m + range * std::sin(bearing), 0.0};
            d.covariance = cov;
            d.class_label = ClassLabel::Unknown;
            out.push_back(d);
        }
    }
    return out;
}

inline std::vector<Detection> simulate_camera(const SensorModel& m, int sensor_id,
                                              const actors::ActorState& ego,
                                              const std::vector<actors::ActorState>& others,
                                              double t, std::mt19937_64& rng) {
    if (m.kind != SensorKind::Camera) throw std::invalid_argument("sensor is not a camera");
    std::vector<Detection> out;
    const Eigen::Matrix3d cov =
        Eigen::Vector3d(m.noise_std_m * m.noise_std_m + 1e-4,
                        m.noise_std_m * m.noise_std_m + 1e-4, 1e-2)
            .asDiagonal();
    for (const auto& target : others) {
        if (target.actor_id == ego.actor_id) continue;
        if (!in_field_of_view(m, ego, target.center())) continue;
        if (!line_of_sight_visible(ego, target, others)) continue;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (u(rng) > m.detection_prob) continue;
        Detection d;
        d.source = sensor_id;
        d.t = t;
        d.position = {target.position.x_m + detail::gaussian(rng, m.noise_std_m),
                      target.position.y_m + detail::gaussian(rng, m.noise_std_m), 0.0};
        d.covariance = cov;
        d.class_label = u(rng) <= m.classification_accuracy ? ClassLabel::Vehicle
                                                            : ClassLabel::Unknown;
        out.push_back(d);
    }
    return out;
}

// Standard DBSCAN over 2-D points. Deterministic: points expand in input
// order, cluster ids in discovery order, border points join the
// first-discovered cluster.
inline ClusterResult dbscan(const std::vector<Eigen::Vector2d>& points, double eps, int min_pts) {
    if (eps <= 0.0) throw std::invalid_argument("eps must be positive");
    if (min_pts < 1) throw std::invalid_argument("min_pts must be >= 1");
    const int n = static_cast<int>(points.size());
    const double eps2 = eps * eps;

    auto neighbors = [&](int i) {
        std::vector<int> nb;
        for (int j = 0; j < n; ++j) {
            if ((points[i] - points[j]).squaredNorm() <= eps2) nb.push_back(j);
        }
        return nb;
    };

    ClusterResult res;
    res.labels.assign(n, -1);
    std::vector<char> visited(n, false);
    int next_cluster = 0;
    for (int i = 0; i < n; ++i) {
        if (visited[i]) continue;
        visited[i] = true;
        auto nb = neighbors(i);
        if (static_cast<int>(nb.size()) < min_pts) continue;  // noise unless claimed later
        const int cid = next_cluster++;
        res.labels[i] = cid;
        // seed-set expansion
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const int j = nb[k];
            if (!visited[j]) {
                visited[j] = true;
                auto nb_j = neighbors(j);
                if (static_cast<int>(nb_j.size()) >= min_pts) {
                    nb.insert(nb.end(), nb_j.begin(), nb_j.end());
                }
            }
            if (res.labels[j] == -1) res.labels[j] = cid;
        }
    }
    res.cluster_count = next_cluster;
    return res;
}

// Collapse clustered radar returns to one object-level detection per cluster
// (centroid); DBSCAN noise points are dropped.
inline std::vector<Detection> cluster_radar(const std::vector<Detection>& dets, double eps,
                                            int min_pts) {
    std::vector<Eigen::Vector2d> pts;
    pts.reserve(dets.size());
    for (const auto& d : dets) pts.push_back(d.xy());
    const ClusterResult cr = dbscan(pts, eps, min_pts);
    std::vector<Detection> out;
    for (int c = 0; c < cr.cluster_count; ++c) {
        Eigen::Vector2d centroid(0.0, 0.0);
        int count = 0;
        int first = -1;
        for (std::size_t i = 0; i < dets.size(); ++i) {
            if (cr.labels[i] != c) continue;
            centroid += pts[i];
            ++count;
            if (first < 0) first = static_cast<int>(i);
        }
        if (count == 0) continue;
        centroid /= count;
        Detection d = dets[first];
        d.position = {centroid.x(), centroid.y(), 0.0};
        out.push_back(d);
    }
    return out;
}

}  // namespace coop::sensors
