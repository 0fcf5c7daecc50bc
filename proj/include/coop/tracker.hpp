// EKF state estimation and track lifecycle management.
//
// Motion model is 2-D constant velocity with white-noise-acceleration process
// noise. Dynamics and measurement are linear, so the EKF reduces to the KF;
// the Jacobian hooks keep the interface open for nonlinear models.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coop/assignment.hpp"
#include "coop/sensors.hpp"

namespace coop::tracker {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;

// State vector [x, y, vx, vy].
struct KinematicState {
    Vec4 state = Vec4::Zero();
    Mat4 covariance = Mat4::Identity();

    Vec2 position() const { return state.head<2>(); }
    Vec2 velocity() const { return state.tail<2>(); }
};

enum class TrackKind { Sensor, V2v, Priority };
enum class TrackStatus { Tentative, Confirmed, Coasted, Deleted };

struct Track {
    int track_id = 0;
    TrackKind kind = TrackKind::Sensor;
    KinematicState state;
    TrackStatus status = TrackStatus::Tentative;
    int hits = 0;
    int misses_consecutive = 0;
    int frames_alive = 0;
    double last_update_t = 0.0;
    Vec2 last_innovation = Vec2::Zero();
    std::optional<std::uint32_t> source_temp_id;  // v2v only

    bool alive() const { return status != TrackStatus::Deleted; }
};

struct TrackList {
    std::vector<Track> tracks;
    int next_id = 1;

    Track* find(int track_id) {
        for (auto& tr : tracks) {
            if (tr.track_id == track_id) return &tr;
        }
        return nullptr;
    }
    const Track* find(int track_id) const {
        for (const auto& tr : tracks) {
            if (tr.track_id == track_id) return &tr;
        }
        return nullptr;
    }
};

struct TrackerParams {
    double gate = 3.0;                 // Mahalanobis, ~99% for 2 dof
    int confirm_hits = 2;              // M of ...
    int confirm_window = 3;            // ... N frames
    int delete_after_misses = 5;       // 0.5 s at 10 Hz
    double process_noise_q = 2.0;      // white-noise acceleration intensity
    double initial_velocity_var = 100.0;
    double merge_distance_m = 3.0;     // duplicate-track suppression
    // Unassigned detections closer than this to an existing track do not
    // initiate new tracks (0 disables the check). Suppresses duplicate
    // births from secondary returns of an already-tracked object.
    double spawn_suppression_m = 0.0;
};

inline Mat4 cv_transition(double dt) {
    Mat4 f = Mat4::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;
    return f;
}

inline Mat4 cv_process_noise(double dt, double q) {
    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    Mat4 m = Mat4::Zero();
    m(0, 0) = m(1, 1) = q * dt3 / 3.0;
    m(2, 2) = m(3, 3) = q * dt;
    m(0, 2) = m(2, 0) = q * dt2 / 2.0;
    m(1, 3) = m(3, 1) = q * dt2 / 2.0;
    return m;
}

inline Mat24 position_measurement_jacobian() {
    Mat24 h = Mat24::Zero();
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    return h;
}

inline bool is_spd(const Mat2& m) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    Eigen::LLT<Mat2> llt(m);
    return llt.info() == Eigen::Success;
}

inline Track ekf_predict(Track tr, double dt, double q) {
    if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
    const Mat4 f = cv_transition(dt);
    tr.state.state = f * tr.state.state;
    Mat4 p = f * tr.state.covariance * f.transpose() + cv_process_noise(dt, q);
    tr.state.covariance = 0.5 * (p + p.transpose());
    return tr;
}

inline Track ekf_update(Track tr, const Vec2& z, const Mat2& r) {
    if (!is_spd(r)) throw std::invalid_argument("measurement covariance not SPD");
    const Mat24 h = position_measurement_jacobian();
    const Vec2 innovation = z - h * tr.state.state;
    const Mat2 s = h * tr.state.covariance * h.transpose() + r;
    const Eigen::Matrix<double, 4, 2> k = tr.state.covariance * h.transpose() * s.inverse();
    tr.state.state += k * innovation;
    Mat4 p = (Mat4::Identity() - k * h) * tr.state.covariance;
    tr.state.covariance = 0.5 * (p + p.transpose());
    tr.last_innovation = innovation;
    return tr;
}

// Squared Mahalanobis distance of a measurement in the track's innovation metric.
inline double innovation_distance(const Track& tr, const Vec2& z, const Mat2& r) {
    const Mat24 h = position_measurement_jacobian();
    const Vec2 nu = z - h * tr.state.state;
    const Mat2 s = h * tr.state.covariance * h.transpose() + r;
    return std::sqrt(nu.dot(s.inverse() * nu));
}

struct Assignment {
    std::vector<std::pair<int, int>> pairs;  // (track_id, detection index)
    std::vector<int> unassigned_tracks;      // track ids
    std::vector<int> unassigned_detections;  // detection indices
};

// Global nearest neighbor: one-to-one minimum-cost pairing on the Mahalanobis
// cost matrix; pairs beyond the gate are discarded.
inline Assignment associate_detections_to_tracks(const TrackList& tl,
                                                 const std::vector<sensors::Detection>& dets,
                                                 double gate) {
    if (gate <= 0.0) throw std::invalid_argument("gate must be positive");
    Assignment result;
    std::vector<const Track*> live;
    for (const auto& tr : tl.tracks) {
        if (tr.alive()) live.push_back(&tr);
    }
    const int nt = static_cast<int>(live.size());
    const int nd = static_cast<int>(dets.size());
    if (nt == 0 || nd == 0) {
        for (const auto* tr : live) result.unassigned_tracks.push_back(tr->track_id);
        for (int j = 0; j < nd; ++j) result.unassigned_detections.push_back(j);
        return result;
    }

    // Pad to square: diagonal "stay unassigned" entries cost the gate value.
    const int n = nt + nd;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < nt; ++i) {
        for (int j = 0; j < nd; ++j) {
            const Mat2 r = dets[j].covariance.topLeftCorner<2, 2>();
            const double d = innovation_distance(*live[i], dets[j].xy(), r);
            cost[i][j] = d <= gate ? d : assignment::kForbidden;
        }
        for (int j = 0; j < nt; ++j) {
            cost[i][nd + j] = (j == i) ? gate : assignment::kForbidden;
        }
    }
    for (int i = 0; i < nd; ++i) {
        for (int j = 0; j < nd; ++j) {
            cost[nt + i][j] = (j == i) ? gate : assignment::kForbidden;
        }
    }
    const auto row_to_col = assignment::solve(cost);
    std::vector<char> det_used(nd, false);
    for (int i = 0; i < nt; ++i) {
        const int j = row_to_col[i];
        if (j < nd && cost[i][j] < assignment::kForbidden && cost[i][j] <= gate) {
            result.pairs.emplace_back(live[i]->track_id, j);
            det_used[j] = true;
        } else {
            result.unassigned_tracks.push_back(live[i]->track_id);
        }
    }
    for (int j = 0; j < nd; ++j) {
        if (!det_used[j]) result.unassigned_detections.push_back(j);
    }
    return result;
}

namespace detail {

inline void apply_hit(Track& tr, const TrackerParams& params) {
    ++tr.hits;
    tr.misses_consecutive = 0;
    if (tr.status == TrackStatus::Tentative && tr.hits >= params.confirm_hits &&
        tr.frames_alive <= params.confirm_window) {
        tr.status = TrackStatus::Confirmed;
    } else if (tr.status == TrackStatus::Coasted) {
        tr.status = TrackStatus::Confirmed;
    }
}

inline void apply_miss(Track& tr, const TrackerParams& params) {
    ++tr.misses_consecutive;
    if (tr.status == TrackStatus::Tentative) {
        // Can no longer reach M-of-N confirmation: drop.
        if (tr.misses_consecutive >= params.confirm_window - params.confirm_hits + 1 ||
            tr.frames_alive > params.confirm_window) {
            tr.status = TrackStatus::Deleted;
        }
    } else {
        tr.status = TrackStatus::Coasted;
        if (tr.misses_consecutive >= params.delete_after_misses) {
            tr.status = TrackStatus::Deleted;
        }
    }
}

}  // namespace detail

inline Track spawn_track(TrackList& tl, TrackKind kind, const Vec2& position, const Mat2& pos_cov,
                         double t, const TrackerParams& params) {
    Track tr;
    tr.track_id = tl.next_id++;
    tr.kind = kind;
    tr.state.state << position.x(), position.y(), 0.0, 0.0;
    tr.state.covariance = Mat4::Zero();
    tr.state.covariance.topLeftCorner<2, 2>() = pos_cov;
    tr.state.covariance(2, 2) = params.initial_velocity_var;
    tr.state.covariance(3, 3) = params.initial_velocity_var;
    tr.status = TrackStatus::Tentative;
    tr.hits = 1;
    tr.frames_alive = 1;
    tr.last_update_t = t;
    return tr;
}

// One tick of the local fusion cycle: predict, associate, update, spawn,
// lifecycle bookkeeping, duplicate suppression.
inline TrackList step_local_fusion(TrackList tl, const std::vector<sensors::Detection>& dets,
                                   double t, const TrackerParams& params) {
    for (auto& tr : tl.tracks) {
        if (!tr.alive()) continue;
        const double dt = t - tr.last_update_t;
        if (dt > 0.0) tr = ekf_predict(std::move(tr), dt, params.process_noise_q);
        ++tr.frames_alive;
    }

    const Assignment assoc = associate_detections_to_tracks(tl, dets, params.gate);
    for (const auto& [track_id, det_idx] : assoc.pairs) {
        Track* tr = tl.find(track_id);
        const auto& det = dets[det_idx];
        *tr = ekf_update(std::move(*tr), det.xy(), det.covariance.topLeftCorner<2, 2>());
        tr->last_update_t = t;
        detail::apply_hit(*tr, params);
    }
    for (int track_id : assoc.unassigned_tracks) {
        Track* tr = tl.find(track_id);
        tr->last_update_t = t;  // predicted to t
        detail::apply_miss(*tr, params);
    }
    for (int det_idx : assoc.unassigned_detections) {
        const auto& det = dets[det_idx];
        if (params.spawn_suppression_m > 0.0) {
            // Checked against all alive tracks, including ones spawned earlier in
            // this frame, so one vehicle seen by two sensors births a single track.
            bool near_existing = false;
            for (const Track& tr : tl.tracks) {
                if (tr.alive() && (tr.state.position() - det.xy()).norm() <
                                      params.spawn_suppression_m) {
                    near_existing = true;
                    break;
                }
            }
            if (near_existing) continue;
        }
        tl.tracks.push_back(spawn_track(tl, TrackKind::Sensor, det.xy(),
                                        det.covariance.topLeftCorner<2, 2>(), t, params));
    }

    // Merge near-coincident tracks; the better-established (then older) one survives.
    auto rank = [](const Track& tr) {
        switch (tr.status) {
            case TrackStatus::Confirmed: return 2;
            case TrackStatus::Coasted: return 1;
            default: return 0;
        }
    };
    for (std::size_t i = 0; i < tl.tracks.size(); ++i) {
        Track& a = tl.tracks[i];
        if (!a.alive()) continue;
        for (std::size_t j = i + 1; j < tl.tracks.size(); ++j) {
            Track& b = tl.tracks[j];
            if (!b.alive()) continue;
            if ((a.state.position() - b.state.position()).norm() >= params.merge_distance_m)
                continue;
            Track& loser = (rank(a) != rank(b)) ? (rank(a) > rank(b) ? b : a)
                                                : (a.track_id < b.track_id ? b : a);
            loser.status = TrackStatus::Deleted;
            if (!a.alive()) break;
        }
    }

    std::erase_if(tl.tracks, [](const Track& tr) { return !tr.alive(); });
    return tl;
}

}  // namespace coop::tracker
