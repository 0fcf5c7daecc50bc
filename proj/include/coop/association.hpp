// Mahalanobis association of sensor tracks to V2V tracks, the anti-spoof
// validation gate, and the priority track list.
#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "coop/tracker.hpp"

namespace coop::association {

struct AssociationParams {
    double epsilon = 2.7946;  // sqrt of chi-square 95%, 3 dof
    Eigen::Matrix3d measurement_covariance =
        Eigen::Matrix3d::Identity() * 4.0;  // covers sensor noise, GPS noise and
                                            // the sensor reference-point offset
    double priority_coast_s = 10.0;  // survival without fresh V2V updates
};

struct AssociationPair {
    int sensor_track_id = 0;
    int v2v_track_id = 0;
    double distance = 0.0;
};

inline double mahalanobis_distance(const Eigen::Vector3d& z_v, const Eigen::Vector3d& z_s,
                                   const Eigen::Matrix3d& c) {
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("covariance not symmetric");
    Eigen::LLT<Eigen::Matrix3d> llt(c);
    if (llt.info() != Eigen::Success)
        throw std::invalid_argument("covariance not positive definite");
    const Eigen::Vector3d d = z_v - z_s;
    return std::sqrt(d.dot(llt.solve(d)));
}

inline Eigen::Vector3d track_position_3d(const tracker::Track& tr) {
    const auto p = tr.state.position();
    return {p.x(), p.y(), 0.0};
}

// All (sensor, v2v) pairs within the threshold — deliberately many-to-many,
// sensor-major then v2v order.
inline std::vector<AssociationPair> associate_tracks(const tracker::TrackList& sensor_tl,
                                                     const tracker::TrackList& v2v_tl,
                                                     const AssociationParams& p) {
    std::vector<AssociationPair> out;
    for (const auto& s : sensor_tl.tracks) {
        if (!s.alive()) continue;
        for (const auto& v : v2v_tl.tracks) {
            if (!v.alive()) continue;
            const double d = mahalanobis_distance(track_position_3d(v), track_position_3d(s),
                                                  p.measurement_covariance);
            if (d <= p.epsilon) out.push_back({s.track_id, v.track_id, d});
        }
    }
    return out;
}

// Greedy unique pairing by ascending distance, ties broken by
// (sensor_track_id, v2v_track_id).
inline std::vector<AssociationPair> resolve_one_to_one(std::vector<AssociationPair> pairs) {
    std::sort(pairs.begin(), pairs.end(), [](const AssociationPair& a, const AssociationPair& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.sensor_track_id != b.sensor_track_id) return a.sensor_track_id < b.sensor_track_id;
        return a.v2v_track_id < b.v2v_track_id;
    });
    std::vector<AssociationPair> out;
    std::vector<int> used_sensor, used_v2v;
    for (const auto& p : pairs) {
        if (std::find(used_sensor.begin(), used_sensor.end(), p.sensor_track_id) !=
            used_sensor.end())
            continue;
        if (std::find(used_v2v.begin(), used_v2v.end(), p.v2v_track_id) != used_v2v.end())
            continue;
        used_sensor.push_back(p.sensor_track_id);
        used_v2v.push_back(p.v2v_track_id);
        out.push_back(p);
    }
    return out;
}

struct ValidationEntry {
    bool validated = false;
    double validated_at = 0.0;
};

struct PriorityTrackList {
    tracker::TrackList tracks;  // kind == Priority
    std::map<std::uint32_t, ValidationEntry> registry;
    std::map<std::uint32_t, int> priority_id_by_temp;
};

namespace detail {

// Information fusion of two Gaussian state estimates.
inline tracker::KinematicState fuse_states(const tracker::KinematicState& a,
                                           const tracker::KinematicState& b) {
    const tracker::Mat4 ia = a.covariance.inverse();
    const tracker::Mat4 ib = b.covariance.inverse();
    tracker::KinematicState f;
    f.covariance = (ia + ib).inverse();
    f.state = f.covariance * (ia * a.state + ib * b.state);
    f.covariance = 0.5 * (f.covariance + f.covariance.transpose());
    return f;
}

}  // namespace detail

// One tick of priority list maintenance:
//  - a temp_id becomes validated the first time its V2V track wins a
//    sensor-corroborated mapping; validation never reverts,
//  - validated V2V tracks are merged into the priority list (covariance
//    weighted with the mapped sensor track when one exists),
//  - unvalidated temp_ids never enter,
//  - priority tracks coast through V2V silence up to priority_coast_s, then
//    drop; re-entry is immediate on the next message.
inline PriorityTrackList update_priority_list(PriorityTrackList pl,
                                              const tracker::TrackList& sensor_tl,
                                              const tracker::TrackList& v2v_tl,
                                              const std::vector<AssociationPair>& mapping,
                                              double t, const AssociationParams& params) {
    std::map<int, int> sensor_by_v2v;  // v2v track id -> sensor track id
    for (const auto& p : mapping) sensor_by_v2v[p.v2v_track_id] = p.sensor_track_id;

    for (const auto& v : v2v_tl.tracks) {
        if (!v.alive() || !v.source_temp_id) continue;
        if (sensor_by_v2v.count(v.track_id) && !pl.registry[*v.source_temp_id].validated) {
            pl.registry[*v.source_temp_id] = {true, t};
        }
    }

    for (const auto& v : v2v_tl.tracks) {
        if (!v.alive() || !v.source_temp_id) continue;
        const std::uint32_t temp = *v.source_temp_id;
        auto reg = pl.registry.find(temp);
        if (reg == pl.registry.end() || !reg->second.validated) continue;

        const double silence = t - v.last_update_t;
        auto id_it = pl.priority_id_by_temp.find(temp);
        tracker::Track* pt =
            id_it != pl.priority_id_by_temp.end() ? pl.tracks.find(id_it->second) : nullptr;

        if (silence > params.priority_coast_s) {
            if (pt != nullptr) pt->status = tracker::TrackStatus::Deleted;
            continue;
        }

        tracker::KinematicState v_state = v.state;
        if (silence > 1e-9) {
            // Coast the stale V2V estimate forward to the current tick.
            const tracker::Mat4 f = tracker::cv_transition(silence);
            v_state.state = f * v_state.state;
            v_state.covariance = f * v_state.covariance * f.transpose();
        }
        tracker::KinematicState fused = v_state;
        const tracker::Track* st = nullptr;
        if (auto it = sensor_by_v2v.find(v.track_id); it != sensor_by_v2v.end()) {
            st = sensor_tl.find(it->second);
        }
        if (st != nullptr) fused = detail::fuse_states(v_state, st->state);

        if (pt == nullptr) {
            tracker::Track tr;
            tr.track_id = pl.tracks.next_id++;
            tr.kind = tracker::TrackKind::Priority;
            tr.source_temp_id = temp;
            tr.state = fused;
            tr.status = tracker::TrackStatus::Confirmed;
            tr.hits = 1;
            tr.frames_alive = 1;
            tr.last_update_t = t;
            pl.tracks.tracks.push_back(tr);
            pl.priority_id_by_temp[temp] = tr.track_id;
        } else {
            pt->state = fused;
            pt->status = tracker::TrackStatus::Confirmed;
            ++pt->hits;
            ++pt->frames_alive;
            pt->last_update_t = t;
        }
    }

    std::erase_if(pl.tracks.tracks, [](const tracker::Track& tr) { return !tr.alive(); });
    return pl;
}

}  // namespace coop::association
