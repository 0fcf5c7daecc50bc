// Single-process simulation loop: ground truth -> sensors -> local fusion ->
// BSM generation -> channel -> V2V tracks -> association -> priority update
// -> metrics. Deterministic under a fixed seed.
#pragma once

#include <cstdint>
#include <random>
#include <set>
#include <vector>

#include "coop/association.hpp"
#include "coop/metrics.hpp"
#include "coop/scenario.hpp"
#include "coop/sensors.hpp"
#include "coop/tracker.hpp"
#include "coop/v2v.hpp"

namespace coop::pipeline {

struct SimOptions {
    bool disable_local = false;
    bool disable_v2v = false;
    bool capture_bsms = false;
};

struct FrameRecord {
    double t = 0.0;
    std::vector<actors::ActorState> truth;  // all actors, ego included
    tracker::TrackList local;
    tracker::TrackList v2v;
    tracker::TrackList priority;
};

struct CaptureRecord {
    std::uint32_t tick = 0;
    v2v::BsmRecord record{};
};

struct SimulationResult {
    std::vector<FrameRecord> frames;
    std::vector<metrics::FrameTruth> truth_series;
    std::vector<metrics::FrameEstimates> local_series;
    std::vector<metrics::FrameEstimates> v2v_series;
    std::vector<metrics::FrameEstimates> priority_series;
    metrics::RunReport report;
    std::vector<CaptureRecord> bsm_capture;
    std::set<std::uint32_t> spoofed_temp_ids;
    association::PriorityTrackList final_priority;
};

inline metrics::FrameEstimates confirmed_estimates(const tracker::TrackList& tl) {
    metrics::FrameEstimates fe;
    for (const auto& tr : tl.tracks) {
        if (tr.status != tracker::TrackStatus::Confirmed) continue;
        fe.track_ids.push_back(tr.track_id);
        fe.positions.push_back(tr.state.position());
    }
    return fe;
}

inline SimulationResult run_simulation(const scenario::ScenarioConfig& cfg,
                                       const SimOptions& opts = {}) {
    SimulationResult result;
    for (const auto& sp : cfg.channel.spoof_injections)
        result.spoofed_temp_ids.insert(sp.temp_id);

    const geo::SceneFrame frame = geo::build_scene_frame(cfg.scene_origin, cfg.gamma_rad);
    // Independent deterministic streams per subsystem.
    std::mt19937_64 radar_rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull + 1);
    std::mt19937_64 camera_rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull + 2);
    std::mt19937_64 gps_rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull + 3);
    std::mt19937_64 channel_rng(cfg.rng_seed * 0x9E3779B97F4A7C15ull + 4);

    tracker::TrackList local_tl, v2v_tl;
    association::PriorityTrackList priority;
    v2v::BsmBroadcaster broadcaster;
    v2v::Channel channel(cfg.channel);

    const long n_frames = cfg.frame_count();
    for (long i = 0; i < n_frames; ++i) {
        const double t = i * cfg.tick_s;
        const std::vector<actors::ActorState> states = scenario::ground_truth_at(cfg, t);
        const actors::ActorState* ego = nullptr;
        for (const auto& s : states) {
            if (s.actor_id == cfg.ego_id) ego = &s;
        }

        if (!opts.disable_local) {
            std::vector<sensors::Detection> dets = sensors::cluster_radar(
                sensors::simulate_radar(cfg.radar.model, 0, *ego, states, t, radar_rng),
                cfg.radar.cluster_eps_m, cfg.radar.cluster_min_pts);
            const auto cam =
                sensors::simulate_camera(cfg.camera, 1, *ego, states, t, camera_rng);
            dets.insert(dets.end(), cam.begin(), cam.end());
            local_tl = tracker::step_local_fusion(std::move(local_tl), dets, t,
                                                  cfg.tracker_params);
        }

        if (!opts.disable_v2v) {
            std::vector<actors::ActorState> remote_states;
            std::vector<const actors::ActorSpec*> remote_specs;
            for (const auto& s : states) {
                if (s.actor_id == cfg.ego_id) continue;
                remote_states.push_back(s);
                remote_specs.push_back(cfg.find_actor(s.actor_id));
            }
            const auto sent = broadcaster.generate(remote_states, remote_specs, frame, t,
                                                   gps_rng, cfg.v2v_params.gps_noise_std_m);
            const auto delivered = channel.transmit(sent, i, cfg.tick_s, frame, channel_rng);
            for (const auto& msg : delivered) {
                const v2v::BsmRecord wire = v2v::encode_bsm(msg);
                if (opts.capture_bsms)
                    result.bsm_capture.push_back({static_cast<std::uint32_t>(i), wire});
                v2v_tl = v2v::bsm_to_v2v_track(v2v::decode_bsm(wire), frame, std::move(v2v_tl),
                                               cfg.v2v_params);
            }
        }

        const auto pairs =
            association::associate_tracks(local_tl, v2v_tl, cfg.association_params);
        const auto mapping = association::resolve_one_to_one(pairs);
        priority = association::update_priority_list(std::move(priority), local_tl, v2v_tl,
                                                     mapping, t, cfg.association_params);

        metrics::FrameTruth ft;
        for (const auto& s : states) {
            if (s.actor_id == cfg.ego_id) continue;
            ft.truth_ids.push_back(s.actor_id);
            ft.positions.push_back(s.center());
        }
        result.truth_series.push_back(std::move(ft));
        result.local_series.push_back(confirmed_estimates(local_tl));
        result.v2v_series.push_back(confirmed_estimates(v2v_tl));
        result.priority_series.push_back(confirmed_estimates(priority.tracks));
        result.frames.push_back({t, states, local_tl, v2v_tl, priority.tracks});
    }

    result.final_priority = priority;
    result.report =
        metrics::evaluate_run(result.local_series, result.v2v_series, result.priority_series,
                              result.truth_series, cfg.gospa_params, cfg.switch_penalty);
    return result;
}

// True if any priority track ever originated from one of the spoofed temp ids.
inline bool priority_contains_spoof(const SimulationResult& r) {
    for (const auto& f : r.frames) {
        for (const auto& tr : f.priority.tracks) {
            if (tr.source_temp_id && r.spoofed_temp_ids.count(*tr.source_temp_id)) return true;
        }
    }
    return false;
}

}  // namespace coop::pipeline
