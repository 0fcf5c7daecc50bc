// Scenario configuration: JSON document I/O, deterministic ground truth, and
// the built-in four-way intersection benchmark (unprotected left turn with an
// occlusion-driven track loss).
#pragma once

#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop/actors.hpp"
#include "coop/association.hpp"
#include "coop/geo.hpp"
#include "coop/metrics.hpp"
#include "coop/sensors.hpp"
#include "coop/tracker.hpp"
#include "coop/v2v.hpp"

namespace coop::scenario {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RadarConfig {
    sensors::SensorModel model;
    double cluster_eps_m = 2.5;
    int cluster_min_pts = 1;
};

struct ScenarioConfig {
    std::string name;
    double duration_s = 30.0;
    double tick_s = 0.1;
    geo::GeodeticPosition scene_origin;
    double gamma_rad = 0.0;
    std::uint64_t rng_seed = 1;
    int ego_id = 0;
    std::vector<actors::ActorSpec> actors;
    RadarConfig radar;
    sensors::SensorModel camera;
    v2v::ChannelModel channel;
    v2v::V2vParams v2v_params;
    tracker::TrackerParams tracker_params;
    association::AssociationParams association_params;
    metrics::GospaParams gospa_params;
    double switch_penalty = 450.0;  // c^p / 2 at the defaults

    const actors::ActorSpec* find_actor(int id) const {
        for (const auto& a : actors) {
            if (a.actor_id == id) return &a;
        }
        return nullptr;
    }

    long frame_count() const {
        return static_cast<long>(std::llround(duration_s / tick_s)) + 1;
    }
};

inline void validate(const ScenarioConfig& cfg) {
    if (cfg.tick_s <= 0.0) throw ScenarioError("tick_s must be positive");
    const double frames = cfg.duration_s / cfg.tick_s;
    if (std::abs(frames - std::llround(frames)) > 1e-9)
        throw ScenarioError("duration_s must be a multiple of tick_s");
    if (cfg.find_actor(cfg.ego_id) == nullptr)
        throw ScenarioError("ego_id " + std::to_string(cfg.ego_id) + " not among actors");
    std::map<int, bool> ids;
    for (const auto& a : cfg.actors) {
        if (ids.count(a.actor_id))
            throw ScenarioError("duplicate actor id " + std::to_string(a.actor_id));
        ids[a.actor_id] = true;
        if (a.length_m <= 0.0 || a.width_m <= 0.0)
            throw ScenarioError("actor " + std::to_string(a.actor_id) +
                                ": length and width must be positive");
        if (a.waypoints.empty())
            throw ScenarioError("actor " + std::to_string(a.actor_id) + ": no waypoints");
        for (std::size_t i = 1; i < a.waypoints.size(); ++i) {
            if (a.waypoints[i].time_s <= a.waypoints[i - 1].time_s)
                throw ScenarioError("actor " + std::to_string(a.actor_id) +
                                    ": waypoint times must be strictly increasing");
        }
    }
}

namespace detail {

inline double deg2rad(double d) { return d * M_PI / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / M_PI; }

template <typename T>
T get_or(const nlohmann::json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

// Degrees at this boundary only; radians everywhere inside.
inline ScenarioConfig load_scenario(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioError(std::string("scenario parse error: ") + e.what());
    }
    ScenarioConfig cfg;
    try {
        cfg.name = detail::get_or<std::string>(j, "name", "unnamed");
        cfg.duration_s = j.at("duration_s").get<double>();
        cfg.tick_s = j.at("tick_s").get<double>();
        const auto& o = j.at("origin");
        cfg.scene_origin.latitude_rad = detail::deg2rad(o.at("lat_deg").get<double>());
        cfg.scene_origin.longitude_rad = detail::deg2rad(o.at("lon_deg").get<double>());
        cfg.scene_origin.altitude_m = o.at("alt_m").get<double>();
        cfg.gamma_rad = detail::deg2rad(detail::get_or<double>(j, "gamma_deg", 0.0));
        cfg.rng_seed = detail::get_or<std::uint64_t>(j, "rng_seed", 1);
        cfg.ego_id = j.at("ego_id").get<int>();
        for (const auto& ja : j.at("actors")) {
            actors::ActorSpec a;
            a.actor_id = ja.at("id").get<int>();
            a.length_m = ja.at("length_m").get<double>();
            a.width_m = ja.at("width_m").get<double>();
            a.v2v_equipped = detail::get_or<bool>(ja, "v2v", true);
            for (const auto& jw : ja.at("waypoints")) {
                if (!jw.is_array() || jw.size() != 5)
                    throw ScenarioError("actor " + std::to_string(a.actor_id) +
                                        ": waypoint must be [t, x, y, heading_deg, speed_mps]");
                actors::Waypoint w;
                w.time_s = jw[0].get<double>();
                w.x_m = jw[1].get<double>();
                w.y_m = jw[2].get<double>();
                w.heading_rad = detail::deg2rad(jw[3].get<double>());
                w.speed_mps = jw[4].get<double>();
                a.waypoints.push_back(w);
            }
            cfg.actors.push_back(std::move(a));
        }
        if (j.contains("radar")) {
            const auto& r = j.at("radar");
            cfg.radar.model.kind = sensors::SensorKind::Radar;
            cfg.radar.model.fov_rad = detail::deg2rad(detail::get_or<double>(r, "fov_deg", 120.0));
            cfg.radar.model.max_range_m = detail::get_or<double>(r, "max_range_m", 80.0);
            cfg.radar.model.noise_std_m = detail::get_or<double>(r, "noise_std_m", 0.5);
            cfg.radar.model.detection_prob = detail::get_or<double>(r, "detection_prob", 0.9);
            cfg.radar.model.false_alarm_rate = detail::get_or<double>(r, "false_alarm_rate", 0.0);
            cfg.radar.model.returns_per_vehicle =
                detail::get_or<int>(r, "returns_per_vehicle", 3);
            cfg.radar.cluster_eps_m = detail::get_or<double>(r, "cluster_eps_m", 2.5);
            cfg.radar.cluster_min_pts = detail::get_or<int>(r, "cluster_min_pts", 1);
        }
        if (j.contains("camera")) {
            const auto& c = j.at("camera");
            cfg.camera.kind = sensors::SensorKind::Camera;
            cfg.camera.fov_rad = detail::deg2rad(detail::get_or<double>(c, "fov_deg", 60.0));
            cfg.camera.max_range_m = detail::get_or<double>(c, "max_range_m", 60.0);
            cfg.camera.noise_std_m = detail::get_or<double>(c, "noise_std_m", 1.0);
            cfg.camera.detection_prob = detail::get_or<double>(c, "detection_prob", 0.9);
            cfg.camera.classification_accuracy =
                detail::get_or<double>(c, "classification_accuracy", 0.9);
        } else {
            cfg.camera.kind = sensors::SensorKind::Camera;
        }
        if (j.contains("channel")) {
            const auto& ch = j.at("channel");
            cfg.channel.drop_prob = detail::get_or<double>(ch, "drop_prob", 0.0);
            cfg.channel.latency_ticks = detail::get_or<int>(ch, "latency_ticks", 0);
            if (ch.contains("spoofs")) {
                for (const auto& js : ch.at("spoofs")) {
                    v2v::SpoofStream sp;
                    sp.temp_id = js.at("temp_id").get<std::uint32_t>();
                    sp.start_s = js.at("start_s").get<double>();
                    sp.end_s = js.at("end_s").get<double>();
                    sp.x0 = js.at("x0").get<double>();
                    sp.y0 = js.at("y0").get<double>();
                    sp.vx = detail::get_or<double>(js, "vx", 0.0);
                    sp.vy = detail::get_or<double>(js, "vy", 0.0);
                    cfg.channel.spoof_injections.push_back(sp);
                }
            }
        }
        if (j.contains("v2v")) {
            const auto& v = j.at("v2v");
            cfg.v2v_params.gps_noise_std_m = detail::get_or<double>(v, "gps_noise_std_m", 0.1);
            cfg.v2v_params.measurement_std_m =
                detail::get_or<double>(v, "measurement_std_m", 0.15);
        }
        if (j.contains("tracker")) {
            const auto& tkr = j.at("tracker");
            cfg.tracker_params.gate = detail::get_or<double>(tkr, "gate", 3.0);
            cfg.tracker_params.confirm_hits = detail::get_or<int>(tkr, "confirm_hits", 2);
            cfg.tracker_params.confirm_window = detail::get_or<int>(tkr, "confirm_window", 3);
            cfg.tracker_params.delete_after_misses =
                detail::get_or<int>(tkr, "delete_after_misses", 5);
            cfg.tracker_params.process_noise_q =
                detail::get_or<double>(tkr, "process_noise_q", 2.0);
            cfg.tracker_params.merge_distance_m =
                detail::get_or<double>(tkr, "merge_distance_m", 3.0);
            cfg.tracker_params.spawn_suppression_m =
                detail::get_or<double>(tkr, "spawn_suppression_m", 0.0);
        }
        if (j.contains("association")) {
            const auto& as = j.at("association");
            cfg.association_params.epsilon = detail::get_or<double>(as, "epsilon", 2.7946);
            const double var = detail::get_or<double>(as, "measurement_var", 4.0);
            cfg.association_params.measurement_covariance =
                Eigen::Matrix3d::Identity() * var;
            cfg.association_params.priority_coast_s =
                detail::get_or<double>(as, "priority_coast_s", 10.0);
        }
        if (j.contains("gospa")) {
            const auto& g = j.at("gospa");
            cfg.gospa_params.p = detail::get_or<double>(g, "p", 2.0);
            cfg.gospa_params.c = detail::get_or<double>(g, "c", 30.0);
            cfg.switch_penalty = detail::get_or<double>(
                g, "switch_penalty", 0.5 * std::pow(cfg.gospa_params.c, cfg.gospa_params.p));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("scenario field error: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

inline std::string to_json(const ScenarioConfig& cfg) {
    nlohmann::json j;
    j["name"] = cfg.name;
    j["duration_s"] = cfg.duration_s;
    j["tick_s"] = cfg.tick_s;
    j["origin"] = {{"lat_deg", detail::rad2deg(cfg.scene_origin.latitude_rad)},
                   {"lon_deg", detail::rad2deg(cfg.scene_origin.longitude_rad)},
                   {"alt_m", cfg.scene_origin.altitude_m}};
    j["gamma_deg"] = detail::rad2deg(cfg.gamma_rad);
    j["rng_seed"] = cfg.rng_seed;
    j["ego_id"] = cfg.ego_id;
    j["actors"] = nlohmann::json::array();
    for (const auto& a : cfg.actors) {
        nlohmann::json ja;
        ja["id"] = a.actor_id;
        ja["length_m"] = a.length_m;
        ja["width_m"] = a.width_m;
        ja["v2v"] = a.v2v_equipped;
        ja["waypoints"] = nlohmann::json::array();
        for (const auto& w : a.waypoints) {
            ja["waypoints"].push_back(
                {w.time_s, w.x_m, w.y_m, detail::rad2deg(w.heading_rad), w.speed_mps});
        }
        j["actors"].push_back(ja);
    }
    j["radar"] = {{"fov_deg", detail::rad2deg(cfg.radar.model.fov_rad)},
                  {"max_range_m", cfg.radar.model.max_range_m},
                  {"noise_std_m", cfg.radar.model.noise_std_m},
                  {"detection_prob", cfg.radar.model.detection_prob},
                  {"false_alarm_rate", cfg.radar.model.false_alarm_rate},
                  {"returns_per_vehicle", cfg.radar.model.returns_per_vehicle},
                  {"cluster_eps_m", cfg.radar.cluster_eps_m},
                  {"cluster_min_pts", cfg.radar.cluster_min_pts}};
    j["camera"] = {{"fov_deg", detail::rad2deg(cfg.camera.fov_rad)},
                   {"max_range_m", cfg.camera.max_range_m},
                   {"noise_std_m", cfg.camera.noise_std_m},
                   {"detection_prob", cfg.camera.detection_prob},
                   {"classification_accuracy", cfg.camera.classification_accuracy}};
    nlohmann::json jc;
    jc["drop_prob"] = cfg.channel.drop_prob;
    jc["latency_ticks"] = cfg.channel.latency_ticks;
    jc["spoofs"] = nlohmann::json::array();
    for (const auto& sp : cfg.channel.spoof_injections) {
        jc["spoofs"].push_back({{"temp_id", sp.temp_id},
                                {"start_s", sp.start_s},
                                {"end_s", sp.end_s},
                                {"x0", sp.x0},
                                {"y0", sp.y0},
                                {"vx", sp.vx},
                                {"vy", sp.vy}});
    }
    j["channel"] = jc;
    j["v2v"] = {{"gps_noise_std_m", cfg.v2v_params.gps_noise_std_m},
                {"measurement_std_m", cfg.v2v_params.measurement_std_m}};
    j["tracker"] = {{"gate", cfg.tracker_params.gate},
                    {"confirm_hits", cfg.tracker_params.confirm_hits},
                    {"confirm_window", cfg.tracker_params.confirm_window},
                    {"delete_after_misses", cfg.tracker_params.delete_after_misses},
                    {"process_noise_q", cfg.tracker_params.process_noise_q},
                    {"merge_distance_m", cfg.tracker_params.merge_distance_m},
                    {"spawn_suppression_m", cfg.tracker_params.spawn_suppression_m}};
    j["association"] = {{"epsilon", cfg.association_params.epsilon},
                        {"measurement_var", cfg.association_params.measurement_covariance(0, 0)},
                        {"priority_coast_s", cfg.association_params.priority_coast_s}};
    j["gospa"] = {{"p", cfg.gospa_params.p},
                  {"c", cfg.gospa_params.c},
                  {"switch_penalty", cfg.switch_penalty}};
    return j.dump(2);
}

inline std::vector<actors::ActorState> ground_truth_at(const ScenarioConfig& cfg, double t) {
    if (t < -1e-9 || t > cfg.duration_s + 1e-9)
        throw std::out_of_range("t outside scenario duration");
    std::vector<actors::ActorState> out;
    out.reserve(cfg.actors.size());
    for (const auto& a : cfg.actors) out.push_back(actors::state_at(a, t));
    return out;
}

// Four-way intersection benchmark. Divided road along +y (lanes at |x| of
// 4.25 and 7.75) crossing an identical road along +x. The ego approaches from
// the south in the left-turn pocket, yields to an oncoming through-vehicle,
// and turns left; a box truck angled mid-turn in the oncoming left-turn
// pocket blocks the ego's line of sight to the through-vehicle for several
// seconds of the approach. Background traffic: a northbound lead vehicle, an
// eastbound crossing vehicle, and a semi-trailer parked in a lot north-east
// of the intersection.
inline ScenarioConfig build_unprotected_left_scenario() {
    ScenarioConfig cfg;
    cfg.name = "unprotected-left";
    cfg.duration_s = 30.0;
    cfg.tick_s = 0.1;
    cfg.scene_origin = {detail::deg2rad(37.2296), detail::deg2rad(-80.4139), 634.0};
    cfg.gamma_rad = 0.0;
    cfg.rng_seed = 1;
    cfg.ego_id = 1;
    // Co-located automotive radar and camera with matched coverage so object
    // births and deaths are driven by the same visibility geometry.
    cfg.radar.model.kind = sensors::SensorKind::Radar;
    cfg.radar.model.false_alarm_rate = 0.0;
    cfg.radar.model.detection_prob = 1.0;
    cfg.camera.kind = sensors::SensorKind::Camera;
    cfg.camera.fov_rad = cfg.radar.model.fov_rad;
    cfg.camera.max_range_m = cfg.radar.model.max_range_m;
    cfg.camera.noise_std_m = 0.5;
    cfg.camera.detection_prob = 1.0;
    cfg.tracker_params.spawn_suppression_m = 5.0;
    // Wider association gate so camera-centroid and radar-face returns from the
    // same vehicle stay on one track instead of seeding short-lived duplicates.
    cfg.tracker_params.gate = 5.0;

    auto wp = [](double t, double x, double y, double heading_deg, double speed) {
        return actors::Waypoint{t, x, y, detail::deg2rad(heading_deg), speed};
    };

    actors::ActorSpec ego;
    ego.actor_id = 1;
    ego.length_m = 4.9;
    ego.width_m = 1.9;
    ego.v2v_equipped = false;  // host vehicle: receiver only
    ego.waypoints = {wp(0.0, 4.25, -60.0, 90, 12.0), wp(4.0, 4.25, -12.0, 90, 8.0),
                     wp(5.0, 4.25, -8.5, 90, 2.5),   wp(6.0, 4.25, -7.0, 90, 0.0),
                     wp(11.0, 4.25, -7.0, 90, 0.0),  wp(12.0, 3.4, -3.5, 110, 3.6),
                     wp(13.0, 0.6, 0.9, 135, 5.2),   wp(14.0, -3.4, 3.4, 160, 4.7),
                     wp(15.0, -8.0, 4.25, 180, 4.7), wp(30.0, -143.0, 4.25, 180, 9.0)};

    actors::ActorSpec through;  // oncoming, safety-critical; eases off behind the truck
    through.actor_id = 2;
    through.waypoints = {wp(0.0, -7.75, 80.0, 270, 8.0), wp(6.0, -7.75, 32.0, 270, 6.0),
                         wp(9.0, -7.75, 14.0, 270, 8.0), wp(30.0, -7.75, -154.0, 270, 8.0)};

    actors::ActorSpec truck;  // occluder: box truck angled mid-left-turn, waiting for a gap
    truck.actor_id = 3;
    truck.length_m = 5.0;
    truck.width_m = 2.2;
    truck.waypoints = {wp(0.0, -3.45, 10.0, 315, 0.0), wp(30.0, -3.45, 10.0, 315, 0.0)};

    actors::ActorSpec lead;  // northbound through traffic ahead-right of the ego
    lead.actor_id = 4;
    lead.waypoints = {wp(0.0, 7.75, -40.0, 90, 12.0), wp(30.0, 7.75, 320.0, 90, 12.0)};

    actors::ActorSpec east;  // eastbound crossing traffic
    east.actor_id = 5;
    east.waypoints = {wp(0.0, -70.0, -4.25, 0, 10.0), wp(30.0, 230.0, -4.25, 0, 10.0)};

    actors::ActorSpec trailer;  // semi-trailer parked end-on in a lot to the north-east
    trailer.actor_id = 6;
    trailer.length_m = 16.0;
    trailer.width_m = 2.8;
    trailer.waypoints = {wp(0.0, 48.0, 45.0, 0, 0.0), wp(30.0, 48.0, 45.0, 0, 0.0)};

    cfg.actors = {ego, through, truck, lead, east, trailer};
    validate(cfg);
    return cfg;
}

// Ghost vehicle approaching the intersection on the outer eastbound lane
// while the ego prepares its turn; its temp_id matches no real actor and its
// path never comes near a corroborating sensor track.
inline v2v::SpoofStream ghost_vehicle_preset() {
    v2v::SpoofStream sp;
    sp.temp_id = 0xDEADBEEFu;
    sp.start_s = 0.0;
    sp.end_s = 30.0;
    sp.x0 = -150.0;
    sp.y0 = -7.75;
    sp.vx = 10.0;
    sp.vy = 0.0;
    return sp;
}

}  // namespace coop::scenario
