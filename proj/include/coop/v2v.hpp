// Basic Safety Message generation, fixed-point wire codec, channel model and
// conversion of received messages into scene-frame V2V tracks.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "coop/actors.hpp"
#include "coop/geo.hpp"
#include "coop/tracker.hpp"

namespace coop::v2v {

// Fixed-point wire fields, scalings follow J2735 conventions.
struct BsmMessage {
    std::uint32_t temp_id = 0;
    std::uint8_t msg_count = 0;     // 0..127, wrapping
    std::uint32_t t_ms = 0;         // since scenario start
    std::int32_t lat_e7 = 0;        // degrees * 1e7
    std::int32_t lon_e7 = 0;        // degrees * 1e7
    std::int32_t elev_cm = 0;
    std::uint16_t speed_cmps = 0;
    std::uint16_t heading_cdeg = 0;  // 0..35999, clockwise from scene grid north

    bool operator==(const BsmMessage&) const = default;
};

constexpr std::size_t kBsmRecordSize = 25;
using BsmRecord = std::array<std::uint8_t, kBsmRecordSize>;

struct BsmDecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_u32(BsmRecord& r, std::size_t off, std::uint32_t v) {
    r[off] = static_cast<std::uint8_t>(v >> 24);
    r[off + 1] = static_cast<std::uint8_t>(v >> 16);
    r[off + 2] = static_cast<std::uint8_t>(v >> 8);
    r[off + 3] = static_cast<std::uint8_t>(v);
}

inline void put_u16(BsmRecord& r, std::size_t off, std::uint16_t v) {
    r[off] = static_cast<std::uint8_t>(v >> 8);
    r[off + 1] = static_cast<std::uint8_t>(v);
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((std::uint16_t(p[0]) << 8) | p[1]);
}

}  // namespace detail

inline void validate(const BsmMessage& m) {
    if (m.msg_count > 127) throw std::invalid_argument("msg_count out of range");
    if (m.heading_cdeg >= 36000) throw std::invalid_argument("heading out of range");
    if (m.lat_e7 > 900000000 || m.lat_e7 < -900000000)
        throw std::invalid_argument("latitude out of range");
    if (m.lon_e7 > 1800000000 || m.lon_e7 < -1800000000)
        throw std::invalid_argument("longitude out of range");
}

// Fixed 25-byte big-endian layout:
// temp_id(4) msg_count(1) t_ms(4) lat(4) lon(4) elev(4) speed(2) heading(2)
inline BsmRecord encode_bsm(const BsmMessage& m) {
    validate(m);
    BsmRecord r{};
    detail::put_u32(r, 0, m.temp_id);
    r[4] = m.msg_count;
    detail::put_u32(r, 5, m.t_ms);
    detail::put_u32(r, 9, static_cast<std::uint32_t>(m.lat_e7));
    detail::put_u32(r, 13, static_cast<std::uint32_t>(m.lon_e7));
    detail::put_u32(r, 17, static_cast<std::uint32_t>(m.elev_cm));
    detail::put_u16(r, 21, m.speed_cmps);
    detail::put_u16(r, 23, m.heading_cdeg);
    return r;
}

inline BsmMessage decode_bsm(const std::uint8_t* bytes, std::size_t len) {
    if (len != kBsmRecordSize) throw BsmDecodeError("BSM record must be 25 bytes");
    BsmMessage m;
    m.temp_id = detail::get_u32(bytes);
    m.msg_count = bytes[4];
    m.t_ms = detail::get_u32(bytes + 5);
    m.lat_e7 = static_cast<std::int32_t>(detail::get_u32(bytes + 9));
    m.lon_e7 = static_cast<std::int32_t>(detail::get_u32(bytes + 13));
    m.elev_cm = static_cast<std::int32_t>(detail::get_u32(bytes + 17));
    m.speed_cmps = detail::get_u16(bytes + 21);
    m.heading_cdeg = detail::get_u16(bytes + 23);
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        throw BsmDecodeError(e.what());
    }
    return m;
}

inline BsmMessage decode_bsm(const BsmRecord& r) { return decode_bsm(r.data(), r.size()); }

// Inverse of the forward geodetic pipeline: scene -> ECEF is the transposed
// rotation plus origin; ECEF -> geodetic by fixed-point iteration on latitude.
inline geo::GeodeticPosition ecef_to_geodetic(const geo::EcefPosition& p,
                                              const geo::Ellipsoid& e = geo::kWgs84) {
    const double a = e.semi_major_a;
    const double b = e.semi_minor_b;
    const double e2 = 1.0 - (b * b) / (a * a);
    const double rho = std::hypot(p.x_m, p.y_m);
    geo::GeodeticPosition g;
    g.longitude_rad = std::atan2(p.y_m, p.x_m);
    double lat = std::atan2(p.z_m, rho * (1.0 - e2));
    double h = 0.0;
    for (int i = 0; i < 12; ++i) {
        const double n = geo::prime_vertical_radius(lat, e);
        h = rho / std::cos(lat) - n;
        lat = std::atan2(p.z_m, rho * (1.0 - e2 * n / (n + h)));
    }
    g.latitude_rad = lat;
    g.altitude_m = h;
    return g;
}

inline geo::GeodeticPosition scene_to_geodetic(const geo::ScenePosition& s,
                                               const geo::SceneFrame& f,
                                               const geo::Ellipsoid& e = geo::kWgs84) {
    const Eigen::Vector3d ecef = f.rotation.transpose() * s.vec() + f.origin_ecef.vec();
    return ecef_to_geodetic({ecef.x(), ecef.y(), ecef.z()}, e);
}

inline std::uint32_t temp_id_for_actor(int actor_id) {
    return 0xA0000000u | static_cast<std::uint32_t>(actor_id);
}

// Per-run BSM source: one message per equipped actor per tick, stable temp
// ids, wrapping message counters.
class BsmBroadcaster {
  public:
    std::vector<BsmMessage> generate(const std::vector<actors::ActorState>& states,
                                     const std::vector<const actors::ActorSpec*>& specs,
                                     const geo::SceneFrame& frame, double t,
                                     std::mt19937_64& rng, double gps_noise_std_m) {
        std::vector<BsmMessage> out;
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (!specs[i]->v2v_equipped) continue;
            out.push_back(make_bsm(states[i], frame, t, rng, gps_noise_std_m));
        }
        return out;
    }

    BsmMessage make_bsm(const actors::ActorState& st, const geo::SceneFrame& frame, double t,
                        std::mt19937_64& rng, double gps_noise_std_m) {
        geo::ScenePosition noisy = st.position;
        if (gps_noise_std_m > 0.0) {
            std::normal_distribution<double> n(0.0, gps_noise_std_m);
            noisy.x_m += n(rng);
            noisy.y_m += n(rng);
        }
        const geo::GeodeticPosition g = scene_to_geodetic(noisy, frame);
        BsmMessage m;
        m.temp_id = temp_id_for_actor(st.actor_id);
        m.msg_count = msg_counts_[st.actor_id];
        msg_counts_[st.actor_id] = static_cast<std::uint8_t>((msg_counts_[st.actor_id] + 1) & 0x7F);
        m.t_ms = static_cast<std::uint32_t>(std::llround(t * 1000.0));
        m.lat_e7 = static_cast<std::int32_t>(std::llround(g.latitude_rad * 180.0 / M_PI * 1e7));
        m.lon_e7 = static_cast<std::int32_t>(std::llround(g.longitude_rad * 180.0 / M_PI * 1e7));
        m.elev_cm = static_cast<std::int32_t>(std::llround(g.altitude_m * 100.0));
        const double speed = st.velocity.norm();
        m.speed_cmps = static_cast<std::uint16_t>(
            std::min<long long>(std::llround(speed * 100.0), 65535));
        const double course = speed > 0.05 ? std::atan2(st.velocity.y(), st.velocity.x())
                                           : st.heading_rad;
        double cdeg = (90.0 - course * 180.0 / M_PI) * 100.0;
        long long q = std::llround(cdeg);
        q %= 36000;
        if (q < 0) q += 36000;
        m.heading_cdeg = static_cast<std::uint16_t>(q);
        return m;
    }

  private:
    std::map<int, std::uint8_t> msg_counts_;
};

// Straight-line ghost stream used to exercise the validation gate.
struct SpoofStream {
    std::uint32_t temp_id = 0;
    double start_s = 0.0;
    double end_s = 0.0;
    double x0 = 0.0, y0 = 0.0;    // scene position at start_s
    double vx = 0.0, vy = 0.0;    // scene velocity
};

struct ChannelModel {
    double drop_prob = 0.0;     // [0, 1)
    int latency_ticks = 0;
    std::vector<SpoofStream> spoof_injections;
};

// Lossy, delaying, spoof-injecting broadcast channel. Single consumer.
class Channel {
  public:
    Channel() = default;
    explicit Channel(ChannelModel model) : model_(std::move(model)) {}

    // Messages sent at `tick`; returns the set delivered this tick.
    std::vector<BsmMessage> transmit(const std::vector<BsmMessage>& msgs, long tick,
                                     double tick_s, const geo::SceneFrame& frame,
                                     std::mt19937_64& rng) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& m : msgs) {
            if (model_.drop_prob > 0.0 && u(rng) < model_.drop_prob) continue;
            in_flight_.push_back({tick + model_.latency_ticks, m});
        }
        const double t = tick * tick_s;
        for (const auto& sp : model_.spoof_injections) {
            if (t < sp.start_s || t > sp.end_s) continue;
            in_flight_.push_back({tick + model_.latency_ticks, spoof_message(sp, frame, t)});
        }
        std::vector<BsmMessage> delivered;
        std::deque<Pending> keep;
        for (auto& p : in_flight_) {
            if (p.deliver_tick <= tick) {
                delivered.push_back(p.msg);
            } else {
                keep.push_back(p);
            }
        }
        in_flight_ = std::move(keep);
        return delivered;
    }

    BsmMessage spoof_message(const SpoofStream& sp, const geo::SceneFrame& frame, double t) {
        const double dt = t - sp.start_s;
        actors::ActorState ghost;
        ghost.actor_id = -1;
        ghost.position = {sp.x0 + sp.vx * dt, sp.y0 + sp.vy * dt, 0.0};
        ghost.velocity = {sp.vx, sp.vy};
        ghost.heading_rad = std::atan2(sp.vy, sp.vx);
        std::mt19937_64 no_noise(0);
        BsmMessage m = broadcaster_.make_bsm(ghost, frame, t, no_noise, 0.0);
        m.temp_id = sp.temp_id;
        return m;
    }

  private:
    struct Pending {
        long deliver_tick = 0;
        BsmMessage msg;
    };
    ChannelModel model_;
    std::deque<Pending> in_flight_;
    BsmBroadcaster broadcaster_;
};

struct V2vParams {
    double gps_noise_std_m = 0.1;
    double measurement_std_m = 0.15;  // filter R for decoded positions
    double process_noise_q = 2.0;
};

inline Eigen::Vector2d bsm_scene_position(const BsmMessage& m, const geo::SceneFrame& frame) {
    geo::GeodeticPosition g;
    g.latitude_rad = m.lat_e7 * 1e-7 * M_PI / 180.0;
    g.longitude_rad = m.lon_e7 * 1e-7 * M_PI / 180.0;
    g.altitude_m = m.elev_cm * 0.01;
    const geo::ScenePosition s = geo::geodetic_to_scene(g, frame);
    return {s.x_m, s.y_m};
}

inline Eigen::Vector2d bsm_scene_velocity(const BsmMessage& m) {
    const double speed = m.speed_cmps * 0.01;
    const double course = (90.0 - m.heading_cdeg * 0.01) * M_PI / 180.0;
    return {speed * std::cos(course), speed * std::sin(course)};
}

// Route one received BSM into the V2V track list: matched by temp_id to an
// existing track (filter update) or spawned as a new confirmed V2V track.
inline tracker::TrackList bsm_to_v2v_track(const BsmMessage& m, const geo::SceneFrame& frame,
                                           tracker::TrackList tl, const V2vParams& params) {
    const Eigen::Vector2d z = bsm_scene_position(m, frame);
    const double t = m.t_ms * 1e-3;
    const tracker::Mat2 r =
        tracker::Mat2::Identity() * (params.measurement_std_m * params.measurement_std_m);

    tracker::Track* existing = nullptr;
    for (auto& tr : tl.tracks) {
        if (tr.alive() && tr.source_temp_id && *tr.source_temp_id == m.temp_id) {
            existing = &tr;
            break;
        }
    }
    if (existing == nullptr) {
        tracker::Track tr;
        tr.track_id = tl.next_id++;
        tr.kind = tracker::TrackKind::V2v;
        tr.source_temp_id = m.temp_id;
        tr.state.state << z.x(), z.y(), bsm_scene_velocity(m).x(), bsm_scene_velocity(m).y();
        tr.state.covariance = tracker::Mat4::Identity();
        tr.state.covariance.topLeftCorner<2, 2>() = r;
        tr.status = tracker::TrackStatus::Tentative;
        tr.hits = 1;
        tr.frames_alive = 1;
        tr.last_update_t = t;
        tr.status = tracker::TrackStatus::Confirmed;  // one authenticated message suffices
        tl.tracks.push_back(tr);
        return tl;
    }
    const double dt = t - existing->last_update_t;
    if (dt > 0.0) {
        *existing = tracker::ekf_predict(std::move(*existing), dt, params.process_noise_q);
    }
    *existing = tracker::ekf_update(std::move(*existing), z, r);
    existing->last_update_t = t;
    ++existing->hits;
    existing->misses_consecutive = 0;
    existing->status = tracker::TrackStatus::Confirmed;
    return tl;
}

}  // namespace coop::v2v
