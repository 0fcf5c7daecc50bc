#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <random>
#include <set>
#include <tuple>

#include "coop/association.hpp"

using namespace coop;

namespace {

tracker::Track make_track(int id, double x, double y,
                          tracker::TrackKind kind = tracker::TrackKind::Sensor) {
    tracker::Track tr;
    tr.track_id = id;
    tr.kind = kind;
    tr.state.state << x, y, 0.0, 0.0;
    tr.status = tracker::TrackStatus::Confirmed;
    return tr;
}

tracker::Track v2v_track(int id, std::uint32_t temp, double x, double y, double t) {
    tracker::Track tr = make_track(id, x, y, tracker::TrackKind::V2v);
    tr.source_temp_id = temp;
    tr.last_update_t = t;
    return tr;
}

}  // namespace

TEST_CASE("Mahalanobis distance of the 3-4-5 triangle under identity covariance is 5") {
    const double d = association::mahalanobis_distance({3.0, 4.0, 0.0}, {0.0, 0.0, 0.0},
                                                       Eigen::Matrix3d::Identity());
    CHECK(d == 5.0);
}

TEST_CASE("Mahalanobis distance rescales with the covariance") {
    const Eigen::Matrix3d c = Eigen::Vector3d(4.0, 4.0, 4.0).asDiagonal();
    CHECK(association::mahalanobis_distance({3.0, 4.0, 0.0}, {0.0, 0.0, 0.0}, c) ==
          Catch::Approx(2.5));
}

TEST_CASE("Mahalanobis distance rejects invalid covariances") {
    Eigen::Matrix3d asym = Eigen::Matrix3d::Identity();
    asym(0, 1) = 0.5;
    CHECK_THROWS_AS(association::mahalanobis_distance({1, 0, 0}, {0, 0, 0}, asym),
                    std::invalid_argument);
    Eigen::Matrix3d indef = Eigen::Vector3d(1.0, -1.0, 1.0).asDiagonal();
    CHECK_THROWS_AS(association::mahalanobis_distance({1, 0, 0}, {0, 0, 0}, indef),
                    std::invalid_argument);
}

TEST_CASE("pairs exactly at the threshold are included") {
    association::AssociationParams p;
    p.epsilon = 2.5;
    p.measurement_covariance = Eigen::Matrix3d::Identity() * 4.0;
    tracker::TrackList sensor_tl, v2v_tl;
    sensor_tl.tracks = {make_track(1, 0.0, 0.0)};
    v2v_tl.tracks = {v2v_track(1, 0xA1, 3.0, 4.0, 0.0)};  // distance exactly 2.5
    const auto pairs = association::associate_tracks(sensor_tl, v2v_tl, p);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].distance == Catch::Approx(2.5));
}

TEST_CASE("associate_tracks matches an explicit all-pairs oracle") {
    association::AssociationParams p;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-30.0, 30.0);
    for (int trial = 0; trial < 50; ++trial) {
        tracker::TrackList sensor_tl, v2v_tl;
        const int ns = 1 + static_cast<int>(rng() % 6);
        const int nv = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < ns; ++i) sensor_tl.tracks.push_back(make_track(i + 1, u(rng), u(rng)));
        for (int i = 0; i < nv; ++i)
            v2v_tl.tracks.push_back(v2v_track(i + 1, 0xB0 + i, u(rng), u(rng), 0.0));
        const auto pairs = association::associate_tracks(sensor_tl, v2v_tl, p);

        // Oracle: explicit inverse of the diagonal covariance.
        std::vector<association::AssociationPair> expected;
        for (const auto& s : sensor_tl.tracks) {
            for (const auto& v : v2v_tl.tracks) {
                const Eigen::Vector2d d = v.state.position() - s.state.position();
                const double dist = std::sqrt(d.squaredNorm() / 4.0);
                if (dist <= p.epsilon) expected.push_back({s.track_id, v.track_id, dist});
            }
        }
        REQUIRE(pairs.size() == expected.size());
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            CHECK(pairs[i].sensor_track_id == expected[i].sensor_track_id);
            CHECK(pairs[i].v2v_track_id == expected[i].v2v_track_id);
            CHECK(pairs[i].distance == Catch::Approx(expected[i].distance).margin(1e-9));
        }
    }
}

TEST_CASE("resolve_one_to_one keeps the closest pair per conflict") {
    std::vector<association::AssociationPair> pairs = {
        {1, 10, 2.0}, {1, 11, 1.0}, {2, 11, 0.5}, {2, 10, 1.5}};
    const auto out = association::resolve_one_to_one(pairs);
    REQUIRE(out.size() == 2);
    CHECK(out[0].sensor_track_id == 2);
    CHECK(out[0].v2v_track_id == 11);
    CHECK(out[1].sensor_track_id == 1);
    CHECK(out[1].v2v_track_id == 10);
}

TEST_CASE("resolve_one_to_one matches an independent greedy oracle on random input") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<association::AssociationPair> pairs;
        const int n = static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            pairs.push_back({static_cast<int>(rng() % 5), static_cast<int>(rng() % 5), u(rng)});
        }
        const auto got = association::resolve_one_to_one(pairs);

        auto sorted = pairs;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const auto& a, const auto& b) {
                             return std::tie(a.distance, a.sensor_track_id, a.v2v_track_id) <
                                    std::tie(b.distance, b.sensor_track_id, b.v2v_track_id);
                         });
        std::set<int> s_used, v_used;
        std::vector<association::AssociationPair> expected;
        for (const auto& pr : sorted) {
            if (s_used.count(pr.sensor_track_id) || v_used.count(pr.v2v_track_id)) continue;
            s_used.insert(pr.sensor_track_id);
            v_used.insert(pr.v2v_track_id);
            expected.push_back(pr);
        }
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].sensor_track_id == expected[i].sensor_track_id);
            CHECK(got[i].v2v_track_id == expected[i].v2v_track_id);
        }
    }
}

TEST_CASE("fusing two estimates with equal covariance averages the means") {
    tracker::KinematicState a, b;
    a.state << 1.0, 2.0, 3.0, 4.0;
    b.state << 3.0, 6.0, 1.0, 0.0;
    a.covariance = b.covariance = tracker::Mat4::Identity() * 2.0;
    const auto f = association::detail::fuse_states(a, b);
    CHECK((f.state - 0.5 * (a.state + b.state)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((f.covariance - tracker::Mat4::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("validation requires sensor corroboration and never reverts") {
    association::AssociationParams p;
    association::PriorityTrackList pl;
    tracker::TrackList sensor_tl, v2v_tl;
    v2v_tl.tracks = {v2v_track(1, 0xAA, 10.0, 0.0, 0.0)};

    // No mapping yet: nothing enters the priority list.
    pl = association::update_priority_list(std::move(pl), sensor_tl, v2v_tl, {}, 0.0, p);
    CHECK(pl.tracks.tracks.empty());
    CHECK_FALSE((pl.registry.count(0xAA) && pl.registry[0xAA].validated));

    // Corroborating sensor track appears: validation, then a priority track.
    sensor_tl.tracks = {make_track(1, 10.5, 0.0)};
    const std::vector<association::AssociationPair> mapping = {{1, 1, 0.25}};
    v2v_tl.tracks[0].last_update_t = 0.1;
    pl = association::update_priority_list(std::move(pl), sensor_tl, v2v_tl, mapping, 0.1, p);
    REQUIRE(pl.tracks.tracks.size() == 1);
    CHECK(pl.registry[0xAA].validated);
    CHECK(pl.tracks.tracks[0].kind == tracker::TrackKind::Priority);
    CHECK(*pl.tracks.tracks[0].source_temp_id == 0xAA);

    // Mapping disappears again: the track survives on V2V updates alone.
    v2v_tl.tracks[0].last_update_t = 0.2;
    pl = association::update_priority_list(std::move(pl), {}, v2v_tl, {}, 0.2, p);
    REQUIRE(pl.tracks.tracks.size() == 1);
    CHECK(pl.registry[0xAA].validated);
}

TEST_CASE("unvalidated temp ids never enter the priority list") {
    association::AssociationParams p;
    association::PriorityTrackList pl;
    tracker::TrackList sensor_tl, v2v_tl;
    // Spoofed V2V track far from every sensor track: no mapping ever forms.
    v2v_tl.tracks = {v2v_track(1, 0xDEADBEEF, 100.0, 100.0, 0.0)};
    sensor_tl.tracks = {make_track(1, 0.0, 0.0)};
    for (int i = 0; i < 50; ++i) {
        v2v_tl.tracks[0].last_update_t = 0.1 * i;
        const auto pairs = association::associate_tracks(sensor_tl, v2v_tl, p);
        const auto mapping = association::resolve_one_to_one(pairs);
        pl = association::update_priority_list(std::move(pl), sensor_tl, v2v_tl, mapping,
                                               0.1 * i, p);
        REQUIRE(pl.tracks.tracks.empty());
    }
}

TEST_CASE("priority tracks coast through V2V silence then drop, and re-enter on contact") {
    association::AssociationParams p;
    p.priority_coast_s = 1.0;
    association::PriorityTrackList pl;
    tracker::TrackList sensor_tl, v2v_tl;
    sensor_tl.tracks = {make_track(1, 10.0, 0.0)};
    v2v_tl.tracks = {v2v_track(1, 0xAB, 10.0, 0.0, 0.0)};
    v2v_tl.tracks[0].state.state(2) = 5.0;  // moving +x at 5 m/s
    const std::vector<association::AssociationPair> mapping = {{1, 1, 0.0}};
    pl = association::update_priority_list(std::move(pl), sensor_tl, v2v_tl, mapping, 0.0, p);
    REQUIRE(pl.tracks.tracks.size() == 1);

    // Silence below the threshold: coasted forward with the CV model.
    pl = association::update_priority_list(std::move(pl), {}, v2v_tl, {}, 0.8, p);
    REQUIRE(pl.tracks.tracks.size() == 1);
    CHECK(pl.tracks.tracks[0].state.position().x() == Catch::Approx(14.0));

    // Silence beyond the threshold: dropped.
    pl = association::update_priority_list(std::move(pl), {}, v2v_tl, {}, 1.5, p);
    CHECK(pl.tracks.tracks.empty());

    // Fresh message: immediate re-entry (already validated).
    v2v_tl.tracks[0].last_update_t = 2.0;
    v2v_tl.tracks[0].state.state(0) = 20.0;
    pl = association::update_priority_list(std::move(pl), {}, v2v_tl, {}, 2.0, p);
    REQUIRE(pl.tracks.tracks.size() == 1);
    CHECK(pl.tracks.tracks[0].state.position().x() == Catch::Approx(20.0));
}
