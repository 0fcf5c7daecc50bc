#include <catch2/catch_amalgamated.hpp>
#include <functional>
#include <map>
#include <random>

#include "coop/sensors.hpp"

using namespace coop;

namespace {

actors::ActorState vehicle(int id, double x, double y, double heading = 0.0,
                           double length = 4.7, double width = 1.8) {
    actors::ActorState st;
    st.actor_id = id;
    st.position = {x, y, 0.0};
    st.heading_rad = heading;
    st.length_m = length;
    st.width_m = width;
    return st;
}

sensors::SensorModel ideal_radar() {
    sensors::SensorModel m;
    m.kind = sensors::SensorKind::Radar;
    m.detection_prob = 1.0;
    m.noise_std_m = 0.0;
    m.false_alarm_rate = 0.0;
    return m;
}

// Independent O(n^2) reference: with min_pts = 1 every point is core and
// DBSCAN clusters are exactly the connected components of the eps-graph.
std::vector<int> components_reference(const std::vector<Eigen::Vector2d>& pts, double eps) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((pts[i] - pts[j]).norm() <= eps) parent[find(i)] = find(j);
        }
    }
    std::vector<int> labels(n, -1);
    std::map<int, int> remap;
    for (int i = 0; i < n; ++i) {
        const int root = find(i);
        if (!remap.count(root)) remap[root] = static_cast<int>(remap.size());
        labels[i] = remap[root];
    }
    return labels;
}

// Normalize labels to first-occurrence order so equivalent clusterings compare equal.
std::vector<int> normalize(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size(), -1);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        if (!remap.count(labels[i])) remap[labels[i]] = static_cast<int>(remap.size());
        out[i] = remap[labels[i]];
    }
    return out;
}

}  // namespace

TEST_CASE("line of sight is clear with no occluders") {
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 30.0, 0.0);
    CHECK(sensors::line_of_sight_visible(ego, target, {ego, target}));
}

TEST_CASE("a wide occluder between ego and target blocks sight") {
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 40.0, 0.0);
    const auto wall = vehicle(3, 20.0, 0.0, M_PI / 2, 30.0, 3.0);  // long side across the ray
    CHECK_FALSE(sensors::line_of_sight_visible(ego, target, {ego, target, wall}));
}

TEST_CASE("an occluder behind the target does not block sight") {
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 20.0, 0.0);
    const auto behind = vehicle(3, 40.0, 0.0, M_PI / 2, 30.0, 3.0);
    CHECK(sensors::line_of_sight_visible(ego, target, {ego, target, behind}));
}

TEST_CASE("occlusion grows monotonically as a screen slides across the sightline") {
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 40.0, 0.0);
    bool was_blocked = false;
    // Slide a long screen from far off-axis toward the axis: once blocked,
    // it must stay blocked as the overlap only grows.
    for (double off = 30.0; off >= 0.0; off -= 1.0) {
        const auto screen = vehicle(3, 20.0, off, 0.0, 2.0, 40.0);
        const bool blocked = !sensors::line_of_sight_visible(ego, target, {ego, target, screen});
        if (was_blocked) CHECK(blocked);
        was_blocked = was_blocked || blocked;
    }
    CHECK(was_blocked);
}

TEST_CASE("field of view gates on both range and bearing") {
    sensors::SensorModel m = ideal_radar();
    m.max_range_m = 50.0;
    m.fov_rad = M_PI / 2;  // +-45 deg
    const auto ego = vehicle(1, 0.0, 0.0, 0.0);
    CHECK(sensors::in_field_of_view(m, ego, {30.0, 0.0}));
    CHECK_FALSE(sensors::in_field_of_view(m, ego, {60.0, 0.0}));        // out of range
    CHECK(sensors::in_field_of_view(m, ego, {30.0, 29.0}));             // ~44 deg
    CHECK_FALSE(sensors::in_field_of_view(m, ego, {30.0, 31.0}));       // ~46 deg
    CHECK_FALSE(sensors::in_field_of_view(m, ego, {-30.0, 0.0}));       // behind
}

TEST_CASE("ideal radar returns the configured number of face-point returns") {
    const auto m = ideal_radar();
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 30.0, 0.0);  // nearest face at x = 27.65
    std::mt19937_64 rng(1);
    const auto dets = sensors::simulate_radar(m, 0, ego, {ego, target}, 0.0, rng);
    REQUIRE(dets.size() == 3);
    for (const auto& d : dets) {
        CHECK(d.position.x_m == Catch::Approx(30.0 - 0.5 * target.length_m));
        CHECK(d.position.y_m == Catch::Approx(0.0));
        // Covariance must be symmetric positive definite.
        Eigen::LLT<Eigen::Matrix3d> llt(d.covariance);
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("radar detection rate matches detection_prob") {
    sensors::SensorModel m = ideal_radar();
    m.detection_prob = 0.9;
    m.returns_per_vehicle = 1;
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 30.0, 0.0);
    std::mt19937_64 rng(5);
    int hits = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        hits += sensors::simulate_radar(m, 0, ego, {ego, target}, 0.0, rng).empty() ? 0 : 1;
    }
    CHECK(static_cast<double>(hits) / trials == Catch::Approx(0.9).margin(0.02));
}

TEST_CASE("clutter count matches the Poisson rate on average") {
    sensors::SensorModel m = ideal_radar();
    m.detection_prob = 0.0;
    m.false_alarm_rate = 3.0;
    const auto ego = vehicle(1, 0.0, 0.0);
    std::mt19937_64 rng(9);
    long total = 0;
    const int trials = 20000;
    for (int i = 0; i < trials; ++i) {
        const auto dets = sensors::simulate_radar(m, 0, ego, {ego}, 0.0, rng);
        total += static_cast<long>(dets.size());
        for (const auto& d : dets) {
            // Clutter stays inside the FOV sector.
            CHECK(sensors::in_field_of_view(m, ego, d.xy()));
        }
    }
    CHECK(static_cast<double>(total) / trials == Catch::Approx(3.0).margin(0.06));
}

TEST_CASE("camera reports centroids with classification") {
    sensors::SensorModel m;
    m.kind = sensors::SensorKind::Camera;
    m.detection_prob = 1.0;
    m.noise_std_m = 0.0;
    m.classification_accuracy = 1.0;
    const auto ego = vehicle(1, 0.0, 0.0);
    const auto target = vehicle(2, 30.0, 5.0);
    std::mt19937_64 rng(1);
    const auto dets = sensors::simulate_camera(m, 1, ego, {ego, target}, 0.0, rng);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].position.x_m == Catch::Approx(30.0));
    CHECK(dets[0].position.y_m == Catch::Approx(5.0));
    CHECK(dets[0].class_label == sensors::ClassLabel::Vehicle);
}

TEST_CASE("sensor kind mismatches are rejected") {
    sensors::SensorModel cam;
    cam.kind = sensors::SensorKind::Camera;
    const auto ego = vehicle(1, 0.0, 0.0);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(sensors::simulate_radar(cam, 0, ego, {ego}, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(sensors::simulate_camera(ideal_radar(), 1, ego, {ego}, 0.0, rng),
                    std::invalid_argument);
}

TEST_CASE("dbscan rejects invalid parameters") {
    CHECK_THROWS_AS(sensors::dbscan({}, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sensors::dbscan({}, 1.0, 0), std::invalid_argument);
}

TEST_CASE("dbscan separates well-spaced groups and flags isolated noise") {
    std::vector<Eigen::Vector2d> pts = {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5},
                                        {10.0, 10.0}, {10.5, 10.0},
                                        {50.0, 50.0}};
    const auto res = sensors::dbscan(pts, 1.0, 2);
    CHECK(res.cluster_count == 2);
    CHECK(res.labels[0] == res.labels[1]);
    CHECK(res.labels[1] == res.labels[2]);
    CHECK(res.labels[3] == res.labels[4]);
    CHECK(res.labels[0] != res.labels[3]);
    CHECK(res.labels[5] == -1);
}

TEST_CASE("dbscan with min_pts 1 equals eps-graph connected components") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 500);
        std::vector<Eigen::Vector2d> pts;
        pts.reserve(n);
        for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng));
        const double eps = 1.0 + (trial % 5);
        const auto res = sensors::dbscan(pts, eps, 1);
        CHECK(normalize(res.labels) == normalize(components_reference(pts, eps)));
    }
}

TEST_CASE("dbscan with min_pts above 1 satisfies the defining invariants") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 60.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 10 + static_cast<int>(rng() % 200);
        std::vector<Eigen::Vector2d> pts;
        for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng));
        const double eps = 3.0;
        const int min_pts = 2 + static_cast<int>(rng() % 3);
        const auto res = sensors::dbscan(pts, eps, min_pts);

        auto neighbor_count = [&](int i) {
            int c = 0;
            for (int j = 0; j < n; ++j) {
                if ((pts[i] - pts[j]).norm() <= eps) ++c;
            }
            return c;
        };
        for (int i = 0; i < n; ++i) {
            const bool core = neighbor_count(i) >= min_pts;
            if (core) {
                // Core points are always clustered, together with every core neighbor.
                REQUIRE(res.labels[i] >= 0);
                for (int j = 0; j < n; ++j) {
                    if (j != i && (pts[i] - pts[j]).norm() <= eps &&
                        neighbor_count(j) >= min_pts) {
                        CHECK(res.labels[j] == res.labels[i]);
                    }
                }
            } else if (res.labels[i] >= 0) {
                // Border points must have a core neighbor in their cluster.
                bool ok = false;
                for (int j = 0; j < n; ++j) {
                    if (j != i && (pts[i] - pts[j]).norm() <= eps &&
                        neighbor_count(j) >= min_pts && res.labels[j] == res.labels[i]) {
                        ok = true;
                    }
                }
                CHECK(ok);
            } else {
                // Noise points have no core neighbor.
                for (int j = 0; j < n; ++j) {
                    if (j != i && (pts[i] - pts[j]).norm() <= eps) {
                        CHECK(neighbor_count(j) < min_pts);
                    }
                }
            }
        }
    }
}

TEST_CASE("cluster_radar collapses grouped returns to centroids") {
    std::vector<sensors::Detection> dets(4);
    dets[0].position = {10.0, 0.0, 0.0};
    dets[1].position = {10.4, 0.0, 0.0};
    dets[2].position = {10.2, 0.4, 0.0};
    dets[3].position = {40.0, 40.0, 0.0};  // isolated
    const auto out = sensors::cluster_radar(dets, 1.0, 2);
    REQUIRE(out.size() == 1);
    CHECK(out[0].position.x_m == Catch::Approx(10.2));
    CHECK(out[0].position.y_m == Catch::Approx(0.4 / 3.0));
}

TEST_CASE("cluster_radar with min_pts 1 keeps isolated points") {
    std::vector<sensors::Detection> dets(1);
    dets[0].position = {10.0, 0.0, 0.0};
    const auto out = sensors::cluster_radar(dets, 1.0, 1);
    REQUIRE(out.size() == 1);
    CHECK(out[0].position.x_m == Catch::Approx(10.0));
}
