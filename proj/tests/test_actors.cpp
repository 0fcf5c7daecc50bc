#include <catch2/catch_amalgamated.hpp>

#include "coop/actors.hpp"

using namespace coop;

namespace {
actors::ActorSpec straight_spec() {
    actors::ActorSpec a;
    a.actor_id = 7;
    a.waypoints = {{0.0, 0.0, 0.0, 0.0, 10.0}, {10.0, 100.0, 0.0, 0.0, 10.0}};
    return a;
}
}  // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
    CHECK(actors::wrap_angle(0.0) == 0.0);
    CHECK(actors::wrap_angle(M_PI) == Catch::Approx(M_PI));
    CHECK(actors::wrap_angle(3 * M_PI) == Catch::Approx(M_PI));
    CHECK(actors::wrap_angle(-M_PI) == Catch::Approx(M_PI));
    CHECK(actors::wrap_angle(7.0) == Catch::Approx(7.0 - 2 * M_PI));
}

TEST_CASE("state_at interpolates position and velocity linearly") {
    const auto a = straight_spec();
    const actors::ActorState st = actors::state_at(a, 2.5);
    CHECK(st.position.x_m == Catch::Approx(25.0));
    CHECK(st.position.y_m == Catch::Approx(0.0));
    CHECK(st.velocity.x() == Catch::Approx(10.0));
    CHECK(st.velocity.y() == Catch::Approx(0.0));
    CHECK(st.actor_id == 7);
}

TEST_CASE("state_at clamps outside the waypoint range with zero velocity") {
    const auto a = straight_spec();
    const auto before = actors::state_at(a, -1.0);
    CHECK(before.position.x_m == 0.0);
    CHECK(before.velocity.norm() == 0.0);
    const auto after = actors::state_at(a, 20.0);
    CHECK(after.position.x_m == 100.0);
    CHECK(after.velocity.norm() == 0.0);
}

TEST_CASE("heading interpolates along the shortest arc across +-pi") {
    actors::ActorSpec a;
    a.waypoints = {{0.0, 0.0, 0.0, 170.0 * M_PI / 180.0, 1.0},
                   {1.0, 1.0, 0.0, -170.0 * M_PI / 180.0, 1.0}};
    const auto mid = actors::state_at(a, 0.5);
    // Halfway point passes through 180 deg, not 0.
    CHECK(std::abs(actors::wrap_angle(mid.heading_rad - M_PI)) < 1e-12);
}

TEST_CASE("state_at requires waypoints") {
    actors::ActorSpec a;
    CHECK_THROWS_AS(actors::state_at(a, 0.0), std::invalid_argument);
}

TEST_CASE("corners form the oriented bounding box") {
    actors::ActorState st;
    st.position = {10.0, 5.0, 0.0};
    st.heading_rad = M_PI / 2;  // facing +y
    st.length_m = 4.0;
    st.width_m = 2.0;
    const auto c = st.corners();
    // Front edge at y = 7, rear at y = 3; sides at x = 9 and 11.
    double min_x = 1e9, max_x = -1e9, min_y = 1e9, max_y = -1e9;
    for (const auto& p : c) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    CHECK(min_x == Catch::Approx(9.0));
    CHECK(max_x == Catch::Approx(11.0));
    CHECK(min_y == Catch::Approx(3.0));
    CHECK(max_y == Catch::Approx(7.0));
    // CCW orientation: positive signed area.
    double area2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        const auto& p = c[i];
        const auto& q = c[(i + 1) % 4];
        area2 += p.x() * q.y() - q.x() * p.y();
    }
    CHECK(area2 > 0.0);
    CHECK(0.5 * area2 == Catch::Approx(8.0));
}
