#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "dfield/geometry.hpp"
#include "dfield/rng.hpp"

using namespace dfield;

TEST_CASE("linear arrays") {
    SUBCASE("two mics") {
        const double gaps[] = {0.016};
        const auto g = make_linear_array(gaps);
        CHECK(g.size() == 2);
        CHECK(g.mic_positions[0].x == 0.0);
        CHECK(g.mic_positions[1].x == doctest::Approx(0.016));
        const auto pd = pair_distances(g);
        REQUIRE(pd.size() == 1);
        CHECK(pd[0].distance == doctest::Approx(0.016));
    }
    SUBCASE("cumulative placement") {
        const double gaps[] = {0.1, 0.1};
        const auto pd = pair_distances(make_linear_array(gaps));
        std::multiset<double> got;
        for (const auto& p : pd) got.insert(std::round(p.distance * 1e9) / 1e9);
        CHECK(got == std::multiset<double>{0.1, 0.1, 0.2});
    }
    SUBCASE("bad gap") {
        const double gaps[] = {0.1, 0.0};
        CHECK_THROWS_AS(make_linear_array(gaps), std::invalid_argument);
        const double neg[] = {-0.1};
        CHECK_THROWS_AS(make_linear_array(neg), std::invalid_argument);
    }
}

TEST_CASE("default 16-element line") {
    const auto g = default_linear_array();
    CHECK(g.size() == 16);
    const auto pd = pair_distances(g);
    CHECK(pd.size() == 120);

    double min_d = 1e9, max_d = 0.0;
    std::set<long long> distinct;
    bool has_150mm = false;
    for (const auto& p : pd) {
        min_d = std::min(min_d, p.distance);
        max_d = std::max(max_d, p.distance);
        distinct.insert(std::llround(p.distance * 1e6)); // micrometer resolution
        if (std::abs(p.distance - 0.150) < 5e-4) has_150mm = true;
    }
    CHECK(min_d == doctest::Approx(0.016).epsilon(1e-12));
    CHECK(max_d == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(distinct.size() >= 40);
    CHECK(has_150mm);
}

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(make_geometry({{0, 0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_geometry({{0, 0, 0}, {0, 0, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(make_geometry({{0, 0, 0}, {1.0 / 0.0, 0, 0}}), std::invalid_argument);
    const auto g = make_geometry({{0, 0, 0}, {1, 0, 0}}, {"a", "b"});
    CHECK(g.labels[1] == "b");
    CHECK(g.extent() == doctest::Approx(1.0));
}

TEST_CASE("polyhedral layouts") {
    SUBCASE("rhombic triacontahedron shell, 26 of 32") {
        const auto l = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
        CHECK(l.size() == 26);
        for (const auto& p : l.speaker_positions)
            CHECK(std::abs(norm(p) - 1.8) < 1e-9);
        // reproducible selection
        const auto l2 = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.8, 26);
        for (std::size_t i = 0; i < l.size(); ++i)
            CHECK(norm(l.speaker_positions[i] - l2.speaker_positions[i]) == 0.0);
    }
    SUBCASE("tetrahedron angles") {
        const auto l = make_polyhedral_layout(LayoutKind::tetrahedron, 1.0, 4);
        const double want = std::acos(-1.0 / 3.0);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) {
                const double cosang = dot(l.speaker_positions[i], l.speaker_positions[j]);
                CHECK(std::acos(std::clamp(cosang, -1.0, 1.0)) ==
                      doctest::Approx(want).epsilon(1e-9));
            }
    }
    SUBCASE("30-speaker dodecahedral shell (edge midpoints)") {
        const auto l = make_polyhedral_layout(LayoutKind::dodecahedron_edges, 2.0, 30);
        CHECK(l.size() == 30);
        for (const auto& p : l.speaker_positions) CHECK(std::abs(norm(p) - 2.0) < 1e-9);
    }
    SUBCASE("limits") {
        CHECK_THROWS_AS(make_polyhedral_layout(LayoutKind::tetrahedron, 1.0, 5),
                        std::invalid_argument);
        CHECK_THROWS_AS(make_polyhedral_layout(LayoutKind::tetrahedron, 0.0, 4),
                        std::invalid_argument);
        CHECK_THROWS_AS(layout_kind_from_string("cube"), std::invalid_argument);
        CHECK(layout_vertex_budget(LayoutKind::rhombic_triacontahedron) == 32);
    }
    SUBCASE("subset keeps separation at least as large as the full set") {
        const auto full = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.0, 32);
        const auto sub = make_polyhedral_layout(LayoutKind::rhombic_triacontahedron, 1.0, 26);
        auto min_angle = [](const LoudspeakerLayout& l) {
            double best = M_PI;
            for (std::size_t i = 0; i < l.size(); ++i)
                for (std::size_t j = i + 1; j < l.size(); ++j)
                    best = std::min(best,
                                    std::acos(std::clamp(dot(normalize(l.speaker_positions[i]),
                                                             normalize(l.speaker_positions[j])),
                                                         -1.0, 1.0)));
            return best;
        };
        CHECK(min_angle(sub) >= min_angle(full) - 1e-12);
    }
    SUBCASE("propagation direction points at the origin") {
        const auto l = make_polyhedral_layout(LayoutKind::icosahedron, 2.0, 12);
        for (std::size_t i = 0; i < l.size(); ++i) {
            const Vec3 y = l.propagation_direction(i);
            CHECK(std::abs(norm(y) - 1.0) < 1e-12);
            CHECK(dot(y, l.speaker_positions[i]) < 0.0);
        }
    }
}

TEST_CASE("spherical 32-mic array") {
    const auto g = make_spherical_array32(0.042);
    CHECK(g.size() == 32);
    for (const auto& p : g.mic_positions) CHECK(std::abs(norm(p) - 0.042) < 1e-12);
}

TEST_CASE("poses") {
    CHECK_THROWS_AS(make_pose({0, 0, 0}, Mat3{{{1, 0, 0}, {0, 2, 0}, {0, 0, 1}}}),
                    std::invalid_argument);
    // reflection (det -1) is not a rotation
    CHECK_THROWS_AS(make_pose({0, 0, 0}, Mat3{{{-1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}),
                    std::invalid_argument);

    SUBCASE("90 degree rotation about z") {
        Mat3 r;
        r.m[0][0] = 0; r.m[0][1] = -1; r.m[0][2] = 0;
        r.m[1][0] = 1; r.m[1][1] = 0;  r.m[1][2] = 0;
        r.m[2][0] = 0; r.m[2][1] = 0;  r.m[2][2] = 1;
        const Pose p = make_pose({0, 0, 0}, r);
        const auto g = apply_pose(make_geometry({{1, 0, 0}, {0, 0, 1}}), p);
        CHECK(norm(g.mic_positions[0] - Vec3{0, 1, 0}) < 1e-12);
    }

    SUBCASE("identity pose leaves the geometry unchanged") {
        const auto g = default_linear_array();
        const auto g2 = apply_pose(g, Pose::identity());
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(norm(g.mic_positions[i] - g2.mic_positions[i]) == 0.0);
    }

    SUBCASE("rigid motions preserve pair distances") {
        const auto g = default_linear_array();
        const auto base = pair_distances(g);
        Rng rng(99);
        for (int trial = 0; trial < 10; ++trial) {
            const Pose p{sample_in_ball(rng, 2.0), sample_rotation(rng)};
            const auto moved = pair_distances(apply_pose(g, p));
            for (std::size_t i = 0; i < base.size(); ++i)
                CHECK(std::abs(moved[i].distance - base[i].distance) < 1e-12);
        }
    }
}

TEST_CASE("trajectory sampling") {
    SUBCASE("single segment") {
        const auto t = sample_trajectory(1.8, 0.32, 1, 30.0, 7);
        REQUIRE(t.segments.size() == 1);
        CHECK(t.segments[0].duration == doctest::Approx(30.0));
        CHECK(is_rotation(t.segments[0].pose.rotation, 1e-9));
    }
    SUBCASE("determinism and prefix property") {
        const auto a = sample_trajectory(1.8, 0.32, 8, 30.0, 1234);
        const auto b = sample_trajectory(1.8, 0.32, 8, 30.0, 1234);
        CHECK(trajectory_digest(a) == trajectory_digest(b));
        const auto one = sample_trajectory(1.8, 0.32, 1, 30.0, 1234);
        CHECK(norm(one.segments[0].pose.translation - a.segments[0].pose.translation) == 0.0);
    }
    SUBCASE("different seeds differ") {
        CHECK(trajectory_digest(sample_trajectory(1.8, 0.32, 8, 30.0, 1)) !=
              trajectory_digest(sample_trajectory(1.8, 0.32, 8, 30.0, 2)));
    }
    SUBCASE("translations stay in the safety ball and cover it uniformly") {
        const int n = 1000;
        const auto t = sample_trajectory(1.8, 0.32, n, 30.0, 42);
        const double ball = (1.8 - 0.32) * 0.9;
        Vec3 mean{};
        for (const auto& s : t.segments) {
            CHECK(norm(s.pose.translation) <= ball + 1e-12);
            mean += s.pose.translation;
        }
        mean = mean / double(n);
        // per-axis variance of a uniform ball is R^2/5
        const double three_sigma = 3.0 * ball / std::sqrt(5.0 * n);
        CHECK(std::abs(mean.x) < three_sigma);
        CHECK(std::abs(mean.y) < three_sigma);
        CHECK(std::abs(mean.z) < three_sigma);
    }
    SUBCASE("rotation sampling is centered") {
        Rng rng(4242);
        double acc[3][3] = {};
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const Mat3 r = sample_rotation(rng);
            CHECK(is_rotation(r, 1e-12));
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) acc[a][b] += r.m[a][b];
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(std::abs(acc[a][b] / n) < 0.02);
    }
    SUBCASE("containment check") {
        const auto g = default_linear_array();
        const auto t = sample_trajectory(1.8, g.extent(), 16, 30.0, 5);
        CHECK(trajectory_fits(t, g, 1.8));
        Trajectory escape = t;
        escape.segments[3].pose.translation = {1.79, 0, 0};
        CHECK(!trajectory_fits(escape, g, 1.8));
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(sample_trajectory(1.0, 1.2, 4, 30.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_trajectory(1.0, 0.2, 0, 30.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(sample_trajectory(1.0, 0.2, 4, -1.0, 1), std::invalid_argument);
    }
}

TEST_CASE("pair distance errors") {
    ArrayGeometry g;
    g.mic_positions = {{0, 0, 0}};
    CHECK_THROWS_AS(pair_distances(g), std::invalid_argument);
}
