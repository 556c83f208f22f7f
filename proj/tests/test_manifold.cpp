#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "nervecraft/manifold.hpp"

using namespace nervecraft;

TEST_CASE("off loader: single triangle weights") {
    DiscreteManifold m = load_off_mesh(fixtures::off_triangle(), 2);
    REQUIRE(m.vertex_count() == 3);
    for (double w : m.weight) CHECK(w == doctest::Approx(0.5 / 3.0).epsilon(1e-12));
    CHECK(m.total_volume == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.mode == MetricMode::GraphGeodesic);
}

TEST_CASE("off loader: 2x2 quad torus weights") {
    DiscreteManifold m = load_off_mesh(fixtures::off_quad_torus(), 2);
    REQUIRE(m.vertex_count() == 4);
    for (double w : m.weight) CHECK(w == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(m.total_volume == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("off loader: error paths") {
    CHECK_THROWS_AS(load_off_mesh(fixtures::off_malformed(), 2), InputError);
    CHECK_THROWS_AS(load_off_mesh(fixtures::off_disconnected(), 2), InputError);
    CHECK_THROWS_AS(load_off_mesh(fixtures::off_zero_area(), 2), InputError);
    CHECK_THROWS_AS(load_off_mesh("/nonexistent/file.off", 2), InputError);
}

TEST_CASE("synthetic volumes match the continuum values") {
    CHECK(make_flat_torus(1.0, 100).total_volume == doctest::Approx(1.0).epsilon(0.01));
    CHECK(make_round_sphere(1.0, 64).total_volume ==
          doctest::Approx(4.0 * M_PI).epsilon(0.01));
    DiscreteManifold cyl = make_thin_cylinder(0.001, 10.0, 32);
    CHECK(cyl.total_volume == doctest::Approx(0.01).epsilon(0.01));
    // cell-sum oracle: every cell carries the same rectangle area
    double cells = 0.0;
    for (double w : cyl.weight) cells += w;
    CHECK(cells == doctest::Approx(0.001 * 10.0).epsilon(1e-9));
}

TEST_CASE("synthetic generator rejections") {
    CHECK_THROWS_AS(make_flat_torus(1.0, 7), InputError);
    CHECK_THROWS_AS(make_flat_torus(-1.0, 20), InputError);
    CHECK_THROWS_AS(make_round_sphere(0.0, 20), InputError);
    CHECK_THROWS_AS(make_thin_cylinder(0.0, 1.0, 20), InputError);
    CHECK_THROWS_AS(make_dumbbell(-0.1, 20), InputError);
    CHECK_THROWS_AS(generate_synthetic("{\"shape\": \"klein_bottle\"}"), InputError);
    CHECK_THROWS_AS(generate_synthetic("not json"), InputError);
}

TEST_CASE("flat torus wraparound distance") {
    DiscreteManifold m = make_flat_torus(1.0, 100);
    // vertices at (0.1, 0) and (0.9, 0)
    VertexId a = 10 * 100 + 0, b = 90 * 100 + 0;
    CHECK(distance(m, a, b) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(distance(m, a, a) == 0.0);
}

TEST_CASE("round sphere antipodal distance") {
    DiscreteManifold m = make_round_sphere(1.0, 64);
    // (row j, col i) antipode is (rows-1-j, i + cols/2)
    const int cols = 128;
    VertexId a = 5 * cols + 3;
    VertexId b = (64 - 1 - 5) * cols + (3 + 64);
    CHECK(distance(m, a, b) == doctest::Approx(M_PI).epsilon(1e-9));
}

TEST_CASE("metric symmetry and triangle inequality on sampled triples") {
    for (const DiscreteManifold& m :
         {make_flat_torus(1.0, 32), make_dumbbell(0.02, 8)}) {
        const int nv = m.vertex_count();
        uint64_t state = 12345;
        auto next = [&state, nv]() {
            state = state * 6364136223846793005ull + 1442695040888963407ull;
            return static_cast<VertexId>((state >> 11) % nv);
        };
        for (int trial = 0; trial < 200; ++trial) {
            VertexId a = next(), b = next(), c = next();
            double ab = distance(m, a, b);
            CHECK(std::abs(ab - distance(m, b, a)) <= 1e-9 * std::max(1.0, ab));
            CHECK(ab <= (distance(m, a, c) + distance(m, c, b)) * (1.0 + 1e-9));
            CHECK((ab == 0.0) == (a == b));
        }
    }
}

TEST_CASE("ball basics") {
    DiscreteManifold m = make_flat_torus(1.0, 100);
    SUBCASE("degenerate radius") {
        Ball b = ball(m, 123, 0.0);
        CHECK(b.members == std::vector<VertexId>{123});
        CHECK(b.volume == doctest::Approx(m.weight[123]));
    }
    SUBCASE("saturation") {
        Ball b = ball(m, 7, 2.0);
        CHECK(static_cast<int>(b.members.size()) == m.vertex_count());
        CHECK(b.volume == doctest::Approx(m.total_volume).epsilon(1e-12));
    }
    SUBCASE("disk area against brute force") {
        Ball b = ball(m, 5050, 0.1);
        CHECK(b.volume == doctest::Approx(M_PI * 0.01).epsilon(0.05));
        double brute = 0.0;
        std::vector<VertexId> members;
        for (VertexId v = 0; v < m.vertex_count(); ++v)
            if (distance(m, 5050, v) <= 0.1) {
                brute += m.weight[v];
                members.push_back(v);
            }
        CHECK(b.volume == doctest::Approx(brute).epsilon(1e-12));
        CHECK(b.members == members);
        CHECK(ball_volume(m, 5050, 0.1) == doctest::Approx(brute).epsilon(1e-12));
    }
    SUBCASE("negative radius rejected") {
        CHECK_THROWS_AS(ball(m, 0, -0.5), InputError);
    }
}

TEST_CASE("ball monotonicity in the radius") {
    DiscreteManifold m = fixtures::mini_torus();
    for (VertexId p : {0, 17, 55}) {
        std::vector<VertexId> prev;
        for (double r : {0.0, 0.004, 0.008, 0.012, 0.02, 0.05}) {
            Ball b = ball(m, p, r);
            CHECK(std::includes(b.members.begin(), b.members.end(), prev.begin(), prev.end()));
            prev = b.members;
        }
    }
}

TEST_CASE("volume profile") {
    DiscreteManifold m = make_flat_torus(1.0, 100);
    SUBCASE("V(1) saturates the torus") {
        CHECK(max_ball_volume(m, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("V(0) is the largest weight") {
        std::vector<VertexId> centers{0, 1, 2, 4999, 9999};
        VolumeProfile prof = volume_profile(m, centers, {0.0});
        CHECK(prof.v_of_r[0] == doctest::Approx(*std::max_element(m.weight.begin(),
                                                                  m.weight.end())));
    }
    SUBCASE("per-center monotone, V nondecreasing, max over centers") {
        std::vector<VertexId> centers{11, 202, 3003};
        VolumeProfile prof = volume_profile(m, centers, {0.05, 0.1, 0.2});
        for (const auto& vols : prof.per_center) {
            CHECK(std::is_sorted(vols.begin(), vols.end()));
            for (size_t ri = 0; ri < prof.radii.size(); ++ri)
                CHECK(vols[ri] <= prof.v_of_r[ri]);
        }
        CHECK(std::is_sorted(prof.v_of_r.begin(), prof.v_of_r.end()));
    }
    SUBCASE("empty radii rejected") {
        CHECK_THROWS_AS(volume_profile(m, {0}, {}), InputError);
        CHECK_THROWS_AS(volume_profile(m, {}, {0.1}), InputError);
    }
}

TEST_CASE("thin cylinder band volume at radius 1") {
    DiscreteManifold m = make_thin_cylinder(0.001, 10.0, 32);
    double v1 = max_ball_volume(m, 1.0);
    CHECK(v1 == doctest::Approx(0.002).epsilon(0.05));
    // enumeration oracle at one center
    double brute = 0.0;
    for (VertexId v = 0; v < m.vertex_count(); ++v)
        if (distance(m, 0, v) <= 1.0) brute += m.weight[v];
    CHECK(ball_volume(m, 0, 1.0) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("scaling covariance") {
    DiscreteManifold m = fixtures::mini_torus();
    DiscreteManifold doubled = rescaled(m, 2.0);
    CHECK(doubled.scale == doctest::Approx(2.0));
    for (VertexId a : {0, 3, 42})
        for (VertexId b : {9, 77}) {
            CHECK(distance(doubled, a, b) ==
                  doctest::Approx(2.0 * distance(m, a, b)).epsilon(1e-12));
        }
    for (VertexId v : {0, 50})
        CHECK(doubled.weight[v] == doctest::Approx(4.0 * m.weight[v]).epsilon(1e-12));
    for (VertexId p : {5, 61})
        for (double r : {0.004, 0.011, 0.02})
            CHECK(ball(doubled, p, 2.0 * r).members == ball(m, p, r).members);
}

TEST_CASE("dumbbell is a valid graph-geodesic instance") {
    DiscreteManifold m = make_dumbbell(0.02, 8);
    CHECK(m.mode == MetricMode::GraphGeodesic);
    CHECK(m.total_volume > 0.0);
    CHECK(m.vertex_count() > 500);
    // two radius-0.05 bulbs plus neck
    CHECK(m.total_volume > 0.02);
    CHECK(m.total_volume < 0.2);
}

TEST_CASE("volume profile csv shape") {
    DiscreteManifold m = fixtures::mini_torus();
    VolumeProfile prof = volume_profile(m, {0, 1}, {0.01, 0.02});
    std::string csv = volume_profile_csv(prof);
    CHECK(csv.rfind("radius,center_id,volume\n", 0) == 0);
    // 2 radii x (2 centers + 1 summary row)
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);
    CHECK(csv.find(",-1,") != std::string::npos);
}
