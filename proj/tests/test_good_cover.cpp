#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "nervecraft/good_cover.hpp"

using namespace nervecraft;

TEST_CASE("good ball conditions on the unit torus") {
    DiscreteManifold m = make_flat_torus(1.0, 100);
    double v1 = max_ball_volume(m, 1.0);
    REQUIRE(v1 == doctest::Approx(1.0));

    SUBCASE("R = 1/200 is good") {
        GoodBallVerdict v = is_good_ball(m, 5050, 1.0 / 200.0, v1);
        CHECK(v.good());
        CHECK(v.outer_volume <= 1e20 * v.inner_volume);
        CHECK(v.ball_volume <= v.volume_bound_rhs);
    }
    SUBCASE("R = 1/50 fails only the radius cap") {
        GoodBallVerdict v = is_good_ball(m, 5050, 1.0 / 50.0, v1);
        CHECK(!v.small_radius);
        CHECK(!v.good());
        CHECK(v.reasonable_growth);
        CHECK(v.volume_bound);
    }
    SUBCASE("nonpositive radius rejected") {
        CHECK_THROWS_AS(is_good_ball(m, 0, 0.0, v1), InputError);
        CHECK_THROWS_AS(is_good_ball(m, 0, 0.01, 0.0), InputError);
    }
}

TEST_CASE("volume bound fails on a very thin instance") {
    // circumference 4*pi*1e-5, short enough that radius-1 balls saturate
    DiscreteManifold m = make_thin_cylinder(4.0 * M_PI * 1e-5, 0.5, 64);
    double v1 = max_ball_volume(m, 1.0);
    GoodBallVerdict v = is_good_ball(m, 0, 1e-3, v1);
    CHECK(!v.volume_bound);
    CHECK(v.reasonable_growth);
    CHECK(v.small_radius);
    CHECK(!v.good());
}

TEST_CASE("radius ladder returns the first rung on standard instances") {
    SUBCASE("unit torus") {
        DiscreteManifold m = make_flat_torus(1.0, 100);
        double v1 = max_ball_volume(m, 1.0);
        LadderTrace t = find_good_ball(m, 4242, v1);
        CHECK(t.chosen_radius == doctest::Approx(0.01));
        CHECK(t.rungs.size() == 1);
        CHECK(t.rungs[0].reasonable_growth);
        CHECK(is_good_ball(m, 4242, t.chosen_radius, v1).good());
    }
    SUBCASE("unit sphere") {
        DiscreteManifold m = make_round_sphere(1.0, 64);
        double v1 = max_ball_volume(m, 1.0);
        LadderTrace t = find_good_ball(m, 100, v1);
        CHECK(t.chosen_radius == doctest::Approx(0.01));
        CHECK(is_good_ball(m, 100, t.chosen_radius, v1).good());
    }
}

TEST_CASE("coarse mesh exhausts the ladder") {
    DiscreteManifold m = make_flat_torus(1.0, 8);
    double v1 = max_ball_volume(m, 1.0);
    CHECK_THROWS_AS(find_good_ball(m, 0, v1), ResolutionExhausted);
}

TEST_CASE("density cascade on a growth failure") {
    DiscreteManifold m = fixtures::cascade_chain();
    double v1 = max_ball_volume(m, 1.0);
    LadderTrace t = find_good_ball(m, 0, v1);
    REQUIRE(t.rungs.size() == 2);
    CHECK(!t.rungs[0].reasonable_growth);
    CHECK(t.rungs[1].reasonable_growth);
    CHECK(t.chosen_radius == doctest::Approx(1e-6));
    // failed growth forces the density drop by exactly 10^-12
    const LadderRung& rung = t.rungs[0];
    CHECK(rung.inner_density < 1e-12 * rung.outer_density * (1.0 + 1e-12));
    // the returned rung is a good ball
    CHECK(is_good_ball(m, 0, t.chosen_radius, v1).good());
    // mixed ladder radii across the instance
    LadderTrace heavy = find_good_ball(m, 121, v1);
    CHECK(heavy.chosen_radius == doctest::Approx(0.01));
}

TEST_CASE("good cover on the unit torus") {
    DiscreteManifold m = make_flat_torus(1.0, 100);
    GoodCover cover = build_good_cover(m);
    CHECK(cover.size() == 10000);
    for (const CoverBall& b : cover.balls) CHECK(b.radius == doctest::Approx(0.01));
    CoverReport rep = validate_cover(m, cover);
    CHECK(rep.pass);
    CHECK(cover.half_cover_ok);
    CHECK(cover.sixth_disjoint_ok);
}

TEST_CASE("degenerate instance yields a single-ball cover") {
    DiscreteManifold m = make_flat_torus(0.004, 8);
    GoodCover cover = build_good_cover(m);
    CHECK(cover.size() == 1);
    CHECK(validate_cover(m, cover).pass);
}

TEST_CASE("dumbbell cover validates") {
    DiscreteManifold m = make_dumbbell(0.02, 8);
    GoodCover cover = build_good_cover(m);
    CHECK(cover.size() >= 1);
    CHECK(validate_cover(m, cover).pass);
}

TEST_CASE("cover construction is deterministic") {
    DiscreteManifold m = fixtures::mini_torus();
    GoodCover a = build_good_cover(m);
    GoodCover b = build_good_cover(m);
    REQUIRE(a.size() == b.size());
    for (int i = 0; i < a.size(); ++i) {
        CHECK(a.balls[i].center == b.balls[i].center);
        CHECK(a.balls[i].radius == b.balls[i].radius);
        CHECK(a.balls[i].members == b.balls[i].members);
    }
}

TEST_CASE("validator pinpoints violations") {
    DiscreteManifold m = fixtures::path9();
    SUBCASE("duplicate ball breaks sixth-disjointness") {
        GoodCover cover = fixtures::make_cover(m, {{2, 0.01}, {2, 0.01}});
        CoverReport rep = validate_cover(m, cover);
        CHECK(!rep.pass);
        bool found = false;
        for (const auto& v : rep.violations)
            if (v.condition == "sixth_disjoint") {
                found = true;
                CHECK(v.witness == 2);
            }
        CHECK(found);
    }
    SUBCASE("missing vertex breaks the half-cover") {
        GoodCover cover = fixtures::make_cover(m, {{2, 0.01}});
        CoverReport rep = validate_cover(m, cover);
        CHECK(!rep.pass);
        bool found = false;
        for (const auto& v : rep.violations)
            if (v.condition == "half_cover") {
                found = true;
                CHECK(v.witness >= 5);   // first vertex beyond the half-ball
            }
        CHECK(found);
    }
    SUBCASE("the two-ball fixture itself validates") {
        GoodCover cover = fixtures::two_ball_cover(m);
        CHECK(validate_cover(m, cover).pass);
    }
}

TEST_CASE("scale-neighbor counting") {
    DiscreteManifold m = fixtures::path9();
    SUBCASE("disjoint probe") {
        GoodCover cover = fixtures::make_cover(m, {{0, 0.002}});
        Ball probe = ball(m, 8, 0.002);
        CHECK(count_scale_neighbors(m, cover, probe) == 0);
    }
    SUBCASE("self probe") {
        GoodCover cover = fixtures::make_cover(m, {{4, 0.004}});
        Ball probe = ball(m, 4, 0.004);
        CHECK(count_scale_neighbors(m, cover, probe) == 1);
    }
    SUBCASE("radius window filters") {
        GoodCover cover = fixtures::make_cover(m, {{4, 0.004}});
        Ball probe = ball(m, 4, 0.0005);   // cover ball radius 8x the probe's
        CHECK(count_scale_neighbors(m, cover, probe) == 0);
    }
    SUBCASE("grid cover stays below the derived bound and 50") {
        DiscreteManifold torus = make_flat_torus(1.0, 100);
        GoodCover cover = build_good_cover(torus);
        for (VertexId p : {0, 1234, 5678}) {
            Ball probe = ball(torus, p, 0.01);
            int count = count_scale_neighbors(torus, cover, probe);
            CHECK(count <= 50);
            CHECK(count >= 1);
        }
    }
}

TEST_CASE("cover json round trip") {
    DiscreteManifold m = fixtures::mini_torus();
    GoodCover cover = build_good_cover(m);
    std::string text = cover_to_json(cover);
    GoodCover back = cover_from_json(m, text);
    REQUIRE(back.size() == cover.size());
    for (int i = 0; i < cover.size(); ++i) {
        CHECK(back.balls[i].center == cover.balls[i].center);
        CHECK(back.balls[i].radius == cover.balls[i].radius);
        CHECK(back.balls[i].members == cover.balls[i].members);
    }
    CHECK_THROWS_AS(cover_from_json(m, "{"), InputError);
    CHECK_THROWS_AS(cover_from_json(m, "[{\"center_id\": 999999, \"radius\": 0.01}]"),
                    InputError);
}
