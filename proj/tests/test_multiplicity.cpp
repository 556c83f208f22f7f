#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "nervecraft/multiplicity.hpp"

using namespace nervecraft;

TEST_CASE("constants table arithmetic") {
    ConstantsTable t = derive_multiplicity_constants(2);
    CHECK(t.eta == doctest::Approx(1e20));
    CHECK(t.gamma ==
          doctest::Approx(1e20 * (1.0 / std::log(2.0) + 2.0 / std::log(100.0))));
    CHECK(t.c_prime == doctest::Approx(1e-60));
    CHECK(t.beta == doctest::Approx(std::log(2.0) / 1e20));
    CHECK(std::abs(std::exp(-t.alpha) - (1.0 - t.c_prime)) <= 1e-12);
    CHECK(t.r1_prefactor == doctest::Approx(0.02));
    CHECK(t.derivation_log.size() >= 5);

    for (int n = 1; n <= 6; ++n) {
        ConstantsTable tn = derive_multiplicity_constants(n);
        CHECK(tn.eta >= 1.0);
        CHECK(tn.alpha > 0.0);
        CHECK(tn.gamma > 0.0);
        CHECK(tn.beta > 0.0);
        CHECK(tn.c_prime > 0.0);
        CHECK(std::isfinite(tn.log_image_prefactor));
        CHECK(std::isfinite(tn.log_image_total_prefactor));
    }
    CHECK_THROWS_AS(derive_multiplicity_constants(0), InputError);
}

TEST_CASE("multiplicity function") {
    DiscreteManifold m = fixtures::path9();
    SUBCASE("disjoint balls stay at multiplicity one") {
        GoodCover cover = fixtures::make_cover(m, {{1, 0.002}, {7, 0.002}});
        MultiplicityProfile prof = multiplicity_function(m, cover);
        for (int v : prof.m) CHECK(v <= 1);
        double m2 = 0.0;
        for (VertexId v = 0; v < m.vertex_count(); ++v)
            if (prof.m[v] >= 2) m2 += m.weight[v];
        CHECK(m2 == 0.0);
    }
    SUBCASE("two identical balls double the count") {
        GoodCover cover = fixtures::make_cover(m, {{4, 0.004}, {4, 0.004}});
        MultiplicityProfile prof = multiplicity_function(m, cover);
        double m2 = 0.0;
        for (VertexId v = 0; v < m.vertex_count(); ++v) {
            if (std::abs(0.002 * v - 0.008) <= 0.004 + 1e-15) CHECK(prof.m[v] == 2);
            if (prof.m[v] >= 2) m2 += m.weight[v];
        }
        CHECK(m2 == doctest::Approx(cover.balls[0].sub_ball(1.0).size() * 0.002));
    }
}

TEST_CASE("layer construction") {
    DiscreteManifold m = fixtures::path9();
    std::vector<VertexId> all;
    for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
    SUBCASE("disjoint cover collapses to one layer") {
        GoodCover cover = fixtures::make_cover(m, {{1, 0.002}, {7, 0.002}});
        LayerDecomposition ld = build_layers(cover, all);
        REQUIRE(ld.layer_count() == 1);
        CHECK(ld.layers[0].size() == 2);
    }
    SUBCASE("two overlapping equal balls split by the id tie-break") {
        GoodCover cover = fixtures::make_cover(m, {{3, 0.004}, {5, 0.004}});
        LayerDecomposition ld = build_layers(cover, all);
        REQUIRE(ld.layer_count() == 2);
        CHECK(ld.layers[0] == std::vector<int>{0});
        CHECK(ld.layers[1] == std::vector<int>{1});
    }
    SUBCASE("region restricts participation") {
        GoodCover cover = fixtures::make_cover(m, {{1, 0.002}, {7, 0.002}});
        LayerDecomposition ld = build_layers(cover, {0, 1, 2});
        CHECK(ld.participating == std::vector<int>{0});
        CHECK_THROWS_AS(build_layers(cover, {}), InputError);
    }
}

TEST_CASE("generated order on a three-ball chain") {
    // dense segment, radii 0.002 <= 0.004 <= 0.008 with a lower-layer bridge
    DiscreteManifold m;
    m.n = 1;
    m.mode = MetricMode::GraphGeodesic;
    for (int i = 0; i <= 80; ++i) {
        m.pos.emplace_back(i * 0.0005, 0.0, 0.0);
        m.weight.push_back(0.0005);
    }
    for (int i = 0; i < 80; ++i) m.edges.push_back({i, i + 1, 0.0005});
    m.finalize();
    // centers at x = 0.002, 0.0065, 0.017
    GoodCover cover = fixtures::make_cover(m, {{4, 0.002}, {13, 0.004}, {34, 0.008}});
    std::vector<VertexId> all;
    for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
    LayerDecomposition ld = build_layers(cover, all);
    REQUIRE(ld.layer_count() == 2);
    CHECK(ld.layer_of[2] == 0);   // largest ball tops the first layer
    CHECK(ld.layer_of[0] == 0);   // smallest is disjoint from it
    CHECK(ld.layer_of[1] == 1);   // the bridge drops a layer
    compute_order_and_cores(m, cover, ld);
    REQUIRE(ld.order_edges.size() == 1);
    auto [i, j, k] = ld.order_edges[0];
    CHECK(i == 0);
    CHECK(j == 2);
    CHECK(k == 1);
    CHECK(ld.max_of_layer[0] == std::vector<int>{2});
    CHECK(ld.max_of_layer[1] == std::vector<int>{1});
    // core of the top layer is the tenth-ball of the maximal ball
    CHECK(ld.core_of_layer[0] == cover.balls[2].sub_ball(0.1));
}

TEST_CASE("single-layer decomposition has empty order and full max set") {
    DiscreteManifold m = fixtures::path9();
    GoodCover cover = fixtures::make_cover(m, {{1, 0.002}, {7, 0.002}});
    std::vector<VertexId> all;
    for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
    LayerDecomposition ld = build_layers(cover, all);
    compute_order_and_cores(m, cover, ld);
    CHECK(ld.order_edges.empty());
    CHECK(ld.max_of_layer[0] == ld.layers[0]);
}

namespace {

struct LayerSets {
    LayerDecomposition ld;
    MultiplicityProfile mult;
};

LayerSets layered(const DiscreteManifold& m, const GoodCover& cover) {
    std::vector<VertexId> all;
    for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
    LayerSets out{build_layers(cover, all), multiplicity_function(m, cover)};
    compute_order_and_cores(m, cover, out.ld);
    return out;
}

} // namespace

TEST_CASE("layer partition and set laws on the dense torus") {
    DiscreteManifold m = fixtures::mini_torus();
    GoodCover cover = build_good_cover(m);
    auto [ld, mult] = layered(m, cover);

    // every participating ball in exactly one layer; layers internally disjoint
    std::vector<int> placed(cover.size(), 0);
    for (const auto& layer : ld.layers) {
        std::vector<char> occupied(m.vertex_count(), 0);
        for (int bi : layer) {
            ++placed[bi];
            for (VertexId v : cover.balls[bi].members) {
                CHECK(!occupied[v]);
                occupied[v] = 1;
            }
        }
    }
    for (int bi = 0; bi < cover.size(); ++bi) CHECK(placed[bi] == 1);

    // membership in >= lambda+mu balls forces mu distinct layers at or past lambda
    for (int mu = 1; mu <= 3; ++mu)
        for (int lam = 1; lam <= std::min(3, ld.layer_count()); ++lam)
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                if (mult.m[v] < lam + mu) continue;
                std::vector<int> ds;
                for (int bi : cover.containing[v])
                    if (ld.layer_of[bi] >= lam - 1) ds.push_back(ld.layer_of[bi]);
                std::sort(ds.begin(), ds.end());
                ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
                CHECK(static_cast<int>(ds.size()) >= mu);
            }

    // triple-ball envelope of each layer catches everything below it
    for (int lam = 0; lam < std::min(3, ld.layer_count()); ++lam) {
        std::vector<char> envelope(m.vertex_count(), 0);
        for (int bi : ld.layers[lam])
            for (VertexId v : ball(m, cover.balls[bi].center, 3.0 * cover.balls[bi].radius).members)
                envelope[v] = 1;
        for (int d = lam; d < ld.layer_count(); ++d)
            for (int bi : ld.layers[d])
                for (VertexId v : cover.balls[bi].members) CHECK(envelope[v]);
    }

    // ten-fold envelope of the maximal balls catches the whole layer
    for (int d = 0; d < ld.layer_count(); ++d) {
        std::vector<char> envelope(m.vertex_count(), 0);
        for (int bi : ld.max_of_layer[d])
            for (VertexId v :
                 ball(m, cover.balls[bi].center, 10.0 * cover.balls[bi].radius).members)
                envelope[v] = 1;
        for (int bi : ld.layers[d])
            for (VertexId v : cover.balls[bi].members) CHECK(envelope[v]);
    }

    // radius pinching through cores
    for (int d = 0; d < ld.layer_count(); ++d)
        for (int bi : ld.max_of_layer[d]) {
            double ri = cover.balls[bi].radius;
            for (VertexId v : cover.balls[bi].sub_ball(0.1))
                for (int bk : cover.containing[v]) {
                    if (ld.layer_of[bk] <= d) continue;
                    CHECK(cover.balls[bk].radius >= ri / 15.0 - 1e-15);
                    CHECK(cover.balls[bk].radius <= 2.0 * ri + 1e-15);
                }
        }

    // core sandwich with the derived constant
    ConstantsTable constants = derive_multiplicity_constants(m.n);
    for (int d = 0; d < ld.layer_count(); ++d) {
        double level = 0.0, core = 0.0;
        std::vector<char> seen(m.vertex_count(), 0);
        for (int bi : ld.layers[d])
            for (VertexId v : cover.balls[bi].members)
                if (!seen[v]) {
                    seen[v] = 1;
                    level += m.weight[v];
                }
        for (VertexId v : ld.core_of_layer[d]) core += m.weight[v];
        CHECK(level <= constants.sandwich_constant * core);
    }
}

TEST_CASE("high multiplicity tail") {
    SUBCASE("disjoint cover is vacuous") {
        DiscreteManifold m = fixtures::path9();
        GoodCover cover = fixtures::make_cover(m, {{1, 0.002}, {7, 0.002}});
        std::vector<VertexId> all;
        for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
        MultiplicityProfile prof = high_multiplicity_tail(m, cover, all, 0.009);
        CHECK(prof.fit_vacuous);
        CHECK(prof.decay_margin >= 0.0);
        CHECK_THROWS_AS(high_multiplicity_tail(m, cover, all, 0.02), InputError);
    }
    SUBCASE("bumpy torus decays with a negative fitted slope") {
        DiscreteManifold m = fixtures::bumpy_torus();
        GoodCover cover = build_good_cover(m);
        std::vector<VertexId> all;
        for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
        MultiplicityProfile prof = high_multiplicity_tail(m, cover, all, 0.009);
        CHECK(prof.max_multiplicity() >= 10);
        // tail is a survival function of the multiplicity
        for (size_t lam = 1; lam + 1 < prof.tail.size(); ++lam)
            CHECK(prof.tail[lam] >= prof.tail[lam + 1]);
        // nested layer-count sets
        for (size_t mu = 0; mu + 1 < prof.lmu.size(); ++mu)
            for (size_t lam = 1; lam < prof.lmu[mu].size(); ++lam)
                CHECK(prof.lmu[mu][lam] >= prof.lmu[mu + 1][lam]);
        // averaged layer volume decays at least as fast as (1 - c')
        ConstantsTable constants = derive_multiplicity_constants(m.n);
        for (size_t lam = 1; lam + 1 < prof.f.size(); ++lam)
            CHECK(prof.f[lam + 1] <= (1.0 - constants.c_prime) * prof.f[lam] + 1e-300);
        CHECK(!prof.fit_vacuous);
        CHECK(prof.fit_used_observed_range);
        CHECK(prof.fitted_alpha > 0.0);
        CHECK(prof.decay_margin >= 0.0);
        CHECK(prof.neighborhood_volume == doctest::Approx(m.total_volume));
        // inequality with the derived constants at a couple of sampled widths
        for (double w : {0.005, 0.0099}) {
            MultiplicityProfile p2 = high_multiplicity_tail(m, cover, all, w);
            CHECK(p2.decay_margin >= 0.0);
        }
    }
    SUBCASE("ball region uses its own neighborhood") {
        DiscreteManifold m = fixtures::mini_torus();
        GoodCover cover = build_good_cover(m);
        std::vector<VertexId> region = cover.balls[0].members;
        MultiplicityProfile prof = high_multiplicity_tail(m, cover, region, 0.005);
        double direct = neighborhood_volume(m, region, 0.005);
        CHECK(prof.neighborhood_volume == doctest::Approx(direct));
        CHECK(prof.neighborhood_volume < m.total_volume);
        CHECK(prof.decay_margin >= 0.0);
    }
}

TEST_CASE("profile csv export") {
    DiscreteManifold m = fixtures::mini_torus();
    GoodCover cover = build_good_cover(m);
    std::vector<VertexId> all;
    for (VertexId v = 0; v < m.vertex_count(); ++v) all.push_back(v);
    MultiplicityProfile prof = high_multiplicity_tail(m, cover, all, 0.009);
    std::string csv = tail_profile_csv(prof);
    CHECK(csv.rfind("lambda,volume_MU,volume_L1,F\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
    std::string cj = constants_to_json(derive_multiplicity_constants(2));
    CHECK(cj.find("derivation_log") != std::string::npos);
}
