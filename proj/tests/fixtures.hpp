#pragma once

// Shared instances for the test suites.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nervecraft/good_cover.hpp"
#include "nervecraft/manifold.hpp"

namespace fixtures {

using namespace nervecraft;

// Dense unit-radius-scale torus whose grid spacing (0.008) sits strictly
// inside the (r/2, r) annulus of the radius-0.01 cover balls, so every vertex
// image is a 4-dimensional face and the nerve stays small.
inline DiscreteManifold mini_torus() { return make_flat_torus(0.08, 10); }

// Torus with two refined square patches: same closed-form metric, mixed cell
// sizes, multiplicity up to ~50 inside the patches.
inline DiscreteManifold bumpy_torus() {
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::ExactClosedForm;
    m.exact = ExactMetric::FlatTorus;
    m.torus_lx = m.torus_ly = 1.0;
    m.tag = "bumpy_torus";
    const int base_res = 100;
    const double base_step = 1.0 / base_res;
    const double patch_step = base_step / 4.0;
    auto in_patch = [](double x, double y) {
        auto inside = [](double v, double lo) { return v >= lo && v < lo + 0.1; };
        return (inside(x, 0.2) && inside(y, 0.2)) || (inside(x, 0.6) && inside(y, 0.6));
    };
    std::vector<std::vector<VertexId>> base_id(base_res, std::vector<VertexId>(base_res, -1));
    for (int i = 0; i < base_res; ++i)
        for (int j = 0; j < base_res; ++j) {
            double x = i * base_step, y = j * base_step;
            if (in_patch(x, y)) continue;
            base_id[i][j] = static_cast<VertexId>(m.pos.size());
            m.pos.emplace_back(x, y, 0.0);
            m.weight.push_back(base_step * base_step);
        }
    for (int i = 0; i < base_res; ++i)
        for (int j = 0; j < base_res; ++j) {
            if (base_id[i][j] < 0) continue;
            int i2 = (i + 1) % base_res, j2 = (j + 1) % base_res;
            if (base_id[i2][j] >= 0)
                m.edges.push_back({base_id[i][j], base_id[i2][j], base_step});
            if (base_id[i][j2] >= 0)
                m.edges.push_back({base_id[i][j], base_id[i][j2], base_step});
        }
    auto add_patch = [&m, patch_step](double x0, double y0) {
        const int k = 40;
        std::vector<std::vector<VertexId>> ids(k, std::vector<VertexId>(k));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                ids[i][j] = static_cast<VertexId>(m.pos.size());
                m.pos.emplace_back(x0 + i * patch_step, y0 + j * patch_step, 0.0);
                m.weight.push_back(patch_step * patch_step);
            }
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                if (i + 1 < k) m.edges.push_back({ids[i][j], ids[i + 1][j], patch_step});
                if (j + 1 < k) m.edges.push_back({ids[i][j], ids[i][j + 1], patch_step});
            }
        return ids;
    };
    auto stitch = [&m](const std::vector<std::vector<VertexId>>& ids) {
        const int k = static_cast<int>(ids.size());
        for (int i = 0; i < k; ++i)
            for (int j : {0, k - 1}) {
                for (VertexId border : {ids[i][j], ids[j][i]}) {
                    VertexId best = -1;
                    double best_d = 1e9;
                    for (VertexId v = 0; v < static_cast<VertexId>(m.pos.size()); ++v) {
                        if (v == border) continue;
                        if (m.weight[v] != 0.01 * 0.01) continue;   // base vertices only
                        double dx = std::abs(m.pos[v].x() - m.pos[border].x());
                        double dy = std::abs(m.pos[v].y() - m.pos[border].y());
                        dx = std::min(dx, 1.0 - dx);
                        dy = std::min(dy, 1.0 - dy);
                        double d = std::sqrt(dx * dx + dy * dy);
                        if (d < best_d) {
                            best_d = d;
                            best = v;
                        }
                    }
                    if (best >= 0) m.edges.push_back({border, best, best_d});
                }
            }
    };
    stitch(add_patch(0.2, 0.2));
    stitch(add_patch(0.6, 0.6));
    m.finalize();
    return m;
}

// Nine vertices on a segment, two overlapping radius-0.01 balls; the nerve is
// the five-face path complex.
inline DiscreteManifold path9() {
    DiscreteManifold m;
    m.n = 1;
    m.mode = MetricMode::GraphGeodesic;
    m.tag = "path9";
    for (int i = 0; i < 9; ++i) {
        m.pos.emplace_back(i * 0.002, 0.0, 0.0);
        m.weight.push_back(0.002);
    }
    for (int i = 0; i + 1 < 9; ++i) m.edges.push_back({i, i + 1, 0.002});
    m.finalize();
    return m;
}

// Twelve vertices around a circle (circumference 0.024), cycle graph.
inline DiscreteManifold circle12() {
    DiscreteManifold m;
    m.n = 1;
    m.mode = MetricMode::GraphGeodesic;
    m.tag = "circle12";
    const int k = 12;
    const double step = 0.002;
    for (int i = 0; i < k; ++i) {
        m.pos.emplace_back(i * step, 0.0, 0.0);
        m.weight.push_back(step);
    }
    for (int i = 0; i < k; ++i) m.edges.push_back({i, (i + 1) % k, step});
    m.finalize();
    return m;
}

// Chain with a heavy far vertex: growth fails on the first ladder rung at
// vertex 0 and succeeds on the second, exercising the density cascade.
inline DiscreteManifold cascade_chain() {
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::GraphGeodesic;
    m.tag = "cascade_chain";
    const int light = 121;
    const double step = 4e-6;
    for (int i = 0; i < light; ++i) {
        m.pos.emplace_back(i * step, 0.0, 0.0);
        m.weight.push_back(1e-30);
    }
    m.pos.emplace_back(light * step, 0.0, 0.0);
    m.weight.push_back(1.0);
    for (int i = 0; i < light; ++i) m.edges.push_back({i, i + 1, step});
    m.finalize();
    return m;
}

inline GoodCover make_cover(const DiscreteManifold& m,
                            const std::vector<std::pair<VertexId, double>>& balls) {
    GoodCover cover;
    cover.v1 = max_ball_volume(m, 1.0);
    for (auto [center, radius] : balls) {
        Ball b = ball(m, center, radius);
        CoverBall cb;
        cb.center = center;
        cb.radius = radius;
        cb.members = std::move(b.members);
        cb.member_dist = std::move(b.member_dist);
        cover.balls.push_back(std::move(cb));
    }
    cover.build_index(m.vertex_count());
    return cover;
}

inline GoodCover two_ball_cover(const DiscreteManifold& p9) {
    return make_cover(p9, {{2, 0.01}, {6, 0.01}});
}

inline GoodCover annulus_cover(const DiscreteManifold& c12) {
    return make_cover(c12, {{0, 0.01}, {4, 0.01}, {8, 0.01}});
}

inline std::string write_temp(const std::string& name, const std::string& body) {
    std::string path = std::string("/tmp/nervecraft_fixture_") + name;
    std::ofstream out(path);
    out << body;
    return path;
}

inline std::string off_triangle() {
    return write_temp("triangle.off",
                      "OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n");
}

inline std::string off_quad_torus() {
    // 2x2 flat-torus quad grid of side 1: four cells, wraparound corners
    return write_temp("quad_torus.off",
                      "OFF\n4 4 8\n"
                      "0 0 0\n0.5 0 0\n0 0.5 0\n0.5 0.5 0\n"
                      "4 0 1 3 2\n"
                      "4 1 0 2 3\n"
                      "4 2 3 1 0\n"
                      "4 3 2 0 1\n");
}

inline std::string off_malformed() {
    return write_temp("malformed.off", "OFF\n3 1\nnot numbers\n");
}

inline std::string off_disconnected() {
    return write_temp("disconnected.off",
                      "OFF\n6 2 6\n0 0 0\n1 0 0\n0 1 0\n5 5 0\n6 5 0\n5 6 0\n"
                      "3 0 1 2\n3 3 4 5\n");
}

inline std::string off_zero_area() {
    return write_temp("zero_area.off",
                      "OFF\n3 1 3\n0 0 0\n1 0 0\n2 0 0\n3 0 1 2\n");
}

} // namespace fixtures
