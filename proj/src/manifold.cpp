#include "nervecraft/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nervecraft {

namespace {

double torus_distance(const DiscreteManifold& m, VertexId u, VertexId v) {
    double dx = std::abs(m.pos[u].x() - m.pos[v].x());
    double dy = std::abs(m.pos[u].y() - m.pos[v].y());
    dx = std::min(dx, m.torus_lx - dx);
    dy = std::min(dy, m.torus_ly - dy);
    return std::sqrt(dx * dx + dy * dy);
}

double sphere_distance(const DiscreteManifold& m, VertexId u, VertexId v) {
    const Eigen::Vector3d& a = m.pos[u];
    const Eigen::Vector3d& b = m.pos[v];
    return m.sphere_radius * std::atan2(a.cross(b).norm(), a.dot(b));
}

// Dijkstra from src; stops expanding past cutoff (pass +inf for full sweep).
std::vector<double> graph_distances(const DiscreteManifold& m, VertexId src, double cutoff) {
    std::vector<double> dist(m.vertex_count(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[src] = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u]) continue;
        if (d > cutoff) break;
        for (const auto& [v, len] : m.adj[u]) {
            double nd = d + len;
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.push({nd, v});
            }
        }
    }
    return dist;
}

} // namespace

double DiscreteManifold::diameter_upper_bound() const {
    switch (exact) {
    case ExactMetric::FlatTorus:
        return std::sqrt(torus_lx * torus_lx / 4.0 + torus_ly * torus_ly / 4.0);
    case ExactMetric::RoundSphere:
        return M_PI * sphere_radius;
    default:
        return std::numeric_limits<double>::infinity();
    }
}

void DiscreteManifold::validate() const {
    if (vertex_count() == 0) throw InputError("manifold has no vertices");
    if (n < 1) throw InputError("dimension must be positive");
    for (int i = 0; i < vertex_count(); ++i)
        if (!(weight[i] > 0.0)) throw InputError("vertex weight must be positive");
    for (const Edge& e : edges) {
        if (!valid_vertex(e.u) || !valid_vertex(e.v)) throw InputError("edge endpoint out of range");
        if (!(e.length > 0.0)) throw InputError("edge length must be positive");
    }
    // connectivity
    std::vector<char> seen(vertex_count(), 0);
    std::vector<VertexId> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        VertexId u = stack.back();
        stack.pop_back();
        for (const auto& [v, len] : adj[u]) {
            (void)len;
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                stack.push_back(v);
            }
        }
    }
    if (reached != vertex_count()) throw InputError("manifold graph is disconnected");
}

void DiscreteManifold::finalize() {
    adj.assign(weight.size(), {});
    resolution_h = 0.0;
    for (const Edge& e : edges) {
        adj[e.u].push_back({e.v, e.length});
        adj[e.v].push_back({e.u, e.length});
        resolution_h = std::max(resolution_h, e.length);
    }
    total_volume = 0.0;
    for (double w : weight) total_volume += w;
    validate();
}

double distance(const DiscreteManifold& m, VertexId u, VertexId v) {
    if (!m.valid_vertex(u) || !m.valid_vertex(v)) throw InputError("invalid vertex id");
    if (u == v) return 0.0;
    switch (m.exact) {
    case ExactMetric::FlatTorus: return torus_distance(m, u, v);
    case ExactMetric::RoundSphere: return sphere_distance(m, u, v);
    default: break;
    }
    return graph_distances(m, u, std::numeric_limits<double>::infinity())[v];
}

Ball ball(const DiscreteManifold& m, VertexId p, double radius) {
    if (!m.valid_vertex(p)) throw InputError("invalid vertex id");
    if (radius < 0.0) throw InputError("negative ball radius");
    Ball b;
    b.center = p;
    b.radius = radius;
    b.below_resolution = radius < 5.0 * m.resolution_h;
    if (m.mode == MetricMode::ExactClosedForm) {
        if (radius >= m.diameter_upper_bound()) {
            b.members.resize(m.vertex_count());
            b.member_dist.resize(m.vertex_count());
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                b.members[v] = v;
                b.member_dist[v] = distance(m, p, v);
                b.volume += m.weight[v];
            }
            return b;
        }
        for (VertexId v = 0; v < m.vertex_count(); ++v) {
            double d = distance(m, p, v);
            if (d <= radius) {
                b.members.push_back(v);
                b.member_dist.push_back(d);
                b.volume += m.weight[v];
            }
        }
        return b;
    }
    std::vector<double> dist = graph_distances(m, p, radius);
    for (VertexId v = 0; v < m.vertex_count(); ++v) {
        if (dist[v] <= radius) {
            b.members.push_back(v);
            b.member_dist.push_back(dist[v]);
            b.volume += m.weight[v];
        }
    }
    return b;
}

double ball_volume(const DiscreteManifold& m, VertexId p, double radius) {
    if (!m.valid_vertex(p)) throw InputError("invalid vertex id");
    if (radius < 0.0) throw InputError("negative ball radius");
    if (m.mode == MetricMode::ExactClosedForm) {
        if (radius >= m.diameter_upper_bound()) return m.total_volume;
        double vol = 0.0;
        for (VertexId v = 0; v < m.vertex_count(); ++v)
            if (distance(m, p, v) <= radius) vol += m.weight[v];
        return vol;
    }
    return ball(m, p, radius).volume;
}

VolumeProfile volume_profile(const DiscreteManifold& m,
                             const std::vector<VertexId>& centers,
                             const std::vector<double>& radii) {
    if (radii.empty()) throw InputError("empty radii list");
    if (centers.empty()) throw InputError("empty center list");
    if (!std::is_sorted(radii.begin(), radii.end()))
        throw InputError("radii must be sorted ascending");
    VolumeProfile profile;
    profile.radii = radii;
    profile.centers = centers;
    profile.per_center.resize(centers.size());
    profile.v_of_r.assign(radii.size(), 0.0);
    const double rmax = radii.back();
    for (size_t ci = 0; ci < centers.size(); ++ci) {
        VertexId c = centers[ci];
        if (!m.valid_vertex(c)) throw InputError("invalid center id");
        std::vector<double> vols(radii.size(), 0.0);
        if (m.mode == MetricMode::ExactClosedForm) {
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                double d = distance(m, c, v);
                if (d > rmax) continue;
                // first radius covering d
                auto it = std::lower_bound(radii.begin(), radii.end(), d);
                for (size_t ri = it - radii.begin(); ri < radii.size(); ++ri) vols[ri] += m.weight[v];
            }
        } else {
            std::vector<double> dist = graph_distances(m, c, rmax);
            for (VertexId v = 0; v < m.vertex_count(); ++v) {
                if (dist[v] > rmax) continue;
                auto it = std::lower_bound(radii.begin(), radii.end(), dist[v]);
                for (size_t ri = it - radii.begin(); ri < radii.size(); ++ri) vols[ri] += m.weight[v];
            }
        }
        profile.per_center[ci] = vols;
        for (size_t ri = 0; ri < radii.size(); ++ri)
            profile.v_of_r[ri] = std::max(profile.v_of_r[ri], vols[ri]);
    }
    return profile;
}

double max_ball_volume(const DiscreteManifold& m, double radius) {
    if (m.mode == MetricMode::ExactClosedForm && radius >= m.diameter_upper_bound())
        return m.total_volume;
    std::vector<VertexId> centers(m.vertex_count());
    for (int i = 0; i < m.vertex_count(); ++i) centers[i] = i;
    return volume_profile(m, centers, {radius}).v_of_r[0];
}

DiscreteManifold rescaled(const DiscreteManifold& m, double lambda) {
    if (!(lambda > 0.0)) throw InputError("scale factor must be positive");
    DiscreteManifold out = m;
    out.scale = m.scale * lambda;
    double wf = std::pow(lambda, m.n);
    for (double& w : out.weight) w *= wf;
    for (Edge& e : out.edges) e.length *= lambda;
    switch (m.exact) {
    case ExactMetric::FlatTorus:
        out.torus_lx *= lambda;
        out.torus_ly *= lambda;
        for (auto& p : out.pos) p *= lambda;
        break;
    case ExactMetric::RoundSphere:
        out.sphere_radius *= lambda;      // pos stays a unit vector
        break;
    default:
        for (auto& p : out.pos) p *= lambda;
        break;
    }
    out.finalize();
    return out;
}

// ---------------------------------------------------------------------------
// synthetic generators

DiscreteManifold make_flat_torus(double side, int resolution) {
    if (!(side > 0.0)) throw InputError("flat_torus: side must be positive");
    if (resolution < 8) throw InputError("flat_torus: resolution below minimum (8)");
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::ExactClosedForm;
    m.exact = ExactMetric::FlatTorus;
    m.torus_lx = m.torus_ly = side;
    m.tag = "flat_torus";
    const int r = resolution;
    const double step = side / r;
    m.weight.assign(static_cast<size_t>(r) * r, step * step);
    m.pos.resize(static_cast<size_t>(r) * r);
    auto id = [r](int i, int j) { return static_cast<VertexId>(i * r + j); };
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            m.pos[id(i, j)] = Eigen::Vector3d(i * step, j * step, 0.0);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            m.edges.push_back({id(i, j), id((i + 1) % r, j), step});
            m.edges.push_back({id(i, j), id(i, (j + 1) % r), step});
        }
    m.finalize();
    return m;
}

DiscreteManifold make_thin_cylinder(double circumference, double length, int resolution) {
    if (!(circumference > 0.0) || !(length > 0.0))
        throw InputError("thin_cylinder: nonpositive shape parameter");
    if (resolution < 8) throw InputError("thin_cylinder: resolution below minimum (8)");
    // Flat rectangular torus: wraps in both directions, so the instance is
    // closed and the product metric is exact.
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::ExactClosedForm;
    m.exact = ExactMetric::FlatTorus;
    m.torus_lx = circumference;
    m.torus_ly = length;
    m.tag = "thin_cylinder";
    const int nx = resolution;
    const int ny = std::max<int>(resolution, static_cast<int>(std::ceil(length * resolution)));
    const double sx = circumference / nx;
    const double sy = length / ny;
    m.weight.assign(static_cast<size_t>(nx) * ny, sx * sy);
    m.pos.resize(static_cast<size_t>(nx) * ny);
    auto id = [ny](int i, int j) { return static_cast<VertexId>(i * ny + j); };
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            m.pos[id(i, j)] = Eigen::Vector3d(i * sx, j * sy, 0.0);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            m.edges.push_back({id(i, j), id((i + 1) % nx, j), sx});
            m.edges.push_back({id(i, j), id(i, (j + 1) % ny), sy});
        }
    m.finalize();
    return m;
}

DiscreteManifold make_round_sphere(double radius, int resolution) {
    if (!(radius > 0.0)) throw InputError("round_sphere: radius must be positive");
    if (resolution < 8) throw InputError("round_sphere: resolution below minimum (8)");
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::ExactClosedForm;
    m.exact = ExactMetric::RoundSphere;
    m.sphere_radius = radius;
    m.tag = "round_sphere";
    const int rows = resolution;       // parallels, offset half a step from the poles
    const int cols = 2 * resolution;   // meridians
    const double dphi = M_PI / rows;
    const double dtheta = 2.0 * M_PI / cols;
    m.weight.resize(static_cast<size_t>(rows) * cols);
    m.pos.resize(static_cast<size_t>(rows) * cols);
    auto id = [cols](int j, int i) { return static_cast<VertexId>(j * cols + i); };
    for (int j = 0; j < rows; ++j) {
        double phi = (j + 0.5) * dphi;
        double band = radius * radius * dtheta * (std::cos(j * dphi) - std::cos((j + 1) * dphi));
        for (int i = 0; i < cols; ++i) {
            double theta = i * dtheta;
            m.pos[id(j, i)] = Eigen::Vector3d(std::sin(phi) * std::cos(theta),
                                              std::sin(phi) * std::sin(theta), std::cos(phi));
            m.weight[id(j, i)] = band;
        }
    }
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) {
            VertexId a = id(j, i);
            VertexId b = id(j, (i + 1) % cols);
            m.edges.push_back({a, b, sphere_distance(m, a, b)});
            if (j + 1 < rows) {
                VertexId c = id(j + 1, i);
                m.edges.push_back({a, c, sphere_distance(m, a, c)});
            }
        }
    m.finalize();
    return m;
}

DiscreteManifold make_dumbbell(double neck_width, int resolution) {
    if (!(neck_width > 0.0)) throw InputError("dumbbell: nonpositive neck width");
    if (resolution < 8) throw InputError("dumbbell: resolution below minimum (8)");
    // Surface of revolution: two bulbs of radius 0.05 joined by a neck of the
    // given width, closed by poles at the ends. Sized so that the unit-scale
    // ball machinery resolves it.
    const double bulb = 0.05;
    if (!(neck_width < 2.0 * bulb))
        throw InputError("dumbbell: neck width must be below the bulb diameter 0.1");
    DiscreteManifold m;
    m.n = 2;
    m.mode = MetricMode::GraphGeodesic;
    m.tag = "dumbbell";
    const int rings = 4 * resolution + 1;
    const int around = 2 * resolution;
    const double z0 = -2.0 * bulb, z1 = 2.0 * bulb;
    const double dz = (z1 - z0) / (rings - 1);
    auto profile = [neck_width, bulb](double z) {
        double u = (std::abs(z) - bulb) / bulb;
        double s = 1.0 - u * u;
        double hump = s > 0.0 ? bulb * std::sqrt(s) : 0.0;
        return std::max(neck_width / 2.0, hump);
    };
    std::vector<std::vector<VertexId>> ring_ids(rings);
    for (int j = 0; j < rings; ++j) {
        double z = z0 + j * dz;
        double rho = profile(z);
        for (int i = 0; i < around; ++i) {
            double th = 2.0 * M_PI * i / around;
            ring_ids[j].push_back(static_cast<VertexId>(m.pos.size()));
            m.pos.emplace_back(rho * std::cos(th), rho * std::sin(th), z);
            m.weight.push_back(0.0);
        }
    }
    VertexId pole_lo = static_cast<VertexId>(m.pos.size());
    m.pos.emplace_back(0.0, 0.0, z0 - neck_width / 2.0);
    m.weight.push_back(0.0);
    VertexId pole_hi = static_cast<VertexId>(m.pos.size());
    m.pos.emplace_back(0.0, 0.0, z1 + neck_width / 2.0);
    m.weight.push_back(0.0);

    auto euclid = [&m](VertexId a, VertexId b) { return (m.pos[a] - m.pos[b]).norm(); };
    // quad cells between consecutive rings carry the area
    for (int j = 0; j + 1 < rings; ++j)
        for (int i = 0; i < around; ++i) {
            VertexId a = ring_ids[j][i];
            VertexId b = ring_ids[j][(i + 1) % around];
            VertexId c = ring_ids[j + 1][(i + 1) % around];
            VertexId d = ring_ids[j + 1][i];
            double area = 0.5 * ((m.pos[b] - m.pos[a]).cross(m.pos[c] - m.pos[a]).norm() +
                                 (m.pos[c] - m.pos[a]).cross(m.pos[d] - m.pos[a]).norm());
            for (VertexId v : {a, b, c, d}) m.weight[v] += area / 4.0;
        }
    // pole fans
    for (int i = 0; i < around; ++i) {
        for (auto [pole, ring] : {std::pair{pole_lo, 0}, std::pair{pole_hi, rings - 1}}) {
            VertexId a = ring_ids[ring][i];
            VertexId b = ring_ids[ring][(i + 1) % around];
            double area =
                0.5 * (m.pos[a] - m.pos[pole]).cross(m.pos[b] - m.pos[pole]).norm();
            m.weight[pole] += area / 3.0;
            m.weight[a] += area / 3.0;
            m.weight[b] += area / 3.0;
        }
    }
    for (int j = 0; j < rings; ++j)
        for (int i = 0; i < around; ++i) {
            VertexId a = ring_ids[j][i];
            VertexId b = ring_ids[j][(i + 1) % around];
            m.edges.push_back({a, b, euclid(a, b)});
            if (j + 1 < rings) {
                VertexId c = ring_ids[j + 1][i];
                m.edges.push_back({a, c, euclid(a, c)});
            }
        }
    for (int i = 0; i < around; ++i) {
        m.edges.push_back({pole_lo, ring_ids[0][i], euclid(pole_lo, ring_ids[0][i])});
        m.edges.push_back(
            {pole_hi, ring_ids[rings - 1][i], euclid(pole_hi, ring_ids[rings - 1][i])});
    }
    m.finalize();
    return m;
}

DiscreteManifold generate_synthetic(const std::string& shape_json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(shape_json);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("bad shape descriptor: ") + e.what());
    }
    if (!j.contains("shape")) throw InputError("shape descriptor missing 'shape'");
    const std::string shape = j["shape"];
    auto num = [&j](const char* key, double dflt, bool required) {
        if (!j.contains(key)) {
            if (required) throw InputError(std::string("shape descriptor missing '") + key + "'");
            return dflt;
        }
        return j[key].get<double>();
    };
    int res = static_cast<int>(num("resolution", 0, true));
    if (shape == "flat_torus") return make_flat_torus(num("side", 0, true), res);
    if (shape == "round_sphere") return make_round_sphere(num("radius", 0, true), res);
    if (shape == "thin_cylinder")
        return make_thin_cylinder(num("circumference", 0, true), num("length", 0, true), res);
    if (shape == "dumbbell") return make_dumbbell(num("neck_width", 0, true), res);
    throw InputError("unknown shape: " + shape);
}

// ---------------------------------------------------------------------------
// OFF loader

DiscreteManifold load_off_mesh(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open mesh file: " + path);
    auto next_token_line = [&in]() {
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) return line;
        }
        throw InputError("unexpected end of OFF file");
    };
    std::string header = next_token_line();
    {
        std::istringstream hs(header);
        std::string word;
        hs >> word;
        if (word != "OFF") throw InputError("not an OFF file (missing header)");
    }
    int nv = 0, nf = 0, ne = 0;
    {
        std::istringstream cs(next_token_line());
        if (!(cs >> nv >> nf >> ne)) throw InputError("bad OFF count line");
    }
    if (nv <= 0 || nf <= 0) throw InputError("OFF file has no geometry");
    DiscreteManifold m;
    m.n = n;
    m.mode = MetricMode::GraphGeodesic;
    m.tag = "mesh:" + path;
    m.pos.resize(nv);
    m.weight.assign(nv, 0.0);
    for (int i = 0; i < nv; ++i) {
        std::istringstream vs(next_token_line());
        double x, y, z;
        if (!(vs >> x >> y >> z)) throw InputError("bad OFF vertex line");
        m.pos[i] = Eigen::Vector3d(x, y, z);
    }
    std::map<std::pair<VertexId, VertexId>, double> edge_set;
    for (int f = 0; f < nf; ++f) {
        std::istringstream fs(next_token_line());
        int k;
        if (!(fs >> k)) throw InputError("bad OFF face line");
        if (k != 3 && k != 4) throw InputError("only triangle and quad cells are supported");
        std::vector<VertexId> corners(k);
        for (int i = 0; i < k; ++i) {
            int v;
            if (!(fs >> v)) throw InputError("bad OFF face line");
            if (v < 0 || v >= nv) throw InputError("OFF face references missing vertex");
            corners[i] = v;
        }
        double area = 0.0;
        for (int i = 1; i + 1 < k; ++i)
            area += 0.5 * (m.pos[corners[i]] - m.pos[corners[0]])
                              .cross(m.pos[corners[i + 1]] - m.pos[corners[0]])
                              .norm();
        if (!(area > 0.0)) throw InputError("zero-area cell in mesh");
        for (VertexId c : corners) m.weight[c] += area / k;
        for (int i = 0; i < k; ++i) {
            VertexId a = corners[i], b = corners[(i + 1) % k];
            if (a == b) throw InputError("degenerate cell edge");
            auto key = std::minmax(a, b);
            edge_set.emplace(std::make_pair(key.first, key.second), (m.pos[a] - m.pos[b]).norm());
        }
    }
    for (const auto& [key, len] : edge_set) m.edges.push_back({key.first, key.second, len});
    m.finalize();
    return m;
}

std::string volume_profile_csv(const VolumeProfile& profile) {
    std::ostringstream out;
    out.precision(17);
    out << "radius,center_id,volume\n";
    for (size_t ri = 0; ri < profile.radii.size(); ++ri) {
        for (size_t ci = 0; ci < profile.centers.size(); ++ci)
            out << profile.radii[ri] << ',' << profile.centers[ci] << ','
                << profile.per_center[ci][ri] << '\n';
        // summary row: center_id -1 carries V(R)
        out << profile.radii[ri] << ",-1," << profile.v_of_r[ri] << '\n';
    }
    return out.str();
}

} // namespace nervecraft
