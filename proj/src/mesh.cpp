#include "hotspot/mesh.hpp"

#include "predicates.hpp"
#include "triangulator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

namespace hotspot::meshing {

using geometry::DomainSpec;
using geometry::PolygonWithSlit;
using geometry::SymmetryElement;

void SizeField::validate() const {
    if (!(h_neck > 0.0) || !(h_neck <= h_max)) throw ParameterError("need 0 < h_neck <= h_max");
    if (!(grading_ratio >= 1.2 && grading_ratio <= 2.5))
        throw ParameterError("grading_ratio must lie in [1.2, 2.5]");
}

bool Mesh::node_on_boundary(Index v) const {
    if (on_boundary_cache_.empty()) {
        on_boundary_cache_.assign(nodes.size(), 0);
        for (const auto& e : boundary_edges) {
            on_boundary_cache_[e.a] = 1;
            on_boundary_cache_[e.b] = 1;
        }
        for (const auto& [a, b] : slit_twins) {
            on_boundary_cache_[a] = 1;
            on_boundary_cache_[b] = 1;
        }
    }
    return on_boundary_cache_[v] != 0;
}

Real Mesh::triangle_area(Index t) const {
    const auto& tv = triangles[t];
    const Point2 d1 = nodes[tv[1]] - nodes[tv[0]];
    const Point2 d2 = nodes[tv[2]] - nodes[tv[0]];
    return 0.5 * (d1.x() * d2.y() - d1.y() * d2.x());
}

namespace {

std::uint64_t ekey(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    Index find(Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

Mesh triangulate(const PolygonWithSlit& domain, const SizeField& size,
                 const TriangulateOptions& opts) {
    std::vector<Point2> points;
    std::vector<std::array<Index, 2>> segments;
    std::vector<int> seg_loop;

    const auto add_loop = [&](const std::vector<Point2>& loop, int id) {
        const Index base = static_cast<Index>(points.size());
        const Index n = static_cast<Index>(loop.size());
        for (const auto& p : loop) points.push_back(p);
        for (Index i = 0; i < n; ++i) {
            segments.push_back({base + i, base + (i + 1) % n});
            seg_loop.push_back(id);
        }
    };
    add_loop(domain.outer_loop, 0);
    for (std::size_t h = 0; h < domain.hole_loops.size(); ++h)
        add_loop(domain.hole_loops[h], static_cast<int>(h) + 1);

    const int slit_id = static_cast<int>(domain.hole_loops.size()) + 1;
    std::vector<Index> slit_point_ids;
    std::vector<int> slit_edge_ids;
    if (!domain.slit.empty()) {
        if (domain.slit.size() < 2) throw MeshError("slit must have at least 2 points");
        for (const auto& sp : domain.slit) {
            Index id = -1;
            for (Index i = 0; i < static_cast<Index>(points.size()); ++i)
                if ((points[i] - sp).norm() <= 1e-12) {
                    id = i;
                    break;
                }
            if (id < 0) {
                // endpoint in the interior of a loop edge: split that input edge
                for (std::size_t e = 0; e < segments.size() && id < 0; ++e) {
                    const Point2& a = points[segments[e][0]];
                    const Point2& b = points[segments[e][1]];
                    const Point2 ab = b - a;
                    const Real t = (sp - a).dot(ab) / ab.squaredNorm();
                    if (t <= 1e-9 || t >= 1.0 - 1e-9) continue;
                    if ((sp - (a + t * ab)).norm() > 1e-12) continue;
                    id = static_cast<Index>(points.size());
                    points.push_back(sp);
                    const Index old_b = segments[e][1];
                    segments[e][1] = id;
                    segments.push_back({id, old_b});
                    seg_loop.push_back(seg_loop[e]);
                }
            }
            if (id < 0) {
                id = static_cast<Index>(points.size());
                points.push_back(sp);
            }
            slit_point_ids.push_back(id);
        }
        for (std::size_t i = 0; i + 1 < slit_point_ids.size(); ++i) {
            slit_edge_ids.push_back(static_cast<int>(segments.size()));
            segments.push_back({slit_point_ids[i], slit_point_ids[i + 1]});
            seg_loop.push_back(slit_id);
        }
    }

    auto result = detail::triangulate_pslg(points, segments, seg_loop, domain, size, opts);

    if (!domain.slit.empty()) {
        // recover the ordered slit node chain from subsegment provenance
        std::unordered_set<int> slit_edges(slit_edge_ids.begin(), slit_edge_ids.end());
        std::vector<Index> chain_nodes;
        for (const auto& s : result.subsegments) {
            if (!slit_edges.count(s[2])) continue;
            chain_nodes.push_back(s[0]);
            chain_nodes.push_back(s[1]);
        }
        std::sort(chain_nodes.begin(), chain_nodes.end());
        chain_nodes.erase(std::unique(chain_nodes.begin(), chain_nodes.end()), chain_nodes.end());
        // order along the slit polyline by arclength
        const Point2 o = domain.slit.front();
        std::sort(chain_nodes.begin(), chain_nodes.end(), [&](Index u, Index v) {
            return (result.mesh.nodes[u] - o).squaredNorm() <
                   (result.mesh.nodes[v] - o).squaredNorm();
        });
        detail::cut_slit(result.mesh, chain_nodes, slit_id);
    }
    return std::move(result.mesh);
}

std::vector<SizeSeed> default_seeds(const DomainSpec& spec, const SizeField& size) {
    const auto a = geometry::vertices(spec);
    const Real h_gate = std::max(std::min(0.15, size.h_max / 40.0), size.h_neck);
    const Real h_origin = std::max(std::min(0.05, size.h_max / 120.0), size.h_neck);
    return {SizeSeed{a[4], size.h_neck},  // channel pinch A5
            SizeSeed{a[7], h_gate},       // ring corners flanking the gates
            SizeSeed{a[8], h_gate},
            SizeSeed{Point2{0.0, 0.0}, h_origin}};
}

Mesh triangulate(const DomainSpec& spec, const SizeField& size, const TriangulateOptions& opts) {
    spec.validate();
    SizeField sf = size;
    sf.h_neck = std::min(sf.h_neck, spec.epsilon / 3.0);  // resolve the pinch
    TriangulateOptions op = opts;
    if (op.seeds.empty()) op.seeds = default_seeds(spec, sf);

    // fundamental polygon A1..A10; boundary-edge tags carry the edge index
    const auto a = geometry::vertices(spec);
    std::vector<Point2> pts(a.begin(), a.end());
    std::vector<std::array<Index, 2>> segs;
    std::vector<int> seg_loop;
    for (Index i = 0; i < 10; ++i) {
        segs.push_back({i, (i + 1) % 10});
        seg_loop.push_back(i);
    }
    PolygonWithSlit d1_shape;
    d1_shape.outer_loop = pts;
    auto d1 = detail::triangulate_pslg(pts, segs, seg_loop, d1_shape, sf, op);

    const Index n = static_cast<Index>(d1.mesh.nodes.size());
    const auto& g = geometry::group();
    const auto index_of_sym = [&](const SymmetryElement& s) {
        for (int i = 0; i < 6; ++i)
            if (g[i] == s) return i;
        throw GeometryError("symmetry element not in group");
    };
    const SymmetryElement s_axis{0, true};
    const SymmetryElement s_ray{1, true};
    int axis_partner[6], ray_partner[6];
    for (int c = 0; c < 6; ++c) {
        axis_partner[c] = index_of_sym(geometry::compose(g[c], s_axis));
        ray_partner[c] = index_of_sym(geometry::compose(g[c], s_ray));
    }

    // node crumbs: which seam of the fundamental polygon a node lies on
    std::vector<char> on_axis(n, 0), on_ray(n, 0), ray_interior(n, 0);
    for (Index i = 0; i < n; ++i) {
        const int pe = d1.node_parent_edge[i];
        const int iv = d1.node_input_vertex[i];
        on_axis[i] = (pe == 9) || iv == 0 || iv == 9;
        on_ray[i] = (pe == 0) || (pe == 7) || iv == 0 || iv == 1 || iv == 7 || iv == 8;
        ray_interior[i] = (pe == 7) && iv == -1;  // strictly between A8 and A9
    }

    UnionFind uf(static_cast<std::size_t>(6) * n);
    const auto slot = [&](int c, Index i) { return static_cast<Index>(c) * n + i; };
    const bool is_slit_pair = [&](int c1, int c2) {
        const int lo = std::min(c1, c2), hi = std::max(c1, c2);
        return lo == 1 && hi == 5;  // rotation by 2pi/3 and its seam partner
    }(1, 5);
    (void)is_slit_pair;
    for (int c = 0; c < 6; ++c) {
        for (Index i = 0; i < n; ++i) {
            if (on_axis[i]) uf.unite(slot(c, i), slot(axis_partner[c], i));
            if (on_ray[i]) {
                const int rp = ray_partner[c];
                const bool slit_pair = (std::min(c, rp) == 1 && std::max(c, rp) == 5);
                if (slit_pair && ray_interior[i]) continue;  // keep the slit open
                uf.unite(slot(c, i), slot(rp, i));
            }
        }
    }

    Mesh out;
    std::vector<Index> gid(static_cast<std::size_t>(6) * n, -1);
    for (int c = 0; c < 6; ++c) {
        for (Index i = 0; i < n; ++i) {
            const Index r = uf.find(slot(c, i));
            if (gid[r] < 0) {
                gid[r] = static_cast<Index>(out.nodes.size());
                out.nodes.push_back(geometry::apply_symmetry(g[c], d1.mesh.nodes[i]));
            }
            gid[slot(c, i)] = gid[r];
        }
    }
    for (int c = 0; c < 6; ++c) {
        for (const auto& t : d1.mesh.triangles) {
            std::array<Index, 3> tv{gid[slot(c, t[0])], gid[slot(c, t[1])], gid[slot(c, t[2])]};
            if (g[c].reflect) std::swap(tv[1], tv[2]);
            out.triangles.push_back(tv);
        }
    }
    for (Index i = 0; i < n; ++i)
        if (ray_interior[i]) out.slit_twins.push_back({gid[slot(1, i)], gid[slot(5, i)]});

    // boundary tags: holes 1..3 sit on the pi/3, pi, 5pi/3 axes
    const auto hole_id = [&](int c) {
        return 1 + (g[c].reflect ? (g[c].rotation_index + 2) % 3 : g[c].rotation_index);
    };
    for (int c = 0; c < 6; ++c) {
        for (const auto& be : d1.mesh.boundary_edges) {
            const int parent = be.loop_id;  // edge index of the fundamental polygon
            int tag = -1;
            if (parent >= 1 && parent <= 6) tag = hole_id(c);
            else if (parent == 8) tag = 0;
            else if (parent == 7 && (c == 1 || c == 5)) tag = 4;  // slit banks
            if (tag < 0) continue;
            out.boundary_edges.push_back(BoundaryEdge{gid[slot(c, be.a)], gid[slot(c, be.b)], tag});
        }
    }
    return out;
}

Locator::Locator(const Mesh& mesh) : mesh_(mesh) {
    lo_ = hi_ = mesh.nodes.empty() ? Point2{0, 0} : mesh.nodes[0];
    for (const auto& p : mesh.nodes) {
        lo_ = lo_.cwiseMin(p);
        hi_ = hi_.cwiseMax(p);
    }
    const Real diag = std::max((hi_ - lo_).norm(), Real(1e-9));
    const int target = static_cast<int>(std::sqrt(static_cast<Real>(mesh.triangles.size()) + 1));
    const int res = std::clamp(target, 1, 1024);
    cell_ = diag / res;
    nx_ = std::max(1, static_cast<int>((hi_.x() - lo_.x()) / cell_) + 1);
    ny_ = std::max(1, static_cast<int>((hi_.y() - lo_.y()) / cell_) + 1);
    cells_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (Index t = 0; t < static_cast<Index>(mesh.triangles.size()); ++t) {
        Point2 tlo = mesh.nodes[mesh.triangles[t][0]], thi = tlo;
        for (const Index v : mesh.triangles[t]) {
            tlo = tlo.cwiseMin(mesh.nodes[v]);
            thi = thi.cwiseMax(mesh.nodes[v]);
        }
        const int x0 = std::clamp(static_cast<int>((tlo.x() - lo_.x()) / cell_), 0, nx_ - 1);
        const int x1 = std::clamp(static_cast<int>((thi.x() - lo_.x()) / cell_), 0, nx_ - 1);
        const int y0 = std::clamp(static_cast<int>((tlo.y() - lo_.y()) / cell_), 0, ny_ - 1);
        const int y1 = std::clamp(static_cast<int>((thi.y() - lo_.y()) / cell_), 0, ny_ - 1);
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x)
                cells_[static_cast<std::size_t>(y) * nx_ + x].push_back(t);
    }
}

Location Locator::locate(const Point2& p) const {
    Location best;
    if (mesh_.nodes.empty()) return best;
    const int x = static_cast<int>((p.x() - lo_.x()) / cell_);
    const int y = static_cast<int>((p.y() - lo_.y()) / cell_);
    if (x < 0 || x >= nx_ || y < 0 || y >= ny_) return best;
    for (const Index t : cells_[static_cast<std::size_t>(y) * nx_ + x]) {
        const auto& tv = mesh_.triangles[t];
        const Point2 &a = mesh_.nodes[tv[0]], &b = mesh_.nodes[tv[1]], &c = mesh_.nodes[tv[2]];
        const Real area2 = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
        if (area2 <= 0) continue;
        // signed perpendicular distances to the three edges
        const Real d0 = ((c - b).x() * (p - b).y() - (c - b).y() * (p - b).x()) / (c - b).norm();
        const Real d1 = ((a - c).x() * (p - c).y() - (a - c).y() * (p - c).x()) / (a - c).norm();
        const Real d2 = ((b - a).x() * (p - a).y() - (b - a).y() * (p - a).x()) / (b - a).norm();
        if (d0 < -1e-12 || d1 < -1e-12 || d2 < -1e-12) continue;
        if (best.found && t >= best.triangle) continue;
        const Real w0 = std::max(d0, 0.0) * (c - b).norm();
        const Real w1 = std::max(d1, 0.0) * (a - c).norm();
        const Real w2 = std::max(d2, 0.0) * (b - a).norm();
        const Real sum = w0 + w1 + w2;
        best.found = true;
        best.triangle = t;
        if (sum > 0)
            best.barycentric = {w0 / sum, w1 / sum, w2 / sum};
        else
            best.barycentric = {1.0, 0.0, 0.0};
    }
    return best;
}

Location locate(const Mesh& mesh, const Point2& p) { return Locator(mesh).locate(p); }

TopologyReport topology_report(const Mesh& mesh) {
    TopologyReport rep;
    rep.vertex_count = static_cast<Index>(mesh.nodes.size());
    rep.triangle_count = static_cast<Index>(mesh.triangles.size());

    std::unordered_set<std::uint64_t> edges;
    Real emin = std::numeric_limits<Real>::infinity(), emax = 0.0;
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            const Index a = t[i], b = t[(i + 1) % 3];
            if (edges.insert(ekey(a, b)).second) {
                const Real len = (mesh.nodes[a] - mesh.nodes[b]).norm();
                emin = std::min(emin, len);
                emax = std::max(emax, len);
            }
        }
    }
    rep.edge_count = static_cast<Index>(edges.size());
    rep.euler_characteristic = rep.vertex_count - rep.edge_count + rep.triangle_count;
    rep.min_edge_length = emin;
    rep.max_edge_length = emax;

    UnionFind uf(mesh.nodes.size());
    std::unordered_set<std::uint64_t> bedges;
    for (const auto& e : mesh.boundary_edges) {
        uf.unite(e.a, e.b);
        bedges.insert(ekey(e.a, e.b));
    }
    std::unordered_set<Index> roots;
    for (const auto& e : mesh.boundary_edges) roots.insert(uf.find(e.a));
    rep.boundary_components = static_cast<int>(roots.size());

    Real amin = 180.0, amin_unpinched = 180.0;
    for (const auto& t : mesh.triangles) {
        Real tri_min = 180.0;
        int vmin = 0;
        for (int i = 0; i < 3; ++i) {
            const Point2 u = mesh.nodes[t[(i + 1) % 3]] - mesh.nodes[t[i]];
            const Point2 v = mesh.nodes[t[(i + 2) % 3]] - mesh.nodes[t[i]];
            const Real ang =
                std::atan2(std::abs(u.x() * v.y() - u.y() * v.x()), u.dot(v)) * 180.0 / M_PI;
            if (ang < tri_min) {
                tri_min = ang;
                vmin = i;
            }
        }
        amin = std::min(amin, tri_min);
        const bool wedged = bedges.count(ekey(t[vmin], t[(vmin + 1) % 3])) &&
                            bedges.count(ekey(t[vmin], t[(vmin + 2) % 3]));
        if (!wedged) amin_unpinched = std::min(amin_unpinched, tri_min);
    }
    rep.min_angle_deg = amin;
    rep.min_angle_unpinched_deg = amin_unpinched;
    return rep;
}

}  // namespace hotspot::meshing
