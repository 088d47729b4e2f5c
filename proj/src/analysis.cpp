#include "hotspot/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace hotspot::analysis {

using geometry::DomainSpec;
using meshing::Mesh;

Real lemma1_bound(const DomainSpec& spec, const Mesh& mesh, const SparseMatrix& K,
                  const SparseMatrix& M) {
    if (!(spec.epsilon < 1.0 / 1600.0))
        throw ParameterError("lemma1_bound requires epsilon < 1/1600");
    const auto f1 = fem::interpolate(mesh, [&](const Point2& p) {
        return geometry::detail::test_function_unchecked(spec, geometry::TestFunctionKind::F1, p,
                                                         0, 0);
    });
    const auto f2 = fem::interpolate(mesh, [&](const Point2& p) {
        return geometry::detail::test_function_unchecked(spec, geometry::TestFunctionKind::F2, p,
                                                         0, 0);
    });
    const Real i1 = fem::integrate(mesh, f1);
    const Real i2 = fem::integrate(mesh, f2);
    if (i1 == 0.0 || i2 == 0.0) throw AnalysisError("test-function integral vanished");
    Vector f = f1 / i1 - f2 / i2;
    const Vector ones = Vector::Ones(f.size());
    const Vector m_ones = M * ones;
    f -= (m_ones.dot(f) / m_ones.dot(ones)) * ones;  // discrete mean removal
    return fem::rayleigh_quotient(K, M, f);
}

namespace {

std::uint64_t ekey(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

inline Real effective(Real x) { return x == 0.0 ? 1e-300 : x; }  // zeros count as positive

}  // namespace

NodalCurve nodal_curves(const Mesh& mesh, const Vector& phi) {
    if (phi.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw ParameterError("nodal_curves: dimension mismatch");
    const Real scale = phi.cwiseAbs().maxCoeff();
    NodalCurve out;
    if (scale == 0.0) return out;

    struct Crossing {
        Point2 p;
        Real h;
        std::vector<Index> tris;
    };
    std::unordered_map<std::uint64_t, Crossing> crossings;
    std::unordered_map<Index, std::vector<std::uint64_t>> tri_cross;

    for (Index t = 0; t < static_cast<Index>(mesh.triangles.size()); ++t) {
        const auto& tv = mesh.triangles[t];
        if (std::abs(phi[tv[0]]) <= 1e-12 * scale && std::abs(phi[tv[1]]) <= 1e-12 * scale &&
            std::abs(phi[tv[2]]) <= 1e-12 * scale)
            throw AnalysisError("nodal_curves: field vanishes on an entire triangle");
        for (int i = 0; i < 3; ++i) {
            const Index a = tv[i], b = tv[(i + 1) % 3];
            const Real fa = effective(phi[a]), fb = effective(phi[b]);
            if ((fa > 0) == (fb > 0)) continue;
            const std::uint64_t key = ekey(a, b);
            auto it = crossings.find(key);
            if (it == crossings.end()) {
                const Real t01 = fa / (fa - fb);
                Crossing c;
                c.p = mesh.nodes[a] + t01 * (mesh.nodes[b] - mesh.nodes[a]);
                c.h = (mesh.nodes[b] - mesh.nodes[a]).norm();
                it = crossings.emplace(key, std::move(c)).first;
            }
            it->second.tris.push_back(t);
            tri_cross[t].push_back(key);
        }
    }

    // each triangle with two crossed edges contributes one curve segment
    std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, Index>>> graph;
    for (const auto& [t, keys] : tri_cross) {
        if (keys.size() != 2) continue;  // zero-vertex degeneracies can give 1 or 3
        graph[keys[0]].push_back({keys[1], t});
        graph[keys[1]].push_back({keys[0], t});
    }

    std::unordered_map<std::uint64_t, char> used;
    // deterministic start order: smallest edge key, open chains before loops
    std::vector<std::uint64_t> order;
    for (const auto& [k, adj] : graph) order.push_back(k);
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
        const std::size_t da = graph[a].size(), db = graph[b].size();
        if ((da <= 1) != (db <= 1)) return da <= 1;
        return a < b;
    });
    for (const std::uint64_t start : order) {
        if (used[start]) continue;
        std::vector<Point2> poly;
        std::vector<Real> hs;
        std::uint64_t cur = start, prev = 0;
        bool has_prev = false;
        while (true) {
            used[cur] = 1;
            poly.push_back(crossings[cur].p);
            hs.push_back(crossings[cur].h);
            std::uint64_t next = 0;
            bool found = false;
            for (const auto& [nb, t] : graph[cur]) {
                if (used[nb] || (has_prev && nb == prev)) continue;
                next = nb;
                found = true;
                break;
            }
            if (!found) break;
            prev = cur;
            has_prev = true;
            cur = next;
        }
        if (poly.size() >= 1) {
            out.polylines.push_back(std::move(poly));
            out.local_h.push_back(std::move(hs));
        }
    }
    return out;
}

NodalConfinement check_nodal_in_M(const DomainSpec& spec, const NodalCurve& curve) {
    NodalConfinement r;
    if (curve.empty()) {
        r.pass = false;
        r.diagnostic = "no nodal line";
        return r;
    }
    Real worst = -std::numeric_limits<Real>::infinity();
    Real worst_raw = 0.0, worst_k6 = 0.0;
    for (std::size_t c = 0; c < curve.polylines.size(); ++c) {
        for (std::size_t i = 0; i < curve.polylines[c].size(); ++i) {
            const Point2 q = geometry::canonical_representative(curve.polylines[c][i]);
            const Real x = q.x();
            const Real outside = std::max({5.0 - x, x - 7.0, 0.0});
            const Real h = curve.local_h[c][i];
            worst = std::max(worst, outside - h);
            worst_raw = std::max(worst_raw, outside);
            worst_k6 = std::max(worst_k6, std::abs(x - 6.5));
        }
    }
    r.max_excursion = worst;
    r.max_excursion_raw = worst_raw;
    r.max_excursion_from_k6 = worst_k6;
    r.pass = worst <= 0.0;
    return r;
}

int nodal_domain_count(const Mesh& mesh, const Vector& phi) {
    if (phi.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw ParameterError("nodal_domain_count: dimension mismatch");
    const Real scale = phi.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0;
    const Index n = static_cast<Index>(mesh.nodes.size());
    std::vector<Index> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    const auto find = [&](Index x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const auto active = [&](Index v) { return std::abs(phi[v]) > 1e-12 * scale; };
    for (const auto& t : mesh.triangles) {
        for (int i = 0; i < 3; ++i) {
            const Index a = t[i], b = t[(i + 1) % 3];
            if (!active(a) || !active(b)) continue;
            if ((phi[a] > 0) != (phi[b] > 0)) continue;
            const Index ra = find(a), rb = find(b);
            if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
        }
    }
    std::unordered_map<Index, char> roots;
    for (Index v = 0; v < n; ++v)
        if (active(v)) roots[find(v)] = 1;
    return static_cast<int>(roots.size());
}

SimplicityGap simplicity_gap(const std::vector<EigenPair>& eigs, Real err_est) {
    if (eigs.size() < 3) throw ParameterError("simplicity_gap needs at least 3 eigenpairs");
    SimplicityGap g;
    g.gap = eigs[2].value - eigs[1].value;
    g.relative_gap = g.gap / std::max(std::abs(eigs[1].value), 1e-300);
    g.pass = g.gap > 10.0 * err_est;
    return g;
}

namespace {

// integral of the P1 field over the disc B(0, 1/10), by recursive subdivision
Real disc_integral(const Mesh& mesh, const Vector& phi) {
    const Real r2 = 0.01;
    const auto inside = [&](const Point2& p) { return p.squaredNorm() <= r2; };
    struct Sub {
        Point2 a, b, c;
        Real fa, fb, fc;
        int depth;
    };
    Real total = 0.0;
    for (Index t = 0; t < static_cast<Index>(mesh.triangles.size()); ++t) {
        const auto& tv = mesh.triangles[t];
        const Point2 &pa = mesh.nodes[tv[0]], &pb = mesh.nodes[tv[1]], &pc = mesh.nodes[tv[2]];
        // cheap reject: triangle entirely outside a bounding box of the disc
        if (std::min({pa.x(), pb.x(), pc.x()}) > 0.1 || std::max({pa.x(), pb.x(), pc.x()}) < -0.1 ||
            std::min({pa.y(), pb.y(), pc.y()}) > 0.1 || std::max({pa.y(), pb.y(), pc.y()}) < -0.1)
            continue;
        std::vector<Sub> stack{{pa, pb, pc, phi[tv[0]], phi[tv[1]], phi[tv[2]], 0}};
        while (!stack.empty()) {
            const Sub s = stack.back();
            stack.pop_back();
            const bool ia = inside(s.a), ib = inside(s.b), ic = inside(s.c);
            const Real area =
                0.5 * std::abs((s.b - s.a).x() * (s.c - s.a).y() - (s.b - s.a).y() * (s.c - s.a).x());
            if (ia && ib && ic) {
                total += area * (s.fa + s.fb + s.fc) / 3.0;
                continue;
            }
            if (s.depth >= 5) {
                if (inside((s.a + s.b + s.c) / 3.0)) total += area * (s.fa + s.fb + s.fc) / 3.0;
                continue;
            }
            if (!ia && !ib && !ic && !inside((s.a + s.b + s.c) / 3.0) && s.depth > 0) continue;
            const Point2 mab = 0.5 * (s.a + s.b), mbc = 0.5 * (s.b + s.c), mca = 0.5 * (s.c + s.a);
            const Real fab = 0.5 * (s.fa + s.fb), fbc = 0.5 * (s.fb + s.fc),
                       fca = 0.5 * (s.fc + s.fa);
            stack.push_back({s.a, mab, mca, s.fa, fab, fca, s.depth + 1});
            stack.push_back({mab, s.b, mbc, fab, s.fb, fbc, s.depth + 1});
            stack.push_back({mca, mbc, s.c, fca, fbc, s.fc, s.depth + 1});
            stack.push_back({mab, mbc, mca, fab, fbc, fca, s.depth + 1});
        }
    }
    return total;
}

}  // namespace

Vector sign_normalize(const Mesh& mesh, const Vector& phi) {
    const Real c2 = disc_integral(mesh, phi);
    const Real scale = phi.norm();
    if (std::abs(c2) <= 1e-10 * scale)
        throw AnalysisError("sign normalization is ambiguous: disc integral too close to zero");
    return c2 > 0 ? phi : Vector(-phi);
}

ExtremumReport extremum_report(const Mesh& mesh, const Vector& phi) {
    ExtremumReport r;
    Index argmax = 0;
    for (Index v = 1; v < static_cast<Index>(mesh.nodes.size()); ++v)
        if (phi[v] > phi[argmax]) argmax = v;
    r.argmax_node = argmax;
    r.argmax = mesh.nodes[argmax];
    r.max_value = phi[argmax];
    r.interior = !mesh.node_on_boundary(argmax);
    Real bmax = -std::numeric_limits<Real>::infinity();
    for (Index v = 0; v < static_cast<Index>(mesh.nodes.size()); ++v)
        if (mesh.node_on_boundary(v)) bmax = std::max(bmax, phi[v]);
    r.max_boundary_value = bmax;
    r.margin = r.max_value - bmax;
    const auto loc = meshing::locate(mesh, Point2{0.0, 0.0});
    if (loc.found) {
        const auto& tv = mesh.triangles[loc.triangle];
        r.value_at_origin = loc.barycentric[0] * phi[tv[0]] + loc.barycentric[1] * phi[tv[1]] +
                            loc.barycentric[2] * phi[tv[2]];
    }
    return r;
}

Real symmetry_residual(const Mesh& mesh, const Vector& phi, Index* locate_failures) {
    const meshing::Locator locator(mesh);
    const Real scale = phi.cwiseAbs().maxCoeff();
    if (scale == 0.0) {
        if (locate_failures) *locate_failures = 0;
        return 0.0;
    }
    Real worst = 0.0;
    Index failures = 0;
    const auto& g = geometry::group();
    for (Index v = 0; v < static_cast<Index>(mesh.nodes.size()); ++v) {
        for (int s = 1; s < 6; ++s) {
            const Point2 q = geometry::apply_symmetry(g[s], mesh.nodes[v]);
            const auto loc = locator.locate(q);
            if (!loc.found) {
                ++failures;
                worst = std::max(worst, 2.0 * scale);
                continue;
            }
            const auto& tv = mesh.triangles[loc.triangle];
            const Real val = loc.barycentric[0] * phi[tv[0]] + loc.barycentric[1] * phi[tv[1]] +
                             loc.barycentric[2] * phi[tv[2]];
            worst = std::max(worst, std::abs(val - phi[v]));
        }
    }
    if (locate_failures) *locate_failures = failures;
    return worst / scale;
}

ConeCheck cone_monotonicity_check(const DomainSpec& spec, const Mesh& mesh, const Vector& phi,
                                  Index n_samples, Real tol, std::uint64_t seed) {
    const auto [alpha1, alpha2] = geometry::angle_bounds(spec);
    const Real lo = alpha2 - M_PI / 2.0 + tol;
    const Real hi = alpha1 + M_PI / 2.0 - tol;
    const meshing::Locator locator(mesh);
    const geometry::BuiltDomain dom(spec);
    const Real scale = phi.cwiseAbs().maxCoeff();

    // deterministic pseudo-random samples in the fundamental polygon
    std::uint64_t state = seed ? seed : 1;
    const auto next_uniform = [&]() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        return static_cast<Real>(state >> 11) * 0x1.0p-53;
    };
    const auto a = geometry::vertices(spec);
    const Real xmax = a[9].x();
    const Real ymax = a[8].y() * (18.0 / 16.0);
    const auto sample_d1 = [&]() {
        for (int tries = 0; tries < 4096; ++tries) {
            const Point2 p{next_uniform() * xmax, next_uniform() * ymax};
            if (p.y() > p.x() * std::sqrt(3.0)) continue;  // outside the sector
            const Point2 q = geometry::canonical_representative(p);
            if ((q - p).norm() > 1e-9) continue;
            if (dom.contains(p)) return p;
        }
        throw AnalysisError("cone check: sampling the fundamental region failed");
    };
    const auto eval = [&](const Point2& p, Real& out) {
        const auto loc = locator.locate(p);
        if (!loc.found) return false;
        const auto& tv = mesh.triangles[loc.triangle];
        out = loc.barycentric[0] * phi[tv[0]] + loc.barycentric[1] * phi[tv[1]] +
              loc.barycentric[2] * phi[tv[2]];
        return true;
    };

    ConeCheck r;
    while (r.total < n_samples) {
        const Point2 x = sample_d1();
        const Point2 y = sample_d1();
        const Point2 d = y - x;
        if (d.norm() < 1e-12) continue;
        const Real ang = std::atan2(d.y(), d.x());
        if (!(ang > lo && ang < hi)) continue;
        Real fx, fy;
        if (!eval(x, fx) || !eval(y, fy)) continue;
        ++r.total;
        const Real increase = fy - fx;
        if (fx < fy - tol * scale) {
            ++r.violations;
            if (increase > r.worst) {
                r.worst = increase;
                r.worst_from = x;
                r.worst_to = y;
            }
        }
    }
    return r;
}

std::vector<SweepRow> epsilon_sweep(const std::vector<Real>& epsilons,
                                    const meshing::SizeField& size,
                                    const meshing::TriangulateOptions& mesh_opts,
                                    const fem::SolverOptions& solver) {
    std::vector<Real> eps = epsilons;
    std::sort(eps.begin(), eps.end(), std::greater<Real>());
    std::vector<SweepRow> rows;
    for (const Real e : eps) {
        SweepRow row;
        row.epsilon = e;
        try {
            const DomainSpec spec(e);
            spec.validate();
            if (!(e < 1.0 / 1600.0))
                throw ParameterError("sweep rows require epsilon < 1/1600 for the bound");
            meshing::TriangulateOptions op = mesh_opts;
            op.seeds.clear();  // re-derive per epsilon
            const auto mesh = meshing::triangulate(spec, size, op);
            const auto [K, M] = fem::assemble(mesh);
            fem::SolverOptions so = solver;
            so.k = std::max(so.k, 3);
            const auto eigs = fem::smallest_eigenpairs(K, M, so);
            row.mu2 = eigs[1].value;
            row.mu3 = eigs[2].value;
            row.bound = lemma1_bound(spec, mesh, K, M);
            const auto curve = nodal_curves(mesh, eigs[1].vector);
            row.nodal_pass = check_nodal_in_M(spec, curve).pass;
            row.margin = row.bound - row.mu2;
            row.ok = true;
        } catch (const std::exception& ex) {
            row.ok = false;
            row.error = ex.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace hotspot::analysis
