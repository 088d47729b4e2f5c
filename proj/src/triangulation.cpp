#include "predicates.hpp"
#include "triangulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace hotspot::meshing::detail {

namespace {

constexpr int kNone = -1;

std::uint64_t edge_key(Index a, Index b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct SubSeg {
    Index a, b;
    int parent;  // input edge id
    bool alive = true;
};

struct Tri {
    std::array<Index, 3> v;
    std::array<int, 3> nb;  // neighbor opposite v[i]; kNone on the hull
    bool alive = true;
    char region = -1;  // -1 unknown, 0 outside, 1 inside
};

struct SizeEval {
    const SizeField* size;
    const std::vector<SizeSeed>* seeds;

    Real operator()(const Point2& p) const {
        Real h = size->h_max;
        const Real lip = size->lipschitz();
        for (const auto& s : *seeds) h = std::min(h, s.h + lip * (p - s.at).norm());
        return std::max(h, 1e-12);
    }
};

class Triangulator {
  public:
    Triangulator(const std::vector<Point2>& points,
                 const std::vector<std::array<Index, 2>>& segments,
                 const std::vector<int>& segment_loop, const geometry::PolygonWithSlit& shape,
                 const SizeField& size, const TriangulateOptions& opts)
        : shape_(shape), opts_(opts), size_eval_{&size, &opts.seeds} {
        size.validate();
        if (opts.min_angle_deg < 0.0 || opts.min_angle_deg >= 34.0)
            throw ParameterError("min angle target must lie in [0, 34) degrees");
        quality_b_ = opts.min_angle_deg > 0.0
                         ? 1.0 / (2.0 * std::sin(opts.min_angle_deg * M_PI / 180.0))
                         : std::numeric_limits<Real>::infinity();
        build_input(points, segments, segment_loop);
    }

    TriangulationResult run() {
        insert_input_points();
        make_conforming();
        classify_regions();
        refine();
        return finalize();
    }

  private:
    // --- input ---------------------------------------------------------
    void build_input(const std::vector<Point2>& points,
                     const std::vector<std::array<Index, 2>>& segments,
                     const std::vector<int>& segment_loop) {
        if (points.size() < 3) throw MeshError("degenerate input: fewer than 3 points");
        n_input_ = static_cast<Index>(points.size());
        pts_ = points;
        for (const auto& p : pts_)
            if (!is_finite(p)) throw MeshError("degenerate input: non-finite point");
        for (std::size_t i = 0; i < points.size(); ++i)
            for (std::size_t j = i + 1; j < points.size(); ++j)
                if ((points[i] - points[j]).norm() < 1e-14)
                    throw MeshError("degenerate input: duplicate points");
        input_edges_.assign(segments.begin(), segments.end());
        input_edge_loop_ = segment_loop;
        for (const auto& s : segments) {
            if (s[0] == s[1]) throw MeshError("degenerate input: zero-length segment");
            if ((pts_[s[0]] - pts_[s[1]]).norm() < 1e-14)
                throw MeshError("degenerate input: zero-length segment");
        }
        // proper crossings between input segments are construction errors
        for (std::size_t i = 0; i < segments.size(); ++i) {
            for (std::size_t j = i + 1; j < segments.size(); ++j) {
                if (crosses(segments[i], segments[j]))
                    throw MeshError("input segments cross: loops self-intersect");
            }
        }
        node_parent_edge_.assign(pts_.size(), kNone);
        node_input_vertex_.resize(pts_.size());
        for (Index i = 0; i < n_input_; ++i) node_input_vertex_[i] = i;

        // smallest angle between input segments at each input vertex
        corner_angle_.assign(pts_.size(), 10.0);
        std::vector<std::vector<Point2>> dirs(pts_.size());
        for (const auto& s : input_edges_) {
            dirs[s[0]].push_back((pts_[s[1]] - pts_[s[0]]).normalized());
            dirs[s[1]].push_back((pts_[s[0]] - pts_[s[1]]).normalized());
        }
        for (Index v = 0; v < n_input_; ++v) {
            for (std::size_t i = 0; i < dirs[v].size(); ++i)
                for (std::size_t j = i + 1; j < dirs[v].size(); ++j)
                    corner_angle_[v] = std::min(
                        corner_angle_[v],
                        std::acos(std::clamp(dirs[v][i].dot(dirs[v][j]), -1.0, 1.0)));
        }
    }

    bool crosses(const std::array<Index, 2>& s, const std::array<Index, 2>& t) const {
        if (s[0] == t[0] || s[0] == t[1] || s[1] == t[0] || s[1] == t[1]) return false;
        const Point2 &a = pts_[s[0]], &b = pts_[s[1]], &c = pts_[t[0]], &d = pts_[t[1]];
        const int d1 = orient2d(a, b, c), d2 = orient2d(a, b, d);
        const int d3 = orient2d(c, d, a), d4 = orient2d(c, d, b);
        return d1 * d2 < 0 && d3 * d4 < 0;
    }

    // --- Delaunay kernel -------------------------------------------------
    void insert_input_points() {
        Point2 lo = pts_[0], hi = pts_[0];
        for (const auto& p : pts_) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Real d = std::max((hi - lo).norm(), Real(1));
        const Point2 c = 0.5 * (lo + hi);
        scale_ = d;
        super_ = static_cast<Index>(pts_.size());
        pts_.push_back(c + Point2(-12 * d, -8 * d));
        pts_.push_back(c + Point2(12 * d, -8 * d));
        pts_.push_back(c + Point2(0, 14 * d));
        node_parent_edge_.resize(pts_.size(), kNone);
        node_input_vertex_.resize(pts_.size(), kNone);
        v2t_.assign(pts_.size(), kNone);
        const int t0 = new_tri(super_, super_ + 1, super_ + 2, kNone, kNone, kNone);
        (void)t0;
        int hint = 0;
        for (Index i = 0; i < n_input_; ++i) hint = insert_point(i, hint);
    }

    int new_tri(Index a, Index b, Index c, int na, int nb, int nc) {
        tris_.push_back(Tri{{a, b, c}, {na, nb, nc}, true, -1});
        const int id = static_cast<int>(tris_.size()) - 1;
        v2t_[a] = v2t_[b] = v2t_[c] = id;
        return id;
    }

    void set_neighbor(int t, Index opp_vertex_index, int n) { tris_[t].nb[opp_vertex_index] = n; }

    void relink(int t, int old_nb, int new_nb) {
        if (t == kNone) return;
        for (int i = 0; i < 3; ++i)
            if (tris_[t].nb[i] == old_nb) {
                tris_[t].nb[i] = new_nb;
                return;
            }
    }

    int index_of(int t, Index v) const {
        for (int i = 0; i < 3; ++i)
            if (tris_[t].v[i] == v) return i;
        return kNone;
    }

    struct Hit {
        int tri;
        int kind;   // 0 inside, 1 on edge, 2 on vertex
        int where;  // edge index (opposite vertex) or vertex index
    };

    Hit locate(const Point2& p, int hint) const {
        int cur = hint;
        if (cur == kNone || !tris_[cur].alive) {
            for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
                if (tris_[i].alive) {
                    cur = i;
                    break;
                }
        }
        int prev = kNone;
        for (int step = 0; step < 4 * static_cast<int>(tris_.size()) + 16; ++step) {
            const Tri& t = tris_[cur];
            int o[3];
            for (int i = 0; i < 3; ++i)
                o[i] = orient2d(pts_[t.v[(i + 1) % 3]], pts_[t.v[(i + 2) % 3]], p);
            int next = kNone;
            for (int i = 0; i < 3; ++i) {
                if (o[i] < 0 && t.nb[i] != kNone && t.nb[i] != prev) {
                    next = t.nb[i];
                    break;
                }
            }
            if (next == kNone) {
                for (int i = 0; i < 3; ++i)
                    if (o[i] < 0 && t.nb[i] != kNone) {
                        next = t.nb[i];
                        break;
                    }
            }
            if (next != kNone) {
                prev = cur;
                cur = next;
                continue;
            }
            // inside or on boundary of cur
            int zeros = 0, zedge = kNone;
            for (int i = 0; i < 3; ++i)
                if (o[i] == 0) {
                    ++zeros;
                    zedge = i;
                }
            if (zeros == 0) return {cur, 0, 0};
            if (zeros == 1) return {cur, 1, zedge};
            for (int i = 0; i < 3; ++i)
                if (o[(i + 1) % 3] == 0 && o[(i + 2) % 3] == 0) return {cur, 2, i};
            return {cur, 2, 0};
        }
        throw MeshError("point location failed to terminate");
    }

    bool is_constrained(Index a, Index b) const { return seg_map_.count(edge_key(a, b)) > 0; }

    // insert vertex id w (coordinates already in pts_) near hint; returns a tri id
    int insert_point(Index w, int hint) {
        const Hit h = locate(pts_[w], hint);
        if (h.kind == 2) throw MeshError("duplicate point insertion");
        if (h.kind == 1) return insert_on_edge(h.tri, h.where, w);
        return insert_in_tri(h.tri, w);
    }

    int insert_in_tri(int t, Index w) {
        const Tri old = tris_[t];
        tris_[t].alive = false;
        const Index a = old.v[0], b = old.v[1], c = old.v[2];
        const int t0 = new_tri(a, b, w, kNone, kNone, old.nb[2]);
        const int t1 = new_tri(b, c, w, kNone, kNone, old.nb[0]);
        const int t2 = new_tri(c, a, w, kNone, kNone, old.nb[1]);
        tris_[t0].nb[0] = t1;
        tris_[t0].nb[1] = t2;
        tris_[t1].nb[0] = t2;
        tris_[t1].nb[1] = t0;
        tris_[t2].nb[0] = t0;
        tris_[t2].nb[1] = t1;
        relink(old.nb[2], t, t0);
        relink(old.nb[0], t, t1);
        relink(old.nb[1], t, t2);
        inherit_region(t0, old.region);
        inherit_region(t1, old.region);
        inherit_region(t2, old.region);
        legalize(t0, 2);
        legalize(t1, 2);
        legalize(t2, 2);
        return v2t_[w];
    }

    int insert_on_edge(int t, int i, Index w) {
        const int u = tris_[t].nb[i];
        const Index va = tris_[t].v[(i + 1) % 3];
        const Index vb = tris_[t].v[(i + 2) % 3];
        const Index vc = tris_[t].v[i];
        split_constraint_records(va, vb, w);
        tris_[t].alive = false;
        const char rt = tris_[t].region;
        const int t0 = new_tri(vc, va, w, kNone, kNone, tris_[t].nb[(i + 2) % 3]);
        const int t1 = new_tri(vb, vc, w, kNone, kNone, tris_[t].nb[(i + 1) % 3]);
        tris_[t0].nb[0] = kNone;  // across (va,w): filled below
        tris_[t0].nb[1] = t1;
        tris_[t1].nb[0] = t0;
        tris_[t1].nb[1] = kNone;  // across (w,vb)
        relink(tris_[t0].nb[2], t, t0);
        relink(tris_[t1].nb[2], t, t1);
        inherit_region(t0, rt);
        inherit_region(t1, rt);
        if (u != kNone) {
            const int j = [&] {
                for (int k = 0; k < 3; ++k)
                    if (tris_[u].nb[k] == t) return k;
                throw MeshError("adjacency corrupted");
            }();
            const Index vd = tris_[u].v[j];
            const char ru = tris_[u].region;
            tris_[u].alive = false;
            const int u0 = new_tri(va, vd, w, kNone, kNone, tris_[u].nb[(j + 1) % 3]);
            const int u1 = new_tri(vd, vb, w, kNone, kNone, tris_[u].nb[(j + 2) % 3]);
            tris_[u0].nb[0] = u1;
            tris_[u0].nb[1] = t0;
            tris_[u1].nb[0] = t1;
            tris_[u1].nb[1] = u0;
            tris_[t0].nb[0] = u0;
            tris_[t1].nb[1] = u1;
            relink(tris_[u0].nb[2], u, u0);
            relink(tris_[u1].nb[2], u, u1);
            inherit_region(u0, ru);
            inherit_region(u1, ru);
            legalize(u0, 2);
            legalize(u1, 2);
        }
        legalize(t0, 2);
        legalize(t1, 2);
        return v2t_[w];
    }

    void inherit_region(int t, char r) {
        tris_[t].region = r;
        if (r == 1) queue_tri(t);
    }

    void legalize(int t, int i) {
        struct Item {
            int t, i;
        };
        std::vector<Item> stack{{t, i}};
        while (!stack.empty()) {
            const auto [ct, ci] = stack.back();
            stack.pop_back();
            if (!tris_[ct].alive) continue;
            const int u = tris_[ct].nb[ci];
            if (u == kNone || !tris_[u].alive) continue;
            const Index va = tris_[ct].v[(ci + 1) % 3];
            const Index vb = tris_[ct].v[(ci + 2) % 3];
            if (is_constrained(va, vb)) continue;
            const int j = [&] {
                for (int k = 0; k < 3; ++k)
                    if (tris_[u].nb[k] == ct) return k;
                throw MeshError("adjacency corrupted");
            }();
            const Index vc = tris_[ct].v[ci];
            const Index vd = tris_[u].v[j];
            if (incircle(pts_[vc], pts_[va], pts_[vb], pts_[vd]) <= 0) continue;
            // flip: (vc,va,vb)+(vd,vb,va) -> (vc,va,vd)+(vc,vd,vb)
            const int nca = tris_[ct].nb[(ci + 2) % 3];
            const int ncb = tris_[ct].nb[(ci + 1) % 3];
            const int nda = tris_[u].nb[(j + 1) % 3];
            const int ndb = tris_[u].nb[(j + 2) % 3];
            const char r1 = tris_[ct].region, r2 = tris_[u].region;
            tris_[ct].alive = false;
            tris_[u].alive = false;
            const int f0 = new_tri(vc, va, vd, nda, kNone, nca);
            const int f1 = new_tri(vc, vd, vb, ndb, ncb, kNone);
            tris_[f0].nb[1] = f1;
            tris_[f1].nb[2] = f0;
            relink(nca, ct, f0);
            relink(ncb, ct, f1);
            relink(nda, u, f0);
            relink(ndb, u, f1);
            inherit_region(f0, r1 != -1 ? r1 : r2);
            inherit_region(f1, r1 != -1 ? r1 : r2);
            stack.push_back({f0, 0});
            stack.push_back({f0, 2});
            stack.push_back({f1, 0});
            stack.push_back({f1, 1});
        }
    }

    // --- constraints ------------------------------------------------------
    void add_subseg(Index a, Index b, int parent) {
        subsegs_.push_back(SubSeg{a, b, parent, true});
        const int id = static_cast<int>(subsegs_.size()) - 1;
        seg_map_[edge_key(a, b)] = id;
        queue_seg(id);
    }

    void split_constraint_records(Index a, Index b, Index w) {
        const auto it = seg_map_.find(edge_key(a, b));
        if (it == seg_map_.end()) return;
        const int id = it->second;
        const int parent = subsegs_[id].parent;
        subsegs_[id].alive = false;
        seg_map_.erase(it);
        node_parent_edge_[w] = parent;
        add_subseg(a, w, parent);
        add_subseg(w, b, parent);
    }

    bool edge_exists(Index a, Index b) const {
        int t = v2t_[a];
        if (t == kNone) return false;
        const int start = t;
        // circulate around a
        int guard = 0;
        do {
            const int ia = index_of(t, a);
            if (ia == kNone) break;
            if (tris_[t].v[(ia + 1) % 3] == b || tris_[t].v[(ia + 2) % 3] == b) return true;
            t = tris_[t].nb[(ia + 1) % 3];
            if (++guard > 1023) break;
        } while (t != kNone && t != start);
        if (t == kNone) {  // hit the hull; circulate the other way
            t = start;
            guard = 0;
            do {
                const int ia = index_of(t, a);
                if (ia == kNone) break;
                if (tris_[t].v[(ia + 1) % 3] == b || tris_[t].v[(ia + 2) % 3] == b) return true;
                t = tris_[t].nb[(ia + 2) % 3];
                if (++guard > 1023) break;
            } while (t != kNone && t != start);
        }
        return false;
    }

    void make_conforming() {
        for (std::size_t e = 0; e < input_edges_.size(); ++e)
            add_subseg(input_edges_[e][0], input_edges_[e][1], static_cast<int>(e));
        bool changed = true;
        while (changed) {
            changed = false;
            for (int id = 0; id < static_cast<int>(subsegs_.size()); ++id) {
                if (!subsegs_[id].alive) continue;
                if (!edge_exists(subsegs_[id].a, subsegs_[id].b)) {
                    split_subseg(id);
                    changed = true;
                }
            }
        }
    }

    Point2 split_position(const SubSeg& s) const {
        const Point2& pa = pts_[s.a];
        const Point2& pb = pts_[s.b];
        const bool ca = node_input_vertex_[s.a] != kNone &&
                        corner_angle_[node_input_vertex_[s.a]] < M_PI / 3.0;
        const bool cb = node_input_vertex_[s.b] != kNone &&
                        corner_angle_[node_input_vertex_[s.b]] < M_PI / 3.0;
        // concentric-shell split off a small-angle input corner
        int corner = kNone;
        if (ca && cb)
            corner = corner_angle_[node_input_vertex_[s.a]] <= corner_angle_[node_input_vertex_[s.b]]
                         ? 0
                         : 1;
        else if (ca)
            corner = 0;
        else if (cb)
            corner = 1;
        if (corner == kNone) return 0.5 * (pa + pb);
        const Point2& from = corner == 0 ? pa : pb;
        const Point2& to = corner == 0 ? pb : pa;
        const Real len = (to - from).norm();
        const Real shell = std::exp2(std::round(std::log2(0.5 * len)));
        return from + (shell / len) * (to - from);
    }

    void split_subseg(int id) {
        if (pts_.size() >= opts_.max_points)
            throw MeshError("refinement failed: point budget exceeded before meeting targets");
        const SubSeg s = subsegs_[id];
        const Point2 mid = split_position(s);
        pts_.push_back(mid);
        node_parent_edge_.push_back(s.parent);
        node_input_vertex_.push_back(kNone);
        v2t_.push_back(kNone);
        const Index w = static_cast<Index>(pts_.size()) - 1;
        // If (a,b) is currently an edge, insert exactly on it; otherwise insert
        // wherever the point lands (conforming pass will continue).
        const Hit h = locate(mid, v2t_[s.a]);
        if (h.kind == 2) throw MeshError("refinement failed: degenerate split point");
        if (h.kind == 1)
            insert_on_edge(h.tri, h.where, w);
        else
            insert_in_tri(h.tri, w);
        if (subsegs_[id].alive) {  // insertion did not land on the subsegment records
            subsegs_[id].alive = false;
            seg_map_.erase(edge_key(s.a, s.b));
            add_subseg(s.a, w, s.parent);
            add_subseg(w, s.b, s.parent);
        }
        touch_around_vertex(w);
    }

    // --- regions ----------------------------------------------------------
    void classify_regions() {
        std::vector<int> comp(tris_.size(), -1);
        int ncomp = 0;
        std::vector<int> reps;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive || comp[t] != -1) continue;
            const int c = ncomp++;
            reps.push_back(t);
            std::vector<int> stack{t};
            comp[t] = c;
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                for (int i = 0; i < 3; ++i) {
                    const int u = tris_[cur].nb[i];
                    if (u == kNone || comp[u] != -1 || !tris_[u].alive) continue;
                    const Index a = tris_[cur].v[(i + 1) % 3];
                    const Index b = tris_[cur].v[(i + 2) % 3];
                    if (is_constrained(a, b)) continue;
                    comp[u] = c;
                    stack.push_back(u);
                }
            }
        }
        std::vector<char> inside(ncomp, 0);
        for (int c = 0; c < ncomp; ++c) {
            const Tri& t = tris_[reps[c]];
            bool has_super = false;
            for (int i = 0; i < 3; ++i) has_super |= t.v[i] >= super_;
            if (has_super) {
                inside[c] = 0;
                continue;
            }
            const Point2 cen = (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]) / 3.0;
            inside[c] = geometry::contains(shape_, cen, 0.0) ? 1 : 0;
        }
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            tris_[t].region = inside[comp[t]];
            if (tris_[t].region == 1) queue_tri(t);
        }
        for (int id = 0; id < static_cast<int>(subsegs_.size()); ++id)
            if (subsegs_[id].alive) queue_seg(id);
    }

    // --- refinement --------------------------------------------------------
    void queue_seg(int id) {
        if (id >= static_cast<int>(seg_queued_.size())) seg_queued_.resize(id + 1, 0);
        if (!seg_queued_[id]) {
            seg_queued_[id] = 1;
            seg_queue_.push_back(id);
        }
    }

    void queue_tri(int id) {
        if (id >= static_cast<int>(tri_queued_.size())) tri_queued_.resize(id + 1, 0);
        if (!tri_queued_[id]) {
            tri_queued_[id] = 1;
            tri_queue_.push_back(id);
        }
    }

    void touch_around_vertex(Index w) {
        const int start = v2t_[w];
        if (start == kNone) return;
        // enqueue the star of w (both triangles and their constrained edges)
        std::vector<int> fan;
        collect_fan(w, fan);
        for (const int t : fan) {
            if (tris_[t].region == 1) queue_tri(t);
            for (int i = 0; i < 3; ++i) {
                const Index a = tris_[t].v[(i + 1) % 3];
                const Index b = tris_[t].v[(i + 2) % 3];
                const auto it = seg_map_.find(edge_key(a, b));
                if (it != seg_map_.end()) queue_seg(it->second);
            }
        }
    }

    void collect_fan(Index w, std::vector<int>& out) const {
        const int start = v2t_[w];
        if (start == kNone || !tris_[start].alive) return;
        int t = start;
        int guard = 0;
        // walk one way
        while (t != kNone && ++guard < 2048) {
            out.push_back(t);
            const int iw = index_of(t, w);
            t = tris_[t].nb[(iw + 1) % 3];
            if (t == start) return;
        }
        // hull hit: walk the other way from start
        t = start;
        guard = 0;
        while (true) {
            const int iw = index_of(t, w);
            const int u = tris_[t].nb[(iw + 2) % 3];
            if (u == kNone || u == start || ++guard > 2048) break;
            out.push_back(u);
            t = u;
        }
    }

    bool seg_encroached_or_long(const SubSeg& s) const {
        const Point2& pa = pts_[s.a];
        const Point2& pb = pts_[s.b];
        const Point2 mid = 0.5 * (pa + pb);
        const Real r2 = (pb - pa).squaredNorm() * 0.25;
        if (std::sqrt(r2) * 2.0 > size_eval_(mid)) return true;
        // in a Delaunay triangulation it is enough to test the two apexes
        for (const Index apex : seg_apexes(s))
            if (apex != kNone && (pts_[apex] - mid).squaredNorm() < r2 * (1.0 - 1e-12))
                return true;
        return false;
    }

    std::array<Index, 2> seg_apexes(const SubSeg& s) const {
        std::array<Index, 2> out{kNone, kNone};
        std::vector<int> fan;
        collect_fan(s.a, fan);
        int n = 0;
        for (const int t : fan) {
            const int ia = index_of(t, s.a);
            const Index u = tris_[t].v[(ia + 1) % 3];
            const Index v = tris_[t].v[(ia + 2) % 3];
            if (u == s.b && n < 2) out[n++] = v;
            else if (v == s.b && n < 2) out[n++] = u;
        }
        return out;
    }

    bool tri_is_exempt(const Tri& t, int min_angle_vertex) const {
        const Index v = t.v[min_angle_vertex];
        const int iv = node_input_vertex_[v];
        if (iv == kNone) return false;
        if (corner_angle_[iv] >= 2.0 * opts_.min_angle_deg * M_PI / 180.0) return false;
        const Index a = t.v[(min_angle_vertex + 1) % 3];
        const Index b = t.v[(min_angle_vertex + 2) % 3];
        return is_constrained(v, a) && is_constrained(v, b);
    }

    void refine() {
        while (true) {
            if (!seg_queue_.empty()) {
                const int id = seg_queue_.front();
                seg_queue_.pop_front();
                seg_queued_[id] = 0;
                if (!subsegs_[id].alive) continue;
                if (seg_encroached_or_long(subsegs_[id])) split_subseg(id);
                continue;
            }
            if (tri_queue_.empty()) break;
            const int id = tri_queue_.front();
            tri_queue_.pop_front();
            tri_queued_[id] = 0;
            if (!tris_[id].alive || tris_[id].region != 1) continue;
            process_triangle(id);
        }
    }

    void process_triangle(int id) {
        const Tri& t = tris_[id];
        const Point2 &a = pts_[t.v[0]], &b = pts_[t.v[1]], &c = pts_[t.v[2]];
        const Real la = (b - c).norm(), lb = (c - a).norm(), lc = (a - b).norm();
        const Real longest = std::max({la, lb, lc});
        const Real shortest = std::min({la, lb, lc});
        const Point2 cen = (a + b + c) / 3.0;
        const Real area2 = std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
        if (area2 <= 0) return;
        const Real circumradius = la * lb * lc / (2.0 * area2);
        bool bad = longest > size_eval_(cen);
        if (!bad && circumradius / shortest > quality_b_) {
            int vmin = 0;  // vertex at the smallest angle = vertex opposite shortest edge... the
            // smallest angle is opposite the shortest edge
            if (la <= lb && la <= lc) vmin = 0;
            else if (lb <= lc) vmin = 1;
            else vmin = 2;
            if (!tri_is_exempt(t, vmin)) bad = true;
        }
        if (!bad) return;
        insert_circumcenter(id);
    }

    void insert_circumcenter(int id) {
        const Tri& t = tris_[id];
        const Point2 cc = circumcenter(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]);
        if (!is_finite(cc)) return;
        // walk from the triangle toward cc; a constrained edge in the way gets split instead
        const Point2 start = (pts_[t.v[0]] + pts_[t.v[1]] + pts_[t.v[2]]) / 3.0;
        int cur = id;
        int prev = kNone;
        for (int step = 0; step < 1 << 16; ++step) {
            int o[3];
            const Tri& tc = tris_[cur];
            for (int i = 0; i < 3; ++i)
                o[i] = orient2d(pts_[tc.v[(i + 1) % 3]], pts_[tc.v[(i + 2) % 3]], cc);
            int exit_edge = kNone;
            for (int i = 0; i < 3; ++i) {
                if (o[i] >= 0) continue;
                const Index a = tc.v[(i + 1) % 3];
                const Index b = tc.v[(i + 2) % 3];
                // only cross edges the segment (start, cc) actually straddles
                if (orient2d(start, cc, pts_[a]) * orient2d(start, cc, pts_[b]) > 0) continue;
                if (tc.nb[i] == prev) continue;
                exit_edge = i;
                break;
            }
            if (exit_edge == kNone) {
                for (int i = 0; i < 3; ++i)
                    if (o[i] < 0 && tc.nb[i] != prev) {
                        exit_edge = i;
                        break;
                    }
            }
            if (exit_edge == kNone) break;  // cc in cur (or on its boundary)
            const Index a = tc.v[(exit_edge + 1) % 3];
            const Index b = tc.v[(exit_edge + 2) % 3];
            const auto it = seg_map_.find(edge_key(a, b));
            if (it != seg_map_.end()) {
                if ((pts_[a] - pts_[b]).norm() > 1e-9 * scale_) {
                    split_subseg(it->second);
                    queue_tri(id);
                }
                return;
            }
            if (tc.nb[exit_edge] == kNone) return;  // heading out of the hull
            prev = cur;
            cur = tc.nb[exit_edge];
        }
        // reject circumcenters that encroach a subsegment; split those instead
        bool encroaches = false;
        for (int sid = 0; sid < static_cast<int>(subsegs_.size()); ++sid) {
            const SubSeg& s = subsegs_[sid];
            if (!s.alive) continue;
            const Point2 mid = 0.5 * (pts_[s.a] + pts_[s.b]);
            const Real r2 = (pts_[s.b] - pts_[s.a]).squaredNorm() * 0.25;
            if ((cc - mid).squaredNorm() < r2 * (1.0 - 1e-12)) {
                if ((pts_[s.a] - pts_[s.b]).norm() > 1e-9 * scale_) {
                    queue_seg(sid);
                    encroaches = true;
                }
            }
        }
        if (encroaches) {
            queue_tri(id);
            return;
        }
        if (pts_.size() >= opts_.max_points)
            throw MeshError("refinement failed: point budget exceeded before meeting targets");
        pts_.push_back(cc);
        node_parent_edge_.push_back(kNone);
        node_input_vertex_.push_back(kNone);
        v2t_.push_back(kNone);
        const Index w = static_cast<Index>(pts_.size()) - 1;
        const Hit h = locate(cc, cur);
        if (h.kind == 2) {  // coincides with an existing vertex: drop it
            pts_.pop_back();
            node_parent_edge_.pop_back();
            node_input_vertex_.pop_back();
            v2t_.pop_back();
            return;
        }
        if (tris_[h.tri].region != 1) {  // safety: never insert outside the domain
            pts_.pop_back();
            node_parent_edge_.pop_back();
            node_input_vertex_.pop_back();
            v2t_.pop_back();
            return;
        }
        if (h.kind == 1)
            insert_on_edge(h.tri, h.where, w);
        else
            insert_in_tri(h.tri, w);
        touch_around_vertex(w);
    }

    // --- output -----------------------------------------------------------
    TriangulationResult finalize() {
        TriangulationResult out;
        std::vector<Index> remap(pts_.size(), kNone);
        for (const auto& t : tris_) {
            if (!t.alive || t.region != 1) continue;
            for (const Index v : t.v) remap[v] = 0;
        }
        Index n = 0;
        for (std::size_t v = 0; v < pts_.size(); ++v) {
            if (remap[v] != kNone) {
                remap[v] = n++;
                out.mesh.nodes.push_back(pts_[v]);
                out.node_parent_edge.push_back(node_parent_edge_[v]);
                out.node_input_vertex.push_back(node_input_vertex_[v]);
            }
        }
        for (const auto& t : tris_) {
            if (!t.alive || t.region != 1) continue;
            std::array<Index, 3> tv{remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]};
            if (orient2d(pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]) < 0) std::swap(tv[1], tv[2]);
            out.mesh.triangles.push_back(tv);
        }
        for (const auto& s : subsegs_) {
            if (!s.alive) continue;
            if (remap[s.a] == kNone || remap[s.b] == kNone) continue;
            out.subsegments.push_back({remap[s.a], remap[s.b], static_cast<Index>(s.parent)});
            // boundary edge iff exactly one inside triangle is adjacent
            int inside_count = 0;
            std::vector<int> fan;
            collect_fan(s.a, fan);
            for (const int t : fan) {
                if (!tris_[t].alive || tris_[t].region != 1) continue;
                const int ia = index_of(t, s.a);
                if (tris_[t].v[(ia + 1) % 3] == s.b || tris_[t].v[(ia + 2) % 3] == s.b)
                    ++inside_count;
            }
            if (inside_count == 1)
                out.mesh.boundary_edges.push_back(
                    BoundaryEdge{remap[s.a], remap[s.b], input_edge_loop_[s.parent]});
        }
        return out;
    }

    // --- members ------------------------------------------------------------
    const geometry::PolygonWithSlit& shape_;
    TriangulateOptions opts_;
    SizeEval size_eval_;
    Real quality_b_ = 1.5;
    Real scale_ = 1.0;

    Index n_input_ = 0;
    Index super_ = 0;
    std::vector<Point2> pts_;
    std::vector<std::array<Index, 2>> input_edges_;
    std::vector<int> input_edge_loop_;
    std::vector<int> node_parent_edge_;
    std::vector<int> node_input_vertex_;
    std::vector<Real> corner_angle_;
    std::vector<Tri> tris_;
    std::vector<int> v2t_;
    std::vector<SubSeg> subsegs_;
    std::unordered_map<std::uint64_t, int> seg_map_;
    std::deque<int> seg_queue_, tri_queue_;
    std::vector<char> seg_queued_, tri_queued_;
};

}  // namespace

TriangulationResult triangulate_pslg(const std::vector<Point2>& points,
                                     const std::vector<std::array<Index, 2>>& segments,
                                     const std::vector<int>& segment_loop,
                                     const geometry::PolygonWithSlit& shape,
                                     const SizeField& size, const TriangulateOptions& opts) {
    Triangulator tr(points, segments, segment_loop, shape, size, opts);
    return tr.run();
}

void cut_slit(Mesh& mesh, const std::vector<Index>& slit_nodes, int slit_loop_id) {
    if (slit_nodes.size() < 2) return;
    std::unordered_set<std::uint64_t> slit_edges;
    for (std::size_t i = 0; i + 1 < slit_nodes.size(); ++i)
        slit_edges.insert(edge_key(slit_nodes[i], slit_nodes[i + 1]));

    std::vector<std::vector<Index>> v2t(mesh.nodes.size());
    for (Index t = 0; t < static_cast<Index>(mesh.triangles.size()); ++t)
        for (const Index v : mesh.triangles[t]) v2t[v].push_back(t);

    // left side of the chain (by the local slit edge direction) keeps the node
    const auto left_of = [&](Index t, Index v, const Point2& dir) {
        Point2 cen{0, 0};
        for (const Index u : mesh.triangles[t]) cen += mesh.nodes[u];
        cen /= 3.0;
        const Point2 d = cen - mesh.nodes[v];
        return dir.x() * d.y() - dir.y() * d.x() > 0;
    };

    for (std::size_t i = 1; i + 1 < slit_nodes.size(); ++i) {
        const Index v = slit_nodes[i];
        const Point2 dir = mesh.nodes[slit_nodes[i + 1]] - mesh.nodes[slit_nodes[i - 1]];
        const Index twin = static_cast<Index>(mesh.nodes.size());
        mesh.nodes.push_back(mesh.nodes[v]);
        bool used = false;
        for (const Index t : v2t[v]) {
            if (left_of(t, v, dir)) continue;  // left bank keeps v
            for (Index& u : mesh.triangles[t])
                if (u == v) {
                    u = twin;
                    used = true;
                }
        }
        if (!used) {
            mesh.nodes.pop_back();
            continue;
        }
        mesh.slit_twins.push_back({v, twin});
    }

    // bank boundary edges: each slit subsegment now appears once per side
    std::unordered_map<Index, Index> twin_of;
    for (const auto& [a, b] : mesh.slit_twins) twin_of[a] = b;
    const auto bank_id = [&](Index orig, bool right) {
        const auto it = twin_of.find(orig);
        return (right && it != twin_of.end()) ? it->second : orig;
    };
    for (std::size_t i = 0; i + 1 < slit_nodes.size(); ++i) {
        const Index a = slit_nodes[i], b = slit_nodes[i + 1];
        mesh.boundary_edges.push_back(BoundaryEdge{bank_id(a, false), bank_id(b, false), slit_loop_id});
        mesh.boundary_edges.push_back(BoundaryEdge{bank_id(a, true), bank_id(b, true), slit_loop_id});
    }
}

}  // namespace hotspot::meshing::detail
