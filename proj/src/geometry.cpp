#include "hotspot/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace hotspot::geometry {

namespace {

const Real kSqrt3 = std::sqrt(3.0);

// Rotation matrices for 0, 2*pi/3, 4*pi/3 as exact double literals.
struct Mat2 {
    Real a, b, c, d;  // [[a, b], [c, d]]
    Point2 operator*(const Point2& p) const {
        return {a * p.x() + b * p.y(), c * p.x() + d * p.y()};
    }
};

Mat2 rotation(int k) {
    switch (((k % 3) + 3) % 3) {
        case 1: return {-0.5, -kSqrt3 / 2, kSqrt3 / 2, -0.5};
        case 2: return {-0.5, kSqrt3 / 2, -kSqrt3 / 2, -0.5};
        default: return {1.0, 0.0, 0.0, 1.0};
    }
}

Real cross(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

Real point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
    const Point2 ab = b - a;
    const Real len2 = ab.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const Real t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

// Proper segment intersection test (shared endpoints do not count).
bool segments_cross(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const Real d1 = cross(b - a, c - a);
    const Real d2 = cross(b - a, d - a);
    const Real d3 = cross(d - c, a - c);
    const Real d4 = cross(d - c, b - c);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
           d4 != 0;
}

void require_simple_loop(const std::vector<Point2>& loop) {
    const std::size_t n = loop.size();
    if (n < 3) throw GeometryError("boundary loop has fewer than 3 vertices");
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& a = loop[i];
        const Point2& b = loop[(i + 1) % n];
        if ((b - a).norm() < 1e-14) throw GeometryError("degenerate boundary edge");
        for (std::size_t j = i + 1; j < n; ++j) {
            if (segments_cross(a, b, loop[j], loop[(j + 1) % n]))
                throw GeometryError("boundary loop self-intersects");
        }
    }
}

Real signed_area(const std::vector<Point2>& loop) {
    Real s = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Point2& a = loop[i];
        const Point2& b = loop[(i + 1) % loop.size()];
        s += cross(a, b);
    }
    return 0.5 * s;
}

bool inside_loop(const std::vector<Point2>& loop, const Point2& p) {
    // Vertical upward ray, half-open rule on x.
    bool in = false;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Point2& a = loop[i];
        const Point2& b = loop[(i + 1) % loop.size()];
        if ((a.x() > p.x()) == (b.x() > p.x())) continue;
        const Real y = a.y() + (b.y() - a.y()) * (p.x() - a.x()) / (b.x() - a.x());
        if (y > p.y()) in = !in;
    }
    return in;
}

}  // namespace

const std::array<SymmetryElement, 6>& group() {
    static const std::array<SymmetryElement, 6> g = {
        SymmetryElement{0, false}, SymmetryElement{1, false}, SymmetryElement{2, false},
        SymmetryElement{0, true},  SymmetryElement{1, true},  SymmetryElement{2, true}};
    return g;
}

SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b) {
    // matrix product R^ra S^fa R^rb S^fb; S R S = R^-1
    const int rb = a.reflect ? (3 - b.rotation_index) % 3 : b.rotation_index;
    return {(a.rotation_index + rb) % 3, a.reflect != b.reflect};
}

SymmetryElement inverse(const SymmetryElement& s) {
    if (s.reflect) return s;  // reflections are involutions
    return {(3 - s.rotation_index) % 3, false};
}

Point2 apply_symmetry(const SymmetryElement& sigma, const Point2& p) {
    Point2 q = sigma.reflect ? Point2(p.x(), -p.y()) : p;
    q = rotation(sigma.rotation_index) * q;
    if (q.y() == 0.0) q.y() = 0.0;  // normalize -0.0 so hashing stays stable
    if (q.x() == 0.0) q.x() = 0.0;
    return q;
}

std::vector<Point2> orbit(const Point2& p) {
    std::vector<Point2> out;
    for (const auto& sigma : group()) {
        const Point2 q = apply_symmetry(sigma, p);
        bool seen = false;
        for (const auto& r : out) {
            if ((q - r).norm() <= 1e-12) {
                seen = true;
                break;
            }
        }
        if (!seen) out.push_back(q);
    }
    return out;
}

Point2 canonical_representative(const Point2& p) {
    if (p.x() == 0.0 && p.y() == 0.0) return p;
    const Point2* best = nullptr;
    Point2 images[6];
    int nbest = -1;
    for (int i = 0; i < 6; ++i) {
        images[i] = apply_symmetry(group()[i], p);
        const Point2& q = images[i];
        if (q.y() >= 0.0 && kSqrt3 * q.x() - q.y() >= -1e-13 * p.norm()) {
            if (!best || q.x() > best->x() || (q.x() == best->x() && q.y() > best->y())) {
                best = &images[i];
                nbest = i;
            }
        }
    }
    if (best) return images[nbest];
    // FP fallback near sector boundaries
    const Real r = p.norm();
    Real th = std::atan2(p.y(), p.x());
    th = std::fmod(th, 2.0 * M_PI / 3.0);
    if (th < 0) th += 2.0 * M_PI / 3.0;
    if (th > M_PI / 3.0) th = 2.0 * M_PI / 3.0 - th;
    return {r * std::cos(th), r * std::sin(th)};
}

DomainSpec::DomainSpec(Real eps, Real outer) : epsilon(eps), outer_x(outer) {
    const Point2 a8{8.0, 8.0 * kSqrt3};
    const Point2 a9{9.0, 9.0 * kSqrt3};
    const SymmetryElement rot{1, false};
    slit = {apply_symmetry(rot, a9), apply_symmetry(rot, a8)};
}

void DomainSpec::validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
    if (!(epsilon < 1.0 / 200.0)) throw ParameterError("epsilon must be < 1/200");
    if (!(outer_x > 18.0)) throw ParameterError("outer_x must be > 18");
    if (!is_finite(slit[0]) || !is_finite(slit[1])) throw ParameterError("slit endpoints must be finite");
}

std::array<Point2, 10> vertices(const DomainSpec& spec) {
    spec.validate();
    return {Point2{0.0, 0.0},
            Point2{1.0 / 7.0, kSqrt3 / 7.0},
            Point2{5.0, 0.01},
            Point2{5.5, 0.005},
            Point2{6.0, spec.epsilon},
            Point2{6.5, 0.005},
            Point2{7.0, 0.01},
            Point2{8.0, 8.0 * kSqrt3},
            Point2{9.0, 9.0 * kSqrt3},
            Point2{spec.outer_x, 0.0}};
}

PolygonWithSlit build_domain(const DomainSpec& spec) {
    spec.validate();
    const auto a = vertices(spec);
    const SymmetryElement refl60{1, true};  // reflection about the pi/3 axis

    PolygonWithSlit poly;
    // Outer loop: six images of the chain A9 -> A10, stitched at the seam
    // vertices (A10 images lie on the rotation images of the horizontal axis,
    // A9 images on the reflection axes).
    for (int k = 0; k < 3; ++k) {
        const SymmetryElement rot{k, false};
        poly.outer_loop.push_back(apply_symmetry(rot, a[9]));  // A10 image
        poly.outer_loop.push_back(apply_symmetry(rot, a[8]));  // A9 image
    }
    if (signed_area(poly.outer_loop) < 0) std::reverse(poly.outer_loop.begin(), poly.outer_loop.end());

    // Each hole: the chain A2..A8 joined with its mirror across the rotated axis.
    std::vector<Point2> base_hole;
    for (int j = 1; j <= 7; ++j) base_hole.push_back(a[j]);              // A2..A8
    for (int j = 6; j >= 2; --j) base_hole.push_back(apply_symmetry(refl60, a[j]));
    if (signed_area(base_hole) > 0) std::reverse(base_hole.begin(), base_hole.end());
    for (int k = 0; k < 3; ++k) {
        const SymmetryElement rot{k, false};
        std::vector<Point2> hole;
        hole.reserve(base_hole.size());
        for (const auto& p : base_hole) hole.push_back(apply_symmetry(rot, p));
        poly.hole_loops.push_back(std::move(hole));
    }

    poly.slit = {spec.slit[0], spec.slit[1]};

    require_simple_loop(poly.outer_loop);
    for (const auto& h : poly.hole_loops) require_simple_loop(h);
    return poly;
}

bool contains(const PolygonWithSlit& poly, const Point2& p, Real tol) {
    const auto on_loop = [&](const std::vector<Point2>& loop) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            if (point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]) <= tol)
                return true;
        }
        return false;
    };
    if (on_loop(poly.outer_loop)) return true;
    for (const auto& h : poly.hole_loops)
        if (on_loop(h)) return true;
    if (!inside_loop(poly.outer_loop, p)) return false;
    for (const auto& h : poly.hole_loops)
        if (inside_loop(h, p)) return false;
    return true;
}

RegionLabel region_of(const DomainSpec& spec, const Point2& p) {
    return BuiltDomain(spec).region_of(p);
}

std::pair<Point2, Point2> k_segment(const DomainSpec& spec, int j) {
    if (j < 3 || j > 7) throw ParameterError("k_segment index must be in {3,...,7}");
    const auto a = vertices(spec);
    const Point2 top = a[j - 1];
    return {top, Point2{top.x(), -top.y()}};
}

std::pair<Point2, Point2> neck_centers(const DomainSpec& spec) {
    spec.validate();
    const Real eps = spec.epsilon;
    const Point2 a11{6.0 + 100.0 * eps / (1.0 - 200.0 * eps), 0.0};
    // intersection of the line through A5=(6,eps), A6=(6.5,1/200) with y=0
    const Point2 a5{6.0, eps};
    const Point2 a6{6.5, 0.005};
    const Real t = (0.0 - a5.y()) / (a6.y() - a5.y());
    const Point2 a12{a5.x() + t * (a6.x() - a5.x()), 0.0};
    return {a11, a12};
}

std::pair<Real, Real> angle_bounds(const DomainSpec& spec) {
    const auto a = vertices(spec);
    Real lo = std::numeric_limits<Real>::infinity();
    Real hi = -lo;
    for (int j = 0; j < 9; ++j) {
        const Point2 d = a[j + 1] - a[j];
        const Real th = std::atan2(d.y(), d.x());
        lo = std::min(lo, th);
        hi = std::max(hi, th);
    }
    return {lo, hi};
}

namespace detail {

Real test_function_unchecked(const DomainSpec& spec, TestFunctionKind kind, const Point2& p,
                             Real i1, Real i2) {
    const Real eps = spec.epsilon;
    if (kind == TestFunctionKind::F) {
        if (i1 == 0.0 || i2 == 0.0)
            throw ParameterError("kind F requires the two nonzero normalizing integrals");
        return test_function_unchecked(spec, TestFunctionKind::F1, p, 0, 0) / i1 -
               test_function_unchecked(spec, TestFunctionKind::F2, p, 0, 0) / i2;
    }
    const Point2 q = canonical_representative(p);
    const Real r = q.norm();
    const auto [a11, a12] = neck_centers(spec);
    const Real denom = std::log(1.0 / (800.0 * eps));
    if (kind == TestFunctionKind::F1) {
        const Real d1 = (q - a11).norm();
        if (r > 6.0 || d1 < 400.0 * eps) return 0.0;
        if (d1 <= 0.5) return std::log(d1 / (400.0 * eps)) / denom;
        if (r < 6.0) return 1.0;
        throw GeometryError("unreachable test-function case: |z|=6 with d1 > 1/2");
    }
    const Real d2 = (q - a12).norm();
    if (r < 6.0 || d2 < 400.0 * eps) return 0.0;
    if (r > 6.0 && d2 <= 0.5) return std::log(d2 / (400.0 * eps)) / denom;
    if (r > 6.0) return 1.0;
    throw GeometryError("unreachable test-function case: |z|=6 with d2 >= 400*eps");
}

}  // namespace detail

Real test_function(const DomainSpec& spec, TestFunctionKind kind, const Point2& p, Real i1,
                   Real i2) {
    spec.validate();
    if (!(spec.epsilon < 1.0 / 1600.0))
        throw ParameterError("test functions require epsilon < 1/1600");
    if (!contains(build_domain(spec), p, 1e-9))
        throw GeometryError("test-function argument lies outside the domain");
    return detail::test_function_unchecked(spec, kind, p, i1, i2);
}

BuiltDomain::BuiltDomain(const DomainSpec& spec) : spec_(spec), boundary_(build_domain(spec)) {
    const auto add_loop = [&](const std::vector<Point2>& loop, int id) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
            segments_.push_back({loop[i], loop[(i + 1) % loop.size()]});
            segment_loop_.push_back(id);
        }
    };
    add_loop(boundary_.outer_loop, 0);
    for (std::size_t h = 0; h < boundary_.hole_loops.size(); ++h)
        add_loop(boundary_.hole_loops[h], static_cast<int>(h) + 1);
    if (boundary_.slit.size() == 2) {
        segments_.push_back({boundary_.slit[0], boundary_.slit[1]});
        segment_loop_.push_back(static_cast<int>(boundary_.hole_loops.size()) + 1);
    }
}

bool BuiltDomain::contains(const Point2& p, Real tol) const {
    return geometry::contains(boundary_, p, tol);
}

RegionLabel BuiltDomain::region_of(const Point2& p) const {
    if (!contains(p)) return RegionLabel::OutsideDomain;
    const Real x = canonical_representative(p).x();
    if (x < 5.0) return RegionLabel::Inner;
    if (x < 6.0) return RegionLabel::BridgeInner;
    if (x <= 7.0) return RegionLabel::BridgeOuter;
    return RegionLabel::Exterior;
}

Real BuiltDomain::channel_half_height(Real x) const {
    static const Real xk[] = {1.0 / 7.0, 5.0, 5.5, 6.0, 6.5, 7.0, 7.1};
    const Real yk[] = {kSqrt3 / 7.0, 0.01, 0.005, spec_.epsilon, 0.005, 0.01, 1.4};
    if (x <= xk[0] || x >= xk[6]) return 1e9;
    for (int i = 0; i < 6; ++i) {
        if (x <= xk[i + 1]) {
            const Real t = (x - xk[i]) / (xk[i + 1] - xk[i]);
            return yk[i] + t * (yk[i + 1] - yk[i]);
        }
    }
    return 1e9;
}

}  // namespace hotspot::geometry
