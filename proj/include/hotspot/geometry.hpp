#pragma once

#include "hotspot/types.hpp"

#include <array>
#include <optional>
#include <utility>
#include <vector>

namespace hotspot::geometry {

/// One of the six elements of the dihedral group G generated by the
/// reflection s about the horizontal axis and the rotation by 2*pi/3.
/// The reflection, when present, is applied first:  sigma = R^rotation_index * S.
struct SymmetryElement {
    int rotation_index = 0;  // in {0,1,2}
    bool reflect = false;

    friend bool operator==(const SymmetryElement& a, const SymmetryElement& b) {
        return a.rotation_index == b.rotation_index && a.reflect == b.reflect;
    }
};

/// The six group elements in a fixed enumeration order:
/// e, R, R^2, S, R*S, R^2*S.
const std::array<SymmetryElement, 6>& group();

SymmetryElement compose(const SymmetryElement& a, const SymmetryElement& b);  // apply b, then a
SymmetryElement inverse(const SymmetryElement& s);
Point2 apply_symmetry(const SymmetryElement& sigma, const Point2& p);

/// Orbit {sigma(p) : sigma in G}, duplicates within 1e-12 merged.
std::vector<Point2> orbit(const Point2& p);

/// Orbit representative with polar angle in [0, pi/3] and y >= 0
/// (the canonical fundamental sector).
Point2 canonical_representative(const Point2& p);

/// Parameters of the domain family.  epsilon controls the half-height of the
/// channel pinch; outer_x the abscissa of the far outer vertex.  The slit
/// defaults to the rotated images of the two on-axis ring vertices.
struct DomainSpec {
    Real epsilon = 1.0 / 3200.0;
    Real outer_x = 235.0;
    std::array<Point2, 2> slit;  // first endpoint on the outer loop

    explicit DomainSpec(Real eps = 1.0 / 3200.0, Real outer = 235.0);
    void validate() const;  // throws ParameterError
};

/// The ten generating vertices A1..A10 of the fundamental polygon.
std::array<Point2, 10> vertices(const DomainSpec& spec);

/// Polygon with holes and an optional open slit.  Outer loop is
/// counterclockwise, hole loops clockwise, loops simple and disjoint.
struct PolygonWithSlit {
    std::vector<Point2> outer_loop;
    std::vector<std::vector<Point2>> hole_loops;
    std::vector<Point2> slit;  // empty or a 2-point polyline
};

/// Assembles the full domain boundary: the six group images of the outer
/// chain stitched at the seam vertices, three hole loops, and the slit.
PolygonWithSlit build_domain(const DomainSpec& spec);

enum class RegionLabel {
    Inner,        // component of D \ M containing the origin
    Exterior,     // outer component of D \ M
    BridgeInner,  // between the K3 and K5 segments (and images)
    BridgeOuter,  // between the K5 and K7 segments (and images)
    OutsideDomain,
};

RegionLabel region_of(const DomainSpec& spec, const Point2& p);

/// K_j = segment from A_j to s(A_j), j in {3,...,7}.
std::pair<Point2, Point2> k_segment(const DomainSpec& spec, int j);

/// Centers of the two logarithmic mollifiers: the intersections of the
/// channel wall lines (A4,A5) and (A5,A6) with the horizontal axis.
std::pair<Point2, Point2> neck_centers(const DomainSpec& spec);  // (A11, A12)

enum class TestFunctionKind { F1, F2, F };

/// Piecewise log test functions used for the Rayleigh upper bound.
/// F1 is 1 on the inner region, 0 on the exterior one; F2 the reverse.
/// Kind F requires the two normalizing integrals, supplied by the caller.
Real test_function(const DomainSpec& spec, TestFunctionKind kind, const Point2& p,
                   Real integral_f1 = 0.0, Real integral_f2 = 0.0);

/// min/max angle between consecutive vertex-chain vectors and the horizontal
/// axis; their difference stays below pi/2 for the default geometry.
std::pair<Real, Real> angle_bounds(const DomainSpec& spec);  // (alpha1, alpha2)

/// Point-in-closure test against an explicit boundary representation.
bool contains(const PolygonWithSlit& poly, const Point2& p, Real tol = 1e-12);

/// Cached evaluated form of the domain: boundary loops plus the derived
/// quantities the hot paths need.  Values are immutable after construction.
class BuiltDomain {
  public:
    explicit BuiltDomain(const DomainSpec& spec);

    const DomainSpec& spec() const { return spec_; }
    const PolygonWithSlit& boundary() const { return boundary_; }
    /// All boundary segments (loops + slit) as point pairs, loop id per segment.
    const std::vector<std::array<Point2, 2>>& segments() const { return segments_; }
    const std::vector<int>& segment_loop_ids() const { return segment_loop_; }

    bool contains(const Point2& p, Real tol = 1e-12) const;
    RegionLabel region_of(const Point2& p) const;

    /// Channel half-height at canonical abscissa x (linear interpolation of the
    /// wall chain); large outside the bridge band.
    Real channel_half_height(Real x) const;

  private:
    DomainSpec spec_;
    PolygonWithSlit boundary_;
    std::vector<std::array<Point2, 2>> segments_;
    std::vector<int> segment_loop_;
};

namespace detail {
/// f1/f2 evaluation without the containment check (mesh nodes are known to
/// lie in the closure of the domain).
Real test_function_unchecked(const DomainSpec& spec, TestFunctionKind kind, const Point2& p,
                             Real integral_f1, Real integral_f2);
}  // namespace detail

}  // namespace hotspot::geometry
