#pragma once

#include "hotspot/geometry.hpp"
#include "hotspot/types.hpp"

#include <array>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hotspot::meshing {

/// Target edge lengths: h_neck at the channel pinch (and other refinement
/// seeds), growing at most `grading_ratio - 1` per unit distance up to h_max.
struct SizeField {
    Real h_max = 6.0;
    Real h_neck = 1e-4;
    Real grading_ratio = 2.0;  // in [1.2, 2.5]

    void validate() const;
    Real lipschitz() const { return grading_ratio - 1.0; }
};

/// Extra local refinement target: edge length <= h near the point.
struct SizeSeed {
    Point2 at;
    Real h;
};

struct BoundaryEdge {
    Index a, b;
    int loop_id;  // 0 = outer, 1.. = holes, last = slit banks
};

struct Mesh {
    std::vector<Point2> nodes;
    std::vector<std::array<Index, 3>> triangles;  // counterclockwise
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::pair<Index, Index>> slit_twins;  // (left bank, right bank)

    bool node_on_boundary(Index v) const;
    Real triangle_area(Index t) const;

  private:
    mutable std::vector<char> on_boundary_cache_;
};

struct TopologyReport {
    Index vertex_count = 0;
    Index edge_count = 0;
    Index triangle_count = 0;
    int boundary_components = 0;
    int euler_characteristic = 0;
    Real min_angle_deg = 0.0;           // over all triangles
    Real min_angle_unpinched_deg = 0.0; // excluding triangles wedged into small input corners
    Real min_edge_length = 0.0;
    Real max_edge_length = 0.0;
};

struct TriangulateOptions {
    Real min_angle_deg = 20.0;
    std::vector<SizeSeed> seeds;
    std::size_t max_points = 4'000'000;  // refinement-failure guard
};

/// Conforming constrained triangulation of a polygon with holes and an
/// optional slit.  All input segments appear as unions of mesh edges; slit
/// interior nodes are duplicated into two banks.
Mesh triangulate(const geometry::PolygonWithSlit& domain, const SizeField& size,
                 const TriangulateOptions& opts = {});

/// Symmetric mesh of the full domain: the fundamental polygon is meshed once
/// and replicated through the six group elements, seam nodes merged exactly
/// (by construction, not by coordinate snapping) and the slit seam left open.
Mesh triangulate(const geometry::DomainSpec& spec, const SizeField& size,
                 const TriangulateOptions& opts = {});

/// Default refinement seeds for the symmetric domain mesh: the channel
/// pinches, the ring corners adjacent to the gates, and the origin.
std::vector<SizeSeed> default_seeds(const geometry::DomainSpec& spec, const SizeField& size);

struct Location {
    bool found = false;
    Index triangle = -1;
    std::array<Real, 3> barycentric = {0, 0, 0};
};

/// Point location with a uniform-grid accelerator; points within 1e-12 of an
/// edge resolve to the lowest containing triangle index.
class Locator {
  public:
    explicit Locator(const Mesh& mesh);
    Location locate(const Point2& p) const;
    const Mesh& mesh() const { return mesh_; }

  private:
    const Mesh& mesh_;
    Point2 lo_, hi_;
    Real cell_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<Index>> cells_;
};

Location locate(const Mesh& mesh, const Point2& p);

TopologyReport topology_report(const Mesh& mesh);

}  // namespace hotspot::meshing
