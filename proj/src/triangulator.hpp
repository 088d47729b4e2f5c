#pragma once

#include "hotspot/mesh.hpp"

#include <array>
#include <vector>

namespace hotspot::meshing::detail {

/// Triangulation result with per-node provenance, used by the symmetric
/// replicate-and-merge path to identify seam nodes combinatorially.
struct TriangulationResult {
    Mesh mesh;
    std::vector<int> node_parent_edge;   // input edge the node was split from, else -1
    std::vector<int> node_input_vertex;  // original input vertex id, else -1
    // alive constraint subsegments: {a, b, input edge id}
    std::vector<std::array<Index, 3>> subsegments;
};

/// Conforming Delaunay refinement of a planar straight-line graph.
/// `segment_loop` tags every input edge with the loop id reported in
/// Mesh::boundary_edges.  Interior constraints (a slit) are tagged too but
/// only produce boundary edges after the cut.
TriangulationResult triangulate_pslg(const std::vector<Point2>& points,
                                     const std::vector<std::array<Index, 2>>& segments,
                                     const std::vector<int>& segment_loop,
                                     const geometry::PolygonWithSlit& shape,
                                     const SizeField& size, const TriangulateOptions& opts);

/// Opens the mesh along the constraint chain `slit_nodes` (ordered node ids);
/// interior chain nodes are duplicated, triangles left of the chain keep the
/// originals.  Appends bank boundary edges with `slit_loop_id`.
void cut_slit(Mesh& mesh, const std::vector<Index>& slit_nodes, int slit_loop_id);

}  // namespace hotspot::meshing::detail
