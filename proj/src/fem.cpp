#include "hotspot/fem.hpp"

#include <cmath>
#include <vector>

namespace hotspot::fem {

std::pair<SparseMatrix, SparseMatrix> assemble(const meshing::Mesh& mesh, bool lumped_mass) {
    const Index n = static_cast<Index>(mesh.nodes.size());
    std::vector<Eigen::Triplet<Real>> kt, mt;
    kt.reserve(mesh.triangles.size() * 9);
    mt.reserve(mesh.triangles.size() * 9);
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const auto& tv = mesh.triangles[e];
        const Point2 &p0 = mesh.nodes[tv[0]], &p1 = mesh.nodes[tv[1]], &p2 = mesh.nodes[tv[2]];
        const Real area = 0.5 * ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x());
        if (!(area > 0.0)) throw FemError("assembly: degenerate or inverted triangle");
        // edge-vector gradients; third component closed so rows sum to zero
        Real b[3], c[3];
        b[0] = p1.y() - p2.y();
        b[1] = p2.y() - p0.y();
        b[2] = -(b[0] + b[1]);
        c[0] = p2.x() - p1.x();
        c[1] = p0.x() - p2.x();
        c[2] = -(c[0] + c[1]);
        const Real w = 1.0 / (4.0 * area);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                kt.emplace_back(tv[i], tv[j], w * (b[i] * b[j] + c[i] * c[j]));
                if (lumped_mass) {
                    if (i == j) mt.emplace_back(tv[i], tv[j], area / 3.0);
                } else {
                    mt.emplace_back(tv[i], tv[j], area / 12.0 * (i == j ? 2.0 : 1.0));
                }
            }
        }
    }
    SparseMatrix K(n, n), M(n, n);
    K.setFromTriplets(kt.begin(), kt.end());
    M.setFromTriplets(mt.begin(), mt.end());
    K.makeCompressed();
    M.makeCompressed();
    return {std::move(K), std::move(M)};
}

Real rayleigh_quotient(const SparseMatrix& K, const SparseMatrix& M, const Vector& v) {
    if (v.size() != K.rows()) throw ParameterError("rayleigh_quotient: dimension mismatch");
    const Real vv = v.squaredNorm();
    if (!(vv > 0.0)) throw ParameterError("rayleigh_quotient of the zero vector");
    return v.dot(K * v) / v.dot(M * v);
}

Vector interpolate(const meshing::Mesh& mesh, const std::function<Real(const Point2&)>& g) {
    Vector v(mesh.nodes.size());
    for (Index i = 0; i < static_cast<Index>(mesh.nodes.size()); ++i) {
        const Real val = g(mesh.nodes[i]);
        if (!std::isfinite(val)) throw FemError("interpolate: function undefined at a mesh node");
        v[i] = val;
    }
    return v;
}

Real integrate(const meshing::Mesh& mesh, const Vector& v) {
    if (v.size() != static_cast<Eigen::Index>(mesh.nodes.size()))
        throw ParameterError("integrate: dimension mismatch");
    Real sum = 0.0;
    for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
        const auto& tv = mesh.triangles[e];
        sum += mesh.triangle_area(static_cast<Index>(e)) * (v[tv[0]] + v[tv[1]] + v[tv[2]]) / 3.0;
    }
    return sum;
}

}  // namespace hotspot::fem
