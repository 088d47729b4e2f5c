#pragma once

#include "hotspot/mesh.hpp"
#include "hotspot/types.hpp"

#include <Eigen/Sparse>

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace hotspot::fem {

using SparseMatrix = Eigen::SparseMatrix<Real>;
using Vector = Eigen::VectorXd;

/// One generalized eigenpair K v = mu M v, M-normalized.
struct EigenPair {
    Real value = 0.0;
    Vector vector;
    Real residual = 0.0;  // ||K v - mu M v|| / ||K v|| (kernel pair: scaled by ||K||_F)
};

struct SolverOptions {
    int k = 6;
    Real tol = 1e-8;
    int max_iter = 400;
    enum class Method { ShiftInvertLanczos, Lobpcg } method = Method::ShiftInvertLanczos;
    std::uint64_t seed = 0x2545F4914F6CDD1DULL;
};

/// P1 stiffness and mass for the Neumann problem (no boundary terms).
std::pair<SparseMatrix, SparseMatrix> assemble(const meshing::Mesh& mesh,
                                               bool lumped_mass = false);

Real rayleigh_quotient(const SparseMatrix& K, const SparseMatrix& M, const Vector& v);

/// Nodal vector of g (the P1 interpolant); non-finite values are evaluation errors.
Vector interpolate(const meshing::Mesh& mesh, const std::function<Real(const Point2&)>& g);

/// Integral of the P1 interpolant over the mesh (equals ones^T M v).
Real integrate(const meshing::Mesh& mesh, const Vector& v);

/// k smallest eigenpairs of K v = mu M v.  The constant mode is returned as
/// the first pair and deflated from the rest by M-orthogonal projection.
std::vector<EigenPair> smallest_eigenpairs(const SparseMatrix& K, const SparseMatrix& M,
                                           const SolverOptions& opts = {});

}  // namespace hotspot::fem
