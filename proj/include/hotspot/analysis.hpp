#pragma once

#include "hotspot/fem.hpp"
#include "hotspot/geometry.hpp"
#include "hotspot/mesh.hpp"

#include <string>
#include <vector>

namespace hotspot::analysis {

using fem::EigenPair;
using fem::SparseMatrix;
using fem::Vector;

/// Zero-level crossings of a nodal field, chained into polylines.
struct NodalCurve {
    std::vector<std::vector<Point2>> polylines;
    std::vector<std::vector<Real>> local_h;  // crossing-edge length per point
    std::size_t component_count() const { return polylines.size(); }
    bool empty() const { return polylines.empty(); }
};

struct NodalConfinement {
    bool pass = false;
    Real max_excursion = 0.0;       // distance beyond the bridge band, minus allowance
    Real max_excursion_raw = 0.0;   // distance beyond the bridge band
    Real max_excursion_from_k6 = 0.0;  // |canonical x - 6.5|, reported without a threshold
    std::string diagnostic;
};

struct SimplicityGap {
    Real gap = 0.0;
    Real relative_gap = 0.0;
    bool pass = false;
};

struct ExtremumReport {
    Index argmax_node = -1;
    Point2 argmax{0, 0};
    bool interior = false;
    Real value_at_origin = 0.0;
    Real max_value = 0.0;
    Real max_boundary_value = 0.0;
    Real margin = 0.0;  // max_value - max_boundary_value
};

struct ConeCheck {
    Index violations = 0;
    Index total = 0;
    Real worst = 0.0;  // largest increase along an admissible direction
    Point2 worst_from{0, 0}, worst_to{0, 0};
};

struct CheckResult {
    std::string name;
    bool pass = false;
    Real measured = 0.0;
    Real threshold = 0.0;
    Real margin = 0.0;
    std::string note;
};

struct VerificationReport {
    Real epsilon = 0.0;
    std::string mesh_id;
    std::vector<Real> eigenvalues;
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

struct SweepRow {
    Real epsilon = 0.0;
    bool ok = false;
    std::string error;
    Real mu2 = 0.0, mu3 = 0.0, bound = 0.0;
    bool nodal_pass = false;
    Real margin = 0.0;  // bound - mu2, the variational slack
};

/// Rayleigh quotient of the mean-free two-region log test function; an upper
/// bound for the discrete second eigenvalue by the variational principle.
Real lemma1_bound(const geometry::DomainSpec& spec, const meshing::Mesh& mesh,
                  const SparseMatrix& K, const SparseMatrix& M);

NodalCurve nodal_curves(const meshing::Mesh& mesh, const Vector& phi);

NodalConfinement check_nodal_in_M(const geometry::DomainSpec& spec, const NodalCurve& curve);

int nodal_domain_count(const meshing::Mesh& mesh, const Vector& phi);

SimplicityGap simplicity_gap(const std::vector<EigenPair>& eigs, Real err_est);

/// Flips the sign so the integral over the disc B(0, 1/10) is positive;
/// throws AnalysisError when that integral is too close to zero to decide.
Vector sign_normalize(const meshing::Mesh& mesh, const Vector& phi);

ExtremumReport extremum_report(const meshing::Mesh& mesh, const Vector& phi);

/// max_{nodes p, sigma in G} |phi(sigma p) - phi(p)| / ||phi||_inf.
Real symmetry_residual(const meshing::Mesh& mesh, const Vector& phi,
                       Index* locate_failures = nullptr);

/// Samples point pairs in the fundamental polygon whose direction lies in the
/// monotonicity cone (with an angular margin of tol) and counts violations of
/// phi(x) >= phi(y) - tol * ||phi||_inf.
ConeCheck cone_monotonicity_check(const geometry::DomainSpec& spec, const meshing::Mesh& mesh,
                                  const Vector& phi, Index n_samples, Real tol,
                                  std::uint64_t seed = 12345);

/// One full domain->mesh->solve->check run per epsilon; per-row failures are
/// recorded and the sweep continues.  Rows come back sorted by epsilon
/// descending.
std::vector<SweepRow> epsilon_sweep(const std::vector<Real>& epsilons,
                                    const meshing::SizeField& size,
                                    const meshing::TriangulateOptions& mesh_opts,
                                    const fem::SolverOptions& solver);

}  // namespace hotspot::analysis
