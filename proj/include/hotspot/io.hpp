#pragma once

#include "hotspot/analysis.hpp"
#include "hotspot/fem.hpp"
#include "hotspot/geometry.hpp"
#include "hotspot/mesh.hpp"
#include "hotspot/rbm.hpp"

#include <string>
#include <vector>

namespace hotspot::io {

/// Shortest fixed formatting that round-trips doubles: 17 significant digits.
std::string fmt17(Real v);

void write_domain_json(const std::string& path, const geometry::DomainSpec& spec,
                       const geometry::PolygonWithSlit& poly);
void write_mesh_json(const std::string& path, const meshing::Mesh& mesh,
                     const meshing::TopologyReport& report);
void write_eigen_csv(const std::string& path, const std::vector<fem::EigenPair>& eigs);
void write_nodal_csv(const std::string& path, const analysis::NodalCurve& curve);
void write_sweep_csv(const std::string& path, const std::vector<analysis::SweepRow>& rows);
void write_rbm_csv(const std::string& path, const std::vector<rbm::RbmRow>& rows);
void write_report_json(const std::string& path, const analysis::VerificationReport& report);
void write_contours_csv(const std::string& path, const std::vector<Real>& levels,
                        const std::vector<analysis::NodalCurve>& curves);
void write_vtk(const std::string& path, const meshing::Mesh& mesh, const fem::Vector& phi,
               const std::string& field_name = "phi2");
void write_matrix_coord(const std::string& path, const fem::SparseMatrix& m);

}  // namespace hotspot::io
