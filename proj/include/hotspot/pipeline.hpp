#pragma once

#include "hotspot/analysis.hpp"
#include "hotspot/fem.hpp"
#include "hotspot/geometry.hpp"
#include "hotspot/io.hpp"
#include "hotspot/mesh.hpp"
#include "hotspot/rbm.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hotspot::pipeline {

struct RunConfig {
    Real epsilon = 1.0 / 3200.0;
    struct MeshCfg {
        Real h_max = 6.0;
        Real h_neck = 0.0;  // 0 means epsilon/3
        Real min_angle_deg = 20.0;
        Real grading_ratio = 2.0;
    } mesh;
    struct SolverCfg {
        int k = 6;
        Real tol = 1e-8;
        int max_iter = 400;
        std::string method = "shift-invert";  // or "lobpcg"
    } solver;
    struct SweepCfg {
        std::vector<Real> epsilons = {1.0 / 2000.0, 1.0 / 4000.0, 1.0 / 8000.0};
    } sweep;
    struct RbmCfg {
        int n_paths = 10000;
        Real dt = 1e-4;
        Real horizon = 0.5;
        std::uint64_t seed = 20240801;
    } rbm;
    std::string out_dir = ".";
    bool export_matrices = false;
    bool export_vtk = false;
};

/// Flat key=value config file; '#' starts a comment.  Keys use the dotted
/// names of the CLI flags (mesh.h_neck, solver.tol, sweep.epsilons, ...).
RunConfig parse_config_file(const std::string& path, RunConfig base = {});
void apply_key_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string config_echo(const RunConfig& cfg);

meshing::SizeField size_field_of(const RunConfig& cfg);
fem::SolverOptions solver_options_of(const RunConfig& cfg);

struct SolveBundle {
    geometry::DomainSpec spec{1.0 / 3200.0};
    geometry::PolygonWithSlit boundary;
    meshing::Mesh mesh;
    meshing::TopologyReport topology;
    fem::SparseMatrix K, M;
    std::vector<fem::EigenPair> eigs;
    std::string mesh_id;
};

SolveBundle run_solve(const RunConfig& cfg, Real scale = 1.0);

/// Richardson-style discretization error estimate for mu2 between the given
/// level and one refined by 1/sqrt(2).
Real discretization_error_estimate(const RunConfig& cfg, const SolveBundle& level1);

analysis::VerificationReport run_checks(const RunConfig& cfg, const SolveBundle& bundle,
                                        Real err_est);

/// Full command front end shared by the CLI binary and the tests.
/// Returns the process exit code: 0 ok, 1 operational error, 2 verification
/// failure (failing check names go to `err`).
int run_command(const std::string& command, const RunConfig& cfg, std::string* err = nullptr);

std::string version_report(const RunConfig& cfg);

}  // namespace hotspot::pipeline
