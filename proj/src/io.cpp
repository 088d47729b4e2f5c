#include "hotspot/io.hpp"

#include <cstdio>
#include <stdexcept>

namespace hotspot::io {

namespace {

struct File {
    std::FILE* f;
    explicit File(const std::string& path) : f(std::fopen(path.c_str(), "wb")) {
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
    }
    ~File() {
        if (f) std::fclose(f);
    }
    File(const File&) = delete;
    File& operator=(const File&) = delete;

    void puts(const char* s) { std::fputs(s, f); }
    void puts(const std::string& s) { std::fputs(s.c_str(), f); }
    template <typename... Args>
    void printf(const char* fmt, Args... args) {
        std::fprintf(f, fmt, args...);
    }
};

void put_point(File& out, const Point2& p) {
    out.printf("[%s, %s]", fmt17(p.x()).c_str(), fmt17(p.y()).c_str());
}

void put_loop(File& out, const std::vector<Point2>& loop) {
    out.puts("[");
    for (std::size_t i = 0; i < loop.size(); ++i) {
        if (i) out.puts(", ");
        put_point(out, loop[i]);
    }
    out.puts("]");
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

}  // namespace

std::string fmt17(Real v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_domain_json(const std::string& path, const geometry::DomainSpec& spec,
                       const geometry::PolygonWithSlit& poly) {
    File out(path);
    out.printf("{\n  \"epsilon\": %s,\n  \"outer_x\": %s,\n", fmt17(spec.epsilon).c_str(),
               fmt17(spec.outer_x).c_str());
    out.puts("  \"outer_loop\": ");
    put_loop(out, poly.outer_loop);
    out.puts(",\n  \"holes\": [");
    for (std::size_t h = 0; h < poly.hole_loops.size(); ++h) {
        if (h) out.puts(", ");
        put_loop(out, poly.hole_loops[h]);
    }
    out.puts("],\n  \"slit\": ");
    put_loop(out, poly.slit);
    out.puts(",\n  \"vertices\": {");
    const auto verts = geometry::vertices(spec);
    for (int i = 0; i < 10; ++i) {
        if (i) out.puts(", ");
        out.printf("\"A%d\": ", i + 1);
        put_point(out, verts[i]);
    }
    out.puts("}\n}\n");
}

void write_mesh_json(const std::string& path, const meshing::Mesh& mesh,
                     const meshing::TopologyReport& rep) {
    File out(path);
    out.puts("{\n");
    out.printf("  \"nodes\": %d,\n", rep.vertex_count);
    out.printf("  \"edges\": %d,\n", rep.edge_count);
    out.printf("  \"triangles\": %d,\n", rep.triangle_count);
    out.printf("  \"boundary_edges\": %zu,\n", mesh.boundary_edges.size());
    out.printf("  \"boundary_components\": %d,\n", rep.boundary_components);
    out.printf("  \"euler_characteristic\": %d,\n", rep.euler_characteristic);
    out.printf("  \"slit_twins\": %zu,\n", mesh.slit_twins.size());
    out.printf("  \"min_angle_deg\": %s,\n", fmt17(rep.min_angle_deg).c_str());
    out.printf("  \"min_angle_unpinched_deg\": %s,\n", fmt17(rep.min_angle_unpinched_deg).c_str());
    out.printf("  \"min_edge_length\": %s,\n", fmt17(rep.min_edge_length).c_str());
    out.printf("  \"max_edge_length\": %s\n", fmt17(rep.max_edge_length).c_str());
    out.puts("}\n");
}

void write_eigen_csv(const std::string& path, const std::vector<fem::EigenPair>& eigs) {
    File out(path);
    out.puts("index,eigenvalue,residual\n");
    for (std::size_t i = 0; i < eigs.size(); ++i)
        out.printf("%zu,%s,%s\n", i + 1, fmt17(eigs[i].value).c_str(),
                   fmt17(eigs[i].residual).c_str());
}

void write_nodal_csv(const std::string& path, const analysis::NodalCurve& curve) {
    File out(path);
    out.puts("component,x,y\n");
    for (std::size_t c = 0; c < curve.polylines.size(); ++c)
        for (const auto& p : curve.polylines[c])
            out.printf("%zu,%s,%s\n", c, fmt17(p.x()).c_str(), fmt17(p.y()).c_str());
}

void write_sweep_csv(const std::string& path, const std::vector<analysis::SweepRow>& rows) {
    File out(path);
    out.puts("epsilon,mu2,mu3,bound,nodal_pass,margin\n");
    for (const auto& r : rows) {
        if (!r.ok) {
            out.printf("%s,error,error,error,false,\"%s\"\n", fmt17(r.epsilon).c_str(),
                       r.error.c_str());
            continue;
        }
        out.printf("%s,%s,%s,%s,%s,%s\n", fmt17(r.epsilon).c_str(), fmt17(r.mu2).c_str(),
                   fmt17(r.mu3).c_str(), fmt17(r.bound).c_str(), r.nodal_pass ? "true" : "false",
                   fmt17(r.margin).c_str());
    }
}

void write_rbm_csv(const std::string& path, const std::vector<rbm::RbmRow>& rows) {
    File out(path);
    out.puts("target,start_id,estimate,ci_halfwidth,n_paths,dt,seed\n");
    for (const auto& r : rows)
        out.printf("%s,%d,%s,%s,%d,%s,%llu\n", r.target.c_str(), r.start_id,
                   fmt17(r.estimate).c_str(), fmt17(r.ci_halfwidth).c_str(), r.n_paths,
                   fmt17(r.dt).c_str(), static_cast<unsigned long long>(r.seed));
}

void write_report_json(const std::string& path, const analysis::VerificationReport& report) {
    File out(path);
    out.puts("{\n");
    out.printf("  \"epsilon\": %s,\n", fmt17(report.epsilon).c_str());
    out.printf("  \"mesh_id\": \"%s\",\n", report.mesh_id.c_str());
    out.puts("  \"eigenvalues\": [");
    for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
        if (i) out.puts(", ");
        out.puts(fmt17(report.eigenvalues[i]));
    }
    out.puts("],\n");
    out.puts("  \"reference_constants\": {\n");
    out.puts("    \"epsilon_upper_bound\": 0.005,\n");
    out.puts("    \"test_function_epsilon_bound\": 0.000625,\n");
    out.puts("    \"mollifier_inner_radius_factor\": 400.0,\n");
    out.puts("    \"mollifier_outer_radius_factor\": 800.0,\n");
    out.puts("    \"sign_disc_radius\": 0.1,\n");
    out.puts("    \"nodal_component_min_diameter\": 1e-10,\n");
    out.puts("    \"cutoff_domain_diameter\": 1e-06\n");
    out.puts("  },\n");
    out.puts("  \"checks\": [\n");
    for (std::size_t i = 0; i < report.checks.size(); ++i) {
        const auto& c = report.checks[i];
        out.printf(
            "    {\"name\": \"%s\", \"pass\": %s, \"measured\": %s, \"threshold\": %s, "
            "\"margin\": %s, \"note\": \"%s\"}%s\n",
            c.name.c_str(), c.pass ? "true" : "false", fmt17(c.measured).c_str(),
            fmt17(c.threshold).c_str(), fmt17(c.margin).c_str(), json_escape(c.note).c_str(),
            i + 1 < report.checks.size() ? "," : "");
    }
    out.puts("  ],\n");
    out.printf("  \"all_pass\": %s\n}\n", report.all_pass() ? "true" : "false");
}

void write_contours_csv(const std::string& path, const std::vector<Real>& levels,
                        const std::vector<analysis::NodalCurve>& curves) {
    File out(path);
    out.puts("level,component,x,y\n");
    for (std::size_t l = 0; l < levels.size(); ++l)
        for (std::size_t c = 0; c < curves[l].polylines.size(); ++c)
            for (const auto& p : curves[l].polylines[c])
                out.printf("%s,%zu,%s,%s\n", fmt17(levels[l]).c_str(), c, fmt17(p.x()).c_str(),
                           fmt17(p.y()).c_str());
}

void write_vtk(const std::string& path, const meshing::Mesh& mesh, const fem::Vector& phi,
               const std::string& field_name) {
    File out(path);
    out.puts("# vtk DataFile Version 2.0\n");
    out.puts("hotspot-forge mesh\n");
    out.puts("ASCII\n");
    out.puts("DATASET UNSTRUCTURED_GRID\n");
    out.printf("POINTS %zu double\n", mesh.nodes.size());
    for (const auto& p : mesh.nodes)
        out.printf("%s %s 0\n", fmt17(p.x()).c_str(), fmt17(p.y()).c_str());
    out.printf("CELLS %zu %zu\n", mesh.triangles.size(), 4 * mesh.triangles.size());
    for (const auto& t : mesh.triangles) out.printf("3 %d %d %d\n", t[0], t[1], t[2]);
    out.printf("CELL_TYPES %zu\n", mesh.triangles.size());
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) out.puts("5\n");
    if (phi.size() == static_cast<Eigen::Index>(mesh.nodes.size())) {
        out.printf("POINT_DATA %zu\n", mesh.nodes.size());
        out.printf("SCALARS %s double 1\n", field_name.c_str());
        out.puts("LOOKUP_TABLE default\n");
        for (Eigen::Index i = 0; i < phi.size(); ++i) out.printf("%s\n", fmt17(phi[i]).c_str());
    }
}

void write_matrix_coord(const std::string& path, const fem::SparseMatrix& m) {
    File out(path);
    out.printf("%% %ld %ld %ld\n", static_cast<long>(m.rows()), static_cast<long>(m.cols()),
               static_cast<long>(m.nonZeros()));
    for (int k = 0; k < m.outerSize(); ++k)
        for (fem::SparseMatrix::InnerIterator it(m, k); it; ++it)
            out.printf("%ld %ld %s\n", static_cast<long>(it.row()), static_cast<long>(it.col()),
                       fmt17(it.value()).c_str());
}

}  // namespace hotspot::io
