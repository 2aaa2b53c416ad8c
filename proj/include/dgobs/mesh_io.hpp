#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "dgobs/errors.hpp"
#include "dgobs/mesh.hpp"

namespace dgobs {

/// Legacy-VTK unstructured grid (ASCII, cell type 5 = triangle).
inline void write_vtk(const Mesh& mesh, std::ostream& os) {
    os << "# vtk DataFile Version 3.0\n";
    os << "dgobs mesh\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.num_vertices() << " double\n";
    os.precision(17);
    for (const Vec2& p : mesh.vertices) os << p.x << " " << p.y << " 0\n";
    os << "CELLS " << mesh.num_elements() << " " << 4 * mesh.num_elements() << "\n";
    for (const Element& e : mesh.elements)
        os << "3 " << e.v[0] << " " << e.v[1] << " " << e.v[2] << "\n";
    os << "CELL_TYPES " << mesh.num_elements() << "\n";
    for (int t = 0; t < mesh.num_elements(); ++t) os << "5\n";
}

inline void write_vtk(const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_vtk: cannot open " + path);
    write_vtk(mesh, os);
    if (!os) throw std::runtime_error("write_vtk: write failed: " + path);
}

/// Line-oriented text format used for golden tests:
///   vertices: <n>
///   <x> <y>            (n lines)
///   elements: <m>
///   <v0> <v1> <v2> <ref_edge> <generation>   (m lines)
inline void write_mesh_text(const Mesh& mesh, std::ostream& os) {
    os.precision(17);
    os << "vertices: " << mesh.num_vertices() << "\n";
    for (const Vec2& p : mesh.vertices) os << p.x << " " << p.y << "\n";
    os << "elements: " << mesh.num_elements() << "\n";
    for (const Element& e : mesh.elements)
        os << e.v[0] << " " << e.v[1] << " " << e.v[2] << " " << e.ref_edge << " "
           << e.generation << "\n";
}

inline Mesh read_mesh_text(std::istream& is) {
    Mesh mesh;
    std::string tag;
    int n = 0;
    if (!(is >> tag >> n) || tag != "vertices:")
        throw std::runtime_error("read_mesh_text: expected 'vertices: <n>'");
    mesh.vertices.resize(n);
    for (Vec2& p : mesh.vertices)
        if (!(is >> p.x >> p.y)) throw std::runtime_error("read_mesh_text: bad vertex line");
    if (!(is >> tag >> n) || tag != "elements:")
        throw std::runtime_error("read_mesh_text: expected 'elements: <m>'");
    mesh.elements.resize(n);
    for (Element& e : mesh.elements)
        if (!(is >> e.v[0] >> e.v[1] >> e.v[2] >> e.ref_edge >> e.generation))
            throw std::runtime_error("read_mesh_text: bad element line");
    return mesh;
}

} // namespace dgobs
