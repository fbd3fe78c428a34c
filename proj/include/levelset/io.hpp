#pragma once

// Text outputs (CSV tables, legacy VTK grids, run manifests) and the
// version 2.2 ASCII mesh import for linear triangles.

#include "levelset/errors.hpp"
#include "levelset/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace levelset {

/// Full round-trip precision.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

inline void check_written(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace detail

/// Header row, then one row per record; cells already formatted.
inline void emit_csv_cells(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows, const std::string& path) {
    auto out = detail::open_output(path);
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw DomainError("emit_csv: row width does not match header");
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << '\n';
    }
    detail::check_written(out, path);
}

/// Numeric table with 17 significant digits per value.
inline void emit_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows,
                     const std::string& path) {
    std::vector<std::vector<std::string>> cells;
    cells.reserve(rows.size());
    for (const auto& row : rows) {
        std::vector<std::string> c;
        c.reserve(row.size());
        for (double v : row) c.push_back(format_double(v));
        cells.push_back(std::move(c));
    }
    emit_csv_cells(header, cells, path);
}

/// Parsed CSV: header and numeric rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = std::move(cells);
            first = false;
            continue;
        }
        std::vector<double> row;
        for (const auto& c : cells) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// Point-data arrays for a VTK file: name and one value per point.
using PointData = std::vector<std::pair<std::string, std::vector<double>>>;

/// Legacy ASCII structured grid. `dims` holds the number of points per
/// direction (unused directions 1); points in x-fastest order.
template <int Dim>
void emit_vtk_structured(const std::array<int, Dim>& dims, const std::vector<Vec<Dim>>& points,
                         const PointData& data, const std::string& path, const std::string& title = "levelset") {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    if (points.size() != n) throw DomainError("emit_vtk_structured: point count does not match dims");
    auto out = detail::open_output(path);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_GRID\nDIMENSIONS";
    for (int d = 0; d < 3; ++d) out << ' ' << (d < Dim ? dims[d] : 1);
    out << "\nPOINTS " << n << " double\n";
    for (const auto& p : points) {
        for (int d = 0; d < 3; ++d) out << (d ? " " : "") << format_double(d < Dim ? p[d] : 0.0);
        out << '\n';
    }
    out << "POINT_DATA " << n << '\n';
    for (const auto& [name, values] : data) {
        if (values.size() != n) throw DomainError("emit_vtk_structured: array '" + name + "' has wrong length");
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : values) out << format_double(v) << '\n';
    }
    detail::check_written(out, path);
}

/// Legacy ASCII unstructured grid of linear simplices.
template <int Dim>
void emit_vtk_simplices(const std::vector<Vec<Dim>>& points, const std::vector<std::array<int, Dim + 1>>& cells,
                        const PointData& data, const std::string& path, const std::string& title = "levelset") {
    auto out = detail::open_output(path);
    const std::size_t n = points.size();
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\nPOINTS " << n
        << " double\n";
    for (const auto& p : points) {
        for (int d = 0; d < 3; ++d) out << (d ? " " : "") << format_double(d < Dim ? p[d] : 0.0);
        out << '\n';
    }
    out << "CELLS " << cells.size() << ' ' << cells.size() * (Dim + 2) << '\n';
    for (const auto& c : cells) {
        out << Dim + 1;
        for (int v : c) out << ' ' << v;
        out << '\n';
    }
    const int type = Dim == 1 ? 3 : Dim == 2 ? 5 : 10;
    out << "CELL_TYPES " << cells.size() << '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) out << type << '\n';
    out << "POINT_DATA " << n << '\n';
    for (const auto& [name, values] : data) {
        if (values.size() != n) throw DomainError("emit_vtk_simplices: array '" + name + "' has wrong length");
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : values) out << format_double(v) << '\n';
    }
    detail::check_written(out, path);
}

/// Plain key = value listing, in the given order.
inline void emit_manifest(const std::vector<std::pair<std::string, std::string>>& entries,
                          const std::string& path) {
    auto out = detail::open_output(path);
    for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    detail::check_written(out, path);
}

/// Reads an ASCII version 2.2 mesh: $Nodes and $Elements blocks. 3-node
/// triangles become cells; points and lines are skipped; any other element
/// type is rejected. The z coordinate is ignored.
inline MeshPatch<2> read_gmsh22(std::istream& in) {
    std::string token;
    std::map<long, int> node_index;
    std::vector<Vec<2>> nodes;
    std::vector<std::array<int, 3>> cells;
    bool have_nodes = false, have_elements = false;
    while (in >> token) {
        if (token == "$MeshFormat") {
            double version = 0.0;
            int file_type = 0, size = 0;
            in >> version >> file_type >> size;
            if (version < 2.0 || version >= 3.0) throw DomainError("read_gmsh22: unsupported format version");
            if (file_type != 0) throw DomainError("read_gmsh22: binary files are not supported");
        } else if (token == "$Nodes") {
            long n = 0;
            in >> n;
            for (long i = 0; i < n; ++i) {
                long id = 0;
                double x = 0, y = 0, z = 0;
                if (!(in >> id >> x >> y >> z)) throw DomainError("read_gmsh22: truncated $Nodes block");
                node_index[id] = static_cast<int>(nodes.size());
                nodes.push_back({x, y});
            }
            have_nodes = true;
        } else if (token == "$Elements") {
            long n = 0;
            in >> n;
            for (long i = 0; i < n; ++i) {
                long id = 0;
                int type = 0, ntags = 0;
                if (!(in >> id >> type >> ntags)) throw DomainError("read_gmsh22: truncated $Elements block");
                for (int t = 0; t < ntags; ++t) {
                    long tag = 0;
                    in >> tag;
                }
                int count = 0;
                switch (type) {
                    case 15: count = 1; break;
                    case 1: count = 2; break;
                    case 2: count = 3; break;
                    default:
                        throw DomainError("read_gmsh22: unsupported element type " + std::to_string(type));
                }
                std::array<long, 3> ids{};
                for (int k = 0; k < count; ++k) in >> ids[k];
                if (!in) throw DomainError("read_gmsh22: truncated element record");
                if (type != 2) continue;
                std::array<int, 3> cell{};
                for (int k = 0; k < 3; ++k) {
                    const auto it = node_index.find(ids[k]);
                    if (it == node_index.end()) throw DomainError("read_gmsh22: element references unknown node");
                    cell[k] = it->second;
                }
                cells.push_back(cell);
            }
            have_elements = true;
        }
    }
    if (!have_nodes || !have_elements) throw DomainError("read_gmsh22: missing $Nodes or $Elements");
    // Drop nodes no triangle uses (geometry points, line-only nodes).
    std::vector<int> remap(nodes.size(), -1);
    std::vector<Vec<2>> used;
    for (auto& cell : cells)
        for (int& v : cell) {
            if (remap[v] < 0) {
                remap[v] = static_cast<int>(used.size());
                used.push_back(nodes[v]);
            }
            v = remap[v];
        }
    return MeshPatch<2>(std::move(used), std::move(cells));
}

inline MeshPatch<2> read_gmsh22(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    return read_gmsh22(in);
}

}  // namespace levelset
