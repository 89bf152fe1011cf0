#include "hmm/mesh_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "hmm/errors.hpp"

namespace hmm {

void write_mesh(const PolytopalMesh& mesh, std::ostream& out) {
    out << "# polytopal mesh, unit square\n";
    out << "VERTICES\n" << mesh.n_vertices() << "\n";
    out.precision(17);
    for (const Vec2& v : mesh.vertices) out << v.x() << " " << v.y() << "\n";
    out << "CELLS\n" << mesh.n_cells() << "\n";
    for (const Cell& c : mesh.cells) {
        for (size_t k = 0; k < c.vertex_ids.size(); ++k)
            out << (k ? " " : "") << c.vertex_ids[k];
        out << "\n";
    }
}

void write_mesh_file(const PolytopalMesh& mesh, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw Error("cannot open " + path + " for writing");
    write_mesh(mesh, f);
}

namespace {

// Reads the next meaningful line (strips comments / blanks).
bool next_line(std::istream& in, std::string& line, int& line_no) {
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos) continue;
        return true;
    }
    return false;
}

} // namespace

PolytopalMesh read_mesh(std::istream& in) {
    std::string line;
    int line_no = 0;

    if (!next_line(in, line, line_no) || line.find("VERTICES") == std::string::npos)
        throw ParseError("expected VERTICES section", line_no);
    if (!next_line(in, line, line_no)) throw ParseError("expected vertex count", line_no);
    long long nv = -1;
    {
        std::istringstream ss(line);
        if (!(ss >> nv) || nv < 0) throw ParseError("bad vertex count", line_no);
    }
    std::vector<Vec2> verts;
    verts.reserve(nv);
    for (long long i = 0; i < nv; ++i) {
        if (!next_line(in, line, line_no)) throw ParseError("unexpected end of vertex list", line_no);
        std::istringstream ss(line);
        double x, y;
        if (!(ss >> x >> y)) throw ParseError("bad vertex coordinates", line_no);
        verts.emplace_back(x, y);
    }

    if (!next_line(in, line, line_no) || line.find("CELLS") == std::string::npos)
        throw ParseError("expected CELLS section", line_no);
    if (!next_line(in, line, line_no)) throw ParseError("expected cell count", line_no);
    long long nc = -1;
    {
        std::istringstream ss(line);
        if (!(ss >> nc) || nc < 0) throw ParseError("bad cell count", line_no);
    }
    std::vector<std::vector<int>> cells;
    cells.reserve(nc);
    for (long long i = 0; i < nc; ++i) {
        if (!next_line(in, line, line_no)) throw ParseError("unexpected end of cell list", line_no);
        std::istringstream ss(line);
        std::vector<int> ids;
        long long id;
        while (ss >> id) {
            if (id < 0 || id >= nv)
                throw ParseError("cell references missing vertex id " + std::to_string(id), line_no);
            ids.push_back(static_cast<int>(id));
        }
        if (ids.size() < 3) throw ParseError("cell needs at least 3 vertex ids", line_no);
        cells.push_back(std::move(ids));
    }
    return build_mesh(std::move(verts), cells);
}

PolytopalMesh read_mesh_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path);
    return read_mesh(f);
}

} // namespace hmm
