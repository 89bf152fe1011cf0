#include "hmm/mesh.hpp"

#include <algorithm>
#include <map>

#include "hmm/errors.hpp"

namespace hmm {

MeshFamilyTag parse_family_tag(const std::string& name) {
    if (name == "triangular") return MeshFamilyTag::Triangular;
    if (name == "hexagonal") return MeshFamilyTag::Hexagonal;
    if (name == "distorted") return MeshFamilyTag::DistortedQuad;
    if (name == "nonconforming") return MeshFamilyTag::LocallyRefinedNonConforming;
    throw ValidationError("unknown mesh family: " + name);
}

std::string family_tag_name(MeshFamilyTag tag) {
    switch (tag) {
        case MeshFamilyTag::Triangular: return "triangular";
        case MeshFamilyTag::Hexagonal: return "hexagonal";
        case MeshFamilyTag::DistortedQuad: return "distorted";
        case MeshFamilyTag::LocallyRefinedNonConforming: return "nonconforming";
    }
    return "?";
}

PolytopalMesh build_mesh(std::vector<Vec2> vertices,
                         const std::vector<std::vector<int>>& cell_vertex_lists) {
    PolytopalMesh mesh;
    mesh.vertices = std::move(vertices);
    const int nv = mesh.n_vertices();

    mesh.cells.reserve(cell_vertex_lists.size());
    std::map<std::pair<int, int>, int> face_of_pair;

    for (size_t ci = 0; ci < cell_vertex_lists.size(); ++ci) {
        const auto& ids = cell_vertex_lists[ci];
        if (ids.size() < 3)
            throw DegenerateCell("cell " + std::to_string(ci) + " has fewer than 3 vertices");
        std::vector<Vec2> pts;
        pts.reserve(ids.size());
        for (int id : ids) {
            if (id < 0 || id >= nv)
                throw ValidationError("cell " + std::to_string(ci) + " references vertex " +
                                      std::to_string(id) + " out of range");
            pts.push_back(mesh.vertices[id]);
        }
        const double signed_area = polygon_signed_area(pts);
        if (signed_area < 0.0 && signed_area < -1e-14)
            throw InconsistentOrientation("cell " + std::to_string(ci) +
                                          " is listed clockwise (negative area)");
        if (std::abs(signed_area) <= 1e-14)
            throw DegenerateCell("cell " + std::to_string(ci) + " has area <= 1e-14");

        Cell cell;
        cell.vertex_ids = ids;
        cell.area = signed_area;
        cell.barycenter = polygon_centroid(pts);
        cell.diameter = polygon_diameter(pts);
        cell.face_ids.resize(ids.size());

        for (size_t e = 0; e < ids.size(); ++e) {
            const int a = ids[e];
            const int b = ids[(e + 1) % ids.size()];
            if (a == b)
                throw DegenerateCell("cell " + std::to_string(ci) + " has a zero-length edge");
            const auto key = std::minmax(a, b);
            auto it = face_of_pair.find(key);
            if (it == face_of_pair.end()) {
                Face face;
                face.vertex_ids = {a, b};
                const Vec2 pa = mesh.vertices[a], pb = mesh.vertices[b];
                face.measure = (pb - pa).norm();
                if (face.measure <= 1e-14)
                    throw DegenerateCell("face between vertices " + std::to_string(a) + "," +
                                         std::to_string(b) + " has zero length");
                face.midpoint = 0.5 * (pa + pb);
                // CCW traversal a->b of the owner: outward normal is the
                // -90 degree rotation of the edge direction.
                face.normal = Vec2((pb - pa).y(), -(pb - pa).x()) / face.measure;
                face.owner = static_cast<int>(ci);
                face.neighbor = -1;
                face.is_boundary = true;
                const int fid = mesh.n_faces();
                face_of_pair.emplace(key, fid);
                mesh.faces.push_back(face);
                cell.face_ids[e] = fid;
            } else {
                Face& face = mesh.faces[it->second];
                if (face.neighbor >= 0)
                    throw NonManifoldFace("face between vertices " + std::to_string(a) + "," +
                                          std::to_string(b) + " is shared by more than 2 cells");
                // The second cell must traverse the edge in the opposite
                // direction, otherwise the two cells overlap.
                if (face.vertex_ids[0] == a)
                    throw InconsistentOrientation(
                        "face between vertices " + std::to_string(a) + "," + std::to_string(b) +
                        " traversed in the same direction by both cells");
                face.neighbor = static_cast<int>(ci);
                face.is_boundary = false;
                cell.face_ids[e] = it->second;
            }
        }
        mesh.cells.push_back(std::move(cell));
        mesh.h = std::max(mesh.h, mesh.cells.back().diameter);
    }

    // x_K must see every face from the inside (positive orthogonal distance).
    for (int ci = 0; ci < mesh.n_cells(); ++ci) {
        const Cell& cell = mesh.cells[ci];
        for (int fid : cell.face_ids) {
            const Face& face = mesh.faces[fid];
            const double sign = (face.owner == ci) ? 1.0 : -1.0;
            const double d = sign * face.normal.dot(face.midpoint - cell.barycenter);
            if (d <= 0.0)
                throw ValidationError("cell " + std::to_string(ci) +
                                      " barycenter is not strictly inside (face " +
                                      std::to_string(fid) + ")");
        }
    }
    return mesh;
}

double mesh_size(const PolytopalMesh& mesh) { return mesh.h; }

} // namespace hmm
