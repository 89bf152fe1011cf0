#ifndef HMM_MESH_HPP
#define HMM_MESH_HPP

#include <array>
#include <string>
#include <vector>

#include "hmm/geom.hpp"

namespace hmm {

struct Cell {
    std::vector<int> vertex_ids;   // counterclockwise
    std::vector<int> face_ids;     // face i joins vertex i and vertex i+1
    Vec2 barycenter = Vec2::Zero();  // center of mass x_K
    double area = 0.0;               // |K|
    double diameter = 0.0;
};

struct Face {
    std::array<int, 2> vertex_ids{};
    double measure = 0.0;            // edge length |sigma|
    Vec2 midpoint = Vec2::Zero();
    int owner = -1;
    int neighbor = -1;               // -1 on the boundary
    Vec2 normal = Vec2::Zero();      // unit, outward from owner
    bool is_boundary = true;
};

/// Immutable after construction; safe for concurrent reads.
struct PolytopalMesh {
    std::vector<Vec2> vertices;
    std::vector<Cell> cells;
    std::vector<Face> faces;
    double h = 0.0;                  // max cell diameter

    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }
    int n_faces() const { return static_cast<int>(faces.size()); }
};

enum class MeshFamilyTag { Triangular, Hexagonal, DistortedQuad, LocallyRefinedNonConforming };

struct MeshFamily {
    MeshFamilyTag tag;
    int level;  // >= 1; successive levels refine
};

/// Parses a family tag from its CLI spelling ("triangular", "hexagonal",
/// "distorted", "nonconforming"). Throws ValidationError on unknown names.
MeshFamilyTag parse_family_tag(const std::string& name);
std::string family_tag_name(MeshFamilyTag tag);

/// Builds a mesh from raw vertices and per-cell CCW vertex lists.
/// Faces are deduplicated by vertex pair; all derived geometry is computed.
/// Throws NonManifoldFace, DegenerateCell, InconsistentOrientation,
/// ValidationError.
PolytopalMesh build_mesh(std::vector<Vec2> vertices,
                         const std::vector<std::vector<int>>& cell_vertex_lists);

/// Max cell diameter.
double mesh_size(const PolytopalMesh& mesh);

/// Deterministic generators for the four families. Level 1 matches the
/// coarsest published mesh sizes; refinement shrinks h per family.
/// Throws UnsupportedLevel when the level would exceed 1e6 cells.
PolytopalMesh generate(const MeshFamily& family);

} // namespace hmm

#endif
