#ifndef HMM_MESH_IO_HPP
#define HMM_MESH_IO_HPP

#include <iosfwd>
#include <string>

#include "hmm/mesh.hpp"

namespace hmm {

// Plain-text mesh format:
//   VERTICES
//   <count>
//   x y          (one per line)
//   CELLS
//   <count>
//   v0 v1 v2 ... (0-based ids, CCW, one cell per line)
// '#' starts a comment; blank lines are ignored.

void write_mesh(const PolytopalMesh& mesh, std::ostream& out);
void write_mesh_file(const PolytopalMesh& mesh, const std::string& path);

/// Re-derives all geometry through build_mesh. Throws ParseError with the
/// offending line number, or the build_mesh validation errors.
PolytopalMesh read_mesh(std::istream& in);
PolytopalMesh read_mesh_file(const std::string& path);

} // namespace hmm

#endif
