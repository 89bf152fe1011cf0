#ifndef HMM_GDM_HPP
#define HMM_GDM_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "hmm/mesh.hpp"

namespace hmm {

/// Element of the hybrid space: one value per cell followed by one value per
/// face. Boundary entries are 0 for the homogeneous space, or hold the
/// prescribed trace in non-homogeneous runs.
using DofVector = Eigen::VectorXd;

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

/// Per-cell geometry of the sub-triangle spanned by x_K and one face.
struct HalfDiamond {
    int cell;
    int face;
    double distance;   // orthogonal distance d_{K,sigma} from x_K to the face line
    double measure;    // |sigma| * d / 2
};

/// Hybrid mimetic mixed discretisation of a polytopal mesh: cell + face
/// unknowns, piecewise-constant reconstruction, stabilised piecewise-constant
/// gradient (one value per half-diamond). All queries are pure and safe for
/// concurrent use.
class Discretization {
public:
    explicit Discretization(const PolytopalMesh& mesh);
    // The discretisation only references the mesh; it must outlive this
    // object, so temporaries are rejected.
    explicit Discretization(PolytopalMesh&&) = delete;

    const PolytopalMesh& mesh() const { return *mesh_; }
    int n_cells() const { return mesh_->n_cells(); }
    int n_faces() const { return mesh_->n_faces(); }
    int n_dofs() const { return n_cells() + n_faces(); }
    int cell_dof(int cell) const { return cell; }
    int face_dof(int face) const { return n_cells() + face; }
    const std::vector<int>& boundary_faces() const { return boundary_faces_; }

    int n_cell_faces(int cell) const { return static_cast<int>(mesh_->cells[cell].face_ids.size()); }
    const HalfDiamond& half_diamond(int cell, int local_face) const {
        return half_diamonds_[cell_offset_[cell] + local_face];
    }
    /// Outward normal of local face `i` as seen from `cell`.
    const Vec2& outward_normal(int cell, int local_face) const {
        return normals_[cell_offset_[cell] + local_face];
    }

    /// Pi_D: the cell value (piecewise-constant reconstruction).
    double reconstruct(const DofVector& dofs, int cell) const;

    /// (1/|K|) sum |sigma| phi_sigma n_{K,sigma}; exact for face-midpoint
    /// interpolants of affine functions.
    Vec2 consistent_cell_gradient(const DofVector& dofs, int cell) const;

    /// Value of grad_D on the half-diamond of (cell, face): consistent part
    /// plus (sqrt(2)/d) (phi_sigma - phi_K - G_K . (xbar - x_K)) n_{K,sigma}.
    Vec2 stabilized_gradient(const DofVector& dofs, int cell, int face) const;
    Vec2 stabilized_gradient_local(const DofVector& dofs, int cell, int local_face) const;

    /// Local Gram matrix of grad_D over the cell, dof order [cell, faces in
    /// F_K order], scaled by `lambda`. Symmetric PSD with constants in the
    /// kernel.
    Eigen::MatrixXd local_diffusion_matrix(int cell, double lambda = 1.0) const;

    /// J_D: cell dofs from barycenters, face dofs from midpoints (boundary
    /// faces included).
    DofVector interpolate_initial(const ScalarField& c0) const;

    /// Numerical fluxes F_{K,sigma} recovered from the local matrix
    /// (lambda = 1), one per face of the cell in F_K order.
    std::vector<double> fluxes(const DofVector& dofs, int cell) const;

    /// Assembled Gram matrix of grad_D over all dofs (no boundary
    /// elimination), scaled by `lambda`.
    Eigen::SparseMatrix<double> gram_matrix(double lambda = 1.0) const;

    /// sqrt(integral of |grad_D u|^2); a norm on the homogeneous space.
    double gradient_norm(const DofVector& dofs) const;

    /// L2 norm of Pi_D u (cell values weighted by areas).
    double reconstruction_norm(const DofVector& dofs) const;

private:
    const PolytopalMesh* mesh_;
    std::vector<int> cell_offset_;           // into the flat per-(cell,face) arrays
    std::vector<HalfDiamond> half_diamonds_;
    std::vector<Vec2> normals_;              // outward from the cell
    std::vector<Vec2> to_face_;              // xbar_sigma - x_K
    std::vector<int> boundary_faces_;
    int local_index(int cell, int face) const;
};

} // namespace hmm

#endif
