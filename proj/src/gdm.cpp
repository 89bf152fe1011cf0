#include "hmm/gdm.hpp"

#include <cmath>

#include "hmm/errors.hpp"

namespace hmm {

Discretization::Discretization(const PolytopalMesh& mesh) : mesh_(&mesh) {
    const int nc = mesh.n_cells();
    cell_offset_.resize(nc + 1, 0);
    for (int c = 0; c < nc; ++c)
        cell_offset_[c + 1] = cell_offset_[c] + static_cast<int>(mesh.cells[c].face_ids.size());
    const int total = cell_offset_[nc];
    half_diamonds_.resize(total);
    normals_.resize(total);
    to_face_.resize(total);

    for (int c = 0; c < nc; ++c) {
        const Cell& cell = mesh.cells[c];
        for (size_t i = 0; i < cell.face_ids.size(); ++i) {
            const int fid = cell.face_ids[i];
            const Face& face = mesh.faces[fid];
            const int idx = cell_offset_[c] + static_cast<int>(i);
            const double sign = (face.owner == c) ? 1.0 : -1.0;
            normals_[idx] = sign * face.normal;
            to_face_[idx] = face.midpoint - cell.barycenter;
            const double d = normals_[idx].dot(to_face_[idx]);
            half_diamonds_[idx] = {c, fid, d, 0.5 * face.measure * d};
        }
    }
    for (int f = 0; f < mesh.n_faces(); ++f)
        if (mesh.faces[f].is_boundary) boundary_faces_.push_back(f);
}

int Discretization::local_index(int cell, int face) const {
    const auto& ids = mesh_->cells[cell].face_ids;
    for (size_t i = 0; i < ids.size(); ++i)
        if (ids[i] == face) return static_cast<int>(i);
    throw ValidationError("face " + std::to_string(face) + " does not belong to cell " +
                          std::to_string(cell));
}

double Discretization::reconstruct(const DofVector& dofs, int cell) const {
    return dofs[cell_dof(cell)];
}

Vec2 Discretization::consistent_cell_gradient(const DofVector& dofs, int cell) const {
    const Cell& c = mesh_->cells[cell];
    // Subtracting the cell value changes nothing (the normals sum to zero)
    // but avoids cancellation between large face values on thin cells.
    const double vK = dofs[cell_dof(cell)];
    Vec2 g = Vec2::Zero();
    for (size_t i = 0; i < c.face_ids.size(); ++i) {
        const Face& face = mesh_->faces[c.face_ids[i]];
        g += face.measure * (dofs[face_dof(c.face_ids[i])] - vK) *
             normals_[cell_offset_[cell] + i];
    }
    return g / c.area;
}

Vec2 Discretization::stabilized_gradient_local(const DofVector& dofs, int cell,
                                               int local_face) const {
    const Cell& c = mesh_->cells[cell];
    const int idx = cell_offset_[cell] + local_face;
    const int fid = c.face_ids[local_face];
    const Vec2 g = consistent_cell_gradient(dofs, cell);
    const double residual =
        dofs[face_dof(fid)] - dofs[cell_dof(cell)] - g.dot(to_face_[idx]);
    return g + (std::sqrt(2.0) / half_diamonds_[idx].distance) * residual * normals_[idx];
}

Vec2 Discretization::stabilized_gradient(const DofVector& dofs, int cell, int face) const {
    return stabilized_gradient_local(dofs, cell, local_index(cell, face));
}

Eigen::MatrixXd Discretization::local_diffusion_matrix(int cell, double lambda) const {
    const Cell& c = mesh_->cells[cell];
    const int m = static_cast<int>(c.face_ids.size());
    // Gradient of the local basis on half-diamond i: rows of Gx/Gy give the
    // coefficients on local dofs [cell, face_1..face_m].
    Eigen::MatrixXd Gx = Eigen::MatrixXd::Zero(m, m + 1);
    Eigen::MatrixXd Gy = Eigen::MatrixXd::Zero(m, m + 1);
    const double inv_area = 1.0 / c.area;
    for (int i = 0; i < m; ++i) {
        const int idx = cell_offset_[cell] + i;
        const Vec2& ni = normals_[idx];
        const double w = std::sqrt(2.0) / half_diamonds_[idx].distance;
        // consistent part and its projection inside the stabilisation residual
        for (int j = 0; j < m; ++j) {
            const int jdx = cell_offset_[cell] + j;
            const Face& fj = mesh_->faces[c.face_ids[j]];
            const Vec2 gj = inv_area * fj.measure * normals_[jdx];
            const double proj = gj.dot(to_face_[idx]);
            Gx(i, j + 1) += gj.x() - w * proj * ni.x();
            Gy(i, j + 1) += gj.y() - w * proj * ni.y();
        }
        Gx(i, i + 1) += w * ni.x();
        Gy(i, i + 1) += w * ni.y();
        Gx(i, 0) -= w * ni.x();
        Gy(i, 0) -= w * ni.y();
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int i = 0; i < m; ++i) {
        const double wi = lambda * half_diamonds_[cell_offset_[cell] + i].measure;
        A += wi * (Gx.row(i).transpose() * Gx.row(i) + Gy.row(i).transpose() * Gy.row(i));
    }
    return A;
}

DofVector Discretization::interpolate_initial(const ScalarField& c0) const {
    DofVector v(n_dofs());
    for (int c = 0; c < n_cells(); ++c) v[cell_dof(c)] = c0(mesh_->cells[c].barycenter);
    for (int f = 0; f < n_faces(); ++f) v[face_dof(f)] = c0(mesh_->faces[f].midpoint);
    return v;
}

std::vector<double> Discretization::fluxes(const DofVector& dofs, int cell) const {
    const Cell& c = mesh_->cells[cell];
    const int m = static_cast<int>(c.face_ids.size());
    Eigen::VectorXd local(m + 1);
    local[0] = dofs[cell_dof(cell)];
    for (int i = 0; i < m; ++i) local[i + 1] = dofs[face_dof(c.face_ids[i])];
    const Eigen::VectorXd r = local_diffusion_matrix(cell) * local;
    std::vector<double> F(m);
    // Testing with the indicator of face sigma: |sigma| F_{K,sigma} (0 - 1)
    // equals the sigma-row of the local form.
    for (int i = 0; i < m; ++i) F[i] = -r[i + 1] / mesh_->faces[c.face_ids[i]].measure;
    return F;
}

Eigen::SparseMatrix<double> Discretization::gram_matrix(double lambda) const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<size_t>(cell_offset_[n_cells()]) * 8);
    for (int c = 0; c < n_cells(); ++c) {
        const Cell& cell = mesh_->cells[c];
        const int m = static_cast<int>(cell.face_ids.size());
        const Eigen::MatrixXd A = local_diffusion_matrix(c, lambda);
        std::vector<int> dof(m + 1);
        dof[0] = cell_dof(c);
        for (int i = 0; i < m; ++i) dof[i + 1] = face_dof(cell.face_ids[i]);
        for (int i = 0; i <= m; ++i)
            for (int j = 0; j <= m; ++j)
                if (A(i, j) != 0.0) trip.emplace_back(dof[i], dof[j], A(i, j));
    }
    Eigen::SparseMatrix<double> S(n_dofs(), n_dofs());
    S.setFromTriplets(trip.begin(), trip.end());
    return S;
}

double Discretization::gradient_norm(const DofVector& dofs) const {
    double acc = 0.0;
    for (int c = 0; c < n_cells(); ++c) {
        const int m = n_cell_faces(c);
        const Vec2 g = consistent_cell_gradient(dofs, c);
        for (int i = 0; i < m; ++i) {
            const int idx = cell_offset_[c] + i;
            const double residual = dofs[face_dof(mesh_->cells[c].face_ids[i])] -
                                    dofs[cell_dof(c)] - g.dot(to_face_[idx]);
            const Vec2 gi =
                g + (std::sqrt(2.0) / half_diamonds_[idx].distance) * residual * normals_[idx];
            acc += half_diamonds_[idx].measure * gi.squaredNorm();
        }
    }
    return std::sqrt(acc);
}

double Discretization::reconstruction_norm(const DofVector& dofs) const {
    double acc = 0.0;
    for (int c = 0; c < n_cells(); ++c)
        acc += mesh_->cells[c].area * dofs[cell_dof(c)] * dofs[cell_dof(c)];
    return std::sqrt(acc);
}

} // namespace hmm
