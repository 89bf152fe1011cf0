#include "hmm/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "hmm/errors.hpp"

namespace hmm {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct FreeDofs {
    std::vector<int> to_free;   // dof -> free index or -1
    std::vector<int> to_dof;    // free index -> dof
};

FreeDofs free_dofs(const Discretization& disc) {
    FreeDofs fd;
    fd.to_free.assign(disc.n_dofs(), 0);
    for (int f : disc.boundary_faces()) fd.to_free[disc.face_dof(f)] = -1;
    for (int d = 0; d < disc.n_dofs(); ++d) {
        if (fd.to_free[d] < 0) continue;
        fd.to_free[d] = static_cast<int>(fd.to_dof.size());
        fd.to_dof.push_back(d);
    }
    return fd;
}

Eigen::SparseMatrix<double> restrict_to_free(const Eigen::SparseMatrix<double>& S,
                                             const FreeDofs& fd) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(S.nonZeros());
    for (int k = 0; k < S.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(S, k); it; ++it) {
            const int r = fd.to_free[it.row()], c = fd.to_free[it.col()];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
        }
    const int n = static_cast<int>(fd.to_dof.size());
    Eigen::SparseMatrix<double> Sf(n, n);
    Sf.setFromTriplets(trip.begin(), trip.end());
    return Sf;
}

/// Coefficient rows of the per-half-diamond gradient on the local dofs
/// [cell, face_1..face_m]: row i of (Gx, Gy) is the gradient on half-diamond
/// i. Mirrors the local Gram matrix of the discretisation.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> gradient_rows(const Discretization& disc,
                                                          int cell) {
    const Cell& c = disc.mesh().cells[cell];
    const int m = disc.n_cell_faces(cell);
    Eigen::MatrixXd Gx = Eigen::MatrixXd::Zero(m, m + 1);
    Eigen::MatrixXd Gy = Eigen::MatrixXd::Zero(m, m + 1);
    const double inv_area = 1.0 / c.area;
    for (int i = 0; i < m; ++i) {
        const Vec2& ni = disc.outward_normal(cell, i);
        const Vec2 to_face = disc.mesh().faces[c.face_ids[i]].midpoint - c.barycenter;
        const double w = std::sqrt(2.0) / disc.half_diamond(cell, i).distance;
        for (int j = 0; j < m; ++j) {
            const Face& fj = disc.mesh().faces[c.face_ids[j]];
            const Vec2 gj = inv_area * fj.measure * disc.outward_normal(cell, j);
            const double proj = gj.dot(to_face);
            Gx(i, j + 1) += gj.x() - w * proj * ni.x();
            Gy(i, j + 1) += gj.y() - w * proj * ni.y();
        }
        Gx(i, i + 1) += w * ni.x();
        Gy(i, i + 1) += w * ni.y();
        Gx(i, 0) -= w * ni.x();
        Gy(i, 0) -= w * ni.y();
    }
    return {Gx, Gy};
}

/// Fan triangle of cell `c` behind local face i: (x_K, v_i, v_{i+1}).
std::array<Vec2, 3> fan_triangle(const PolytopalMesh& mesh, int cell, int i) {
    const Cell& c = mesh.cells[cell];
    const int nv = static_cast<int>(c.vertex_ids.size());
    return {c.barycenter, mesh.vertices[c.vertex_ids[i]],
            mesh.vertices[c.vertex_ids[(i + 1) % nv]]};
}

} // namespace

double coercivity_constant(const Discretization& disc) {
    const FreeDofs fd = free_dofs(disc);
    const int n = static_cast<int>(fd.to_dof.size());
    if (n == 0) throw EigSolveFailed("no free degrees of freedom");
    const Eigen::SparseMatrix<double> Sf = restrict_to_free(disc.gram_matrix(), fd);

    // Cell mass diagonal in free numbering (zero on face dofs).
    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < disc.n_cells(); ++c)
        mass[fd.to_free[disc.cell_dof(c)]] = disc.mesh().cells[c].area;

    if (n <= 2500) {
        Eigen::MatrixXd M = mass.asDiagonal();
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::MatrixXd(Sf));
        if (es.info() != Eigen::Success)
            throw EigSolveFailed("generalized eigen solve did not converge");
        const double mu = es.eigenvalues().maxCoeff();
        if (!(mu > 0.0)) throw EigSolveFailed("nonpositive leading eigenvalue");
        return std::sqrt(mu);
    }

    // Power iteration on S^{-1} M for the leading eigenpair of M u = mu S u.
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(Sf);
    if (lu.info() != Eigen::Success)
        throw EigSolveFailed("factorization of the gradient Gram matrix failed");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (int c = 0; c < disc.n_cells(); ++c) x[fd.to_free[disc.cell_dof(c)]] = 1.0;
    double mu = 0.0;
    for (int it = 0; it < 1000; ++it) {
        Eigen::VectorXd y = lu.solve(mass.cwiseProduct(x));
        y /= y.norm();
        const Eigen::VectorXd My = mass.cwiseProduct(y);
        const Eigen::VectorXd Sy = Sf * y;
        const double mu_new = y.dot(My) / y.dot(Sy);
        const double res = (My - mu_new * Sy).norm();
        x = y;
        if (std::abs(mu_new - mu) <= 1e-12 * mu_new && res <= 1e-8 * My.norm()) {
            if (!(mu_new > 0.0)) throw EigSolveFailed("nonpositive leading eigenvalue");
            return std::sqrt(mu_new);
        }
        mu = mu_new;
    }
    throw EigSolveFailed("power iteration did not converge");
}

DofVector interpolant_PD(const Discretization& disc, const ScalarField& w,
                         const VectorField& grad_w) {
    const FreeDofs fd = free_dofs(disc);
    const int n = static_cast<int>(fd.to_dof.size());
    const PolytopalMesh& mesh = disc.mesh();

    Eigen::SparseMatrix<double> K = restrict_to_free(disc.gram_matrix(), fd);
    std::vector<Eigen::Triplet<double>> mass;
    for (int c = 0; c < disc.n_cells(); ++c) {
        const int i = fd.to_free[disc.cell_dof(c)];
        mass.emplace_back(i, i, mesh.cells[c].area);
    }
    Eigen::SparseMatrix<double> M(n, n);
    M.setFromTriplets(mass.begin(), mass.end());
    K += M;

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(disc.n_dofs());
    for (int c = 0; c < disc.n_cells(); ++c) {
        const int m = disc.n_cell_faces(c);
        const auto [Gx, Gy] = gradient_rows(disc, c);
        std::vector<int> dof(m + 1);
        dof[0] = disc.cell_dof(c);
        for (int i = 0; i < m; ++i) dof[i + 1] = disc.face_dof(mesh.cells[c].face_ids[i]);
        for (int i = 0; i < m; ++i) {
            const auto tri = fan_triangle(mesh, c, i);
            const double gx = triangle_quad(tri[0], tri[1], tri[2],
                                            [&](const Vec2& x) { return grad_w(x).x(); });
            const double gy = triangle_quad(tri[0], tri[1], tri[2],
                                            [&](const Vec2& x) { return grad_w(x).y(); });
            for (int j = 0; j <= m; ++j) rhs[dof[j]] += Gx(i, j) * gx + Gy(i, j) * gy;
            rhs[dof[0]] += triangle_quad(tri[0], tri[1], tri[2], w);
        }
    }
    Eigen::VectorXd rf(n);
    for (int i = 0; i < n; ++i) rf[i] = rhs[fd.to_dof[i]];

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success)
        throw LinearSolveFailed("factorization of the interpolation system failed");
    const Eigen::VectorXd uf = lu.solve(rf);

    DofVector u = DofVector::Zero(disc.n_dofs());
    for (int i = 0; i < n; ++i) u[fd.to_dof[i]] = uf[i];
    return u;
}

double consistency_defect(const Discretization& disc, const ScalarField& w,
                          const VectorField& grad_w) {
    const DofVector u = interpolant_PD(disc, w, grad_w);
    const PolytopalMesh& mesh = disc.mesh();
    double func2 = 0.0, grad2 = 0.0;
    for (int c = 0; c < disc.n_cells(); ++c) {
        const double uc = u[disc.cell_dof(c)];
        for (int i = 0; i < disc.n_cell_faces(c); ++i) {
            const auto tri = fan_triangle(mesh, c, i);
            func2 += triangle_quad(tri[0], tri[1], tri[2], [&](const Vec2& x) {
                const double d = uc - w(x);
                return d * d;
            });
            const Vec2 g = disc.stabilized_gradient_local(u, c, i);
            grad2 += triangle_quad(tri[0], tri[1], tri[2], [&](const Vec2& x) {
                return (g - grad_w(x)).squaredNorm();
            });
        }
    }
    return std::sqrt(func2) + std::sqrt(grad2);
}

double limit_conformity_defect(const Discretization& disc, const VectorField& xi,
                               const ScalarField& div_xi) {
    const FreeDofs fd = free_dofs(disc);
    const int n = static_cast<int>(fd.to_dof.size());
    const PolytopalMesh& mesh = disc.mesh();

    Eigen::VectorXd r = Eigen::VectorXd::Zero(disc.n_dofs());
    for (int c = 0; c < disc.n_cells(); ++c) {
        const int m = disc.n_cell_faces(c);
        const auto [Gx, Gy] = gradient_rows(disc, c);
        std::vector<int> dof(m + 1);
        dof[0] = disc.cell_dof(c);
        for (int i = 0; i < m; ++i) dof[i + 1] = disc.face_dof(mesh.cells[c].face_ids[i]);
        for (int i = 0; i < m; ++i) {
            const auto tri = fan_triangle(mesh, c, i);
            const double xx = triangle_quad(tri[0], tri[1], tri[2],
                                            [&](const Vec2& x) { return xi(x).x(); });
            const double xy = triangle_quad(tri[0], tri[1], tri[2],
                                            [&](const Vec2& x) { return xi(x).y(); });
            for (int j = 0; j <= m; ++j) r[dof[j]] += Gx(i, j) * xx + Gy(i, j) * xy;
            r[dof[0]] += triangle_quad(tri[0], tri[1], tri[2], div_xi);
        }
    }
    Eigen::VectorXd rf(n);
    for (int i = 0; i < n; ++i) rf[i] = r[fd.to_dof[i]];

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(restrict_to_free(disc.gram_matrix(), fd));
    if (lu.info() != Eigen::Success)
        throw LinearSolveFailed("factorization of the gradient Gram matrix failed");
    const Eigen::VectorXd z = lu.solve(rf);
    return std::sqrt(std::max(rf.dot(z), 0.0));
}

std::pair<double, double> l2_error_solution(const Discretization& disc, const DofVector& dofs,
                                            const ScalarField& exact) {
    const PolytopalMesh& mesh = disc.mesh();
    double err2 = 0.0, norm2 = 0.0;
    for (int c = 0; c < disc.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        double integral = 0.0;
        for (int i = 0; i < static_cast<int>(cell.vertex_ids.size()); ++i) {
            const auto tri = fan_triangle(mesh, c, i);
            integral += triangle_quad(tri[0], tri[1], tri[2], exact);
            norm2 += triangle_quad(tri[0], tri[1], tri[2], [&](const Vec2& x) {
                const double v = exact(x);
                return v * v;
            });
        }
        const double d = integral / cell.area - dofs[disc.cell_dof(c)];
        err2 += cell.area * d * d;
    }
    const double abs_err = std::sqrt(err2);
    const double norm = std::sqrt(norm2);
    return {abs_err, norm > 1e-300 ? abs_err / norm : abs_err};
}

std::pair<double, double> l2_error_gradient(const Discretization& disc, const DofVector& dofs,
                                            const VectorField& exact_grad) {
    const PolytopalMesh& mesh = disc.mesh();
    double err2 = 0.0, norm2 = 0.0;
    for (int c = 0; c < disc.n_cells(); ++c) {
        for (int i = 0; i < disc.n_cell_faces(c); ++i) {
            const auto tri = fan_triangle(mesh, c, i);
            const double area = disc.half_diamond(c, i).measure;
            const Vec2 avg(triangle_quad(tri[0], tri[1], tri[2],
                                         [&](const Vec2& x) { return exact_grad(x).x(); }) /
                               area,
                           triangle_quad(tri[0], tri[1], tri[2],
                                         [&](const Vec2& x) { return exact_grad(x).y(); }) /
                               area);
            err2 += area * (disc.stabilized_gradient_local(dofs, c, i) - avg).squaredNorm();
            norm2 += triangle_quad(tri[0], tri[1], tri[2],
                                   [&](const Vec2& x) { return exact_grad(x).squaredNorm(); });
        }
    }
    const double abs_err = std::sqrt(err2);
    const double norm = std::sqrt(norm2);
    return {abs_err, norm > 1e-300 ? abs_err / norm : abs_err};
}

std::vector<double> rates(const std::vector<double>& errors, const std::vector<double>& hs) {
    if (errors.size() != hs.size() || errors.size() < 2)
        throw ValidationError("rates needs two equally long sequences");
    for (size_t i = 1; i < hs.size(); ++i)
        if (!(hs[i] < hs[i - 1])) throw ValidationError("mesh sizes must strictly decrease");
    for (double e : errors)
        if (!(e > 0.0)) throw NonPositiveError("errors must be positive to take rates");
    std::vector<double> r;
    r.reserve(errors.size() - 1);
    for (size_t i = 1; i < errors.size(); ++i)
        r.push_back(std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]));
    return r;
}

ScalarField probe_bubble() {
    return [](const Vec2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
}

VectorField probe_bubble_gradient() {
    return [](const Vec2& x) {
        return Vec2(kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                    kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
    };
}

VectorField probe_curl_field() {
    // curl of (xy(1-x)(1-y))^2: divergence-free, zero on the boundary.
    return [](const Vec2& v) {
        const double x = v.x(), y = v.y();
        const double phi = x * y * (1.0 - x) * (1.0 - y);
        const double phi_x = y * (1.0 - y) * (1.0 - 2.0 * x);
        const double phi_y = x * (1.0 - x) * (1.0 - 2.0 * y);
        return Vec2(2.0 * phi * phi_y, -2.0 * phi * phi_x);
    };
}

QualityReport quality_report(const Discretization& disc) {
    QualityReport q;
    q.h = disc.mesh().h;
    q.coercivity = coercivity_constant(disc);
    q.consistency["sine_bubble"] =
        consistency_defect(disc, probe_bubble(), probe_bubble_gradient());
    q.conformity["curl_bubble"] =
        limit_conformity_defect(disc, probe_curl_field(), [](const Vec2&) { return 0.0; });
    return q;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(7);
    os << v;
    return os.str();
}

} // namespace

std::string ConvergenceReport::to_csv() const {
    std::ostringstream os;
    os << "h,err_c,rate_c,err_grad,rate_grad\n";
    for (const ConvergenceRow& r : rows) {
        os << fmt(r.h) << "," << fmt(r.err_c) << ","
           << (r.rate_c ? fmt(*r.rate_c) : std::string()) << "," << fmt(r.err_grad) << ","
           << (r.rate_grad ? fmt(*r.rate_grad) : std::string()) << "\n";
    }
    return os.str();
}

std::string ConvergenceReport::to_markdown() const {
    std::ostringstream os;
    os << "| h | err_c | rate_c | err_grad | rate_grad |\n";
    os << "|---|-------|--------|----------|-----------|\n";
    for (const ConvergenceRow& r : rows) {
        os << "| " << fmt(r.h) << " | " << fmt(r.err_c) << " | "
           << (r.rate_c ? fmt(*r.rate_c) : std::string("-")) << " | " << fmt(r.err_grad)
           << " | " << (r.rate_grad ? fmt(*r.rate_grad) : std::string("-")) << " |\n";
    }
    return os.str();
}

} // namespace hmm
