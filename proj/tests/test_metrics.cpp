#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "hmm/errors.hpp"
#include "hmm/metrics.hpp"

using namespace hmm;

namespace {

constexpr double kPi = std::numbers::pi;

PolytopalMesh unit_square() {
    std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    return build_mesh(std::move(v), {{0, 1, 2, 3}});
}

PolytopalMesh two_triangles() {
    std::vector<Vec2> v = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    return build_mesh(std::move(v), {{0, 1, 2}, {0, 2, 3}});
}

std::vector<int> free_dof_list(const Discretization& disc) {
    std::vector<char> constrained(disc.n_dofs(), 0);
    for (int f : disc.boundary_faces()) constrained[disc.face_dof(f)] = 1;
    std::vector<int> free;
    for (int d = 0; d < disc.n_dofs(); ++d)
        if (!constrained[d]) free.push_back(d);
    return free;
}

// Quadrature of f over the barycenter fan of one cell.
template <class F>
double cell_quad(const PolytopalMesh& mesh, int c, F&& f) {
    const Cell& cell = mesh.cells[c];
    const int nv = static_cast<int>(cell.vertex_ids.size());
    double s = 0.0;
    for (int i = 0; i < nv; ++i)
        s += triangle_quad(cell.barycenter, mesh.vertices[cell.vertex_ids[i]],
                           mesh.vertices[cell.vertex_ids[(i + 1) % nv]], f);
    return s;
}

// The quadratic misfit the best-approximation interpolant minimizes.
double misfit_objective(const Discretization& disc, const DofVector& u, const ScalarField& w,
                        const VectorField& grad_w) {
    const PolytopalMesh& mesh = disc.mesh();
    double J = 0.0;
    for (int c = 0; c < disc.n_cells(); ++c) {
        const double uc = u[disc.cell_dof(c)];
        J += cell_quad(mesh, c, [&](const Vec2& x) {
            const double d = uc - w(x);
            return d * d;
        });
        for (int i = 0; i < disc.n_cell_faces(c); ++i) {
            const Cell& cell = mesh.cells[c];
            const Vec2 g = disc.stabilized_gradient_local(u, c, i);
            const int nv = static_cast<int>(cell.vertex_ids.size());
            J += triangle_quad(cell.barycenter, mesh.vertices[cell.vertex_ids[i]],
                               mesh.vertices[cell.vertex_ids[(i + 1) % nv]],
                               [&](const Vec2& x) { return (g - grad_w(x)).squaredNorm(); });
        }
    }
    return J;
}

// <grad_D u, xi> + <Pi_D u, div xi> with the same barycenter-fan quadrature
// the library uses.
double gauss_defect_functional(const Discretization& disc, const DofVector& u,
                               const VectorField& xi, const ScalarField& div_xi) {
    const PolytopalMesh& mesh = disc.mesh();
    double s = 0.0;
    for (int c = 0; c < disc.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const int nv = static_cast<int>(cell.vertex_ids.size());
        const double uc = disc.reconstruct(u, c);
        for (int i = 0; i < nv; ++i) {
            const Vec2& a = cell.barycenter;
            const Vec2& b = mesh.vertices[cell.vertex_ids[i]];
            const Vec2& d = mesh.vertices[cell.vertex_ids[(i + 1) % nv]];
            const Vec2 g = disc.stabilized_gradient_local(u, c, i);
            s += triangle_quad(a, b, d, [&](const Vec2& x) { return g.dot(xi(x)); });
            s += triangle_quad(a, b, d, [&](const Vec2& x) { return uc * div_xi(x); });
        }
    }
    return s;
}

DofVector random_homogeneous(const Discretization& disc, std::mt19937& rng) {
    std::normal_distribution<double> gauss;
    std::vector<char> constrained(disc.n_dofs(), 0);
    for (int f : disc.boundary_faces()) constrained[disc.face_dof(f)] = 1;
    DofVector u = DofVector::Zero(disc.n_dofs());
    for (int d = 0; d < disc.n_dofs(); ++d)
        if (!constrained[d]) u[d] = gauss(rng);
    return u;
}

} // namespace

TEST_CASE("coercivity constant of a single square cell") {
    // Only the cell dof is free; ||Pi u|| = 1 and the stabilised gradient of
    // the cell indicator has energy 8, so C_D = 1/sqrt(8).
    const PolytopalMesh mesh = unit_square();
    const Discretization disc(mesh);
    CHECK(coercivity_constant(disc) ==
          doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("coercivity bounds the reconstruction by the gradient") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::Triangular, 1});
    const Discretization disc(mesh_);
    const double cd = coercivity_constant(disc);
    CHECK(cd > 0.0);
    std::mt19937 rng(321);
    for (int trial = 0; trial < 100; ++trial) {
        const DofVector u = random_homogeneous(disc, rng);
        CHECK(disc.reconstruction_norm(u) <= (cd + 1e-8) * disc.gradient_norm(u));
    }
}

TEST_CASE("coercivity is achieved by some vector") {
    // The maximizer makes the bound tight; random search should get close.
    const PolytopalMesh mesh_ = two_triangles();
    const Discretization disc(mesh_);
    const double cd = coercivity_constant(disc);
    std::mt19937 rng(5);
    double best = 0.0;
    for (int trial = 0; trial < 2000; ++trial) {
        const DofVector u = random_homogeneous(disc, rng);
        best = std::max(best, disc.reconstruction_norm(u) / disc.gradient_norm(u));
    }
    CHECK(best <= cd + 1e-10);
    CHECK(best > 0.5 * cd);  // 3 free dofs: random search lands nearby
}

TEST_CASE("coercivity is stable under refinement") {
    // Level 1 uses the dense eigensolver, level 2 the iterative path; the
    // discrete Poincare constant of the fixed domain must barely move.
    const PolytopalMesh m1 = generate({MeshFamilyTag::Triangular, 1});
    const PolytopalMesh m2 = generate({MeshFamilyTag::Triangular, 2});
    const double c1 = coercivity_constant(Discretization(m1));
    const double c2 = coercivity_constant(Discretization(m2));
    CHECK(c1 > 0.0);
    CHECK(c2 / c1 > 0.8);
    CHECK(c2 / c1 < 1.25);
}

TEST_CASE("best-approximation interpolant of zero is zero") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::Hexagonal, 1});
    const Discretization disc(mesh_);
    const DofVector u = interpolant_PD(
        disc, [](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2(0, 0); });
    CHECK(u.norm() == 0.0);
}

TEST_CASE("best-approximation interpolant is a stationary point of the misfit") {
    const PolytopalMesh mesh_ = two_triangles();
    const Discretization disc(mesh_);
    const ScalarField w = probe_bubble();
    const VectorField gw = probe_bubble_gradient();
    const DofVector u = interpolant_PD(disc, w, gw);
    const double J0 = misfit_objective(disc, u, w, gw);
    const double eps = 1e-4;
    for (int d : free_dof_list(disc)) {
        DofVector up = u, um = u;
        up[d] += eps;
        um[d] -= eps;
        const double Jp = misfit_objective(disc, up, w, gw);
        const double Jm = misfit_objective(disc, um, w, gw);
        CHECK(Jp >= J0);  // minimum along every free coordinate
        CHECK(Jm >= J0);
        CHECK(std::abs(Jp - Jm) / (2.0 * eps) < 1e-9);  // vanishing directional derivative
    }
    // Boundary dofs stay pinned to zero.
    for (int f : disc.boundary_faces()) CHECK(u[disc.face_dof(f)] == 0.0);
}

TEST_CASE("consistency defect of hand-checked inputs") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::Triangular, 1});
    const Discretization disc(mesh_);
    SUBCASE("zero probe has zero defect") {
        CHECK(consistency_defect(disc, [](const Vec2&) { return 0.0; },
                                 [](const Vec2&) { return Vec2(0, 0); }) == 0.0);
    }
    SUBCASE("positively homogeneous of degree one") {
        const double s1 = consistency_defect(disc, probe_bubble(), probe_bubble_gradient());
        const double s2 = consistency_defect(
            disc, [](const Vec2& x) { return 2.0 * std::sin(kPi * x.x()) * std::sin(kPi * x.y()); },
            [](const Vec2& x) {
                return Vec2(2.0 * kPi * std::cos(kPi * x.x()) * std::sin(kPi * x.y()),
                            2.0 * kPi * std::sin(kPi * x.x()) * std::cos(kPi * x.y()));
            });
        CHECK(s2 == doctest::Approx(2.0 * s1).epsilon(1e-12));
        CHECK(s1 > 0.0);
    }
}

TEST_CASE("limit-conformity defect matches a dense reference computation") {
    const PolytopalMesh mesh_ = two_triangles();
    const Discretization disc(mesh_);
    auto check_against_dense = [&](const VectorField& xi, const ScalarField& div_xi) {
        const std::vector<int> free = free_dof_list(disc);
        const int n = static_cast<int>(free.size());
        Eigen::VectorXd r(n);
        Eigen::MatrixXd S(n, n);
        const Eigen::SparseMatrix<double> Sg = disc.gram_matrix();
        for (int a = 0; a < n; ++a) {
            DofVector e = DofVector::Zero(disc.n_dofs());
            e[free[a]] = 1.0;
            r[a] = gauss_defect_functional(disc, e, xi, div_xi);
            for (int b = 0; b < n; ++b) S(a, b) = Sg.coeff(free[a], free[b]);
        }
        const Eigen::VectorXd z = S.ldlt().solve(r);
        const double want = std::sqrt(std::max(r.dot(z), 0.0));
        CHECK(limit_conformity_defect(disc, xi, div_xi) ==
              doctest::Approx(want).epsilon(1e-11));
    };
    check_against_dense(probe_curl_field(), [](const Vec2&) { return 0.0; });
    check_against_dense([](const Vec2& x) { return Vec2(x.x() * x.x(), x.x() * x.y()); },
                        [](const Vec2& x) { return 3.0 * x.x(); });
}

TEST_CASE("limit-conformity defect dominates the normalized Gauss functional") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::DistortedQuad, 1});
    const Discretization disc(mesh_);
    const VectorField xi = probe_curl_field();
    const ScalarField div_xi = [](const Vec2&) { return 0.0; };
    const double w = limit_conformity_defect(disc, xi, div_xi);
    std::mt19937 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const DofVector u = random_homogeneous(disc, rng);
        const double val = std::abs(gauss_defect_functional(disc, u, xi, div_xi));
        CHECK(val <= (w + 1e-12) * disc.gradient_norm(u) * (1.0 + 1e-9));
    }
    CHECK(limit_conformity_defect(disc, [](const Vec2&) { return Vec2(0, 0); },
                                  [](const Vec2&) { return 0.0; }) == 0.0);
}

TEST_CASE("probe fields have the advertised structure") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    const VectorField xi = probe_curl_field();
    for (int i = 0; i < 30; ++i) {
        const double x = uni(rng), y = uni(rng), h = 1e-6;
        const double div = (xi(Vec2(x + h, y)).x() - xi(Vec2(x - h, y)).x() +
                            xi(Vec2(x, y + h)).y() - xi(Vec2(x, y - h)).y()) /
                           (2.0 * h);
        CHECK(std::abs(div) < 1e-7);
    }
    // Both probes vanish on the boundary of the unit square.
    for (double s : {0.0, 0.3, 1.0}) {
        CHECK(probe_bubble()(Vec2(s, 0.0)) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(probe_bubble()(Vec2(1.0, s)) == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(xi(Vec2(s, 1.0)).norm() == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("consistency and conformity defects shrink under refinement") {
    std::vector<double> hs, sd, wd;
    for (int level = 1; level <= 3; ++level) {
        const PolytopalMesh mesh_ = generate({MeshFamilyTag::Triangular, level});
        const Discretization disc(mesh_);
        hs.push_back(disc.mesh().h);
        sd.push_back(consistency_defect(disc, probe_bubble(), probe_bubble_gradient()));
        wd.push_back(
            limit_conformity_defect(disc, probe_curl_field(), [](const Vec2&) { return 0.0; }));
    }
    for (double r : rates(sd, hs)) CHECK(r >= 0.8);
    for (double r : rates(wd, hs)) CHECK(r >= 0.8);
}

TEST_CASE("solution error against cell averages") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::Hexagonal, 1});
    const Discretization disc(mesh_);
    const PolytopalMesh& mesh = disc.mesh();
    const ScalarField exact = [](const Vec2& x) { return x.x() * x.x() + 0.5 * x.y(); };
    SUBCASE("exact cell averages give zero error") {
        DofVector u = DofVector::Zero(disc.n_dofs());
        for (int c = 0; c < disc.n_cells(); ++c)
            u[disc.cell_dof(c)] = cell_quad(mesh, c, exact) / mesh.cells[c].area;
        const auto [abs_err, rel_err] = l2_error_solution(disc, u, exact);
        CHECK(abs_err < 1e-14);
        CHECK(rel_err < 1e-14);
    }
    SUBCASE("zero state against the constant one has relative error one") {
        const DofVector u = DofVector::Zero(disc.n_dofs());
        const auto [abs_err, rel_err] = l2_error_solution(disc, u, [](const Vec2&) { return 1.0; });
        // The quadrature norm of 1 over the meshed unit square is 1.
        CHECK(abs_err == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rel_err == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("quadrature covers the domain exactly on every family") {
    for (MeshFamilyTag tag : {MeshFamilyTag::Triangular, MeshFamilyTag::Hexagonal,
                              MeshFamilyTag::DistortedQuad,
                              MeshFamilyTag::LocallyRefinedNonConforming}) {
        const PolytopalMesh mesh_ = generate({tag, 1});
        const Discretization disc(mesh_);
        const DofVector u = DofVector::Zero(disc.n_dofs());
        CHECK(l2_error_solution(disc, u, [](const Vec2&) { return 1.0; }).first ==
              doctest::Approx(1.0).epsilon(1e-10));
        // Order-2 exactness: integral of x^2 over the unit square is 1/3.
        double integral = 0.0;
        for (int c = 0; c < disc.n_cells(); ++c)
            integral +=
                cell_quad(disc.mesh(), c, [](const Vec2& x) { return x.x() * x.x(); });
        CHECK(integral == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("gradient error of hand-checked states") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::DistortedQuad, 1});
    const Discretization disc(mesh_);
    SUBCASE("affine interpolants are reproduced exactly") {
        const DofVector u = disc.interpolate_initial(
            [](const Vec2& x) { return 1.0 + 2.0 * x.x() - 3.0 * x.y(); });
        const auto [abs_err, rel_err] =
            l2_error_gradient(disc, u, [](const Vec2&) { return Vec2(2.0, -3.0); });
        CHECK(abs_err < 1e-12);
        CHECK(rel_err < 1e-12);
    }
    SUBCASE("zero state against a constant field has relative error one") {
        const DofVector u = DofVector::Zero(disc.n_dofs());
        const auto [abs_err, rel_err] =
            l2_error_gradient(disc, u, [](const Vec2&) { return Vec2(1.0, 0.0); });
        CHECK(abs_err == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(rel_err == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("observed orders of exact power sequences") {
    CHECK(rates({4.0, 1.0}, {0.2, 0.1})[0] == doctest::Approx(2.0).epsilon(1e-14));
    const std::vector<double> r = rates({8.0, 1.0, 0.125}, {0.4, 0.2, 0.1});
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("observed orders at pinned reference values") {
    CHECK(rates({0.0115277, 0.0057652}, {0.125, 0.0625})[0] ==
          doctest::Approx(0.9996621338).epsilon(1e-9));
    CHECK(rates({0.0000441, 0.0000183}, {0.125, 0.0625})[0] ==
          doctest::Approx(1.268935007).epsilon(1e-9));
}

TEST_CASE("observed orders are scale invariant") {
    const std::vector<double> e = {3.1e-3, 1.2e-3, 4.1e-4};
    const std::vector<double> h = {0.2, 0.11, 0.06};
    const std::vector<double> r1 = rates(e, h);
    std::vector<double> e2 = e;
    for (double& v : e2) v *= 7.5;
    const std::vector<double> r2 = rates(e2, h);
    for (size_t i = 0; i < r1.size(); ++i)
        CHECK(r1[i] == doctest::Approx(r2[i]).epsilon(1e-13));
}

TEST_CASE("rates input validation") {
    CHECK_THROWS_AS(rates({1.0}, {0.1}), ValidationError);
    CHECK_THROWS_AS(rates({1.0, 0.5}, {0.1}), ValidationError);
    CHECK_THROWS_AS(rates({1.0, 0.5}, {0.1, 0.2}), ValidationError);   // h increases
    CHECK_THROWS_AS(rates({1.0, 0.5}, {0.1, 0.1}), ValidationError);   // h stalls
    CHECK_THROWS_AS(rates({1.0, 0.0}, {0.2, 0.1}), NonPositiveError);
    CHECK_THROWS_AS(rates({-1.0, 0.5}, {0.2, 0.1}), NonPositiveError);
}

TEST_CASE("quality report wires the standard probes") {
    const PolytopalMesh mesh_ = generate({MeshFamilyTag::Triangular, 1});
    const Discretization disc(mesh_);
    const QualityReport q = quality_report(disc);
    CHECK(q.h == disc.mesh().h);
    CHECK(q.coercivity == doctest::Approx(coercivity_constant(disc)).epsilon(1e-12));
    REQUIRE(q.consistency.count("sine_bubble") == 1);
    REQUIRE(q.conformity.count("curl_bubble") == 1);
    CHECK(q.consistency.at("sine_bubble") > 0.0);
    CHECK(q.conformity.at("curl_bubble") > 0.0);
}

TEST_CASE("convergence report serialisation") {
    ConvergenceReport rep;
    rep.model_tag = "demo";
    rep.family_tag = "triangular";
    ConvergenceRow r1;
    r1.h = 0.125;
    r1.err_c = 0.25;
    r1.err_grad = 0.5;
    ConvergenceRow r2;
    r2.h = 0.0625;
    r2.err_c = 0.0625;
    r2.err_grad = 0.25;
    r2.rate_c = 2.0;
    r2.rate_grad = 1.0;
    rep.rows = {r1, r2};
    const std::string csv = rep.to_csv();
    CHECK(csv == "h,err_c,rate_c,err_grad,rate_grad\n"
                 "0.125,0.25,,0.5,\n"
                 "0.0625,0.0625,2,0.25,1\n");
    const std::string md = rep.to_markdown();
    CHECK(md.find("| 0.125 | 0.25 | - | 0.5 | - |") != std::string::npos);
    CHECK(md.find("| 0.0625 | 0.0625 | 2 | 0.25 | 1 |") != std::string::npos);
}
