#include <cmath>
#include <numbers>

#include "hmm/errors.hpp"
#include "hmm/mesh.hpp"

namespace hmm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr long long kMaxCells = 1'000'000;

void check_cell_budget(long long cells, int level) {
    if (cells > kMaxCells)
        throw UnsupportedLevel("level " + std::to_string(level) + " would produce " +
                               std::to_string(cells) + " cells (limit 1e6)");
}

// Criss-cross triangulation: each square of an n x n grid is split into 4
// triangles through its center, so the max diameter is exactly 1/n.
PolytopalMesh gen_triangular(int level) {
    const int n = 8 << (level - 1);
    check_cell_budget(4LL * n * n, level);
    std::vector<Vec2> verts;
    verts.reserve(static_cast<size_t>(n + 1) * (n + 1) + static_cast<size_t>(n) * n);
    auto grid = [&](int i, int j) { return j * (n + 1) + i; };
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.emplace_back(double(i) / n, double(j) / n);
    const int center0 = static_cast<int>(verts.size());
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            verts.emplace_back((i + 0.5) / n, (j + 0.5) / n);

    std::vector<std::vector<int>> cells;
    cells.reserve(4LL * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int bl = grid(i, j), br = grid(i + 1, j);
            const int tr = grid(i + 1, j + 1), tl = grid(i, j + 1);
            const int c = center0 + j * n + i;
            cells.push_back({bl, br, c});
            cells.push_back({br, tr, c});
            cells.push_back({tr, tl, c});
            cells.push_back({tl, bl, c});
        }
    }
    return build_mesh(std::move(verts), cells);
}

// Honeycomb of regular hexagons (circumradius a) clipped to the unit square.
// Interior cells have diameter 2a; a shrinks by 0.55x per level (within the
// "roughly halve" band). The lattice is rotated 45 degrees so the tiling is
// symmetric about the domain diagonal.
PolytopalMesh gen_hexagonal(int level) {
    const double a = 0.06485650 * std::pow(0.55, level - 1);
    check_cell_budget(static_cast<long long>(1.0 / (2.598 * a * a)) + 64, level);

    const double theta = kPi / 4.0;
    const Vec2 e1(1.5 * a * std::cos(theta), 1.5 * a * std::sin(theta));
    const Vec2 e2(-std::sqrt(3.0) * a * std::sin(theta), std::sqrt(3.0) * a * std::cos(theta));
    // Lattice offset chosen so clipping never produces razor-thin boundary
    // cells at the coarse levels (thin cells amplify round-off in the
    // stabilised gradient through the 1/d factor).
    const Vec2 origin(1.34 * a, 1.34 * a);

    Vec2 dir[6];
    for (int k = 0; k < 6; ++k)
        dir[k] = Vec2(std::cos(theta + kPi / 3.0 * k), std::sin(theta + kPi / 3.0 * k));

    VertexPool pool(1e-9);
    std::vector<std::vector<int>> cells;

    // The rotated lattice axes see corner projections up to sqrt(2).
    const int range = static_cast<int>(1.5 / (1.5 * a)) + 3;
    for (int i = -range; i <= range; ++i) {
        for (int j = -range; j <= range; ++j) {
            const Vec2 center =
                origin + double(i) * e1 + (double(j) + 0.5 * ((i % 2 + 2) % 2)) * e2;
            std::vector<Vec2> hex(6);
            for (int k = 0; k < 6; ++k) hex[k] = center + a * dir[k];
            std::vector<Vec2> poly = clip_to_box(hex, 0.0, 1.0, 0.0, 1.0);
            if (poly.size() < 3) continue;
            for (Vec2& p : poly) {
                if (std::abs(p.x()) < 1e-12) p.x() = 0.0;
                if (std::abs(p.x() - 1.0) < 1e-12) p.x() = 1.0;
                if (std::abs(p.y()) < 1e-12) p.y() = 0.0;
                if (std::abs(p.y() - 1.0) < 1e-12) p.y() = 1.0;
            }
            std::vector<int> ids;
            for (const Vec2& p : poly) {
                const int id = pool.add(p);
                if (ids.empty() || ids.back() != id) ids.push_back(id);
            }
            while (ids.size() >= 2 && ids.front() == ids.back()) ids.pop_back();
            if (ids.size() < 3) continue;
            std::vector<Vec2> pts;
            for (int id : ids) pts.push_back(pool.points()[id]);
            if (polygon_signed_area(pts) < 1e-13) continue;  // clipped sliver
            cells.push_back(std::move(ids));
        }
    }
    return build_mesh(pool.take_points(), cells);
}

// Tensor grid pushed through a fixed smooth skew map. The grid count grows
// arithmetically (13, 19, 25, ...) so the h sequence thins out slowly, as in
// published distorted-quadrilateral benchmark series.
PolytopalMesh gen_distorted(int level) {
    const long long n = 13 + 6LL * (level - 1);  // odd: no interior vertex sits on a node line
    check_cell_budget(n * n, level);
    std::vector<Vec2> verts;
    verts.reserve((n + 1) * (n + 1));
    auto vid = [&](long long i, long long j) { return static_cast<int>(j * (n + 1) + i); };
    for (long long j = 0; j <= n; ++j) {
        for (long long i = 0; i <= n; ++i) {
            const double x = double(i) / n, y = double(j) / n;
            const double d = 0.1 * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
            verts.emplace_back(x + d, y + d);
        }
    }
    std::vector<std::vector<int>> cells;
    cells.reserve(n * n);
    for (long long j = 0; j < n; ++j)
        for (long long i = 0; i < n; ++i)
            cells.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
    return build_mesh(std::move(verts), cells);
}

// Uniform n x n squares with one extra 2x2 refinement pass on [0,1/2]^2.
// Hanging nodes appear as collinear vertices of the adjacent coarse cells,
// splitting their long edge into two faces.
PolytopalMesh gen_nonconforming(int level) {
    // Grid count grows by ~1.84x (h ratio ~0.54, within the "roughly halve"
    // band), rounded down to even so the refined quadrant stays grid-aligned.
    const int n = 2 * static_cast<int>(4.0 * std::pow(1.84, level - 1));
    check_cell_budget(3LL * n * n / 4 + 4LL * (n / 2) * (n / 2), level);
    const double s = 1.0 / n;
    VertexPool pool(1e-12);
    auto P = [&](double x, double y) { return pool.add(Vec2(x, y)); };
    std::vector<std::vector<int>> cells;

    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const double x = i * s, y = j * s;
            const bool refined = (i < n / 2 && j < n / 2);
            if (refined) {
                const double t = 0.5 * s;
                for (int jj = 0; jj < 2; ++jj)
                    for (int ii = 0; ii < 2; ++ii) {
                        const double xa = x + ii * t, ya = y + jj * t;
                        cells.push_back({P(xa, ya), P(xa + t, ya), P(xa + t, ya + t), P(xa, ya + t)});
                    }
            } else {
                std::vector<int> ids;
                ids.push_back(P(x, y));
                if (j == n / 2 && i < n / 2) ids.push_back(P(x + 0.5 * s, y));  // hanging node below
                ids.push_back(P(x + s, y));
                ids.push_back(P(x + s, y + s));
                ids.push_back(P(x, y + s));
                if (i == n / 2 && j < n / 2) ids.push_back(P(x, y + 0.5 * s));  // hanging node left
                cells.push_back(std::move(ids));
            }
        }
    }
    return build_mesh(pool.take_points(), cells);
}

} // namespace

PolytopalMesh generate(const MeshFamily& family) {
    if (family.level < 1) throw UnsupportedLevel("mesh level must be >= 1");
    if (family.level > 16) throw UnsupportedLevel("mesh level too large");
    switch (family.tag) {
        case MeshFamilyTag::Triangular: return gen_triangular(family.level);
        case MeshFamilyTag::Hexagonal: return gen_hexagonal(family.level);
        case MeshFamilyTag::DistortedQuad: return gen_distorted(family.level);
        case MeshFamilyTag::LocallyRefinedNonConforming: return gen_nonconforming(family.level);
    }
    throw ValidationError("unreachable mesh family");
}

} // namespace hmm
