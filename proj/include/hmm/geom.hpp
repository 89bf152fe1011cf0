#ifndef HMM_GEOM_HPP
#define HMM_GEOM_HPP

#include <Eigen/Dense>
#include <cmath>
#include <unordered_map>
#include <vector>

namespace hmm {

using Vec2 = Eigen::Vector2d;

/// Signed polygon area (shoelace); positive for counterclockwise ordering.
double polygon_signed_area(const std::vector<Vec2>& pts);

/// Center of mass of a simple polygon.
Vec2 polygon_centroid(const std::vector<Vec2>& pts);

/// Largest distance between two vertices.
double polygon_diameter(const std::vector<Vec2>& pts);

/// Clip a convex polygon to the axis-aligned box [xmin,xmax]x[ymin,ymax]
/// (Sutherland-Hodgman). May return fewer than 3 vertices if the polygon
/// lies outside the box.
std::vector<Vec2> clip_to_box(const std::vector<Vec2>& poly,
                              double xmin, double xmax, double ymin, double ymax);

/// Deduplicates nearby points; merges points closer than `tol`.
class VertexPool {
public:
    explicit VertexPool(double tol = 1e-9) : tol_(tol) {}

    /// Returns the id of an existing point within tol, or inserts a new one.
    int add(const Vec2& p);

    const std::vector<Vec2>& points() const { return points_; }
    std::vector<Vec2> take_points() { return std::move(points_); }

private:
    double tol_;
    std::vector<Vec2> points_;
    // spatial hash: bucket -> point ids
    std::unordered_map<long long, std::vector<int>> buckets_;
    long long key(long long ix, long long iy) const { return ix * 0x100000000LL + iy; }
};

/// Order-2 quadrature (3 edge-midpoint nodes, equal weights) of f over the
/// triangle (a, b, c). Exact for quadratic integrands.
template <class F>
double triangle_quad(const Vec2& a, const Vec2& b, const Vec2& c, F&& f) {
    const double area = 0.5 * std::abs((b.x() - a.x()) * (c.y() - a.y()) -
                                       (c.x() - a.x()) * (b.y() - a.y()));
    const Vec2 m_ab = 0.5 * (a + b), m_bc = 0.5 * (b + c), m_ca = 0.5 * (c + a);
    return area / 3.0 * (f(m_ab) + f(m_bc) + f(m_ca));
}

} // namespace hmm

#endif
