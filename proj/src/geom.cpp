#include "hmm/geom.hpp"

namespace hmm {

double polygon_signed_area(const std::vector<Vec2>& pts) {
    const size_t n = pts.size();
    double a = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

Vec2 polygon_centroid(const std::vector<Vec2>& pts) {
    const size_t n = pts.size();
    double a = 0.0;
    Vec2 c = Vec2::Zero();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % n];
        const double cross = p.x() * q.y() - q.x() * p.y();
        a += cross;
        c += cross * (p + q);
    }
    return c / (3.0 * a);
}

double polygon_diameter(const std::vector<Vec2>& pts) {
    double d2 = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
    return std::sqrt(d2);
}

namespace {

// Clip against a half-plane n.x <= b.
std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const Vec2& n, double b) {
    std::vector<Vec2> out;
    const size_t m = poly.size();
    for (size_t i = 0; i < m; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % m];
        const double dp = n.dot(p) - b;
        const double dq = n.dot(q) - b;
        if (dp <= 0.0) out.push_back(p);
        if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) {
            const double t = dp / (dp - dq);
            out.push_back(p + t * (q - p));
        }
    }
    return out;
}

} // namespace

std::vector<Vec2> clip_to_box(const std::vector<Vec2>& poly,
                              double xmin, double xmax, double ymin, double ymax) {
    std::vector<Vec2> r = poly;
    r = clip_halfplane(r, Vec2(-1, 0), -xmin);
    r = clip_halfplane(r, Vec2(1, 0), xmax);
    r = clip_halfplane(r, Vec2(0, -1), -ymin);
    r = clip_halfplane(r, Vec2(0, 1), ymax);
    return r;
}

int VertexPool::add(const Vec2& p) {
    const double bucket = 1e-6;
    const long long ix = static_cast<long long>(std::floor(p.x() / bucket));
    const long long iy = static_cast<long long>(std::floor(p.y() / bucket));
    for (long long dx = -1; dx <= 1; ++dx) {
        for (long long dy = -1; dy <= 1; ++dy) {
            auto it = buckets_.find(key(ix + dx, iy + dy));
            if (it == buckets_.end()) continue;
            for (int id : it->second)
                if ((points_[id] - p).norm() <= tol_) return id;
        }
    }
    const int id = static_cast<int>(points_.size());
    points_.push_back(p);
    buckets_[key(ix, iy)].push_back(id);
    return id;
}

} // namespace hmm
