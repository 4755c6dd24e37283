/**
 * @file cut_cell.cpp
 * @brief Interface linearization, cell clipping, triangulation and cut-cell quadrature.
 */
#include "blayer/cut_cell.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace blayer {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
Vec2 left_normal(const Vec2& d) { return Vec2(-d.y(), d.x()); }

}  // namespace

// ----------------------------------------------------------------------------
// Polyline
// ----------------------------------------------------------------------------

InterfacePolyline linearize_interface(const std::vector<NurbsPatch>& curves, int per_span, bool bulk_left) {
    if (per_span < 1) throw GeometryError("linearize_interface: need at least one segment per span");
    if (curves.empty()) throw GeometryError("linearize_interface: no curves");
    InterfacePolyline poly;
    poly.curves = curves;
    poly.bulk_left = bulk_left;

    // visit the curves along their end-to-start connectivity
    const std::size_t nc = curves.size();
    std::vector<Vec2> first(nc), last(nc);
    double extent = 0.0;
    for (std::size_t k = 0; k < nc; ++k) {
        const auto bp = curves[k].knots(0).breakpoints();
        first[k] = curve_point(curves[k], bp.front());
        last[k] = curve_point(curves[k], bp.back());
        extent = std::max(extent, (last[k] - first[k]).norm());
    }
    const double join_tol = 1e-9 * std::max(extent, 1e-300);
    auto successor = [&](std::size_t k) {
        for (std::size_t j = 0; j < nc; ++j)
            if (j != k && (first[j] - last[k]).norm() <= join_tol) return static_cast<long>(j);
        return -1L;
    };
    std::vector<bool> has_pred(nc, false), visited(nc, false);
    for (std::size_t k = 0; k < nc; ++k)
        if (const long j = successor(k); j >= 0) has_pred[j] = true;
    std::vector<std::size_t> order;
    for (int pass = 0; pass < 2; ++pass)
        for (std::size_t k0 = 0; k0 < nc; ++k0) {
            if (visited[k0] || (pass == 0 && has_pred[k0])) continue;
            for (long k = static_cast<long>(k0); k >= 0 && !visited[k]; k = successor(k)) {
                visited[k] = true;
                order.push_back(static_cast<std::size_t>(k));
            }
        }

    for (std::size_t k : order) {
        const auto bp = curves[k].knots(0).breakpoints();
        std::vector<double> t;
        for (std::size_t e = 0; e + 1 < bp.size(); ++e)
            for (int j = 0; j < per_span; ++j) t.push_back(bp[e] + (bp[e + 1] - bp[e]) * j / per_span);
        t.push_back(bp.back());
        Vec2 prev = curve_point(curves[k], t[0]);
        for (std::size_t i = 1; i < t.size(); ++i) {
            const Vec2 x = curve_point(curves[k], t[i]);
            InterfaceSegment s;
            s.a = prev;
            s.b = x;
            s.patch = static_cast<int>(k);
            s.t0 = t[i - 1];
            s.t1 = t[i];
            s.joins_next = i + 1 < t.size();
            poly.segments.push_back(s);
            prev = x;
        }
    }
    double scale = 0.0;
    for (const auto& s : poly.segments) scale = std::max(scale, (s.b - s.a).norm());
    const double tol = 1e-9 * std::max(scale, 1e-300);
    auto& seg = poly.segments;
    for (std::size_t i = 0; i + 1 < seg.size(); ++i)
        if ((seg[i].b - seg[i + 1].a).norm() <= tol) seg[i].joins_next = true;
    if ((seg.back().b - seg.front().a).norm() <= tol) {
        seg.back().joins_next = true;
        poly.closed = true;
    } else {
        seg.back().joins_next = false;
    }
    return poly;
}

int InterfacePolyline::num_vertices() const {
    int n = static_cast<int>(segments.size());
    for (const auto& s : segments)
        if (!s.joins_next) ++n;
    return n;
}

double InterfacePolyline::side(const Vec2& x) const {
    const int n = static_cast<int>(segments.size());
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    double best_t = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto& s = segments[i];
        const Vec2 d = s.b - s.a;
        const double L2 = d.squaredNorm();
        double t = L2 > 0 ? (x - s.a).dot(d) / L2 : 0.0;
        const bool free_start = !closed && (i == 0 || !segments[i - 1].joins_next);
        const bool free_end = !s.joins_next;
        if (!(free_start && t < 0.0)) t = std::max(t, 0.0);
        if (!(free_end && t > 1.0)) t = std::min(t, 1.0);
        const double dist = (s.a + t * d - x).norm();
        if (dist < best) {
            best = dist;
            best_i = i;
            best_t = t;
        }
    }
    const auto& s = segments[best_i];
    const Vec2 d = (s.b - s.a).normalized();
    Vec2 normal = left_normal(d);
    Vec2 foot = s.a + best_t * (s.b - s.a);
    if (best_t <= 0.0 || best_t >= 1.0) {
        int other = -1;
        if (best_t <= 0.0) {
            const int prev = best_i > 0 ? best_i - 1 : (closed ? n - 1 : -1);
            if (prev >= 0 && segments[prev].joins_next) other = prev;
        } else if (s.joins_next) {
            other = (best_i + 1) % n;
        }
        if (other >= 0) {
            const auto& o = segments[other];
            normal = (normal + left_normal((o.b - o.a).normalized())).normalized();
        }
    }
    double sgn = normal.dot(x - foot);
    if (!bulk_left) sgn = -sgn;
    if (sgn == 0.0) return 0.0;
    return sgn > 0.0 ? std::max(best, 1e-300) : -std::max(best, 1e-300);
}

std::string to_string(CellClass c) {
    switch (c) {
        case CellClass::Material: return "material";
        case CellClass::Void: return "void";
        case CellClass::Cut: return "cut";
    }
    return "unknown";
}

// ----------------------------------------------------------------------------
// Quadrature rules
// ----------------------------------------------------------------------------

const TriangleRule& triangle_rule(int order) {
    static const TriangleRule rules[] = {
        // degree 1
        {{Vec2(1.0 / 3.0, 1.0 / 3.0)}, {1.0}},
        // degree 2
        {{Vec2(1.0 / 6.0, 1.0 / 6.0), Vec2(2.0 / 3.0, 1.0 / 6.0), Vec2(1.0 / 6.0, 2.0 / 3.0)},
         {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
        // degree 4 (used for 3 and 4)
        [] {
            TriangleRule r;
            const double a1 = 0.44594849091596489, w1 = 0.22338158967801147;
            const double a2 = 0.091576213509770743, w2 = 0.10995174365532187;
            for (auto [a, w] : {std::pair{a1, w1}, std::pair{a2, w2}}) {
                r.points.insert(r.points.end(), {Vec2(a, a), Vec2(1 - 2 * a, a), Vec2(a, 1 - 2 * a)});
                r.weights.insert(r.weights.end(), {w, w, w});
            }
            return r;
        }(),
        // degree 5
        [] {
            TriangleRule r;
            const double s15 = std::sqrt(15.0);
            r.points.push_back(Vec2(1.0 / 3.0, 1.0 / 3.0));
            r.weights.push_back(0.225);
            for (auto [a, w] : {std::pair{(6.0 - s15) / 21.0, (155.0 - s15) / 1200.0},
                                std::pair{(6.0 + s15) / 21.0, (155.0 + s15) / 1200.0}}) {
                r.points.insert(r.points.end(), {Vec2(a, a), Vec2(1 - 2 * a, a), Vec2(a, 1 - 2 * a)});
                r.weights.insert(r.weights.end(), {w, w, w});
            }
            return r;
        }(),
    };
    if (order < 1 || order > 5) throw std::invalid_argument("triangle rule order must be in 1..5");
    static const int map[6] = {0, 0, 1, 2, 2, 3};
    return rules[map[order]];
}

std::vector<QuadPoint> standard_quadrature(const Mesh& mesh, int element, int n) {
    const Element& e = mesh.elements[element];
    std::vector<QuadPoint> q;
    if (e.tech == ElementTech::Tri3) {
        const TriangleRule& r = triangle_rule(n > 0 ? std::min(n, 5) : 1);
        for (std::size_t i = 0; i < r.points.size(); ++i)
            q.push_back({r.points[i], 0.5 * r.weights[i] * element_jacobian(mesh, element, r.points[i])});
        return q;
    }
    if (n <= 0) n = e.tech == ElementTech::Quad4 ? 2 : 3;
    const GaussRule& g = gauss_legendre(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 l(g.x[i], g.x[j]);
            q.push_back({l, g.w[i] * g.w[j] * element_jacobian(mesh, element, l)});
        }
    return q;
}

Vec2 inverse_map(const Mesh& mesh, int element, const Vec2& x) {
    const Element& e = mesh.elements[element];
    Vec2 xi = element_center_local(e.tech);
    double scale = 0.0;
    for (int a : element_corners(e)) scale = std::max(scale, (mesh.nodes[a] - mesh.nodes[e.nodes[0]]).norm());
    for (int it = 0; it < 50; ++it) {
        const ShapeValues sv = shape_functions(mesh, e, xi);
        Vec2 p = Vec2::Zero();
        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
        for (int a = 0; a < sv.n; ++a) {
            const Vec2& X = mesh.nodes[e.nodes[a]];
            p += sv.N[a] * X;
            J.col(0) += sv.dN[a][0] * X;
            J.col(1) += sv.dN[a][1] * X;
        }
        const Vec2 r = x - p;
        if (r.norm() <= 1e-14 * std::max(scale, 1.0) && it > 0) return xi;
        const Vec2 d = J.partialPivLu().solve(r);
        xi += d;
        if (!xi.allFinite()) break;
        if (d.norm() <= 1e-15) return xi;
    }
    throw GeometryError("inverse isoparametric map did not converge");
}

// ----------------------------------------------------------------------------
// Locator
// ----------------------------------------------------------------------------

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
    Vec2 lo = Vec2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    double area = 0.0;
    for (const auto& e : mesh.elements) {
        Vec2 blo = Vec2::Constant(std::numeric_limits<double>::infinity()), bhi = -blo;
        for (int a : e.nodes) {
            blo = blo.cwiseMin(mesh.nodes[a]);
            bhi = bhi.cwiseMax(mesh.nodes[a]);
        }
        boxes_.push_back({blo, bhi});
        lo = lo.cwiseMin(blo);
        hi = hi.cwiseMax(bhi);
        area += (bhi - blo).prod();
    }
    if (boxes_.empty()) return;
    const Vec2 ext = (hi - lo).cwiseMax(Vec2::Constant(1e-300));
    tol_ = 1e-9 * ext.norm();
    const double size = std::sqrt(std::max(area / boxes_.size(), 1e-300));
    nx_ = std::clamp(static_cast<int>(std::ceil(ext.x() / size)), 1, 2048);
    ny_ = std::clamp(static_cast<int>(std::ceil(ext.y() / size)), 1, 2048);
    lo_ = lo;
    cell_ = Vec2(ext.x() / nx_, ext.y() / ny_);
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (int k = 0; k < static_cast<int>(boxes_.size()); ++k) {
        const int i0 = std::clamp(static_cast<int>(std::floor((boxes_[k][0].x() - tol_ - lo_.x()) / cell_.x())), 0, nx_ - 1);
        const int i1 = std::clamp(static_cast<int>(std::floor((boxes_[k][1].x() + tol_ - lo_.x()) / cell_.x())), 0, nx_ - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor((boxes_[k][0].y() - tol_ - lo_.y()) / cell_.y())), 0, ny_ - 1);
        const int j1 = std::clamp(static_cast<int>(std::floor((boxes_[k][1].y() + tol_ - lo_.y()) / cell_.y())), 0, ny_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[i + nx_ * j].push_back(k);
    }
}

std::vector<int> CellLocator::candidates(const Vec2& x) const { return candidates(x, x); }

std::vector<int> CellLocator::candidates(const Vec2& lo, const Vec2& hi) const {
    std::vector<int> out;
    if (buckets_.empty()) return out;
    const int i0 = std::clamp(static_cast<int>(std::floor((lo.x() - tol_ - lo_.x()) / cell_.x())), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>(std::floor((hi.x() + tol_ - lo_.x()) / cell_.x())), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>(std::floor((lo.y() - tol_ - lo_.y()) / cell_.y())), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>(std::floor((hi.y() + tol_ - lo_.y()) / cell_.y())), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i)
            for (int k : buckets_[i + nx_ * j]) {
                const auto& b = boxes_[k];
                if (b[0].x() - tol_ <= hi.x() && b[1].x() + tol_ >= lo.x() && b[0].y() - tol_ <= hi.y() &&
                    b[1].y() + tol_ >= lo.y())
                    out.push_back(k);
            }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int CellLocator::locate(const Vec2& x, Vec2* local, double tol) const {
    for (int k : candidates(x)) {
        try {
            const Vec2 l = inverse_map(*mesh_, k, x);
            if (inside_parent(mesh_->elements[k].tech, l, tol)) {
                if (local) *local = l;
                return k;
            }
        } catch (const GeometryError&) {
        }
    }
    return -1;
}

int CellLocator::nearest(const Vec2& x) const {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int k = 0; k < static_cast<int>(boxes_.size()); ++k) {
        const double d = (0.5 * (boxes_[k][0] + boxes_[k][1]) - x).norm();
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    return best;
}

// ----------------------------------------------------------------------------
// Polygons
// ----------------------------------------------------------------------------

double polygon_area(const std::vector<Vec2>& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
    return 0.5 * a;
}

namespace {

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
    return cross(b - a, p - a) > eps && cross(c - b, p - b) > eps && cross(a - c, p - c) > eps;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool in = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y()) &&
            p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
            in = !in;
    }
    return in;
}

double dist_to_segment(const Vec2& p, const Vec2& a, const Vec2& b, double* t_out = nullptr) {
    const Vec2 d = b - a;
    const double L2 = d.squaredNorm();
    double t = L2 > 0 ? std::clamp((p - a).dot(d) / L2, 0.0, 1.0) : 0.0;
    if (t_out) *t_out = t;
    return (a + t * d - p).norm();
}

/// Cyrus-Beck clip of a + t (b - a) against a convex counter-clockwise polygon.
bool clip_segment(const Vec2& a, const Vec2& b, const std::vector<Vec2>& cell, double tol, double t_lo,
                  double t_hi, double& tE, double& tL) {
    tE = t_lo;
    tL = t_hi;
    const Vec2 d = b - a;
    for (std::size_t i = 0; i < cell.size(); ++i) {
        const Vec2& v = cell[i];
        const Vec2 e = cell[(i + 1) % cell.size()] - v;
        const Vec2 n = left_normal(e) / e.norm();
        const double num = n.dot(a - v) + tol;
        const double den = n.dot(d);
        if (std::abs(den) <= 1e-300) {
            if (num < 0.0) return false;
            continue;
        }
        const double t = -num / den;
        if (den > 0.0) tE = std::max(tE, t);
        else tL = std::min(tL, t);
        if (tE > tL) return false;
    }
    return true;
}

struct BoundaryPos {
    int edge = -1;
    double t = 0.0;
};

BoundaryPos locate_on_boundary(const Vec2& p, const std::vector<Vec2>& poly, double tol) {
    BoundaryPos best;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < poly.size(); ++i) {
        double t;
        const double d = dist_to_segment(p, poly[i], poly[(i + 1) % poly.size()], &t);
        if (d < bd) {
            bd = d;
            best = {static_cast<int>(i), t};
        }
    }
    if (bd > tol) best.edge = -1;
    return best;
}

/// Moves p along the line a-b onto the nearest polygon edge when it lies within tol of it.
Vec2 snap_along_line(const Vec2& p, const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly, double tol) {
    const BoundaryPos bp = locate_on_boundary(p, poly, tol);
    if (bp.edge < 0) return p;
    const Vec2& v = poly[bp.edge];
    const Vec2 e = poly[(bp.edge + 1) % poly.size()] - v;
    const Vec2 d = b - a;
    const double den = cross(d, e);
    if (std::abs(den) <= 1e-14 * d.norm() * e.norm()) return p;
    const Vec2 x = a + cross(v - a, e) / den * d;
    return (x - p).norm() <= 2.0 * tol ? x : p;
}

/// Polygon vertices met when walking counter-clockwise from boundary position p to q.
std::vector<Vec2> boundary_walk(const std::vector<Vec2>& poly, BoundaryPos p, BoundaryPos q) {
    const int n = static_cast<int>(poly.size());
    std::vector<Vec2> out;
    if (p.edge == q.edge && q.t > p.t) return out;
    int i = (p.edge + 1) % n;
    for (int c = 0; c < n; ++c) {
        out.push_back(poly[i]);
        if (i == q.edge) break;
        i = (i + 1) % n;
    }
    return out;
}

std::vector<Vec2> clean_polygon(const std::vector<Vec2>& p, double tol) {
    std::vector<Vec2> q;
    for (const auto& x : p)
        if (q.empty() || (x - q.back()).norm() > tol) q.push_back(x);
    while (q.size() > 1 && (q.front() - q.back()).norm() <= tol) q.pop_back();
    bool changed = true;
    while (changed && q.size() > 3) {
        changed = false;
        for (std::size_t i = 0; i < q.size(); ++i) {
            const Vec2& a = q[(i + q.size() - 1) % q.size()];
            const Vec2& b = q[i];
            const Vec2& c = q[(i + 1) % q.size()];
            if (std::abs(cross(b - a, c - b)) <= tol * ((b - a).norm() + (c - b).norm())) {
                q.erase(q.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
        }
    }
    return q;
}

}  // namespace

std::vector<std::array<Vec2, 3>> triangulate_polygon(const std::vector<Vec2>& polygon) {
    double scale = 0.0;
    for (const auto& x : polygon) scale = std::max(scale, (x - polygon[0]).norm());
    std::vector<Vec2> v = clean_polygon(polygon, 1e-13 * std::max(scale, 1e-300));
    std::vector<std::array<Vec2, 3>> tris;
    if (v.size() < 3) return tris;
    if (polygon_area(v) < 0.0) std::reverse(v.begin(), v.end());
    const double area_tol = 1e-14 * std::abs(polygon_area(v));

    std::vector<int> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<int>(i);
    std::vector<std::array<int, 3>> tri_idx;
    int guard = 0;
    while (idx.size() > 3 && guard++ < 10000) {
        bool clipped = false;
        const int m = static_cast<int>(idx.size());
        for (int k = 0; k < m; ++k) {
            const int ia = idx[(k + m - 1) % m], ib = idx[k], ic = idx[(k + 1) % m];
            if (cross(v[ib] - v[ia], v[ic] - v[ib]) <= area_tol) continue;
            bool ear = true;
            for (int j = 0; j < m && ear; ++j) {
                const int ip = idx[j];
                if (ip == ia || ip == ib || ip == ic) continue;
                if (point_in_triangle(v[ip], v[ia], v[ib], v[ic], -1e-15 * scale * scale) &&
                    (v[ip] - v[ia]).norm() > 0 && (v[ip] - v[ic]).norm() > 0)
                    ear = false;
            }
            if (!ear) continue;
            tri_idx.push_back({ia, ib, ic});
            idx.erase(idx.begin() + k);
            clipped = true;
            break;
        }
        if (!clipped) {
            for (int k = 1; k + 1 < static_cast<int>(idx.size()); ++k) tri_idx.push_back({idx[0], idx[k], idx[k + 1]});
            idx.clear();
        }
    }
    if (idx.size() == 3) tri_idx.push_back({idx[0], idx[1], idx[2]});

    // Lawson flips on interior edges
    auto key = [](int a, int b) { return std::pair{std::min(a, b), std::max(a, b)}; };
    const int nv = static_cast<int>(v.size());
    auto boundary = [nv](int a, int b) { return std::abs(a - b) == 1 || std::abs(a - b) == nv - 1; };
    for (int pass = 0; pass < 100; ++pass) {
        std::map<std::pair<int, int>, std::vector<int>> edges;
        for (int t = 0; t < static_cast<int>(tri_idx.size()); ++t)
            for (int e = 0; e < 3; ++e) edges[key(tri_idx[t][e], tri_idx[t][(e + 1) % 3])].push_back(t);
        bool flipped = false;
        for (const auto& [ed, ts] : edges) {
            if (ts.size() != 2 || boundary(ed.first, ed.second)) continue;
            auto opposite = [&](int t) {
                for (int a : tri_idx[t])
                    if (a != ed.first && a != ed.second) return a;
                return -1;
            };
            const int p = opposite(ts[0]), q = opposite(ts[1]);
            auto angle = [&](int apex) {
                const Vec2 d1 = v[ed.first] - v[apex], d2 = v[ed.second] - v[apex];
                return std::atan2(std::abs(cross(d1, d2)), d1.dot(d2));
            };
            if (angle(p) + angle(q) <= std::numbers::pi + 1e-12) continue;
            // new diagonal p-q must split the quad into two positive triangles
            const int a = ed.first, b = ed.second;
            const double s1 = cross(v[q] - v[p], v[a] - v[p]), s2 = cross(v[q] - v[p], v[b] - v[p]);
            if (s1 * s2 >= 0.0) continue;
            std::array<int, 3> t1{p, q, a}, t2{q, p, b};
            if (cross(v[t1[1]] - v[t1[0]], v[t1[2]] - v[t1[0]]) < 0) std::swap(t1[1], t1[2]);
            if (cross(v[t2[1]] - v[t2[0]], v[t2[2]] - v[t2[0]]) < 0) std::swap(t2[1], t2[2]);
            tri_idx[ts[0]] = t1;
            tri_idx[ts[1]] = t2;
            flipped = true;
            break;
        }
        if (!flipped) break;
    }
    for (const auto& t : tri_idx) {
        std::array<Vec2, 3> tr{v[t[0]], v[t[1]], v[t[2]]};
        if (cross(tr[1] - tr[0], tr[2] - tr[0]) > area_tol) tris.push_back(tr);
    }
    return tris;
}

// ----------------------------------------------------------------------------
// Clipping
// ----------------------------------------------------------------------------

ClipResult classify_and_clip(const std::vector<Vec2>& cell, const InterfacePolyline& poly) {
    std::vector<int> all(poly.segments.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return classify_and_clip(cell, poly, all);
}

ClipResult classify_and_clip(const std::vector<Vec2>& cell, const InterfacePolyline& poly,
                             const std::vector<int>& cand_in) {
    ClipResult res;
    res.cell_area = polygon_area(cell);
    double h = 0.0;
    for (const auto& x : cell) h = std::max(h, (x - cell[0]).norm());
    const double tol = 1e-10 * h;
    const int nseg = static_cast<int>(poly.segments.size());

    std::vector<int> cand = cand_in;
    std::sort(cand.begin(), cand.end());

    struct Piece {
        int seg;
        double tE, tL;
    };
    std::vector<Piece> pieces;
    for (int i : cand) {
        const auto& s = poly.segments[i];
        double tE, tL;
        if (!clip_segment(s.a, s.b, cell, tol, 0.0, 1.0, tE, tL)) continue;
        if ((tL - tE) * (s.b - s.a).norm() <= tol) continue;
        pieces.push_back({i, tE, tL});
    }

    auto center_side = [&]() {
        Vec2 c = Vec2::Zero();
        for (const auto& x : cell) c += x;
        return poly.side(c / static_cast<double>(cell.size()));
    };
    if (pieces.empty()) {
        if (center_side() > 0.0) {
            res.cls = CellClass::Material;
            res.material = {cell};
            res.material_area = res.cell_area;
        } else {
            res.cls = CellClass::Void;
        }
        return res;
    }

    // group into chains of connected pieces
    std::vector<std::vector<Piece>> chains;
    const double tt = 1e-12;
    for (const auto& p : pieces) {
        if (!chains.empty()) {
            const Piece& q = chains.back().back();
            if (q.seg + 1 == p.seg && poly.segments[q.seg].joins_next && q.tL >= 1.0 - tt && p.tE <= tt) {
                chains.back().push_back(p);
                continue;
            }
        }
        chains.push_back({p});
    }
    if (poly.closed && chains.size() > 1) {
        const Piece& last = chains.back().back();
        const Piece& first = chains.front().front();
        if (last.seg == nseg - 1 && first.seg == 0 && last.tL >= 1.0 - tt && first.tE <= tt) {
            auto tail = chains.back();
            chains.pop_back();
            tail.insert(tail.end(), chains.front().begin(), chains.front().end());
            chains.front() = tail;
        }
    }

    std::vector<std::vector<Vec2>> polys{cell};
    for (const auto& ch : chains) {
        std::vector<Vec2> pts;
        const auto& s0 = poly.segments[ch.front().seg];
        pts.push_back(s0.a + ch.front().tE * (s0.b - s0.a));
        for (const auto& p : ch) {
            const auto& s = poly.segments[p.seg];
            pts.push_back(s.a + p.tL * (s.b - s.a));
        }
        // free ends inside the cell are extended along their segment to the boundary
        const double btol = 10.0 * tol;
        if (locate_on_boundary(pts.front(), cell, btol).edge < 0) {
            double tE, tL;
            if (clip_segment(s0.a, s0.b, cell, tol, -1e30, 1e30, tE, tL)) pts.front() = s0.a + tE * (s0.b - s0.a);
        }
        if (locate_on_boundary(pts.back(), cell, btol).edge < 0) {
            const auto& s1 = poly.segments[ch.back().seg];
            double tE, tL;
            if (clip_segment(s1.a, s1.b, cell, tol, -1e30, 1e30, tE, tL)) pts.back() = s1.a + tL * (s1.b - s1.a);
        }
        pts.front() = snap_along_line(pts.front(), s0.a, s0.b, cell, btol);
        {
            const auto& s1 = poly.segments[ch.back().seg];
            pts.back() = snap_along_line(pts.back(), s1.a, s1.b, cell, btol);
        }
        if ((pts.back() - pts.front()).norm() <= tol && pts.size() <= 2) continue;
        // probe point on the first non-degenerate piece
        Vec2 probe = 0.5 * (pts[0] + pts[1]);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i)
            if ((pts[i + 1] - pts[i]).norm() > 10 * tol) {
                probe = 0.5 * (pts[i] + pts[i + 1]);
                break;
            }
        for (std::size_t k = 0; k < polys.size(); ++k) {
            const auto& P = polys[k];
            const BoundaryPos A = locate_on_boundary(pts.front(), P, btol);
            const BoundaryPos B = locate_on_boundary(pts.back(), P, btol);
            if (A.edge < 0 || B.edge < 0) continue;
            if (!point_in_polygon(probe, P) || locate_on_boundary(probe, P, btol).edge >= 0) continue;
            std::vector<Vec2> p1(pts.begin(), pts.end());
            const auto w1 = boundary_walk(P, B, A);
            p1.insert(p1.end(), w1.begin(), w1.end());
            std::vector<Vec2> p2(pts.rbegin(), pts.rend());
            const auto w2 = boundary_walk(P, A, B);
            p2.insert(p2.end(), w2.begin(), w2.end());
            polys.erase(polys.begin() + static_cast<long>(k));
            polys.push_back(std::move(p1));
            polys.push_back(std::move(p2));
            break;
        }
    }

    for (auto& P : polys) {
        const double a = polygon_area(P);
        if (std::abs(a) <= 1e-14 * res.cell_area) continue;
        if (a < 0.0) std::reverse(P.begin(), P.end());
        const auto tris = triangulate_polygon(P);
        if (tris.empty()) continue;
        std::size_t big = 0;
        double ba = -1.0;
        for (std::size_t i = 0; i < tris.size(); ++i) {
            const double ta = 0.5 * cross(tris[i][1] - tris[i][0], tris[i][2] - tris[i][0]);
            if (ta > ba) {
                ba = ta;
                big = i;
            }
        }
        const Vec2 c = (tris[big][0] + tris[big][1] + tris[big][2]) / 3.0;
        if (poly.side(c) > 0.0) {
            res.material_area += std::abs(a);
            res.material.push_back(P);
        }
    }
    if (res.material_area <= 1e-12 * res.cell_area) {
        res.cls = CellClass::Void;
        res.material.clear();
        res.material_area = 0.0;
    } else if (res.material_area >= (1.0 - 1e-12) * res.cell_area) {
        res.cls = CellClass::Material;
        res.material = {cell};
        res.material_area = res.cell_area;
    } else {
        res.cls = CellClass::Cut;
    }
    return res;
}

// ----------------------------------------------------------------------------
// Table
// ----------------------------------------------------------------------------

int CutCellTable::count(CellClass c) const {
    return static_cast<int>(std::count_if(cells.begin(), cells.end(), [c](const auto& q) { return q.cls == c; }));
}

double CutCellTable::material_area() const {
    double a = 0.0;
    for (const auto& c : cells) a += c.material_area;
    return a;
}

CutCellTable build_cut_cells(const Mesh& bg, const InterfacePolyline& poly, const CutOptions& opt) {
    CutCellTable table;
    const int ne = bg.num_elements();
    table.cells.resize(ne);

    // segment candidates per cell through the segment bounding boxes
    const CellLocator locator(bg);
    std::vector<std::vector<int>> seg_of_cell(ne);
    for (int i = 0; i < static_cast<int>(poly.segments.size()); ++i) {
        const auto& s = poly.segments[i];
        for (int c : locator.candidates(s.a.cwiseMin(s.b), s.a.cwiseMax(s.b))) seg_of_cell[c].push_back(i);
    }

    for (int c = 0; c < ne; ++c) {
        std::vector<Vec2> corners;
        for (int a : element_corners(bg.elements[c])) corners.push_back(bg.nodes[a]);
        if (polygon_area(corners) < 0.0) std::reverse(corners.begin(), corners.end());
        const ClipResult clip = classify_and_clip(corners, poly, seg_of_cell[c]);
        CellQuadrature& q = table.cells[c];
        q.cell = c;
        q.cls = clip.cls;
        q.cell_area = clip.cell_area;
        q.material_area = clip.material_area;
        if (clip.cls == CellClass::Material) {
            q.points = standard_quadrature(bg, c);
            q.material_area = element_area(bg, c);
            q.cell_area = q.material_area;
        } else if (clip.cls == CellClass::Cut) {
            const TriangleRule& rule = triangle_rule(opt.triangle_order);
            for (const auto& P : clip.material)
                for (const auto& t : triangulate_polygon(P)) {
                    q.triangles.push_back(t);
                    const double area = 0.5 * cross(t[1] - t[0], t[2] - t[0]);
                    for (std::size_t k = 0; k < rule.points.size(); ++k) {
                        const Vec2& b = rule.points[k];
                        const Vec2 x = (1.0 - b.x() - b.y()) * t[0] + b.x() * t[1] + b.y() * t[2];
                        q.points.push_back({inverse_map(bg, c, x), rule.weights[k] * area});
                    }
                }
        }
    }

    // interface pairs: chord pieces per cell, each parameter range covered once
    const GaussRule& g = gauss_legendre(opt.interface_gauss);
    for (int i = 0; i < static_cast<int>(poly.segments.size()); ++i) {
        const auto& s = poly.segments[i];
        struct Range {
            double a, b;
            int cell;
        };
        std::vector<Range> ranges;
        for (int c : locator.candidates(s.a.cwiseMin(s.b), s.a.cwiseMax(s.b))) {
            std::vector<Vec2> corners;
            for (int a : element_corners(bg.elements[c])) corners.push_back(bg.nodes[a]);
            if (polygon_area(corners) < 0.0) std::reverse(corners.begin(), corners.end());
            double h = 0.0;
            for (const auto& x : corners) h = std::max(h, (x - corners[0]).norm());
            double tE, tL;
            if (!clip_segment(s.a, s.b, corners, 1e-12 * h, 0.0, 1.0, tE, tL)) continue;
            if (tL - tE <= 1e-12) continue;
            ranges.push_back({tE, tL, c});
        }
        std::sort(ranges.begin(), ranges.end(), [&](const Range& x, const Range& y) {
            if (x.a != y.a) return x.a < y.a;
            const bool xv = table.cells[x.cell].cls == CellClass::Void, yv = table.cells[y.cell].cls == CellClass::Void;
            if (xv != yv) return !xv;
            return x.cell < y.cell;
        });
        double covered = 0.0;
        const NurbsPatch& curve = poly.curves[s.patch];
        for (const auto& r : ranges) {
            const double a = std::max(r.a, covered), b = std::min(r.b, 1.0);
            if (b - a <= 1e-12) continue;
            covered = b;
            const double ta = s.t0 + (s.t1 - s.t0) * a, tb = s.t0 + (s.t1 - s.t0) * b;
            for (std::size_t k = 0; k < g.x.size(); ++k) {
                InterfacePair p;
                p.patch = s.patch;
                p.param = 0.5 * (ta + tb) + 0.5 * (tb - ta) * g.x[k];
                p.x = curve_point(curve, p.param);
                const Vec2 d = curve_tangent(curve, p.param);
                p.weight = g.w[k] * 0.5 * std::abs(tb - ta) * d.norm();
                p.normal = left_normal(d.normalized());
                if (!poly.bulk_left) p.normal = -p.normal;
                p.cell = r.cell;
                bool ok = false;
                try {
                    p.local = inverse_map(bg, r.cell, p.x);
                    ok = inside_parent(bg.elements[r.cell].tech, p.local, 1e-9);
                } catch (const GeometryError&) {
                }
                if (!ok) {
                    for (int c : locator.candidates(p.x)) {
                        if (table.cells[c].cls == CellClass::Void) continue;
                        try {
                            const Vec2 l = inverse_map(bg, c, p.x);
                            if (inside_parent(bg.elements[c].tech, l, 1e-9)) {
                                p.cell = c;
                                p.local = l;
                                ok = true;
                                break;
                            }
                        } catch (const GeometryError&) {
                        }
                    }
                    if (!ok) p.local = inverse_map(bg, r.cell, p.x);
                }
                table.pairs.push_back(p);
            }
        }
    }

    if (opt.prune_threshold > 0.0) prune_small_cuts(table, opt.prune_threshold);
    return table;
}

std::vector<int> prune_small_cuts(CutCellTable& table, double threshold) {
    if (threshold < 0.0 || threshold >= 1.0) throw std::invalid_argument("prune threshold must be in [0, 1)");
    std::vector<int> demoted;
    for (auto& c : table.cells) {
        if (c.cls != CellClass::Cut || c.cell_area <= 0.0) continue;
        if (c.material_area / c.cell_area < threshold) {
            c.cls = CellClass::Void;
            c.points.clear();
            c.triangles.clear();
            c.material_area = 0.0;
            demoted.push_back(c.cell);
        }
    }
    table.pruned += static_cast<int>(demoted.size());
    return demoted;
}

void write_cut_cells_csv(const std::string& path, const CutCellTable& table) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "cell,class,material_fraction\n");
    for (const auto& c : table.cells)
        std::fprintf(f, "%d,%s,%.17g\n", c.cell, to_string(c.cls).c_str(),
                     c.cell_area > 0 ? c.material_area / c.cell_area : 0.0);
    std::fclose(f);
}

void write_cut_cells_vtk(const std::string& path, const CutCellTable& table) {
    VtkWriter w;
    std::vector<double> owner;
    for (const auto& c : table.cells)
        for (const auto& t : c.triangles) {
            w.add_cell({t[0], t[1], t[2]});
            owner.push_back(c.cell);
        }
    w.add_cell_scalar("cell", owner);
    w.write(path, "cut cell triangles");
}

}  // namespace blayer
