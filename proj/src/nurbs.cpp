/**
 * @file nurbs.cpp
 * @brief NURBS basis evaluation, patch evaluation, knot insertion and patch I/O.
 */
#include "blayer/nurbs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace blayer {

// ============================================================================
// Knot vector
// ============================================================================

KnotVector::KnotVector(std::vector<double> knots, int degree) : u_(std::move(knots)), p_(degree) {
    if (p_ < 0) throw GeometryError("knot vector: negative degree");
    if (static_cast<int>(u_.size()) < 2 * (p_ + 1))
        throw GeometryError("knot vector: too few knots for degree");
    for (std::size_t i = 1; i < u_.size(); ++i)
        if (u_[i] < u_[i - 1]) throw GeometryError("knot vector: knots must be non-decreasing");
    for (int i = 0; i <= p_; ++i) {
        if (u_[i] != u_[0] || u_[u_.size() - 1 - i] != u_.back())
            throw GeometryError("knot vector: first and last knots need multiplicity p+1");
    }
    if (!(u_.back() > u_.front())) throw GeometryError("knot vector: empty domain");
    for (std::size_t i = 0; i < u_.size();) {
        std::size_t j = i;
        while (j < u_.size() && u_[j] == u_[i]) ++j;
        const int mult = static_cast<int>(j - i);
        if (i != 0 && j != u_.size() && mult > p_)
            throw GeometryError("knot vector: interior multiplicity exceeds degree");
        i = j;
    }
}

KnotVector KnotVector::open_uniform(int degree, int spans) {
    if (spans < 1) throw GeometryError("open_uniform: need at least one span");
    std::vector<double> k(degree + 1, 0.0);
    for (int i = 1; i < spans; ++i) k.push_back(static_cast<double>(i) / spans);
    k.insert(k.end(), degree + 1, 1.0);
    return KnotVector(std::move(k), degree);
}

int KnotVector::find_span(double u) const {
    const double a = u_.front(), b = u_.back();
    const double tol = kKnotTolerance * std::max(1.0, b - a);
    if (u < a - tol || u > b + tol) {
        std::ostringstream msg;
        msg << "parameter " << u << " outside [" << a << ", " << b << "]";
        throw DomainError(msg.str());
    }
    const int n = num_basis();
    if (u >= b - tol) {
        int s = n - 1;
        while (s > p_ && u_[s] == u_[s + 1]) --s;
        return s;
    }
    if (u <= a) return p_;
    int lo = p_, hi = n;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (u < u_[mid]) hi = mid;
        else lo = mid;
    }
    // snap onto a knot sitting within tolerance above u
    if (lo + 1 < n && std::abs(u_[lo + 1] - u) <= tol) {
        int s = lo + 1;
        while (s + 1 < n && u_[s + 1] == u_[s]) ++s;
        return s;
    }
    return lo;
}

std::vector<double> KnotVector::breakpoints() const {
    std::vector<double> b;
    for (double k : u_)
        if (b.empty() || k != b.back()) b.push_back(k);
    return b;
}

int KnotVector::multiplicity(double u) const {
    return static_cast<int>(std::count_if(u_.begin(), u_.end(), [u](double k) {
        return std::abs(k - u) <= kKnotTolerance;
    }));
}

// ============================================================================
// Basis functions
// ============================================================================

BasisValues eval_bspline_basis(const KnotVector& kv, double u, int nderiv) {
    const int span = kv.find_span(u);
    return eval_bspline_basis_on_span(kv, span, std::clamp(u, kv.front(), kv.back()), nderiv);
}

BasisValues eval_bspline_basis_on_span(const KnotVector& kv, int span, double u, int nderiv) {
    const int p = kv.degree();
    const auto& U = kv.knots();
    const int nd = std::min(nderiv, p);

    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1), right(p + 1);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - U[span + 1 - j];
        right[j] = U[span + j] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    BasisValues out;
    out.span = span;
    out.ders.assign(nderiv + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) out.ders[0][j] = ndu[j][p];

    std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
    for (int r = 0; r <= p; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= nd; ++k) {
            double d = 0.0;
            const int rk = r - k, pk = p - k;
            if (r >= k) {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
                d = a[s2][0] * ndu[rk][pk];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
            for (int j = j1; j <= j2; ++j) {
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
                d += a[s2][j] * ndu[rk + j][pk];
            }
            if (r <= pk) {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            out.ders[k][r] = d;
            std::swap(s1, s2);
        }
    }
    int fac = p;
    for (int k = 1; k <= nd; ++k) {
        for (int j = 0; j <= p; ++j) out.ders[k][j] *= fac;
        fac *= (p - k);
    }
    return out;
}

BasisValues eval_nurbs_basis(const KnotVector& kv, const std::vector<double>& weights, double u,
                             int nderiv) {
    if (static_cast<int>(weights.size()) != kv.num_basis())
        throw GeometryError("eval_nurbs_basis: weight count does not match basis size");
    if (nderiv > 2) throw GeometryError("eval_nurbs_basis: at most two derivatives supported");
    const int p = kv.degree();
    BasisValues b = eval_bspline_basis(kv, u, nderiv);
    const int first = b.span - p;
    double W[3] = {0.0, 0.0, 0.0};
    for (int k = 0; k <= nderiv; ++k)
        for (int j = 0; j <= p; ++j) W[k] += b.ders[k][j] * weights[first + j];

    BasisValues r;
    r.span = b.span;
    r.ders.assign(nderiv + 1, std::vector<double>(p + 1, 0.0));
    for (int j = 0; j <= p; ++j) {
        const double w = weights[first + j];
        const double R = b.ders[0][j] * w / W[0];
        r.ders[0][j] = R;
        if (nderiv >= 1) r.ders[1][j] = (b.ders[1][j] * w - R * W[1]) / W[0];
        if (nderiv >= 2)
            r.ders[2][j] = (b.ders[2][j] * w - 2.0 * r.ders[1][j] * W[1] - R * W[2]) / W[0];
    }
    return r;
}

std::vector<double> greville_abscissae(const KnotVector& kv) {
    const int p = kv.degree();
    const int n = kv.num_basis();
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        if (p == 0) {
            g[i] = 0.5 * (kv[i] + kv[i + 1]);
            continue;
        }
        double s = 0.0;
        for (int k = 1; k <= p; ++k) s += kv[i + k];
        g[i] = s / p;
    }
    return g;
}

// ============================================================================
// Patch
// ============================================================================

NurbsPatch::NurbsPatch(KnotVector u, Eigen::MatrixXd points, std::vector<double> weights)
    : kv_{std::move(u)}, cp_(std::move(points)), w_(std::move(weights)) {
    n_ = {kv_[0].num_basis()};
    validate();
}

NurbsPatch::NurbsPatch(KnotVector u, KnotVector v, Eigen::MatrixXd points,
                       std::vector<double> weights)
    : kv_{std::move(u), std::move(v)}, cp_(std::move(points)), w_(std::move(weights)) {
    n_ = {kv_[0].num_basis(), kv_[1].num_basis()};
    validate();
}

void NurbsPatch::validate() const {
    int total = 1;
    for (int n : n_) total *= n;
    if (cp_.rows() != total) throw GeometryError("patch: control point count mismatch");
    if (static_cast<int>(w_.size()) != total) throw GeometryError("patch: weight count mismatch");
    if (cp_.cols() < 2 || cp_.cols() > 3) throw GeometryError("patch: spatial dimension must be 2 or 3");
    for (double w : w_)
        if (!(w > 0.0)) throw GeometryError("patch: weights must be positive");
}

std::vector<double> NurbsPatch::weights_along(int dir, int fixed_index) const {
    std::vector<double> out;
    if (param_dim() == 1) return w_;
    if (dir == 0)
        for (int i = 0; i < n_[0]; ++i) out.push_back(w_[index(i, fixed_index)]);
    else
        for (int j = 0; j < n_[1]; ++j) out.push_back(w_[index(fixed_index, j)]);
    return out;
}

bool NurbsPatch::same_structure(const NurbsPatch& o) const {
    if (param_dim() != o.param_dim() || spatial_dim() != o.spatial_dim()) return false;
    for (int d = 0; d < param_dim(); ++d) {
        if (kv_[d].degree() != o.kv_[d].degree() || kv_[d].knots() != o.kv_[d].knots()) return false;
    }
    return w_ == o.w_ && cp_.rows() == o.cp_.rows();
}

PatchBasis eval_patch_basis(const NurbsPatch& patch, const double* params, bool second) {
    PatchBasis out;
    const int nd = second ? 2 : 1;
    if (patch.param_dim() == 1) {
        const KnotVector& kv = patch.knots(0);
        BasisValues b = eval_nurbs_basis(kv, patch.weights(), params[0], nd);
        const int p = kv.degree();
        for (int j = 0; j <= p; ++j) {
            out.index.push_back(b.span - p + j);
            out.R.push_back(b.ders[0][j]);
            out.dR.push_back({b.ders[1][j], 0.0});
            if (second) out.d2R.push_back({b.ders[2][j], 0.0, 0.0});
        }
        return out;
    }
    const KnotVector& ku = patch.knots(0);
    const KnotVector& kv = patch.knots(1);
    const int p = ku.degree(), q = kv.degree();
    BasisValues bu = eval_bspline_basis(ku, params[0], nd);
    BasisValues bv = eval_bspline_basis(kv, params[1], nd);
    const int fu = bu.span - p, fv = bv.span - q;
    const int m = (p + 1) * (q + 1);
    out.index.resize(m);
    std::vector<double> N(m), Nu(m), Nv(m), Nuu(m), Nuv(m), Nvv(m);
    double W = 0, Wu = 0, Wv = 0, Wuu = 0, Wuv = 0, Wvv = 0;
    for (int b = 0; b <= q; ++b) {
        for (int a = 0; a <= p; ++a) {
            const int k = a + (p + 1) * b;
            const int gi = patch.index(fu + a, fv + b);
            const double w = patch.weights()[gi];
            out.index[k] = gi;
            N[k] = bu.ders[0][a] * bv.ders[0][b] * w;
            Nu[k] = bu.ders[1][a] * bv.ders[0][b] * w;
            Nv[k] = bu.ders[0][a] * bv.ders[1][b] * w;
            W += N[k];
            Wu += Nu[k];
            Wv += Nv[k];
            if (second) {
                Nuu[k] = bu.ders[2][a] * bv.ders[0][b] * w;
                Nuv[k] = bu.ders[1][a] * bv.ders[1][b] * w;
                Nvv[k] = bu.ders[0][a] * bv.ders[2][b] * w;
                Wuu += Nuu[k];
                Wuv += Nuv[k];
                Wvv += Nvv[k];
            }
        }
    }
    out.R.resize(m);
    out.dR.resize(m);
    if (second) out.d2R.resize(m);
    for (int k = 0; k < m; ++k) {
        const double R = N[k] / W;
        const double Ru = (Nu[k] - R * Wu) / W;
        const double Rv = (Nv[k] - R * Wv) / W;
        out.R[k] = R;
        out.dR[k] = {Ru, Rv};
        if (second) {
            out.d2R[k] = {(Nuu[k] - 2.0 * Ru * Wu - R * Wuu) / W,
                          (Nuv[k] - Ru * Wv - Rv * Wu - R * Wuv) / W,
                          (Nvv[k] - 2.0 * Rv * Wv - R * Wvv) / W};
        }
    }
    return out;
}

PatchPoint eval_patch(const NurbsPatch& patch, const double* params, bool second) {
    const PatchBasis b = eval_patch_basis(patch, params, second);
    const int sd = patch.spatial_dim();
    PatchPoint pt;
    pt.x = Eigen::VectorXd::Zero(sd);
    pt.d = {Eigen::VectorXd::Zero(sd), Eigen::VectorXd::Zero(sd)};
    if (second) pt.dd = {Eigen::VectorXd::Zero(sd), Eigen::VectorXd::Zero(sd), Eigen::VectorXd::Zero(sd)};
    const auto& P = patch.points();
    for (std::size_t k = 0; k < b.index.size(); ++k) {
        const auto row = P.row(b.index[k]).transpose();
        pt.x += b.R[k] * row;
        pt.d[0] += b.dR[k][0] * row;
        pt.d[1] += b.dR[k][1] * row;
        if (second)
            for (int c = 0; c < 3; ++c) pt.dd[c] += b.d2R[k][c] * row;
    }
    return pt;
}

Vec2 curve_point(const NurbsPatch& curve, double u) {
    const PatchBasis b = eval_patch_basis(curve, &u);
    Vec2 x = Vec2::Zero();
    for (std::size_t k = 0; k < b.index.size(); ++k)
        x += b.R[k] * curve.points().row(b.index[k]).transpose().head<2>();
    return x;
}

Vec2 curve_tangent(const NurbsPatch& curve, double u) {
    const PatchBasis b = eval_patch_basis(curve, &u);
    Vec2 t = Vec2::Zero();
    for (std::size_t k = 0; k < b.index.size(); ++k)
        t += b.dR[k][0] * curve.points().row(b.index[k]).transpose().head<2>();
    return t;
}

Vec2 curve_inward_normal(const NurbsPatch& curve, double u) {
    const Vec2 t = curve_tangent(curve, u);
    const double len = t.norm();
    if (!(len > 1e-14)) throw GeometryError("curve_inward_normal: vanishing tangent");
    return Vec2(t.y(), -t.x()) / len;
}

double curve_signed_curvature(const NurbsPatch& curve, double u) {
    const PatchPoint pt = eval_patch(curve, &u, true);
    const Vec2 d1 = pt.d[0].head<2>(), d2 = pt.dd[0].head<2>();
    const double len = d1.norm();
    if (!(len > 1e-14)) throw GeometryError("curve_signed_curvature: vanishing tangent");
    const Vec2 n(d1.y() / len, -d1.x() / len);
    return d2.dot(n) / (len * len);
}

double curve_length(const NurbsPatch& curve) {
    const auto bp = curve.knots(0).breakpoints();
    const GaussRule& g = gauss_legendre(8);
    double s = 0.0;
    for (std::size_t e = 0; e + 1 < bp.size(); ++e) {
        const double a = bp[e], b = bp[e + 1];
        for (std::size_t q = 0; q < g.x.size(); ++q) {
            const double u = 0.5 * (a + b) + 0.5 * (b - a) * g.x[q];
            s += g.w[q] * 0.5 * (b - a) * curve_tangent(curve, u).norm();
        }
    }
    return s;
}

Vec3 surface_point(const NurbsPatch& surf, double u, double v) {
    const double prm[2] = {u, v};
    return eval_patch(surf, prm).x.head<3>();
}

Vec3 surface_normal(const NurbsPatch& surf, double u, double v, double sign) {
    const double prm[2] = {u, v};
    const PatchPoint pt = eval_patch(surf, prm);
    const Vec3 n = Vec3(pt.d[0].head<3>()).cross(Vec3(pt.d[1].head<3>()));
    const double len = n.norm();
    if (!(len > 1e-14)) throw GeometryError("surface_normal: degenerate tangent plane");
    return sign * n / len;
}

// ============================================================================
// Knot insertion
// ============================================================================

namespace {

/// Boehm insertion on a single row of homogeneous points.
void insert_row(const KnotVector& kv, double u, int r, const std::vector<Eigen::VectorXd>& Pw,
                std::vector<double>& newU, std::vector<Eigen::VectorXd>& Qw) {
    const int p = kv.degree();
    const auto& U = kv.knots();
    const int np = kv.num_basis() - 1;
    const int k = kv.find_span(u);
    const int s = kv.multiplicity(u);
    if (r + s > p) throw GeometryError("insert_knot: multiplicity would exceed degree");
    const int mp = np + p + 1;
    newU.assign(mp + r + 1, 0.0);
    for (int i = 0; i <= k; ++i) newU[i] = U[i];
    for (int i = 1; i <= r; ++i) newU[k + i] = u;
    for (int i = k + 1; i <= mp; ++i) newU[i + r] = U[i];

    Qw.assign(np + r + 1, Eigen::VectorXd());
    for (int i = 0; i <= k - p; ++i) Qw[i] = Pw[i];
    for (int i = k - s; i <= np; ++i) Qw[i + r] = Pw[i];
    std::vector<Eigen::VectorXd> Rw(p + 1);
    for (int i = 0; i <= p - s; ++i) Rw[i] = Pw[k - p + i];
    int L = 0;
    for (int j = 1; j <= r; ++j) {
        L = k - p + j;
        for (int i = 0; i <= p - j - s; ++i) {
            const double alpha = (u - U[L + i]) / (U[i + k + 1] - U[L + i]);
            Rw[i] = alpha * Rw[i + 1] + (1.0 - alpha) * Rw[i];
        }
        Qw[L] = Rw[0];
        Qw[k + r - j - s] = Rw[p - j - s];
    }
    for (int i = L + 1; i < k - s; ++i) Qw[i] = Rw[i - L];
}

}  // namespace

NurbsPatch insert_knot(const NurbsPatch& patch, int dir, double u, int r) {
    if (dir < 0 || dir >= patch.param_dim()) throw GeometryError("insert_knot: bad direction");
    if (r <= 0) return patch;
    const KnotVector& kv = patch.knots(dir);
    if (u <= kv.front() || u >= kv.back()) throw DomainError("insert_knot: parameter not interior");
    const int sd = patch.spatial_dim();
    auto homog = [&](int idx) {
        Eigen::VectorXd h(sd + 1);
        const double w = patch.weights()[idx];
        h.head(sd) = patch.points().row(idx).transpose() * w;
        h[sd] = w;
        return h;
    };
    const int n0 = patch.num_cp(0);
    const int n1 = patch.param_dim() == 2 ? patch.num_cp(1) : 1;
    const int rows = dir == 0 ? n1 : n0;
    const int len = dir == 0 ? n0 : n1;
    std::vector<double> newU;
    std::vector<std::vector<Eigen::VectorXd>> out(rows);
    for (int row = 0; row < rows; ++row) {
        std::vector<Eigen::VectorXd> Pw(len);
        for (int t = 0; t < len; ++t) Pw[t] = homog(dir == 0 ? patch.index(t, row) : patch.index(row, t));
        insert_row(kv, u, r, Pw, newU, out[row]);
    }
    const int newlen = len + r;
    const int m0 = dir == 0 ? newlen : n0;
    const int m1 = dir == 0 ? n1 : newlen;
    Eigen::MatrixXd P(m0 * m1, sd);
    std::vector<double> W(m0 * m1);
    for (int row = 0; row < rows; ++row) {
        for (int t = 0; t < newlen; ++t) {
            const int idx = dir == 0 ? t + m0 * row : row + m0 * t;
            const Eigen::VectorXd& h = out[row][t];
            W[idx] = h[sd];
            P.row(idx) = (h.head(sd) / h[sd]).transpose();
        }
    }
    KnotVector nk(newU, kv.degree());
    if (patch.param_dim() == 1) return NurbsPatch(nk, P, W);
    if (dir == 0) return NurbsPatch(nk, patch.knots(1), P, W);
    return NurbsPatch(patch.knots(0), nk, P, W);
}

NurbsPatch refine_uniform(const NurbsPatch& patch, int dir, int per_span) {
    NurbsPatch out = patch;
    const auto bp = patch.knots(dir).breakpoints();
    for (std::size_t e = 0; e + 1 < bp.size(); ++e)
        for (int k = 1; k <= per_span; ++k)
            out = insert_knot(out, dir, bp[e] + (bp[e + 1] - bp[e]) * k / (per_span + 1));
    return out;
}

// ============================================================================
// Orientation
// ============================================================================

double brep_signed_area(const std::vector<NurbsPatch>& loop) {
    const GaussRule& g = gauss_legendre(10);
    double area = 0.0;
    for (const auto& c : loop) {
        if (c.param_dim() != 1) throw GeometryError("brep_signed_area: curves required");
        const auto bp = c.knots(0).breakpoints();
        for (std::size_t e = 0; e + 1 < bp.size(); ++e) {
            const double a = bp[e], b = bp[e + 1];
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const double u = 0.5 * (a + b) + 0.5 * (b - a) * g.x[q];
                const Vec2 x = curve_point(c, u), t = curve_tangent(c, u);
                area += 0.5 * (x.x() * t.y() - x.y() * t.x()) * g.w[q] * 0.5 * (b - a);
            }
        }
    }
    return area;
}

void validate_clockwise(const std::vector<NurbsPatch>& loop) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto& c = loop[i];
        const auto& n = loop[(i + 1) % loop.size()];
        const Vec2 end = curve_point(c, c.knots(0).back());
        const Vec2 start = curve_point(n, n.knots(0).front());
        if ((end - start).norm() > 1e-9 * std::max(1.0, end.norm()))
            throw GeometryError("validate_clockwise: loop is not closed");
    }
    if (!(brep_signed_area(loop) < 0.0))
        throw GeometryError("validate_clockwise: B-rep is not traversed clockwise");
}

// ============================================================================
// Patch I/O
// ============================================================================

void write_patch(std::ostream& os, const NurbsPatch& patch) {
    os << std::setprecision(17);
    os << "nurbs_patch\n";
    os << "param_dim " << patch.param_dim() << "\n";
    os << "spatial_dim " << patch.spatial_dim() << "\n";
    for (int d = 0; d < patch.param_dim(); ++d) {
        const KnotVector& kv = patch.knots(d);
        os << "degree " << kv.degree() << "\n";
        os << "knots " << kv.size();
        for (double k : kv.knots()) os << " " << k;
        os << "\n";
    }
    os << "control_points " << patch.num_cp() << "\n";
    for (int k = 0; k < patch.num_cp(); ++k) {
        for (int c = 0; c < patch.spatial_dim(); ++c) os << patch.points()(k, c) << " ";
        os << patch.weights()[k] << "\n";
    }
}

NurbsPatch read_patch(std::istream& is) {
    auto expect = [&](const std::string& key) {
        std::string tok;
        if (!(is >> tok) || tok != key) throw GeometryError("read_patch: expected '" + key + "'");
    };
    expect("nurbs_patch");
    int pd = 0, sd = 0;
    expect("param_dim");
    is >> pd;
    expect("spatial_dim");
    is >> sd;
    if (pd < 1 || pd > 2 || sd < 2 || sd > 3) throw GeometryError("read_patch: unsupported dimensions");
    std::vector<KnotVector> kvs;
    for (int d = 0; d < pd; ++d) {
        int deg = 0;
        std::size_t nk = 0;
        expect("degree");
        is >> deg;
        expect("knots");
        is >> nk;
        std::vector<double> k(nk);
        for (auto& v : k) is >> v;
        if (!is) throw GeometryError("read_patch: malformed knot vector");
        kvs.emplace_back(k, deg);
    }
    int ncp = 0;
    expect("control_points");
    is >> ncp;
    Eigen::MatrixXd P(ncp, sd);
    std::vector<double> W(ncp);
    for (int k = 0; k < ncp; ++k) {
        for (int c = 0; c < sd; ++c) is >> P(k, c);
        is >> W[k];
    }
    if (!is) throw GeometryError("read_patch: malformed control points");
    if (pd == 1) return NurbsPatch(kvs[0], P, W);
    return NurbsPatch(kvs[0], kvs[1], P, W);
}

void write_patch_file(const std::string& path, const NurbsPatch& patch) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    write_patch(f, patch);
}

NurbsPatch read_patch_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_patch(f);
}

// ============================================================================
// Gauss-Legendre
// ============================================================================

namespace {

GaussRule make_gauss(int n) {
    GaussRule g;
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        g.x[i] = -x;
        g.x[n - 1 - i] = x;
        g.w[i] = g.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (n % 2 == 1) g.x[n / 2] = 0.0;
    return g;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static std::mutex m;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(n);
    if (it == cache.end()) {
        if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
        it = cache.emplace(n, make_gauss(n)).first;
    }
    return it->second;
}

}  // namespace blayer
