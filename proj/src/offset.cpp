/**
 * @file offset.cpp
 * @brief Control polygon translation, Greville interpolation and spring-system optimisation offsets.
 */
#include "blayer/offset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace blayer {

std::string to_string(OffsetMethod m) {
    switch (m) {
        case OffsetMethod::PolygonTranslation: return "polygon_translation";
        case OffsetMethod::Interpolation: return "interpolation";
        case OffsetMethod::Optimization: return "optimization";
    }
    return "unknown";
}

OffsetMethod offset_method_from_string(const std::string& s) {
    if (s == "polygon_translation") return OffsetMethod::PolygonTranslation;
    if (s == "interpolation") return OffsetMethod::Interpolation;
    if (s == "optimization") return OffsetMethod::Optimization;
    throw std::invalid_argument("unknown offset method: " + s);
}

namespace {

Eigen::VectorXd unit_normal(const NurbsPatch& base, const double* prm, double sign) {
    if (base.param_dim() == 1) {
        const Vec2 n = curve_inward_normal(base, prm[0]);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(base.spatial_dim());
        out.head<2>() = n;
        return out;
    }
    return surface_normal(base, prm[0], prm[1], sign);
}

Eigen::VectorXd offset_target(const OffsetRequest& rq, const double* prm) {
    const NurbsPatch& b = rq.base;
    if (b.param_dim() == 1) {
        const double u = prm[0];
        Eigen::VectorXd x = eval_patch(b, prm).x;
        Vec2 n = curve_inward_normal(b, u);
        if (u <= b.knots(0).front() && rq.end_normals.start) n = *rq.end_normals.start;
        if (u >= b.knots(0).back() && rq.end_normals.end) n = *rq.end_normals.end;
        x.head<2>() += rq.distance * n;
        return x;
    }
    return exact_offset_point(b, prm, rq.distance, rq.surface_normal_sign);
}

// ----------------------------------------------------------------------------
// Control polygon translation
// ----------------------------------------------------------------------------

void translate_curve_polygon(const OffsetRequest& rq, OffsetResult& res) {
    const NurbsPatch& b = rq.base;
    const int n = b.num_cp();
    const double l = rq.distance;
    std::vector<Vec2> P(n), d(n - 1), nrm(n - 1);
    for (int i = 0; i < n; ++i) P[i] = b.point(i).head<2>();
    for (int i = 0; i + 1 < n; ++i) {
        d[i] = P[i + 1] - P[i];
        const double len = d[i].norm();
        if (!(len > 0.0)) throw GeometryError("polygon translation: coincident control points");
        nrm[i] = Vec2(d[i].y(), -d[i].x()) / len;
    }
    std::vector<Vec2> Q(n);
    Q[0] = P[0] + l * rq.end_normals.start.value_or(nrm[0]);
    Q[n - 1] = P[n - 1] + l * rq.end_normals.end.value_or(nrm[n - 2]);
    for (int i = 1; i + 1 < n; ++i) {
        const Vec2 a = P[i - 1] + l * nrm[i - 1];
        const Vec2 c = P[i] + l * nrm[i];
        const double det = d[i - 1].x() * (-d[i].y()) - d[i - 1].y() * (-d[i].x());
        if (std::abs(det) <= 1e-12 * d[i - 1].norm() * d[i].norm()) {
            Q[i] = 0.5 * ((P[i] + l * nrm[i - 1]) + (P[i] + l * nrm[i]));
            std::ostringstream msg;
            msg << "parallel segments at control point " << i << ": midpoint fallback";
            res.diagnostics.push_back(msg.str());
            continue;
        }
        const Vec2 rhs = c - a;
        const double s = (rhs.x() * (-d[i].y()) - rhs.y() * (-d[i].x())) / det;
        Q[i] = a + s * d[i - 1];
    }
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd x = b.point(i);
        x.head<2>() = Q[i];
        res.patch.set_point(i, x);
    }
}

void translate_surface_polygon(const OffsetRequest& rq, OffsetResult& res) {
    const NurbsPatch& b = rq.base;
    const int n0 = b.num_cp(0), n1 = b.num_cp(1);
    const double l = rq.distance;
    auto P = [&](int i, int j) -> Vec3 { return b.point(b.index(i, j)).head<3>(); };
    const int di[4] = {1, -1, -1, 1};
    const int dj[4] = {1, 1, -1, -1};
    for (int j = 0; j < n1; ++j) {
        for (int i = 0; i < n0; ++i) {
            // planar triangular facets spanned by the control point and its two neighbours per quadrant
            const Vec3 p = P(i, j);
            std::vector<Vec3> normals;
            for (int q = 0; q < 4; ++q) {
                const int a = i + di[q], c = j + dj[q];
                if (a < 0 || a >= n0 || c < 0 || c >= n1) continue;
                Vec3 nv = (P(a, j) - p).cross(P(i, c) - p) * (di[q] * dj[q]);
                const double len = nv.norm();
                if (!(len > 0.0)) throw GeometryError("polygon translation: degenerate facet");
                normals.push_back(rq.surface_normal_sign * nv / len);
            }
            Vec3 delta;
            auto averaged = [&]() {
                Vec3 m = Vec3::Zero();
                for (const auto& nv : normals) m += nv;
                if (!(m.norm() > 1e-12)) throw GeometryError("polygon translation: opposite facet normals");
                return Vec3(l * m.normalized());
            };
            if (normals.size() >= 3) {
                double best = std::numeric_limits<double>::infinity();
                Eigen::Matrix3d bestA = Eigen::Matrix3d::Zero();
                const int m = static_cast<int>(normals.size());
                for (int a = 0; a < m; ++a)
                    for (int c = a + 1; c < m; ++c)
                        for (int e = c + 1; e < m; ++e) {
                            Eigen::Matrix3d A;
                            A.row(0) = normals[a].transpose();
                            A.row(1) = normals[c].transpose();
                            A.row(2) = normals[e].transpose();
                            Eigen::JacobiSVD<Eigen::Matrix3d> svd(A);
                            const double cond =
                                svd.singularValues()(0) / std::max(svd.singularValues()(2), 1e-300);
                            if (cond < best) {
                                best = cond;
                                bestA = A;
                            }
                        }
                if (best > 1e12) {
                    // planes share a common line: closest point of that line
                    Eigen::MatrixXd A(m, 3);
                    for (int a = 0; a < m; ++a) A.row(a) = normals[a].transpose();
                    delta = A.completeOrthogonalDecomposition().solve(Eigen::VectorXd::Constant(m, l));
                    if (((A * delta).array() - l).abs().maxCoeff() > 1e-9 * l) delta = averaged();
                    std::ostringstream msg;
                    msg << "ill-conditioned plane intersection at (" << i << "," << j << "): minimum-norm point";
                    res.diagnostics.push_back(msg.str());
                } else {
                    delta = bestA.colPivHouseholderQr().solve(Vec3::Constant(l));
                }
            } else if (normals.size() == 2) {
                // point of the intersection line of both translated planes closest to p
                Eigen::Matrix<double, 2, 3> A;
                A.row(0) = normals[0].transpose();
                A.row(1) = normals[1].transpose();
                if (normals[0].cross(normals[1]).norm() < 1e-12) delta = averaged();
                else delta = A.transpose() * (A * A.transpose()).ldlt().solve(Eigen::Vector2d::Constant(l));
            } else {
                delta = l * normals[0];
            }
            res.patch.set_point(b.index(i, j), p + delta);
        }
    }
}

// ----------------------------------------------------------------------------
// Collocation matrices
// ----------------------------------------------------------------------------

/// Row k: rational basis of the base at parameter point k.
Eigen::MatrixXd collocation(const NurbsPatch& b, const std::vector<std::array<double, 2>>& prm) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(prm.size()), b.num_cp());
    for (std::size_t k = 0; k < prm.size(); ++k) {
        const PatchBasis pb = eval_patch_basis(b, prm[k].data());
        for (std::size_t a = 0; a < pb.index.size(); ++a) A(static_cast<Eigen::Index>(k), pb.index[a]) = pb.R[a];
    }
    return A;
}

std::vector<std::array<double, 2>> greville_grid(const NurbsPatch& b) {
    std::vector<std::array<double, 2>> out;
    const auto gu = greville_abscissae(b.knots(0));
    if (b.param_dim() == 1) {
        for (double u : gu) out.push_back({u, 0.0});
        return out;
    }
    const auto gv = greville_abscissae(b.knots(1));
    for (double v : gv)
        for (double u : gu) out.push_back({u, v});
    return out;
}

std::vector<std::array<double, 2>> sample_grid(const NurbsPatch& b, int m) {
    if (m < 2) throw std::invalid_argument("optimization: at least two samples per direction");
    std::vector<std::array<double, 2>> out;
    auto lin = [m](double a, double c, int k) { return a + (c - a) * k / (m - 1); };
    const auto du = b.domain(0);
    if (b.param_dim() == 1) {
        for (int k = 0; k < m; ++k) out.push_back({lin(du[0], du[1], k), 0.0});
        return out;
    }
    const auto dv = b.domain(1);
    for (int kv = 0; kv < m; ++kv)
        for (int ku = 0; ku < m; ++ku) out.push_back({lin(du[0], du[1], ku), lin(dv[0], dv[1], kv)});
    return out;
}

Eigen::MatrixXd targets(const OffsetRequest& rq, const std::vector<std::array<double, 2>>& prm) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(prm.size()), rq.base.spatial_dim());
    for (std::size_t k = 0; k < prm.size(); ++k) X.row(static_cast<Eigen::Index>(k)) = offset_target(rq, prm[k].data()).transpose();
    return X;
}

void interpolate(const OffsetRequest& rq, OffsetResult& res) {
    const auto prm = greville_grid(rq.base);
    const Eigen::MatrixXd N = collocation(rq.base, prm);
    const Eigen::MatrixXd X = targets(rq, prm);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(N);
    if (!lu.isInvertible()) throw GeometryError("interpolation: singular collocation matrix");
    res.patch.points() = lu.solve(X);
}

void optimize(const OffsetRequest& rq, OffsetResult& res) {
    interpolate(rq, res);
    const auto prm = sample_grid(rq.base, rq.optimizer.samples);
    const Eigen::MatrixXd A = collocation(rq.base, prm);
    const Eigen::MatrixXd X = targets(rq, prm);
    const int n = rq.base.num_cp();

    // control points pinned to shared corners
    std::vector<char> pinned(n, 0);
    if (rq.base.param_dim() == 1) {
        if (rq.end_normals.start) pinned[0] = 1;
        if (rq.end_normals.end) pinned[n - 1] = 1;
    }

    Eigen::MatrixXd Q = res.patch.points();
    auto energy = [&](const Eigen::MatrixXd& Qc) { return 0.5 * (X - A * Qc).squaredNorm(); };
    auto gradient = [&](const Eigen::MatrixXd& Qc) {
        Eigen::MatrixXd g = -A.transpose() * (X - A * Qc);
        for (int i = 0; i < n; ++i)
            if (pinned[i]) g.row(i).setZero();
        return g;
    };
    // fixed step 1/L with L the largest eigenvalue of the Gauss-Newton matrix
    const Eigen::MatrixXd AtA = A.transpose() * A;
    const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(AtA, Eigen::EigenvaluesOnly)
                         .eigenvalues()
                         .maxCoeff();
    double step = 1.0 / L;

    double E = energy(Q);
    Eigen::MatrixXd g = gradient(Q);
    const double g0 = g.norm();
    const int max_it = rq.optimizer.max_iterations;
    int it = 0;
    bool converged = g0 == 0.0;
    while (!converged && it < max_it) {
        Eigen::MatrixXd Qn = Q - step * g;
        double En = energy(Qn);
        int halvings = 0;
        while (En > E && halvings < 60) {
            step *= 0.5;
            Qn = Q - step * g;
            En = energy(Qn);
            ++halvings;
        }
        if (En > E) break;
        Q = std::move(Qn);
        E = En;
        g = gradient(Q);
        ++it;
        if (g.norm() <= rq.optimizer.gradient_tolerance * g0) converged = true;
    }
    res.patch.points() = Q;
    res.iterations = it;
    res.energy = E;
    res.converged = converged;
    if (!converged) {
        std::ostringstream msg;
        msg << "optimization stopped after " << it << " iterations, gradient ratio "
            << (g0 > 0 ? g.norm() / g0 : 0.0);
        res.diagnostics.push_back(msg.str());
    }
}

}  // namespace

Eigen::VectorXd exact_offset_point(const NurbsPatch& base, const double* params, double distance,
                                   double surface_normal_sign) {
    Eigen::VectorXd x = eval_patch(base, params).x;
    return x + distance * unit_normal(base, params, surface_normal_sign);
}

double min_offset_side_radius(const NurbsPatch& base, double sign) {
    double rmin = std::numeric_limits<double>::infinity();
    const int per_span = 50;
    if (base.param_dim() == 1) {
        const auto bp = base.knots(0).breakpoints();
        for (std::size_t e = 0; e + 1 < bp.size(); ++e)
            for (int k = 0; k <= per_span; ++k) {
                const double u = bp[e] + (bp[e + 1] - bp[e]) * k / per_span;
                const double kappa = curve_signed_curvature(base, u);
                if (kappa > 0.0) rmin = std::min(rmin, 1.0 / kappa);
            }
        return rmin;
    }
    const auto bu = base.knots(0).breakpoints(), bv = base.knots(1).breakpoints();
    const int m = 12;
    for (std::size_t eu = 0; eu + 1 < bu.size(); ++eu)
        for (std::size_t ev = 0; ev + 1 < bv.size(); ++ev)
            for (int a = 0; a <= m; ++a)
                for (int c = 0; c <= m; ++c) {
                    const double prm[2] = {bu[eu] + (bu[eu + 1] - bu[eu]) * a / m,
                                           bv[ev] + (bv[ev + 1] - bv[ev]) * c / m};
                    const PatchPoint pt = eval_patch(base, prm, true);
                    const Vec3 su = pt.d[0].head<3>(), sv = pt.d[1].head<3>();
                    const Vec3 n = sign * su.cross(sv).normalized();
                    Eigen::Matrix2d I, II;
                    I << su.dot(su), su.dot(sv), su.dot(sv), sv.dot(sv);
                    II << pt.dd[0].head<3>().dot(n), pt.dd[1].head<3>().dot(n), pt.dd[1].head<3>().dot(n),
                        pt.dd[2].head<3>().dot(n);
                    const Eigen::Matrix2d S = I.inverse() * II;
                    const Eigen::Vector2cd ev2 = S.eigenvalues();
                    for (int k = 0; k < 2; ++k)
                        if (ev2[k].real() > 0.0) rmin = std::min(rmin, 1.0 / ev2[k].real());
                }
    return rmin;
}

OffsetResult compute_offset(const OffsetRequest& rq) {
    if (!(rq.distance > 0.0)) throw std::invalid_argument("offset: distance must be positive");
    const NurbsPatch& b = rq.base;
    if (b.param_dim() == 1 && b.spatial_dim() != 2)
        throw GeometryError("offset: curves must be planar (2D)");
    if (b.param_dim() == 2 && b.spatial_dim() != 3) throw GeometryError("offset: surfaces must be in 3D");
    const double rmin = min_offset_side_radius(b, rq.surface_normal_sign);
    if (!(rq.distance < rmin)) {
        std::ostringstream msg;
        msg << "offset distance " << rq.distance << " not below the minimum radius of curvature " << rmin;
        throw GeometryError(msg.str());
    }
    OffsetResult res;
    res.patch = b;
    switch (rq.method) {
        case OffsetMethod::PolygonTranslation:
            if (b.param_dim() == 1) translate_curve_polygon(rq, res);
            else translate_surface_polygon(rq, res);
            break;
        case OffsetMethod::Interpolation: interpolate(rq, res); break;
        case OffsetMethod::Optimization: optimize(rq, res); break;
    }
    return res;
}

OffsetErrors offset_error_metrics(const NurbsPatch& base, const NurbsPatch& approx, double l,
                                  int samples_per_span, double sign) {
    if (!base.same_structure(approx) && (base.param_dim() != approx.param_dim()))
        throw GeometryError("offset_error_metrics: incompatible patches");
    OffsetErrors err;
    const GaussRule& g = gauss_legendre(12);
    auto dist = [&](const double* prm) {
        const Eigen::VectorXd ex = exact_offset_point(base, prm, l, sign);
        return (eval_patch(approx, prm).x - ex).norm();
    };
    const int s = std::max(samples_per_span, 2);
    if (base.param_dim() == 1) {
        const auto bp = approx.knots(0).breakpoints();
        double num = 0.0, len = 0.0;
        for (std::size_t e = 0; e + 1 < bp.size(); ++e) {
            const double a = bp[e], c = bp[e + 1];
            for (int k = 0; k < s; ++k) {
                const double u = a + (c - a) * k / (s - 1);
                err.e_inf = std::max(err.e_inf, dist(&u));
            }
            for (std::size_t q = 0; q < g.x.size(); ++q) {
                const double u = 0.5 * (a + c) + 0.5 * (c - a) * g.x[q];
                const double ds = eval_patch(approx, &u).d[0].norm() * g.w[q] * 0.5 * (c - a);
                const double d = dist(&u);
                num += d * d * ds;
                len += ds;
            }
        }
        err.e_L2 = std::sqrt(num / len);
        return err;
    }
    const auto bu = approx.knots(0).breakpoints(), bv = approx.knots(1).breakpoints();
    double num = 0.0, area = 0.0;
    for (std::size_t eu = 0; eu + 1 < bu.size(); ++eu) {
        for (std::size_t ev = 0; ev + 1 < bv.size(); ++ev) {
            const double ua = bu[eu], ub = bu[eu + 1], va = bv[ev], vb = bv[ev + 1];
            for (int a = 0; a < s; ++a)
                for (int c = 0; c < s; ++c) {
                    const double prm[2] = {ua + (ub - ua) * a / (s - 1), va + (vb - va) * c / (s - 1)};
                    err.e_inf = std::max(err.e_inf, dist(prm));
                }
            for (std::size_t qa = 0; qa < g.x.size(); ++qa)
                for (std::size_t qc = 0; qc < g.x.size(); ++qc) {
                    const double prm[2] = {0.5 * (ua + ub) + 0.5 * (ub - ua) * g.x[qa],
                                           0.5 * (va + vb) + 0.5 * (vb - va) * g.x[qc]};
                    const PatchPoint pt = eval_patch(approx, prm);
                    const double jac = Vec3(pt.d[0].head<3>()).cross(Vec3(pt.d[1].head<3>())).norm();
                    const double dA = jac * g.w[qa] * g.w[qc] * 0.25 * (ub - ua) * (vb - va);
                    const double d = dist(prm);
                    num += d * d * dA;
                    area += dA;
                }
        }
    }
    err.e_L2 = std::sqrt(num / area);
    return err;
}

std::vector<EndNormals> average_patch_edge_normals(const std::vector<NurbsPatch>& curves,
                                                   double tolerance) {
    const std::size_t n = curves.size();
    struct End {
        std::size_t curve;
        bool at_end;
        Vec2 x;
        Vec2 normal;
    };
    std::vector<End> ends;
    double scale = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const auto& cv = curves[c];
        if (cv.param_dim() != 1) throw GeometryError("average_patch_edge_normals: curves required");
        const double a = cv.knots(0).front(), b = cv.knots(0).back();
        ends.push_back({c, false, curve_point(cv, a), curve_inward_normal(cv, a)});
        ends.push_back({c, true, curve_point(cv, b), curve_inward_normal(cv, b)});
        for (int k = 0; k < cv.num_cp(); ++k) scale = std::max(scale, cv.point(k).head<2>().norm());
    }
    const double tol = tolerance * std::max(1.0, scale);
    std::vector<EndNormals> out(n);
    for (std::size_t i = 0; i < ends.size(); ++i) {
        std::vector<std::size_t> group;
        for (std::size_t j = 0; j < ends.size(); ++j)
            if ((ends[j].x - ends[i].x).norm() <= tol) group.push_back(j);
        if (group.size() < 2) continue;
        Vec2 m = Vec2::Zero();
        for (std::size_t j : group) m += ends[j].normal;
        if (m.norm() < 1e-8) throw GeometryError("average_patch_edge_normals: normals cancel at shared corner");
        const Vec2 avg = m / m.norm();
        if (ends[i].at_end) out[ends[i].curve].end = avg;
        else out[ends[i].curve].start = avg;
    }
    return out;
}

std::vector<OffsetResult> offset_brep(const std::vector<NurbsPatch>& curves, double distance,
                                      OffsetMethod method, const OptimizerSettings& opt) {
    const auto normals = average_patch_edge_normals(curves);
    std::vector<OffsetResult> out;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        OffsetRequest rq;
        rq.base = curves[c];
        rq.distance = distance;
        rq.method = method;
        rq.optimizer = opt;
        rq.end_normals = normals[c];
        out.push_back(compute_offset(rq));
    }
    // shared corners: identical offset points on every adjacent patch
    for (std::size_t c = 0; c < curves.size(); ++c) {
        for (int side = 0; side < 2; ++side) {
            const auto& en = side == 0 ? normals[c].start : normals[c].end;
            if (!en) continue;
            const auto& cv = curves[c];
            const int k = side == 0 ? 0 : cv.num_cp() - 1;
            Eigen::VectorXd x = cv.point(k);
            x.head<2>() += distance * (*en);
            out[c].patch.set_point(k, x);
        }
    }
    return out;
}

}  // namespace blayer
