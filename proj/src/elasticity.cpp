/**
 * @file elasticity.cpp
 * @brief St. Venant-Kirchhoff element kernels and boundary loads.
 */
#include "blayer/elasticity.hpp"

#include <array>
#include <stdexcept>

namespace blayer {

std::string to_string(Kinematics k) { return k == Kinematics::Linear ? "linear" : "finite"; }

Kinematics kinematics_from_string(const std::string& s) {
    if (s == "linear") return Kinematics::Linear;
    if (s == "finite" || s == "nonlinear") return Kinematics::Finite;
    throw std::invalid_argument("unknown kinematics '" + s + "'");
}

Material::Material(double E_, double nu_, Kinematics k) : E(E_), nu(nu_), kinematics(k) {
    if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
    if (!(nu > -1.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in (-1, 0.5)");
}

Eigen::Matrix3d Material::voigt() const {
    const double l = lambda(), m = mu();
    Eigen::Matrix3d C;
    C << l + 2 * m, l, 0, l, l + 2 * m, 0, 0, 0, m;
    return C;
}

StressTangent svk_stress_tangent(const Eigen::Matrix2d& E, const Material& m) {
    StressTangent st;
    st.S = m.lambda() * E.trace() * Eigen::Matrix2d::Identity() + 2.0 * m.mu() * E;
    st.C = m.voigt();
    return st;
}

PhysicalShape physical_shape(const Mesh& mesh, int element, const Vec2& local) {
    const Element& e = mesh.elements[element];
    PhysicalShape ps;
    ps.local = shape_functions(mesh, e, local);
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for (int a = 0; a < ps.local.n; ++a) {
        const Vec2& X = mesh.nodes[e.nodes[a]];
        ps.x += ps.local.N[a] * X;
        J.col(0) += ps.local.dN[a][0] * X;
        J.col(1) += ps.local.dN[a][1] * X;
    }
    ps.detJ = J.determinant();
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    for (int a = 0; a < ps.local.n; ++a) ps.dN[a] = Jit * Vec2(ps.local.dN[a][0], ps.local.dN[a][1]);
    return ps;
}

Eigen::Matrix2d displacement_gradient(const PhysicalShape& sh, const Element& e, const Eigen::VectorXd& u) {
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    for (int a = 0; a < sh.local.n; ++a) H += Vec2(u[2 * a], u[2 * a + 1]) * sh.dN[a].transpose();
    (void)e;
    return H;
}

ElementResult element_force_stiffness(const Mesh& mesh, int element, const std::vector<QuadPoint>& quad,
                                      const Material& m, const Eigen::VectorXd& u) {
    const Element& e = mesh.elements[element];
    const int n = static_cast<int>(e.nodes.size());
    ElementResult r;
    r.f = Eigen::VectorXd::Zero(2 * n);
    r.K = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    const Eigen::Matrix3d C = m.voigt();
    Eigen::MatrixXd B(3, 2 * n);
    for (const auto& q : quad) {
        const PhysicalShape sh = physical_shape(mesh, element, q.local);
        if (sh.detJ <= 0.0) throw GeometryError("non-positive Jacobian at a quadrature point");
        const Eigen::Matrix2d H = displacement_gradient(sh, e, u);
        if (m.kinematics == Kinematics::Linear) {
            for (int a = 0; a < n; ++a) {
                const Vec2& g = sh.dN[a];
                B.col(2 * a) << g.x(), 0.0, g.y();
                B.col(2 * a + 1) << 0.0, g.y(), g.x();
            }
            const Eigen::Matrix2d eps = 0.5 * (H + H.transpose());
            const Eigen::Vector3d sv = C * Eigen::Vector3d(eps(0, 0), eps(1, 1), 2.0 * eps(0, 1));
            r.f.noalias() += q.weight * B.transpose() * sv;
            r.K.noalias() += q.weight * B.transpose() * C * B;
            continue;
        }
        const Eigen::Matrix2d F = Eigen::Matrix2d::Identity() + H;
        const Eigen::Matrix2d Egl = 0.5 * (F.transpose() * F - Eigen::Matrix2d::Identity());
        const StressTangent st = svk_stress_tangent(Egl, m);
        for (int a = 0; a < n; ++a) {
            const Vec2& g = sh.dN[a];
            B.col(2 * a) << F(0, 0) * g.x(), F(0, 1) * g.y(), F(0, 0) * g.y() + F(0, 1) * g.x();
            B.col(2 * a + 1) << F(1, 0) * g.x(), F(1, 1) * g.y(), F(1, 0) * g.y() + F(1, 1) * g.x();
        }
        const Eigen::Vector3d sv(st.S(0, 0), st.S(1, 1), st.S(0, 1));
        r.f.noalias() += q.weight * B.transpose() * sv;
        r.K.noalias() += q.weight * B.transpose() * st.C * B;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                const double gab = q.weight * sh.dN[a].dot(st.S * sh.dN[b]);
                r.K(2 * a, 2 * b) += gab;
                r.K(2 * a + 1, 2 * b + 1) += gab;
            }
    }
    return r;
}

Eigen::Matrix2d cauchy_stress(const Eigen::Matrix2d& H, const Material& m) {
    if (m.kinematics == Kinematics::Linear) {
        const Eigen::Matrix2d eps = 0.5 * (H + H.transpose());
        return m.lambda() * eps.trace() * Eigen::Matrix2d::Identity() + 2.0 * m.mu() * eps;
    }
    const Eigen::Matrix2d F = Eigen::Matrix2d::Identity() + H;
    const Eigen::Matrix2d Egl = 0.5 * (F.transpose() * F - Eigen::Matrix2d::Identity());
    const Eigen::Matrix2d S = svk_stress_tangent(Egl, m).S;
    return F * S * F.transpose() / F.determinant();
}

Eigen::Matrix2d element_average_stress(const Mesh& mesh, int element, const std::vector<QuadPoint>& quad,
                                       const Material& m, const Eigen::VectorXd& u) {
    Eigen::Matrix2d s = Eigen::Matrix2d::Zero();
    double w = 0.0;
    for (const auto& q : quad) {
        const PhysicalShape sh = physical_shape(mesh, element, q.local);
        s += q.weight * cauchy_stress(displacement_gradient(sh, mesh.elements[element], u), m);
        w += q.weight;
    }
    return w > 0.0 ? Eigen::Matrix2d(s / w) : s;
}

Eigen::VectorXd gather(const Element& e, const Eigen::VectorXd& d, int offset) {
    Eigen::VectorXd u(2 * e.nodes.size());
    for (std::size_t a = 0; a < e.nodes.size(); ++a) {
        u[2 * a] = d[offset + 2 * e.nodes[a]];
        u[2 * a + 1] = d[offset + 2 * e.nodes[a] + 1];
    }
    return u;
}

Vec2 edge_local_point(ElementTech tech, int k, double t) {
    const double s = 0.5 * (t + 1.0);
    if (tech == ElementTech::Tri3) {
        switch (k) {
            case 0: return Vec2(s, 0.0);
            case 1: return Vec2(1.0 - s, s);
            default: return Vec2(0.0, 1.0 - s);
        }
    }
    switch (k) {
        case 0: return Vec2(t, -1.0);
        case 1: return Vec2(1.0, t);
        case 2: return Vec2(-t, 1.0);
        default: return Vec2(-1.0, -t);
    }
}

Vec2 edge_local_tangent(ElementTech tech, int k) {
    if (tech == ElementTech::Tri3) {
        switch (k) {
            case 0: return Vec2(0.5, 0.0);
            case 1: return Vec2(-0.5, 0.5);
            default: return Vec2(0.0, -0.5);
        }
    }
    switch (k) {
        case 0: return Vec2(1.0, 0.0);
        case 1: return Vec2(0.0, 1.0);
        case 2: return Vec2(-1.0, 0.0);
        default: return Vec2(0.0, -1.0);
    }
}

Eigen::VectorXd boundary_load(const Mesh& mesh, const std::vector<EdgeRef>& edges, const TractionLaw& t,
                              int gauss) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * mesh.num_nodes());
    const GaussRule& g = gauss_legendre(gauss);
    for (const auto& er : edges) {
        if (er.element < 0 || er.element >= mesh.num_elements())
            throw std::invalid_argument("boundary load: edge references a missing element");
        const Element& e = mesh.elements[er.element];
        const int nedges = e.tech == ElementTech::Tri3 ? 3 : 4;
        if (er.local_edge < 0 || er.local_edge >= nedges)
            throw std::invalid_argument("boundary load: invalid local edge");
        const Vec2 dl = edge_local_tangent(e.tech, er.local_edge);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            const Vec2 l = edge_local_point(e.tech, er.local_edge, g.x[k]);
            const ShapeValues sv = shape_functions(mesh, e, l);
            Vec2 X = Vec2::Zero(), dX = Vec2::Zero();
            for (int a = 0; a < sv.n; ++a) {
                const Vec2& P = mesh.nodes[e.nodes[a]];
                X += sv.N[a] * P;
                dX += (sv.dN[a][0] * dl.x() + sv.dN[a][1] * dl.y()) * P;
            }
            const Vec2 tr = t(X);
            const double w = g.w[k] * dX.norm();
            for (int a = 0; a < sv.n; ++a) {
                f[2 * e.nodes[a]] += w * sv.N[a] * tr.x();
                f[2 * e.nodes[a] + 1] += w * sv.N[a] * tr.y();
            }
        }
    }
    return f;
}

FollowerLoad follower_pressure(const Mesh& mesh, const std::vector<EdgeRef>& edges, double p,
                               const Eigen::VectorXd& u, int gauss) {
    FollowerLoad out;
    out.f = Eigen::VectorXd::Zero(2 * mesh.num_nodes());
    if (u.size() != out.f.size()) throw std::invalid_argument("follower pressure: displacement size mismatch");
    const GaussRule& g = gauss_legendre(gauss);
    for (const auto& er : edges) {
        if (er.element < 0 || er.element >= mesh.num_elements())
            throw std::invalid_argument("follower pressure: edge references a missing element");
        const Element& e = mesh.elements[er.element];
        const Vec2 dl = edge_local_tangent(e.tech, er.local_edge);
        for (std::size_t k = 0; k < g.x.size(); ++k) {
            const ShapeValues sv = shape_functions(mesh, e, edge_local_point(e.tech, er.local_edge, g.x[k]));
            std::array<double, 9> dt{};
            Vec2 xt = Vec2::Zero();
            for (int a = 0; a < sv.n; ++a) {
                const int n = e.nodes[a];
                dt[a] = sv.dN[a][0] * dl.x() + sv.dN[a][1] * dl.y();
                xt += dt[a] * (mesh.nodes[n] + Vec2(u[2 * n], u[2 * n + 1]));
            }
            // outward normal times length element: (x_t.y, -x_t.x) for counter-clockwise edges
            const double w = g.w[k] * p;
            for (int a = 0; a < sv.n; ++a) {
                const int ia = e.nodes[a];
                out.f[2 * ia] += w * sv.N[a] * xt.y();
                out.f[2 * ia + 1] -= w * sv.N[a] * xt.x();
                for (int b = 0; b < sv.n; ++b) {
                    const int ib = e.nodes[b];
                    out.K.emplace_back(2 * ia, 2 * ib + 1, w * sv.N[a] * dt[b]);
                    out.K.emplace_back(2 * ia + 1, 2 * ib, -w * sv.N[a] * dt[b]);
                }
            }
        }
    }
    return out;
}

}  // namespace blayer
