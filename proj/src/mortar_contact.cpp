/**
 * @file mortar_contact.cpp
 * @brief Dual mortar contact integrals, consistent linearization and active set rules.
 */
#include "blayer/mortar_contact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>

namespace blayer {

double closest_point_gap(const Vec2& x, const RigidPlane& master) {
    // closest point on the plane: x_hat = x - (n.(x - p)) n; slave normal is -n
    return master.normal.dot(x - master.point);
}

Eigen::MatrixXd dual_basis_coefficients(const std::vector<std::vector<double>>& psi, const std::vector<double>& jw) {
    const int n = static_cast<int>(psi.front().size());
    Eigen::MatrixXd Me = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd De = Eigen::VectorXd::Zero(n);
    for (std::size_t g = 0; g < psi.size(); ++g)
        for (int a = 0; a < n; ++a) {
            De[a] += psi[g][a] * jw[g];
            for (int b = 0; b < n; ++b) Me(a, b) += psi[g][a] * psi[g][b] * jw[g];
        }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(Me);
    if (!lu.isInvertible()) throw GeometryError("dual basis: singular element mass matrix");
    return De.asDiagonal() * lu.inverse();
}

namespace {

struct TraceBasis {
    std::array<double, 3> N{}, dN{};  ///< values and derivatives with respect to the element coordinate r
};

TraceBasis trace_basis(const Mesh& mesh, const SlaveElement& s, double r) {
    const Element& e = mesh.elements[s.element];
    const MeshPatch& p = mesh.patches.at(e.patch);
    const double h = 0.5 * (e.box[1] - e.box[0]);
    const double u = e.box[0] + (r + 1.0) * h;
    const BasisValues b = eval_bspline_basis_on_span(p.u, e.span[0], u, 1);
    double W = 0.0, Wd = 0.0;
    std::array<double, 3> w{};
    for (int a = 0; a < 3; ++a) {
        w[a] = mesh.weights[s.nodes[a]];
        W += b.ders[0][a] * w[a];
        Wd += b.ders[1][a] * w[a];
    }
    TraceBasis t;
    for (int a = 0; a < 3; ++a) {
        t.N[a] = b.ders[0][a] * w[a] / W;
        t.dN[a] = (b.ders[1][a] * w[a] - t.N[a] * Wd) / W * h;
    }
    return t;
}

}  // namespace

ContactPair make_contact_pair(const Mesh& layer, const std::vector<EdgeRef>& edges, const RigidPlane& master,
                              double c_n) {
    if (!(c_n > 0.0)) throw std::invalid_argument("contact: c_n must be positive");
    ContactPair pair;
    pair.master = master;
    pair.master.normal.normalize();
    pair.c_n = c_n;
    std::map<int, int> index;
    for (const auto& er : edges) {
        const Element& e = layer.elements.at(er.element);
        if (e.tech != ElementTech::Nurbs9 || (er.local_edge != 0 && er.local_edge != 2))
            throw GeometryError("contact: slave edges must be u-edges of NURBS elements");
        SlaveElement s;
        s.element = er.element;
        s.local_edge = er.local_edge;
        const int row = er.local_edge == 0 ? 0 : 6;
        for (int a = 0; a < 3; ++a) s.nodes[a] = e.nodes[row + a];
        pair.elements.push_back(s);
    }
    std::sort(pair.elements.begin(), pair.elements.end(), [&](const SlaveElement& a, const SlaveElement& b) {
        return a.element < b.element;
    });
    for (auto& s : pair.elements)
        for (int a = 0; a < 3; ++a) {
            auto it = index.find(s.nodes[a]);
            if (it == index.end()) {
                it = index.emplace(s.nodes[a], static_cast<int>(pair.slave_nodes.size())).first;
                pair.slave_nodes.push_back(s.nodes[a]);
            }
            s.mult[a] = it->second;
        }
    return pair;
}

ContactState assemble_contact(const ContactPair& pair, const Mesh& layer, const Eigen::VectorXd& d,
                              const Eigen::VectorXd& lambda) {
    const int m = pair.size();
    ContactState st;
    st.gap = Eigen::VectorXd::Zero(m);
    st.D = Eigen::VectorXd::Zero(m);
    st.force = Eigen::VectorXd::Zero(d.size());
    const GaussRule& g = gauss_legendre(pair.gauss);
    const int ng = static_cast<int>(g.x.size());
    const Vec2 nm = pair.master.normal;

    for (const auto& s : pair.elements) {
        std::array<Vec2, 3> x;
        for (int a = 0; a < 3; ++a)
            x[a] = layer.nodes[s.nodes[a]] + Vec2(d[2 * s.nodes[a]], d[2 * s.nodes[a] + 1]);
        std::vector<TraceBasis> tb(ng);
        std::vector<double> J(ng), gp(ng);
        std::vector<Vec2> tg(ng);
        std::vector<std::vector<double>> psi(ng, std::vector<double>(3));
        for (int k = 0; k < ng; ++k) {
            tb[k] = trace_basis(layer, s, g.x[k]);
            Vec2 xp = Vec2::Zero(), dx = Vec2::Zero();
            for (int a = 0; a < 3; ++a) {
                xp += tb[k].N[a] * x[a];
                dx += tb[k].dN[a] * x[a];
                psi[k][a] = tb[k].N[a];
            }
            J[k] = g.w[k] * dx.norm();
            tg[k] = dx.normalized();
            gp[k] = closest_point_gap(xp, pair.master);
        }
        Eigen::Matrix3d Me = Eigen::Matrix3d::Zero();
        Eigen::Vector3d De = Eigen::Vector3d::Zero();
        for (int k = 0; k < ng; ++k)
            for (int a = 0; a < 3; ++a) {
                De[a] += psi[k][a] * J[k];
                for (int b = 0; b < 3; ++b) Me(a, b) += psi[k][a] * psi[k][b] * J[k];
            }
        const Eigen::Matrix3d Mi = Me.inverse();
        const Eigen::Matrix3d A = De.asDiagonal() * Mi;

        // biorthogonality residual
        for (int q = 0; q < 3; ++q)
            for (int a = 0; a < 3; ++a) {
                double v = 0.0;
                for (int k = 0; k < ng; ++k) {
                    double phi = 0.0;
                    for (int c = 0; c < 3; ++c) phi += A(q, c) * psi[k][c];
                    v += phi * psi[k][a] * J[k];
                }
                const double expect = q == a ? De[a] : 0.0;
                st.biorthogonality_residual = std::max(st.biorthogonality_residual, std::abs(v - expect));
            }

        // derivatives of J and A with respect to the six element dofs
        std::array<std::vector<double>, 6> dJ;
        std::array<Eigen::Matrix3d, 6> dA;
        for (int dof = 0; dof < 6; ++dof) {
            const int b = dof / 2, i = dof % 2;
            dJ[dof].resize(ng);
            Eigen::Matrix3d dM = Eigen::Matrix3d::Zero();
            Eigen::Vector3d dD = Eigen::Vector3d::Zero();
            for (int k = 0; k < ng; ++k) {
                dJ[dof][k] = g.w[k] * tg[k][i] * tb[k].dN[b];
                for (int a = 0; a < 3; ++a) {
                    dD[a] += psi[k][a] * dJ[dof][k];
                    for (int c = 0; c < 3; ++c) dM(a, c) += psi[k][a] * psi[k][c] * dJ[dof][k];
                }
            }
            dA[dof] = dD.asDiagonal() * Mi - A * dM * Mi;
        }

        for (int q = 0; q < 3; ++q) {
            const int Q = s.mult[q];
            const double lq = lambda.size() ? lambda[Q] : 0.0;
            std::array<double, 6> dgap{};
            for (int k = 0; k < ng; ++k) {
                double phi = 0.0;
                for (int c = 0; c < 3; ++c) phi += A(q, c) * psi[k][c];
                st.gap[Q] += phi * gp[k] * J[k];
                st.D[Q] += phi * psi[k][q] * J[k];
                for (int dof = 0; dof < 6; ++dof) {
                    const int b = dof / 2, i = dof % 2;
                    double dphi = 0.0;
                    for (int c = 0; c < 3; ++c) dphi += dA[dof](q, c) * psi[k][c];
                    dgap[dof] += dphi * gp[k] * J[k] + phi * nm[i] * psi[k][b] * J[k] + phi * gp[k] * dJ[dof][k];
                }
                for (int a = 0; a < 3; ++a) {
                    const double base = phi * psi[k][a] * J[k];
                    for (int i = 0; i < 2; ++i) {
                        const int row = 2 * s.nodes[a] + i;
                        st.force[row] -= lq * base * nm[i];
                        st.dforce_dlambda.emplace_back(row, Q, -base * nm[i]);
                        if (lq == 0.0) continue;
                        for (int dof = 0; dof < 6; ++dof) {
                            double dphi = 0.0;
                            for (int c = 0; c < 3; ++c) dphi += dA[dof](q, c) * psi[k][c];
                            const double dv = dphi * psi[k][a] * J[k] + phi * psi[k][a] * dJ[dof][k];
                            st.dforce.emplace_back(row, 2 * s.nodes[dof / 2] + dof % 2, -lq * dv * nm[i]);
                        }
                    }
                }
            }
            for (int dof = 0; dof < 6; ++dof) st.dgap.emplace_back(Q, 2 * s.nodes[dof / 2] + dof % 2, dgap[dof]);
        }
    }
    return st;
}

std::vector<bool> active_set_update(const Eigen::VectorXd& gap, const Eigen::VectorXd& D,
                                    const Eigen::VectorXd& lambda, double c_n) {
    std::vector<bool> a(gap.size());
    for (int q = 0; q < gap.size(); ++q) a[q] = lambda[q] - c_n * gap[q] / D[q] > 0.0;
    return a;
}

std::vector<bool> initial_active_set(const Eigen::VectorXd& gap, const Eigen::VectorXd& D, double tol) {
    std::vector<bool> a(gap.size(), false);
    int best = -1;
    double bg = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int q = 0; q < gap.size(); ++q) {
        const double gn = gap[q] / D[q];
        if (gn <= tol) {
            a[q] = true;
            any = true;
        }
        if (gn < bg) {
            bg = gn;
            best = q;
        }
    }
    if (!any && best >= 0) a[best] = true;
    return a;
}

KktReport kkt_report(const Eigen::VectorXd& gap, const Eigen::VectorXd& D, const Eigen::VectorXd& lambda) {
    KktReport r;
    r.min_gap = std::numeric_limits<double>::infinity();
    r.min_lambda = std::numeric_limits<double>::infinity();
    for (int q = 0; q < gap.size(); ++q) {
        const double gn = gap[q] / D[q];
        r.min_gap = std::min(r.min_gap, gn);
        r.min_lambda = std::min(r.min_lambda, lambda[q]);
        r.max_complementarity = std::max(r.max_complementarity, std::abs(lambda[q] * gn));
    }
    return r;
}

std::vector<Vec2> contact_node_positions(const ContactPair& pair, const Mesh& layer, const Eigen::VectorXd& d) {
    std::vector<Vec2> pos(pair.size(), Vec2::Zero());
    std::vector<bool> done(pair.size(), false);
    for (const auto& s : pair.elements) {
        const Element& e = layer.elements[s.element];
        const MeshPatch& p = layer.patches.at(e.patch);
        const auto gr = greville_abscissae(p.u);
        for (int a = 0; a < 3; ++a) {
            const int q = s.mult[a];
            if (done[q]) continue;
            const double u = gr[e.span[0] - 2 + a];
            if (u < e.box[0] - 1e-12 || u > e.box[1] + 1e-12) continue;
            const double r = 2.0 * (u - e.box[0]) / (e.box[1] - e.box[0]) - 1.0;
            const TraceBasis tb = trace_basis(layer, s, std::clamp(r, -1.0, 1.0));
            Vec2 x = Vec2::Zero();
            for (int c = 0; c < 3; ++c)
                x += tb.N[c] * (layer.nodes[s.nodes[c]] + Vec2(d[2 * s.nodes[c]], d[2 * s.nodes[c] + 1]));
            pos[q] = x;
            done[q] = true;
        }
    }
    return pos;
}

void write_contact_traction_csv(const std::string& path, const ContactPair& pair, const Mesh& layer,
                                const Eigen::VectorXd& d, const Eigen::VectorXd& lambda) {
    const auto pos = contact_node_positions(pair, layer, d);
    std::vector<int> order(pair.size());
    for (int q = 0; q < pair.size(); ++q) order[q] = q;
    const Vec2 t(-pair.master.normal.y(), pair.master.normal.x());
    std::sort(order.begin(), order.end(), [&](int a, int b) { return t.dot(pos[a]) < t.dot(pos[b]); });
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "node,x,y,arc_length,traction\n");
    double s = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i > 0) s += (pos[order[i]] - pos[order[i - 1]]).norm();
        const int q = order[i];
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g\n", pair.slave_nodes[q], pos[q].x(), pos[q].y(), s, lambda[q]);
    }
    std::fclose(f);
}

}  // namespace blayer
