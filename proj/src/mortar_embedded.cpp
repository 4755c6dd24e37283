/**
 * @file mortar_embedded.cpp
 * @brief Embedded mortar blocks D*, M*, scaling kappa and penalty force/stiffness.
 */
#include "blayer/mortar_embedded.hpp"

#include <cstdio>
#include <map>
#include <stdexcept>

namespace blayer {

EmbeddedCoupling assemble_embedded_mortar(const BoundaryLayer& layer, const Mesh& bg,
                                          const std::vector<InterfacePair>& pairs, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("penalty parameter must be positive");
    EmbeddedCoupling c;
    c.epsilon = epsilon;
    std::map<int, int> index;
    for (std::size_t k = 0; k < layer.interface_nodes.size(); ++k) {
        const auto g = greville_abscissae(layer.interface_curves[k].knots(0));
        for (std::size_t i = 0; i < layer.interface_nodes[k].size(); ++i) {
            const int node = layer.interface_nodes[k][i];
            if (index.count(node)) continue;
            index[node] = static_cast<int>(c.mult_nodes.size());
            c.mult_nodes.push_back(node);
            c.mult_points.push_back(curve_point(layer.interface_curves[k], g[i]));
            const Vec2 t = curve_tangent(layer.interface_curves[k], g[i]).normalized();
            c.mult_normals.push_back(Vec2(-t.y(), t.x()));
        }
    }
    const int m = c.size();
    const int nl = layer.mesh.num_nodes(), nb = bg.num_nodes();
    std::vector<Eigen::Triplet<double>> td, tm;
    for (const auto& p : pairs) {
        const NurbsPatch& curve = layer.interface_curves.at(p.patch);
        const int deg = curve.knots(0).degree();
        const BasisValues b = eval_nurbs_basis(curve.knots(0), curve.weights(), p.param, 0);
        const Element& e = bg.elements.at(p.cell);
        const ShapeValues sv = shape_functions(bg, e, p.local);
        for (int j = 0; j <= deg; ++j) {
            const int r = index.at(layer.interface_nodes[p.patch][b.span - deg + j]);
            const double phi = b.ders[0][j];
            for (int i = 0; i <= deg; ++i) {
                const int col = layer.interface_nodes[p.patch][b.span - deg + i];
                td.emplace_back(r, col, p.weight * phi * b.ders[0][i]);
            }
            for (int a = 0; a < sv.n; ++a) tm.emplace_back(r, e.nodes[a], p.weight * phi * sv.N[a]);
        }
    }
    c.D.resize(m, nl);
    c.M.resize(m, nb);
    c.D.setFromTriplets(td.begin(), td.end());
    c.M.setFromTriplets(tm.begin(), tm.end());
    c.kappa = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(c.D, r); it; ++it) c.kappa[r] += it.value();
    c.active.assign(m, true);
    double kmax = c.kappa.size() ? c.kappa.maxCoeff() : 0.0;
    for (int r = 0; r < m; ++r)
        if (!(c.kappa[r] > 1e-14 * kmax)) {
            c.active[r] = false;
            c.warnings.push_back("multiplier " + std::to_string(r) + " has no support and is deactivated");
        }
    if (!pairs.empty() && !c.mult_normals.empty()) {
        // orient the stored normals consistently with the pairs (into the bulk)
        const Vec2 n0 = pairs.front().normal;
        const NurbsPatch& curve = layer.interface_curves.at(pairs.front().patch);
        const Vec2 t = curve_tangent(curve, pairs.front().param).normalized();
        if (Vec2(-t.y(), t.x()).dot(n0) < 0.0)
            for (auto& n : c.mult_normals) n = -n;
    }
    return c;
}

CouplingResidual coupling_force(const EmbeddedCoupling& c, const Eigen::VectorXd& d) {
    const int nl = static_cast<int>(c.D.cols()), nb = static_cast<int>(c.M.cols());
    if (d.size() != 2 * (nl + nb)) throw std::invalid_argument("coupling_force: displacement size mismatch");
    CouplingResidual r;
    const int m = c.size();
    r.g = Eigen::MatrixX2d::Zero(m, 2);
    r.lambda = Eigen::MatrixX2d::Zero(m, 2);
    r.f = Eigen::VectorXd::Zero(d.size());
    Eigen::MatrixX2d dl(nl, 2), db(nb, 2);
    for (int i = 0; i < nl; ++i) dl.row(i) << d[2 * i], d[2 * i + 1];
    for (int i = 0; i < nb; ++i) db.row(i) << d[2 * (nl + i)], d[2 * (nl + i) + 1];
    r.g = c.D * dl - c.M * db;
    for (int q = 0; q < m; ++q)
        if (c.active[q]) r.lambda.row(q) = c.epsilon * r.g.row(q) / c.kappa[q];
    const Eigen::MatrixX2d fl = c.D.transpose() * r.lambda;
    const Eigen::MatrixX2d fb = -(c.M.transpose() * r.lambda);
    for (int i = 0; i < nl; ++i) r.f.segment<2>(2 * i) = fl.row(i).transpose();
    for (int i = 0; i < nb; ++i) r.f.segment<2>(2 * (nl + i)) = fb.row(i).transpose();
    return r;
}

Eigen::SparseMatrix<double> coupling_stiffness(const EmbeddedCoupling& c) {
    const int nl = static_cast<int>(c.D.cols()), nb = static_cast<int>(c.M.cols());
    const int m = c.size();
    std::vector<Eigen::Triplet<double>> tb;
    for (int r = 0; r < m; ++r) {
        if (!c.active[r]) continue;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(c.D, r); it; ++it)
            tb.emplace_back(r, static_cast<int>(it.col()), it.value());
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(c.M, r); it; ++it)
            tb.emplace_back(r, nl + static_cast<int>(it.col()), -it.value());
    }
    Eigen::SparseMatrix<double> B(m, nl + nb);
    B.setFromTriplets(tb.begin(), tb.end());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < m; ++r)
        if (c.active[r]) s[r] = c.epsilon / c.kappa[r];
    const Eigen::SparseMatrix<double> Ks = Eigen::SparseMatrix<double>(B.transpose() * s.asDiagonal() * B);
    std::vector<Eigen::Triplet<double>> tk;
    for (int k = 0; k < Ks.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(Ks, k); it; ++it) {
            tk.emplace_back(2 * it.row(), 2 * it.col(), it.value());
            tk.emplace_back(2 * it.row() + 1, 2 * it.col() + 1, it.value());
        }
    Eigen::SparseMatrix<double> K(2 * (nl + nb), 2 * (nl + nb));
    K.setFromTriplets(tk.begin(), tk.end());
    return K;
}

std::vector<double> coupling_normal_traction(const EmbeddedCoupling& c, const CouplingResidual& r) {
    std::vector<double> t(c.size());
    for (int q = 0; q < c.size(); ++q) t[q] = -r.lambda.row(q).dot(c.mult_normals[q].transpose());
    return t;
}

void write_coupling_csv(const std::string& path, const EmbeddedCoupling& c, const CouplingResidual* r) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "multiplier,node,x,y,kappa,row_sum_D,row_sum_M,lambda_x,lambda_y,normal_traction\n");
    const Eigen::VectorXd rd = c.D * Eigen::VectorXd::Ones(c.D.cols());
    const Eigen::VectorXd rm = c.M * Eigen::VectorXd::Ones(c.M.cols());
    const auto tn = r ? coupling_normal_traction(c, *r) : std::vector<double>(c.size(), 0.0);
    for (int q = 0; q < c.size(); ++q) {
        const double lx = r ? r->lambda(q, 0) : 0.0, ly = r ? r->lambda(q, 1) : 0.0;
        std::fprintf(f, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", q, c.mult_nodes[q],
                     c.mult_points[q].x(), c.mult_points[q].y(), c.kappa[q], rd[q], rm[q], lx, ly, tn[q]);
    }
    std::fclose(f);
}

}  // namespace blayer
