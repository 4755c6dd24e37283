/**
 * @file solver.cpp
 * @brief Assembly, semismooth Newton iteration with primal-dual active sets, energy norms.
 */
#include "blayer/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <memory>
#include <set>

#include <Eigen/SparseLU>

namespace blayer {

std::vector<std::vector<QuadPoint>> full_quadrature(const Mesh& mesh) {
    std::vector<std::vector<QuadPoint>> q(mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e) q[e] = standard_quadrature(mesh, e);
    return q;
}

std::vector<std::vector<QuadPoint>> cut_quadrature(const CutCellTable& table) {
    std::vector<std::vector<QuadPoint>> q(table.cells.size());
    for (std::size_t e = 0; e < table.cells.size(); ++e) q[e] = table.cells[e].points;
    return q;
}

Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw SolverError("sparse factorization failed (singular system)");
    Eigen::VectorXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("sparse solve failed");
    return x;
}

namespace {

void assemble_body(const Body& body, int offset, const Eigen::VectorXd& d, Eigen::VectorXd& f,
                   std::vector<Eigen::Triplet<double>>& K) {
    if (!body.mesh) return;
    const Mesh& mesh = *body.mesh;
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const auto& q = body.quadrature[e];
        if (q.empty()) continue;
        const Element& el = mesh.elements[e];
        const ElementResult r = element_force_stiffness(mesh, e, q, body.material, gather(el, d, offset));
        const int n = static_cast<int>(el.nodes.size());
        for (int a = 0; a < n; ++a)
            for (int i = 0; i < 2; ++i) {
                const int row = offset + 2 * el.nodes[a] + i;
                f[row] += r.f[2 * a + i];
                for (int b = 0; b < n; ++b)
                    for (int j = 0; j < 2; ++j) K.emplace_back(row, offset + 2 * el.nodes[b] + j, r.K(2 * a + i, 2 * b + j));
            }
    }
}

/// Nodes touched by integrated elements or by the coupling.
std::vector<bool> supported_dofs(const Problem& p) {
    const int n = p.num_displacement_dofs();
    std::vector<bool> s(n, false);
    auto mark = [&](const Body& b, int offset) {
        if (!b.mesh) return;
        for (int e = 0; e < b.mesh->num_elements(); ++e) {
            if (b.quadrature[e].empty()) continue;
            for (int a : b.mesh->elements[e].nodes) s[offset + 2 * a] = s[offset + 2 * a + 1] = true;
        }
    };
    mark(p.layer, 0);
    mark(p.background, 2 * p.layer.num_nodes());
    return s;
}

}  // namespace

void assemble_bulk(const Problem& p, const Eigen::VectorXd& d, Eigen::VectorXd& f,
                   std::vector<Eigen::Triplet<double>>& K) {
    assemble_body(p.layer, 0, d, f, K);
    assemble_body(p.background, 2 * p.layer.num_nodes(), d, f, K);
    if (p.coupling) {
        const CouplingResidual r = coupling_force(*p.coupling, d);
        f += r.f;
        const Eigen::SparseMatrix<double> Kc = coupling_stiffness(*p.coupling);
        for (int k = 0; k < Kc.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Kc, k); it; ++it)
                K.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
}

Solution solve_quasi_static(const Problem& p) {
    const int nd = p.num_displacement_dofs();
    const int m = p.contact ? p.contact->size() : 0;
    const int nl = p.layer.num_nodes();
    if (p.f_ext.size() != nd) throw SolverError("external load vector has the wrong size");
    const auto& set = p.settings;

    double diag = p.layer.mesh ? p.layer.mesh->bounding_diagonal() : 0.0;
    if (p.background.mesh) diag = std::max(diag, p.background.mesh->bounding_diagonal());
    double load_scale = p.f_ext.norm();
    for (const auto& pl : p.pressures) {
        const Body& b = pl.body == BodyId::Layer ? p.layer : p.background;
        load_scale = std::max(load_scale, follower_pressure(*b.mesh, pl.edges, pl.p,
                                                            Eigen::VectorXd::Zero(2 * b.num_nodes())).f.norm());
    }
    const double tol_r = set.tol_residual * std::max(load_scale, 1.0);
    const double tol_d = set.tol_increment * std::max(diag, 1e-300);

    // constrained dofs
    std::vector<int> fixed(nd, 0);
    Eigen::VectorXd prescribed = Eigen::VectorXd::Zero(nd);
    for (const auto& bc : p.dirichlet) {
        const int offset = bc.body == BodyId::Layer ? 0 : 2 * nl;
        const int nn = bc.body == BodyId::Layer ? nl : p.background.num_nodes();
        for (int a : bc.nodes) {
            if (a < 0 || a >= nn) throw SolverError("Dirichlet condition on a missing node");
            fixed[offset + 2 * a + bc.component] = 1;
            prescribed[offset + 2 * a + bc.component] = bc.value;
        }
    }
    const auto supported = supported_dofs(p);
    for (int i = 0; i < nd; ++i)
        if (!supported[i]) fixed[i] = 2;

    // multipliers on slave nodes whose normal displacement is prescribed stay inactive
    std::vector<bool> locked(m, false);
    for (int q = 0; q < m; ++q)
        for (int c = 0; c < 2; ++c)
            if (std::abs(p.contact->master.normal[c]) > 1e-12 && fixed[2 * p.contact->slave_nodes[q] + c] == 1)
                locked[q] = true;

    const bool trace = std::getenv("BLAYER_TRACE") != nullptr;
    Solution sol;
    sol.d = Eigen::VectorXd::Zero(nd);
    sol.lambda = Eigen::VectorXd::Zero(m);
    sol.active.assign(m, false);
    SolveReport& rep = sol.report;
    rep.success = true;

    for (int step = 1; step <= set.load_steps; ++step) {
        const double alpha = static_cast<double>(step) / set.load_steps;
        StepRecord rec;
        rec.step = step;
        rec.load_factor = alpha;
        int changes = 0;
        double last_inc = std::numeric_limits<double>::infinity();
        bool have_active = false;
        for (int it = 0; it <= set.max_iterations; ++it) {
            Eigen::VectorXd f = Eigen::VectorXd::Zero(nd);
            std::vector<Eigen::Triplet<double>> trip;
            trip.reserve(static_cast<std::size_t>(nd) * 20);
            assemble_bulk(p, sol.d, f, trip);
            f -= alpha * p.f_ext;
            for (const auto& pl : p.pressures) {
                const Body& b = pl.body == BodyId::Layer ? p.layer : p.background;
                const int offset = pl.body == BodyId::Layer ? 0 : 2 * nl;
                const FollowerLoad fl =
                    follower_pressure(*b.mesh, pl.edges, pl.p, sol.d.segment(offset, 2 * b.num_nodes()));
                f.segment(offset, fl.f.size()) -= alpha * fl.f;
                for (const auto& t : fl.K) trip.emplace_back(offset + t.row(), offset + t.col(), -alpha * t.value());
            }

            ContactState cs;
            bool changed = false;
            if (m > 0) {
                const Eigen::VectorXd dl = sol.d.head(2 * nl);
                cs = assemble_contact(*p.contact, *p.layer.mesh, dl, sol.lambda);
                rep.biorthogonality_residual = std::max(rep.biorthogonality_residual, cs.biorthogonality_residual);
                std::vector<bool> next;
                if (!have_active && step == 1 && sol.lambda.isZero(0.0))
                    next = initial_active_set(cs.gap, cs.D, set.initial_gap_tol * diag);
                else
                    next = active_set_update(cs.gap, cs.D, sol.lambda, p.contact->c_n);
                for (int q = 0; q < m; ++q)
                    if (locked[q]) next[q] = false;
                changed = have_active && next != sol.active;
                if (changed) ++changes;
                sol.active = next;
                have_active = true;
                f.head(2 * nl) += cs.force;
                for (const auto& t : cs.dforce) trip.push_back(t);
                for (const auto& t : cs.dforce_dlambda) trip.emplace_back(t.row(), nd + t.col(), t.value());
            }

            // residual over free dofs and contact rows
            Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nd + m);
            double rnorm2 = 0.0;
            for (int i = 0; i < nd; ++i) {
                if (fixed[i] == 1) rhs[i] = alpha * prescribed[i] - sol.d[i];
                else if (fixed[i] == 2) rhs[i] = -sol.d[i];
                else {
                    rhs[i] = -f[i];
                    rnorm2 += f[i] * f[i];
                }
            }
            double gap_res = 0.0;
            for (int q = 0; q < m; ++q) {
                if (sol.active[q]) {
                    rhs[nd + q] = -cs.gap[q];
                    gap_res = std::max(gap_res, std::abs(cs.gap[q] / cs.D[q]));
                } else {
                    rhs[nd + q] = -sol.lambda[q];
                }
            }
            const double rnorm = std::sqrt(rnorm2);
            if (trace)
                std::fprintf(stderr, "step %d it %d |r| %.3e |dd| %.3e gap %.3e active %d changed %d\n", step, it, rnorm,
                             last_inc, gap_res, static_cast<int>(std::count(sol.active.begin(), sol.active.end(), true)),
                             static_cast<int>(changed));
            rec.residuals.push_back(rnorm);
            rec.active_counts.push_back(static_cast<int>(std::count(sol.active.begin(), sol.active.end(), true)));
            const bool bc_ok = [&] {
                for (int i = 0; i < nd; ++i)
                    if (fixed[i] && std::abs(rhs[i]) > tol_d) return false;
                return true;
            }();
            if (it > 0 && !changed && rnorm <= tol_r && last_inc <= tol_d && gap_res <= tol_d && bc_ok) {
                rec.converged = true;
                rec.iterations = it;
                rep.final_residual = rnorm;
                if (m > 0) rep.kkt = kkt_report(cs.gap, cs.D, sol.lambda);
                break;
            }
            if (it == set.max_iterations) break;
            if (changes > set.max_active_set_changes) {
                rep.message = "active set oscillates";
                break;
            }

            // linear system rows: replace constrained rows by identities, contact rows by constraints
            std::vector<Eigen::Triplet<double>> sys;
            sys.reserve(trip.size() + nd + 8 * m);
            for (const auto& t : trip)
                if (!fixed[t.row()]) sys.push_back(t);
            for (int i = 0; i < nd; ++i)
                if (fixed[i]) sys.emplace_back(i, i, 1.0);
            for (int q = 0; q < m; ++q) {
                if (!sol.active[q]) sys.emplace_back(nd + q, nd + q, 1.0);
            }
            if (m > 0)
                for (const auto& t : cs.dgap)
                    if (sol.active[t.row()]) sys.emplace_back(nd + t.row(), t.col(), t.value());
            Eigen::SparseMatrix<double> A(nd + m, nd + m);
            A.setFromTriplets(sys.begin(), sys.end());
            Eigen::VectorXd dx;
            try {
                dx = linear_solve(A, rhs);
            } catch (const SolverError& e) {
                rep.message = e.what();
                rec.iterations = it;
                break;
            }
            sol.d += dx.head(nd);
            if (m > 0) sol.lambda += dx.tail(m);
            last_inc = dx.head(nd).norm();
            rec.iterations = it + 1;
        }
        rep.steps.push_back(rec);
        sol.d_history.push_back(sol.d);
        sol.lambda_history.push_back(sol.lambda);
        if (!rec.converged) {
            rep.success = false;
            if (rep.message.empty()) rep.message = "Newton iteration did not converge in step " + std::to_string(step);
            return sol;
        }
    }
    return sol;
}

// ----------------------------------------------------------------------------
// Energy norm
// ----------------------------------------------------------------------------

Eigen::Matrix2d field_gradient(const Mesh& mesh, int element, const Vec2& local, const Eigen::VectorXd& u) {
    const PhysicalShape sh = physical_shape(mesh, element, local);
    const Element& e = mesh.elements[element];
    return displacement_gradient(sh, e, gather(e, u));
}

double energy_norm_squared(const Mesh& coarse, const std::vector<std::vector<QuadPoint>>& quad,
                           const Eigen::VectorXd& u, const GradientSampler& ref, const Material& m, int* missing) {
    const Eigen::Matrix3d C = m.voigt();
    double e2 = 0.0;
    int miss = 0;
    for (int e = 0; e < coarse.num_elements(); ++e)
        for (const auto& q : quad[e]) {
            const PhysicalShape sh = physical_shape(coarse, e, q.local);
            const Eigen::Matrix2d H = displacement_gradient(sh, coarse.elements[e], gather(coarse.elements[e], u));
            const auto Hr = ref(e, q.local, sh.x);
            if (!Hr) {
                ++miss;
                continue;
            }
            const Eigen::Matrix2d D = *Hr - H;
            const Eigen::Vector3d eps(D(0, 0), D(1, 1), D(0, 1) + D(1, 0));
            e2 += q.weight * eps.dot(C * eps);
        }
    if (missing) *missing = miss;
    return e2;
}

GradientSampler layer_reference_sampler(const Mesh& coarse, const Mesh& ref, const Eigen::VectorXd& u_ref) {
    std::vector<std::vector<int>> by_patch(ref.patches.size());
    for (int e = 0; e < ref.num_elements(); ++e) by_patch[ref.elements[e].patch].push_back(e);
    return [&coarse, &ref, u = u_ref, by_patch](int element, const Vec2& local,
                                                const Vec2&) -> std::optional<Eigen::Matrix2d> {
        const Element& ce = coarse.elements[element];
        const double uu = ce.box[0] + 0.5 * (local.x() + 1.0) * (ce.box[1] - ce.box[0]);
        const double vv = ce.box[2] + 0.5 * (local.y() + 1.0) * (ce.box[3] - ce.box[2]);
        for (int e : by_patch.at(ce.patch)) {
            const auto& b = ref.elements[e].box;
            if (uu < b[0] - 1e-13 || uu > b[1] + 1e-13 || vv < b[2] - 1e-13 || vv > b[3] + 1e-13) continue;
            const Vec2 l(2.0 * (uu - b[0]) / (b[1] - b[0]) - 1.0, 2.0 * (vv - b[2]) / (b[3] - b[2]) - 1.0);
            return field_gradient(ref, e, l, u);
        }
        return std::nullopt;
    };
}

GradientSampler background_reference_sampler(const Mesh& ref, const Eigen::VectorXd& u_ref,
                                             const std::vector<bool>& active_cells) {
    auto locator = std::make_shared<CellLocator>(ref);
    return [&ref, u = u_ref, active_cells, locator](int, const Vec2&, const Vec2& x) -> std::optional<Eigen::Matrix2d> {
        int best = -1;
        Vec2 best_local;
        double best_violation = std::numeric_limits<double>::infinity();
        auto consider = [&](int c) {
            if (!active_cells[c]) return;
            try {
                const Vec2 l = inverse_map(ref, c, x);
                const double v = std::max({std::abs(l.x()) - 1.0, std::abs(l.y()) - 1.0, 0.0});
                const double vt = ref.elements[c].tech == ElementTech::Tri3
                                      ? std::max({-l.x(), -l.y(), l.x() + l.y() - 1.0, 0.0})
                                      : v;
                if (vt < best_violation) {
                    best_violation = vt;
                    best = c;
                    best_local = l;
                }
            } catch (const GeometryError&) {
            }
        };
        for (int c : locator->candidates(x)) consider(c);
        if (best < 0) {
            const Vec2 h = Vec2::Constant(0.05 * ref.bounding_diagonal());
            for (int c : locator->candidates(x - h, x + h)) consider(c);
        }
        if (best < 0) return std::nullopt;
        return field_gradient(ref, best, best_local, u);
    };
}

}  // namespace blayer
