/**
 * @file bench_embedded.cpp
 * @brief Embedded-mesh benchmarks without contact: patch tests and the bending-beam locking study.
 */
#include "bench_internal.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>

namespace blayer::detail {

namespace fs = std::filesystem;

namespace {

NurbsPatch patch_interface(const std::string& variant, double a, double t, int spans) {
    if (variant == "straight") return straight_curve(Vec2(0.0, a - t), Vec2(a, a - t), 2, spans);
    if (variant == "inclined") return straight_curve(Vec2(0.0, a - t - 0.2), Vec2(a, a - t + 0.2), 2, spans);
    Eigen::MatrixXd P(3, 2);
    P << 0.0, a - t, 0.5 * a, a - t - 0.4, a, a - t;
    NurbsPatch c(KnotVector::open_uniform(2, 1), P, {1.0, 1.0, 1.0});
    for (int k = 1; k < spans; ++k) c = insert_knot(c, 0, static_cast<double>(k) / spans);
    return c;
}

}  // namespace

void run_patch_test(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out) {
    const std::string which = c.get_string("geometry.variant");
    const std::vector<std::string> variants =
        which == "all" ? std::vector<std::string>{"straight", "inclined", "curved"} : std::vector<std::string>{which};
    const double a = c.get_double("geometry.a"), t = c.get_double("geometry.thickness");
    const double p_load = c.get_double("load.p");
    const int spans = c.get_int("mesh.layer_spans");
    const Material mat = material_from(c, "material.E");

    EmbeddedOptions eo;
    eo.elements_through_thickness = c.get_int("mesh.thickness_elements");
    eo.polyline_density = c.get_int("coupling.polyline_density");
    eo.cut.triangle_order = c.get_int("coupling.triangle_order");
    eo.cut.prune_threshold = c.get_double("coupling.prune_threshold");
    eo.epsilon = c.get_double("coupling.epsilon");

    for (const auto& v : variants) {
        const NurbsPatch base = straight_curve(Vec2(0.0, a), Vec2(a, a), 2, spans);
        BoundingBox box;
        box.lo = Vec2(0.0, 0.0);
        box.hi = Vec2(a, a);
        const EmbeddedModel model =
            build_embedded_model({base}, {patch_interface(v, a, t, spans)},
                                 build_cartesian_mesh(box, c.get_double("mesh.h"),
                                                      element_tech_from_string(c.get_string("mesh.background"))),
                                 eo);
        Problem p = make_problem(model, mat, mat);
        p.settings.load_steps = c.get_int("solver.load_steps");
        p.pressures.push_back({BodyId::Layer, model.layer.mesh.edge_sets.at("base"), p_load});

        // bottom edge normal-fixed, bottom-left corner pinned tangentially
        const double tol = 1e-9 * a;
        std::vector<int> bottom, corner;
        for (int i = 0; i < model.background.num_nodes(); ++i) {
            const Vec2& x = model.background.nodes[i];
            if (std::abs(x.y()) < tol) bottom.push_back(i);
            if (std::abs(x.y()) < tol && std::abs(x.x()) < tol) corner.push_back(i);
        }
        p.dirichlet.push_back({BodyId::Background, bottom, 1, 0.0});
        p.dirichlet.push_back({BodyId::Background, corner, 0, 0.0});

        const Solution s = solve_quasi_static(p);
        require_converged(s, "patch test (" + v + ")");
        const ElementStresses st = element_stresses(p, s);
        double dev = 0.0;
        std::vector<std::vector<double>> rows;
        auto record = [&](int body, int e, const Eigen::Matrix2d& S) {
            if (!std::isfinite(S(1, 1))) return;
            dev = std::max(dev, std::abs(S(1, 1) - p_load) / std::abs(p_load));
            rows.push_back({static_cast<double>(body), static_cast<double>(e), S(0, 0), S(1, 1), S(0, 1)});
        };
        for (std::size_t e = 0; e < st.layer.size(); ++e) record(0, static_cast<int>(e), st.layer[e]);
        for (std::size_t e = 0; e < st.background.size(); ++e) record(1, static_cast<int>(e), st.background[e]);
        write_csv((fs::path(dir) / ("stress_" + v + ".csv")).string(),
                  {"body", "element", "sigma_xx", "sigma_yy", "sigma_xy"}, rows);
        if (o.write_vtk) write_solution_vtk((fs::path(dir) / ("patch_" + v)).string(), p, s);

        // u_Y against y: per body (the penalty admits a constant jump across the interface) and combined
        std::vector<double> yl, ul, yb, ub;
        const Eigen::VectorXd dl = s.layer_part(p), db = s.background_part(p);
        for (int i = 0; i < model.layer.mesh.num_nodes(); ++i) {
            yl.push_back(model.layer.mesh.nodes[i].y());
            ul.push_back(dl[2 * i + 1]);
        }
        std::vector<bool> supported(model.background.num_nodes(), false);
        for (int e = 0; e < model.background.num_elements(); ++e)
            if (!p.background.quadrature[e].empty())
                for (int n : model.background.elements[e].nodes) supported[n] = true;
        for (int i = 0; i < model.background.num_nodes(); ++i)
            if (supported[i]) {
                yb.push_back(model.background.nodes[i].y());
                ub.push_back(db[2 * i + 1]);
            }
        const LinearFit fit_l = linear_fit(yl, ul), fit_b = linear_fit(yb, ub);
        std::vector<double> ys = yl, uy = ul;
        ys.insert(ys.end(), yb.begin(), yb.end());
        uy.insert(uy.end(), ub.begin(), ub.end());
        const LinearFit fit = linear_fit(ys, uy);
        const double r2_body = std::min(fit_l.r2, fit_b.r2);

        const double threshold = v == "curved" ? 0.016 : 1e-8;
        add_criterion(out, "patch_" + v + "_sigma_yy",
                      "max element |sigma_yy - p| / |p| (" + v + " interface)", dev, threshold);
        if (v == "straight")
            add_criterion(out, "patch_straight_uy_linear", "1 - R^2 of u_Y linear in y (worst body)", 1.0 - r2_body,
                          1e-10);
        out.data[v] = {{"max_relative_sigma_yy_deviation", dev},
                       {"uy_fit_r2_combined", fit.r2},
                       {"uy_fit_r2_layer", fit_l.r2},
                       {"uy_fit_r2_background", fit_b.r2},
                       {"uy_slope", fit.b},
                       {"cells_material", model.cut.count(CellClass::Material)},
                       {"cells_cut", model.cut.count(CellClass::Cut)},
                       {"cells_void", model.cut.count(CellClass::Void)},
                       {"newton_iterations", s.report.steps.back().iterations}};
    }
}

void run_bending_beam(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out) {
    const double L = c.get_double("geometry.length"), H = c.get_double("geometry.height");
    const double xi = c.get_double("geometry.interface_x");
    const double slope = c.get_double("load.slope");
    const double peak = slope * 0.5 * H;
    const Mesh background = read_mesh_file(data_path(c.get_string("geometry.mesh_file")));
    std::map<int, double> deviation, oscillation;

    for (double cfg : c.get_list("study.configs")) {
        const int k = static_cast<int>(cfg);
        const std::string sec = "config" + std::to_string(k);
        const int ny = c.get_int(sec + ".layer_spans");
        EmbeddedOptions eo;
        eo.elements_through_thickness = c.get_int(sec + ".thickness_elements");
        eo.polyline_density = c.get_int("coupling.polyline_density");
        eo.cut.triangle_order = c.get_int("coupling.triangle_order");
        eo.epsilon = c.get_double("coupling.epsilon");
        const NurbsPatch base = straight_curve(Vec2(L, 0.5 * H), Vec2(L, -0.5 * H), 2, ny);
        const NurbsPatch gam = straight_curve(Vec2(xi, 0.5 * H), Vec2(xi, -0.5 * H), 2, ny);
        const EmbeddedModel model = build_embedded_model({base}, {gam}, background, eo);

        Problem p = make_problem(model, material_from(c, sec + ".E_layer"), material_from(c, sec + ".E_background"));
        add_traction(p, BodyId::Layer, model.layer.mesh, model.layer.mesh.edge_sets.at("base"),
                     [&](const Vec2& X) { return Vec2(-slope * X.y(), 0.0); });
        const double tol = 1e-9 * L;
        add_traction(p, BodyId::Background, model.background,
                     boundary_edges_where(model.background, [&](const Vec2& x) { return std::abs(x.x()) < tol; }),
                     [&](const Vec2& X) { return Vec2(slope * X.y(), 0.0); });
        std::vector<int> left;
        int origin = -1;
        for (int i = 0; i < model.background.num_nodes(); ++i) {
            const Vec2& x = model.background.nodes[i];
            if (std::abs(x.x()) < tol) left.push_back(i);
            if (x.norm() < tol) origin = i;
        }
        if (origin < 0) throw GeometryError("bending beam: background mesh has no node at the origin");
        p.dirichlet.push_back({BodyId::Background, left, 0, 0.0});
        p.dirichlet.push_back({BodyId::Background, {origin}, 1, 0.0});

        const Solution s = solve_quasi_static(p);
        require_converged(s, "bending beam config " + std::to_string(k));
        const CouplingResidual r = coupling_force(model.coupling, s.d);
        const auto tn = coupling_normal_traction(model.coupling, r);
        double dev = 0.0;
        std::vector<std::vector<double>> rows;
        for (int q = 0; q < model.coupling.size(); ++q) {
            const double y = model.coupling.mult_points[q].y();
            const double exact = -slope * y;
            dev = std::max(dev, std::abs(tn[q] - exact) / peak);
            rows.push_back({y, tn[q], exact});
        }
        std::sort(rows.begin(), rows.end());
        // local oscillation: distance of each interior value from the chord of its neighbours
        double osc = 0.0;
        for (std::size_t q = 1; q + 1 < rows.size(); ++q) {
            const double w = (rows[q][0] - rows[q - 1][0]) / (rows[q + 1][0] - rows[q - 1][0]);
            osc = std::max(osc, std::abs(rows[q][1] - ((1.0 - w) * rows[q - 1][1] + w * rows[q + 1][1])) / peak);
        }
        write_csv((fs::path(dir) / ("interface_traction_" + sec + ".csv")).string(), {"y", "normal_traction", "analytic"},
                  rows);
        write_coupling_csv((fs::path(dir) / ("coupling_" + sec + ".csv")).string(), model.coupling, &r);
        const ElementStresses st = element_stresses(p, s);
        std::vector<std::vector<double>> srows;
        for (std::size_t e = 0; e < st.layer.size(); ++e)
            srows.push_back({0.0, static_cast<double>(e), st.layer[e](0, 0)});
        for (std::size_t e = 0; e < st.background.size(); ++e)
            if (std::isfinite(st.background[e](0, 0))) srows.push_back({1.0, static_cast<double>(e), st.background[e](0, 0)});
        write_csv((fs::path(dir) / ("stress_" + sec + ".csv")).string(), {"body", "element", "sigma_xx"}, srows);
        if (o.write_vtk) write_solution_vtk((fs::path(dir) / ("beam_" + sec)).string(), p, s);

        double h_layer = std::max(H / ny, (L - xi) / eo.elements_through_thickness);
        double h_bg = 0.0;
        for (int e = 0; e < background.num_elements(); ++e) {
            const auto cn = element_corners(background.elements[e]);
            for (std::size_t i = 0; i < cn.size(); ++i)
                h_bg = std::max(h_bg, (background.nodes[cn[i]] - background.nodes[cn[(i + 1) % cn.size()]]).norm());
        }
        deviation[k] = dev;
        oscillation[k] = osc;
        out.data[sec] = {{"max_traction_deviation_over_peak", dev},
                         {"oscillation_amplitude_over_peak", osc},
                         {"h_background_over_h_layer", h_bg / h_layer},
                         {"multipliers", model.coupling.size()}};
    }
    if (deviation.count(1)) add_criterion(out, "beam_config1_traction", "config 1 max traction deviation / peak", deviation[1], 0.05);
    if (oscillation.count(2)) {
        add_criterion(out, "beam_config2_bounded", "config 2 oscillation amplitude / peak", oscillation[2], 0.30);
        if (oscillation.count(1))
            add_criterion(out, "beam_config2_above_config1", "config 2 oscillation minus config 1 oscillation",
                          oscillation[2] - oscillation[1], 1e-300, true);
    }
    if (oscillation.count(3) && oscillation.count(2))
        add_criterion(out, "beam_config3_locking", "config 3 oscillation / config 2 oscillation",
                      oscillation[3] / oscillation[2], 2.0, true);
}

}  // namespace blayer::detail
