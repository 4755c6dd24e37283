/**
 * @file bench_contact.cpp
 * @brief Contact benchmarks: energy-norm convergence of a block on a rigid plane and the
 * Hertzian half-cylinder with uniform and selective layer refinement.
 */
#include "bench_internal.hpp"

#include "blayer/mortar_contact.hpp"
#include "blayer/offset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <sstream>

namespace fs = std::filesystem;

namespace blayer::detail {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

/// Splits every span of a curve into `spans_per_span` equal parameter intervals.
NurbsPatch refine_spans(const NurbsPatch& c, int total_spans) {
    const int existing = static_cast<int>(c.knots(0).breakpoints().size()) - 1;
    if (total_spans % existing) throw ConfigError("span count must be a multiple of the curve's spans");
    return refine_uniform(c, 0, total_spans / existing - 1);
}

/// Single-span rational quadratic arc about `center`, angles in radians, |a1 - a0| < pi.
NurbsPatch circular_arc(const Vec2& center, double R, double a0, double a1) {
    const double half = 0.5 * (a1 - a0), mid = 0.5 * (a0 + a1);
    const double w = std::cos(half);
    Eigen::MatrixXd P(3, 2);
    P.row(0) = (center + R * Vec2(std::cos(a0), std::sin(a0))).transpose();
    P.row(1) = (center + R / w * Vec2(std::cos(mid), std::sin(mid))).transpose();
    P.row(2) = (center + R * Vec2(std::cos(a1), std::sin(a1))).transpose();
    return NurbsPatch(KnotVector::open_uniform(2, 1), P, {1.0, w, 1.0});
}

int count_supported_dofs(const Problem& p) {
    std::vector<bool> s(p.num_displacement_dofs() / 2, false);
    for (int e = 0; e < p.layer.mesh->num_elements(); ++e)
        for (int a : p.layer.mesh->elements[e].nodes) s[a] = true;
    const int nl = p.layer.num_nodes();
    for (int e = 0; e < p.background.mesh->num_elements(); ++e)
        if (!p.background.quadrature[e].empty())
            for (int a : p.background.mesh->elements[e].nodes) s[nl + a] = true;
    return 2 * static_cast<int>(std::count(s.begin(), s.end(), true));
}

// ----------------------------------------------------------------------------
// Block on a rigid plane
// ----------------------------------------------------------------------------

struct BlockRun {
    EmbeddedModel model;
    Problem problem;
    Solution solution;
    double h = 0.0;
};

std::unique_ptr<BlockRun> solve_block(const Config& c, int divisions, ElementTech tech) {
    const double w = c.get_double("geometry.width"), H = c.get_double("geometry.height");
    const auto ip = c.get_list("geometry.interface");
    const int n = static_cast<int>(ip.size()) / 2;
    // the interface runs like the base, from x = +w/2 to x = -w/2
    Eigen::MatrixXd P(n, 2);
    for (int i = 0; i < n; ++i) P.row(i) << ip[2 * (n - 1 - i)], ip[2 * (n - 1 - i) + 1];
    NurbsPatch gam(KnotVector::open_uniform(2, n - 2), P, std::vector<double>(n, 1.0));
    gam = refine_spans(gam, divisions);
    const NurbsPatch base = straight_curve(Vec2(0.5 * w, 0.0), Vec2(-0.5 * w, 0.0), 2, divisions);

    EmbeddedOptions eo;
    const int first = c.get_int("study.first_divisions");
    eo.elements_through_thickness = std::max(1, divisions / first);
    eo.polyline_density = c.get_int("coupling.polyline_density");
    eo.cut.triangle_order = c.get_int("coupling.triangle_order");
    eo.epsilon = c.get_double("coupling.epsilon");
    BoundingBox box;
    box.lo = Vec2(-0.5 * w, 0.0);
    box.hi = Vec2(0.5 * w, H);
    const double h = H / divisions;

    auto run = std::make_unique<BlockRun>();
    run->h = h;
    run->model = build_embedded_model({base}, {gam}, build_cartesian_mesh(box, h, tech), eo);
    const EmbeddedModel& m = run->model;
    const Material mat = material_from(c, "material.E");
    Problem& p = run->problem;
    p = make_problem(m, mat, mat);
    p.settings.load_steps = c.get_int("solver.load_steps");

    const double a = c.get_double("load.coefficient"), k = c.get_double("load.exponent");
    add_traction(p, BodyId::Background, m.background, m.background.edge_sets.at("top"),
                 [&](const Vec2& X) { return Vec2(0.0, -a * std::pow(std::abs(X.x()), k)); });
    return run;
}

Solution solve_with_contact(BlockRun& run, const Config& c, ContactPair& pair) {
    Problem& p = run.problem;
    const EmbeddedModel& m = run.model;
    p.contact = &pair;
    const double tol = 1e-9 * c.get_double("geometry.width");
    int corner = -1;
    for (int i = 0; i < m.layer.mesh.num_nodes(); ++i)
        if ((m.layer.mesh.nodes[i] - Vec2(-0.5 * c.get_double("geometry.width"), 0.0)).norm() < tol) corner = i;
    if (corner < 0) throw GeometryError("convergence block: layer corner node not found");
    p.dirichlet.push_back({BodyId::Layer, {corner}, 0, 0.0});
    return solve_quasi_static(p);
}

}  // namespace

void run_convergence_block(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out) {
    const auto divisions = c.get_list("study.divisions");
    const auto techs = split_list(c.get_string("study.backgrounds"));
    const double c_n = c.get_double("contact.c_n_factor") * c.get_double("material.E");
    RigidPlane plane;

    auto make_pair = [&](const BlockRun& r) {
        return make_contact_pair(r.model.layer.mesh, r.model.layer.mesh.edge_sets.at("base"), plane, c_n);
    };

    // reference
    const int ref_div = c.get_int("study.reference_divisions");
    auto ref = solve_block(c, ref_div, element_tech_from_string(c.get_string("study.reference_background")));
    ContactPair ref_pair = make_pair(*ref);
    ref->solution = solve_with_contact(*ref, c, ref_pair);
    require_converged(ref->solution, "convergence block reference");
    const Eigen::VectorXd ref_l = ref->solution.layer_part(ref->problem);
    const Eigen::VectorXd ref_b = ref->solution.background_part(ref->problem);
    std::vector<bool> ref_active(ref->model.background.num_elements());
    for (int e = 0; e < ref->model.background.num_elements(); ++e)
        ref_active[e] = !ref->problem.background.quadrature[e].empty();
    const GradientSampler bg_sampler = background_reference_sampler(ref->model.background, ref_b, ref_active);
    const Material mat = material_from(c, "material.E");
    out.data["reference"] = {{"h", ref->h},
                             {"dofs", count_supported_dofs(ref->problem)},
                             {"newton_iterations", ref->solution.report.steps.back().iterations}};

    std::vector<std::vector<double>> rows;
    for (const auto& tname : techs) {
        const ElementTech tech = element_tech_from_string(tname);
        std::vector<double> hs, es;
        nlohmann::json levels = nlohmann::json::array();
        for (double dv : divisions) {
            const int div = static_cast<int>(dv);
            auto run = solve_block(c, div, tech);
            ContactPair pair = make_pair(*run);
            run->solution = solve_with_contact(*run, c, pair);
            require_converged(run->solution, "convergence block " + tname + " level " + std::to_string(div));
            const Problem& p = run->problem;
            int miss_l = 0, miss_b = 0;
            const GradientSampler layer_sampler =
                layer_reference_sampler(run->model.layer.mesh, ref->model.layer.mesh, ref_l);
            const double el = energy_norm_squared(run->model.layer.mesh, p.layer.quadrature,
                                                  run->solution.layer_part(p), layer_sampler, mat, &miss_l);
            const double eb = energy_norm_squared(run->model.background, p.background.quadrature,
                                                  run->solution.background_part(p), bg_sampler, mat, &miss_b);
            const double e = std::sqrt(el + eb);
            hs.push_back(run->h);
            es.push_back(e);
            rows.push_back({tech == ElementTech::Quad4 ? 4.0 : 8.0, run->h, e, std::sqrt(el), std::sqrt(eb),
                            static_cast<double>(count_supported_dofs(p))});
            levels.push_back({{"h", run->h},
                              {"energy_error", e},
                              {"dofs", count_supported_dofs(p)},
                              {"missing_reference_samples", miss_l + miss_b},
                              {"active_contact_nodes",
                               std::count(run->solution.active.begin(), run->solution.active.end(), true)},
                              {"contact_nodes", pair.size()}});
            if (o.write_vtk)
                write_solution_vtk((fs::path(dir) / ("block_" + tname + "_" + std::to_string(div))).string(), p,
                                   run->solution);
        }
        const double slope = convergence_slope(hs, es);
        bool monotone = true;
        for (std::size_t i = 1; i < es.size(); ++i) monotone = monotone && es[i] < es[i - 1];
        out.data[tname] = {{"slope", slope}, {"monotone", monotone}, {"levels", levels}};
        const double target = tech == ElementTech::Quad4 ? 1.0 : 2.0;
        const double tol = tech == ElementTech::Quad4 ? 0.15 : 0.2;
        add_criterion(out, "convergence_" + tname + "_slope",
                      "|energy-norm slope - " + format_double(target) + "| (nurbs9 + " + tname + ")",
                      std::abs(slope - target), tol);
        add_criterion(out, "convergence_" + tname + "_monotone", "energy error decreases with h (1 = yes)",
                      monotone ? 1.0 : 0.0, 1.0, true);
    }
    write_csv((fs::path(dir) / "energy_convergence.csv").string(),
              {"background_nodes_per_element", "h", "energy_error", "energy_error_layer", "energy_error_background",
               "dofs"},
              rows);
}

// ----------------------------------------------------------------------------
// Hertz
// ----------------------------------------------------------------------------

namespace {

struct HertzMesh {
    std::vector<int> spans;  ///< per base arc, clockwise from angle 0
    int background_cells = 10;
};

struct HertzRun {
    EmbeddedModel model;
    Problem problem;
    ContactPair pair;
    Solution solution;
    int dofs = 0;
    double h_layer = 0.0, h_background = 0.0;
    std::vector<double> x, arc, traction;  ///< per multiplier, sorted by x
    double p_max = 0.0;
};

std::unique_ptr<HertzRun> solve_hertz(const Config& c, double p_load, const HertzMesh& hm) {
    const double R = c.get_double("geometry.R"), ell = c.get_double("geometry.thickness");
    const Vec2 center(0.0, R);
    const double pi = std::numbers::pi;
    std::vector<NurbsPatch> base;
    for (int k = 0; k < 3; ++k) {
        const double a0 = -k * pi / 3.0, a1 = -(k + 1) * pi / 3.0;
        base.push_back(refine_spans(circular_arc(center, R, a0, a1), hm.spans.at(k)));
    }
    std::vector<NurbsPatch> gam;
    for (const auto& r : offset_brep(base, ell, offset_method_from_string(c.get_string("geometry.offset_method"))))
        gam.push_back(r.patch);

    EmbeddedOptions eo;
    eo.elements_through_thickness = c.get_int("mesh.thickness_elements");
    eo.polyline_density = c.get_int("coupling.polyline_density");
    eo.cut.triangle_order = c.get_int("coupling.triangle_order");
    eo.epsilon = c.get_double("coupling.epsilon");
    const BoundingBox box = curves_bounding_box(gam);
    const double h = box.extent().x() / hm.background_cells;

    auto run = std::make_unique<HertzRun>();
    run->model = build_embedded_model(base, gam, build_cartesian_mesh(box, h, ElementTech::Quad4), eo);
    const EmbeddedModel& m = run->model;
    Problem& p = run->problem;
    const Material mat = material_from(c, "material.E");
    p = make_problem(m, mat, mat);
    p.settings.load_steps = c.get_int("solver.load_steps");

    // uniform pressure on the flat top: background top edge and the layer's end edges
    const double tol = 1e-9 * R;
    const auto top = [&](const Vec2& x) { return std::abs(x.y() - R) < tol; };
    const TractionLaw down = [&](const Vec2&) { return Vec2(0.0, -p_load); };
    add_traction(p, BodyId::Background, m.background, boundary_edges_where(m.background, top), down);
    add_traction(p, BodyId::Layer, m.layer.mesh, boundary_edges_where(m.layer.mesh, top), down);

    int centre = -1;
    for (int i = 0; i < m.background.num_nodes(); ++i)
        if ((m.background.nodes[i] - Vec2(0.0, R)).norm() < tol) centre = i;
    if (centre < 0) throw GeometryError("hertz: background has no node at the top centre (use an even cell count)");
    p.dirichlet.push_back({BodyId::Background, {centre}, 0, 0.0});

    RigidPlane plane;
    run->pair = make_contact_pair(m.layer.mesh, m.layer.mesh.edge_sets.at("base"), plane,
                                  c.get_double("contact.c_n_factor") * c.get_double("material.E"));
    p.contact = &run->pair;
    run->solution = solve_quasi_static(p);
    run->dofs = count_supported_dofs(p);
    run->h_background = h;
    run->h_layer = R * (pi / 3.0) / hm.spans.at(1);

    const Eigen::VectorXd dl = run->solution.layer_part(p);
    const auto pos = contact_node_positions(run->pair, m.layer.mesh, dl);
    std::vector<std::size_t> order(pos.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pos[a].x() < pos[b].x(); });
    double s = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t q = order[k];
        if (k > 0) s += (pos[q] - pos[order[k - 1]]).norm();
        run->x.push_back(pos[q].x());
        run->arc.push_back(s);
        run->traction.push_back(run->solution.lambda[static_cast<int>(q)]);
    }
    // arc length measured from the point below the centre
    double s0 = 0.0;
    for (std::size_t k = 0; k + 1 < run->x.size(); ++k)
        if (run->x[k] <= 0.0 && run->x[k + 1] >= 0.0) {
            const double t = run->x[k + 1] > run->x[k] ? -run->x[k] / (run->x[k + 1] - run->x[k]) : 0.0;
            s0 = run->arc[k] + t * (run->arc[k + 1] - run->arc[k]);
        }
    for (double& a : run->arc) a -= s0;
    run->p_max = run->solution.lambda.size() ? run->solution.lambda.maxCoeff() : 0.0;
    return run;
}

/// RMS of (traction - reference(x)) over nodes with |x| <= limit.
template <class F>
double profile_rms(const HertzRun& r, double limit, F&& reference, int* count = nullptr) {
    double s = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        if (std::abs(r.x[k]) > limit) continue;
        const double d = r.traction[k] - reference(r.x[k]);
        s += d * d;
        ++n;
    }
    if (count) *count = n;
    return n ? std::sqrt(s / n) : std::numeric_limits<double>::quiet_NaN();
}

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return (1.0 - t) * ys[i - 1] + t * ys[i];
}

void write_profile(const std::string& path, const HertzRun& r, const HertzReference& ref) {
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < r.x.size(); ++k) {
        const double exact = std::abs(r.x[k]) < ref.b ? ref.pressure(r.x[k]) : 0.0;
        rows.push_back({r.x[k], r.arc[k], r.traction[k], exact});
    }
    write_csv(path, {"x", "arc_length", "traction", "hertz"}, rows);
}

}  // namespace

void run_hertz(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out) {
    const double R = c.get_double("geometry.R"), E = c.get_double("material.E"), nu = c.get_double("material.nu");
    const auto spans = c.get_list("study.layer_spans");
    const auto cells = c.get_list("study.background_cells");
    if (spans.size() != cells.size()) throw ConfigError("hertz: layer_spans and background_cells differ in length");
    std::map<double, double> final_rel;

    for (double p_load : c.get_list("load.pressures")) {
        const HertzReference ref = hertz_reference(p_load, R, E, nu);
        char buf[32];
        std::snprintf(buf, sizeof buf, "p_%g", p_load);
        const std::string tag = buf;
        std::vector<double> pmax;
        std::vector<std::vector<double>> rows;
        nlohmann::json levels = nlohmann::json::array();
        std::unique_ptr<HertzRun> last;
        for (std::size_t l = 0; l < spans.size(); ++l) {
            const int n = static_cast<int>(spans[l]);
            HertzMesh hm{{n, n, n}, static_cast<int>(cells[l])};
            auto run = solve_hertz(c, p_load, hm);
            require_converged(run->solution, "hertz " + tag + " level " + std::to_string(l));
            pmax.push_back(run->p_max);
            rows.push_back({static_cast<double>(l + 1), 1.0 / run->h_layer, 1.0 / run->h_background, run->p_max,
                            ref.p_max, static_cast<double>(run->dofs)});
            levels.push_back({{"layer_spans_per_arc", n},
                              {"background_cells", hm.background_cells},
                              {"dofs", run->dofs},
                              {"p_max", run->p_max},
                              {"active_contact_nodes",
                               std::count(run->solution.active.begin(), run->solution.active.end(), true)},
                              {"kkt_min_gap", run->solution.report.kkt.min_gap},
                              {"kkt_min_lambda", run->solution.report.kkt.min_lambda},
                              {"kkt_max_complementarity", run->solution.report.kkt.max_complementarity}});
            last = std::move(run);
        }
        write_csv((fs::path(dir) / ("pmax_convergence_" + tag + ".csv")).string(),
                  {"level", "inv_h_layer", "inv_h_background", "p_max", "p_max_hertz", "dofs"}, rows);
        write_profile((fs::path(dir) / ("traction_profile_" + tag + ".csv")).string(), *last, ref);
        if (o.write_vtk)
            write_solution_vtk((fs::path(dir) / ("hertz_" + tag)).string(), last->problem, last->solution);

        // monotone trend: all successive changes share one sign
        int up = 0, down = 0;
        for (std::size_t i = 1; i < pmax.size(); ++i) (pmax[i] > pmax[i - 1] ? up : down)++;
        const bool monotone = up == 0 || down == 0;
        const double rel = std::abs(pmax.back() - ref.p_max) / ref.p_max;
        final_rel[p_load] = rel;
        int used = 0;
        const double rms =
            profile_rms(*last, 0.9 * ref.b, [&](double x) { return ref.pressure(x); }, &used) / ref.p_max;
        out.data[tag] = {{"p_max_hertz", ref.p_max},
                         {"b_hertz", ref.b},
                         {"p_max_finest", pmax.back()},
                         {"relative_deviation", rel},
                         {"monotone", monotone},
                         {"profile_rms_over_pmax", rms},
                         {"profile_nodes", used},
                         {"levels", levels}};
        if (std::abs(p_load - 0.3) < 1e-12) {
            add_criterion(out, "hertz_p03_pmax", "finest p_max relative deviation from Hertz (p = 0.3)", rel, 0.03);
            add_criterion(out, "hertz_p03_monotone", "p_max changes with refinement share one sign (1 = yes)",
                          monotone ? 1.0 : 0.0, 1.0, true);
            add_criterion(out, "hertz_p03_profile_rms", "traction RMS deviation over |x| <= 0.9 b / p_max", rms, 0.05);
        }
    }
    if (final_rel.count(0.3) && final_rel.count(0.5))
        add_criterion(out, "hertz_load_trend", "relative p_max deviation at p = 0.5 minus that at p = 0.3",
                      final_rel[0.5] - final_rel[0.3], 1e-300, true);
}

void run_hertz_selective(const Config& c, const RunOptions& o, const std::string& dir, BenchOutput& out) {
    const double R = c.get_double("geometry.R"), E = c.get_double("material.E"), nu = c.get_double("material.nu");
    const double p_load = c.get_list("load.pressures").front();
    const HertzReference ref = hertz_reference(p_load, R, E, nu);

    const int side = c.get_int("selective.side_spans"), central = c.get_int("selective.central_spans");
    auto sel = solve_hertz(c, p_load, HertzMesh{{side, central, side}, c.get_int("selective.background_cells")});
    require_converged(sel->solution, "hertz selective refinement");
    const int cmp_spans = c.get_int("selective.compare_layer_spans");
    auto uni = solve_hertz(c, p_load,
                           HertzMesh{{cmp_spans, cmp_spans, cmp_spans}, c.get_int("selective.compare_background_cells")});
    require_converged(uni->solution, "hertz uniform comparison");

    write_profile((fs::path(dir) / "traction_profile_selective.csv").string(), *sel, ref);
    write_profile((fs::path(dir) / "traction_profile_uniform.csv").string(), *uni, ref);
    if (o.write_vtk) write_solution_vtk((fs::path(dir) / "hertz_selective").string(), sel->problem, sel->solution);

    int used = 0;
    const double rms =
        profile_rms(*sel, 0.9 * ref.b, [&](double x) { return interpolate(uni->x, uni->traction, x); }, &used) /
        ref.p_max;
    const int nl = sel->problem.layer.num_nodes();
    out.data["selective"] = {{"dofs", sel->dofs},
                             {"layer_dofs", 2 * nl},
                             {"background_dofs", sel->dofs - 2 * nl},
                             {"p_max", sel->p_max},
                             {"central_spans", central},
                             {"side_spans", side}};
    out.data["uniform"] = {{"dofs", uni->dofs}, {"p_max", uni->p_max}};
    out.data["profile_rms_over_pmax"] = rms;
    out.data["profile_nodes"] = used;
    add_criterion(out, "hertz_selective_profile_rms",
                  "selective vs uniform traction RMS over |x| <= 0.9 b / p_max (Hertz)", rms, 0.05);
}

}  // namespace blayer::detail
