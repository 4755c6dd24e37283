/**
 * @file bench.cpp
 * @brief Benchmark dispatch, summary output and shared model helpers.
 */
#include "blayer/bench.hpp"

#include "bench_internal.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>

namespace blayer {

namespace fs = std::filesystem;

std::string to_string(ExitCategory c) {
    switch (c) {
        case ExitCategory::Ok: return "ok";
        case ExitCategory::Config: return "config";
        case ExitCategory::Geometry: return "geometry";
        case ExitCategory::Solver: return "solver";
        case ExitCategory::Acceptance: return "acceptance";
    }
    return "unknown";
}

bool BenchOutput::passed() const {
    if (category != ExitCategory::Ok) return false;
    for (const auto& c : criteria)
        if (!c.passed) return false;
    return true;
}

int exit_code(const BenchOutput& out, bool strict) {
    if (out.category != ExitCategory::Ok && out.category != ExitCategory::Acceptance)
        return static_cast<int>(out.category);
    if (strict && !out.passed()) return static_cast<int>(ExitCategory::Acceptance);
    return 0;
}

namespace detail {

void add_criterion(BenchOutput& out, const std::string& id, const std::string& description, double value,
                   double threshold, bool at_least) {
    Criterion c;
    c.id = id;
    c.description = description;
    c.value = value;
    c.threshold = threshold;
    c.passed = std::isfinite(value) && (at_least ? value >= threshold : value <= threshold);
    out.criteria.push_back(c);
}

void require_converged(const Solution& s, const std::string& what) {
    if (!s.report.success) throw SolverError(what + ": " + s.report.message);
}

Material material_from(const Config& c, const std::string& E_key) {
    return Material(c.get_double(E_key), c.get_double("material.nu"),
                    kinematics_from_string(c.get_string("material.kinematics")));
}

std::string data_path(const std::string& file) {
    if (fs::path(file).is_absolute() || fs::exists(file)) return file;
    return (fs::path(BLAYER_DATA_DIR) / file).string();
}

}  // namespace detail

namespace {

nlohmann::json summary_json(const BenchOutput& out, const RunOptions& o) {
    nlohmann::json j;
    j["benchmark"] = out.benchmark;
    j["status"] = to_string(out.category);
    j["passed"] = out.passed();
    j["message"] = out.message;
    j["runtime_seconds"] = out.runtime_seconds;
    j["seed"] = o.seed;
    j["criteria"] = nlohmann::json::array();
    for (const auto& c : out.criteria)
        j["criteria"].push_back({{"id", c.id},
                                 {"description", c.description},
                                 {"passed", c.passed},
                                 {"value", std::isfinite(c.value) ? nlohmann::json(c.value) : nlohmann::json()},
                                 {"threshold", c.threshold}});
    j["data"] = out.data;
    return j;
}

}  // namespace

BenchOutput run_benchmark(const Config& config, const RunOptions& o) {
    BenchOutput out;
    const auto t0 = std::chrono::steady_clock::now();
    std::string dir = o.out_dir;
    try {
        out.benchmark = config.benchmark();
        dir = (fs::path(o.out_dir) / out.benchmark).string();
        fs::create_directories(dir);
        validate_config(config);
        config.save((fs::path(dir) / "config.ini").string());
        const std::string id = out.benchmark;
        if (id == "offset-validate") detail::run_offset_validate(config, o, dir, out);
        else if (id == "patch-test") detail::run_patch_test(config, o, dir, out);
        else if (id == "bending-beam") detail::run_bending_beam(config, o, dir, out);
        else if (id == "convergence-block") detail::run_convergence_block(config, o, dir, out);
        else if (id == "hertz") detail::run_hertz(config, o, dir, out);
        else detail::run_hertz_selective(config, o, dir, out);
        if (!out.passed()) out.category = ExitCategory::Acceptance;
    } catch (const ConfigError& e) {
        out.category = ExitCategory::Config;
        out.message = e.what();
    } catch (const SolverError& e) {
        out.category = ExitCategory::Solver;
        out.message = e.what();
    } catch (const GeometryError& e) {
        out.category = ExitCategory::Geometry;
        out.message = e.what();
    } catch (const DomainError& e) {
        out.category = ExitCategory::Geometry;
        out.message = e.what();
    } catch (const std::exception& e) {
        out.category = ExitCategory::Solver;
        out.message = e.what();
    }
    out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    try {
        fs::create_directories(dir);
        std::ofstream js(fs::path(dir) / "summary.json");
        js << summary_json(out, o).dump(2) << "\n";
    } catch (const std::exception&) {
    }
    return out;
}

// ----------------------------------------------------------------------------
// Reference solutions
// ----------------------------------------------------------------------------

double HertzReference::pressure(double x) const {
    if (std::abs(x) > b) throw std::domain_error("Hertz profile evaluated outside the contact zone");
    return 4.0 * R * p / (std::numbers::pi * b * b) * std::sqrt(b * b - x * x);
}

HertzReference hertz_reference(double p, double R, double E, double nu) {
    if (!(p > 0.0 && R > 0.0 && E > 0.0)) throw std::invalid_argument("Hertz reference needs positive p, R, E");
    HertzReference h;
    h.p = p;
    h.R = R;
    h.b = 2.0 * std::sqrt(2.0 * R * R * p * (1.0 - nu * nu) / (E * std::numbers::pi));
    h.p_max = 4.0 * R * p / (std::numbers::pi * h.b);
    return h;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("linear fit needs matching samples");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.b = sxx > 0 ? sxy / sxx : 0.0;
    f.a = my - f.b * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - f.a - f.b * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

double convergence_slope(const std::vector<double>& h, const std::vector<double>& e) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0 && e[i] > 0.0)) throw std::invalid_argument("convergence slope needs positive data");
        lx.push_back(std::log(h[i]));
        ly.push_back(std::log(e[i]));
    }
    return linear_fit(lx, ly).b;
}

// ----------------------------------------------------------------------------
// Models
// ----------------------------------------------------------------------------

EmbeddedModel build_embedded_model(const std::vector<NurbsPatch>& base, const std::vector<NurbsPatch>& interface,
                                   Mesh background, const EmbeddedOptions& opt) {
    EmbeddedModel m;
    LayerOptions lo;
    lo.elements_through_thickness = opt.elements_through_thickness;
    m.layer = build_boundary_layer(base, interface, lo);
    m.background = std::move(background);
    m.polyline = linearize_interface(m.layer.interface_curves, opt.polyline_density, true);
    m.cut = build_cut_cells(m.background, m.polyline, opt.cut);
    m.coupling = assemble_embedded_mortar(m.layer, m.background, m.cut.pairs, opt.epsilon);
    return m;
}

Problem make_problem(const EmbeddedModel& model, const Material& layer_material, const Material& bg_material) {
    Problem p;
    p.layer.mesh = &model.layer.mesh;
    p.layer.material = layer_material;
    p.layer.quadrature = full_quadrature(model.layer.mesh);
    p.background.mesh = &model.background;
    p.background.material = bg_material;
    p.background.quadrature = cut_quadrature(model.cut);
    p.coupling = &model.coupling;
    p.f_ext = Eigen::VectorXd::Zero(p.num_displacement_dofs());
    return p;
}

void add_traction(Problem& p, BodyId body, const Mesh& mesh, const std::vector<EdgeRef>& edges, const TractionLaw& t) {
    const Eigen::VectorXd f = boundary_load(mesh, edges, t);
    const int offset = body == BodyId::Layer ? 0 : 2 * p.layer.num_nodes();
    p.f_ext.segment(offset, f.size()) += f;
}

ElementStresses element_stresses(const Problem& p, const Solution& s) {
    ElementStresses out;
    const Eigen::VectorXd dl = s.layer_part(p), db = s.background_part(p);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int e = 0; e < p.layer.mesh->num_elements(); ++e)
        out.layer.push_back(element_average_stress(*p.layer.mesh, e, p.layer.quadrature[e], p.layer.material,
                                                  gather(p.layer.mesh->elements[e], dl, 0)));
    for (int e = 0; e < p.background.mesh->num_elements(); ++e) {
        if (p.background.quadrature[e].empty()) out.background.push_back(Eigen::Matrix2d::Constant(nan));
        else
            out.background.push_back(
                element_average_stress(*p.background.mesh, e, p.background.quadrature[e], p.background.material,
                                       gather(p.background.mesh->elements[e], db, 0)));
    }
    return out;
}

void write_solution_vtk(const std::string& prefix, const Problem& p, const Solution& s) {
    const ElementStresses st = element_stresses(p, s);
    auto write = [&](const std::string& path, const Mesh& mesh, const Eigen::VectorXd& d,
                     const std::vector<Eigen::Matrix2d>& sig) {
        std::vector<Vec2> u(mesh.num_nodes());
        for (int i = 0; i < mesh.num_nodes(); ++i) u[i] = d.segment<2>(2 * i);
        std::map<std::string, std::vector<double>> cells;
        for (const auto& S : sig) {
            cells["cauchy_xx"].push_back(S(0, 0));
            cells["cauchy_yy"].push_back(S(1, 1));
            cells["cauchy_xy"].push_back(S(0, 1));
        }
        write_mesh_vtk(path, mesh, &u, cells);
    };
    write(prefix + "_layer.vtk", *p.layer.mesh, s.layer_part(p), st.layer);
    write(prefix + "_background.vtk", *p.background.mesh, s.background_part(p), st.background);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(f, "%s%s", i ? "," : "", header[i].c_str());
    std::fprintf(f, "\n");
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) std::fprintf(f, "%s%.17g", i ? "," : "", r[i]);
        std::fprintf(f, "\n");
    }
    std::fclose(f);
}

}  // namespace blayer
