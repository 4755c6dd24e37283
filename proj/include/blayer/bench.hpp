/**
 * @file bench.hpp
 * @brief Built-in benchmarks: offset validation, patch tests, bending beam, contact convergence
 * study and Hertzian contact, with CSV/VTK output and a JSON summary.
 */
#pragma once

#include "blayer/config.hpp"
#include "blayer/cut_cell.hpp"
#include "blayer/mesh.hpp"
#include "blayer/mortar_embedded.hpp"
#include "blayer/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace blayer {

/// Exit code categories of a benchmark run.
enum class ExitCategory { Ok = 0, Config = 2, Geometry = 3, Solver = 4, Acceptance = 5 };
std::string to_string(ExitCategory c);

struct Criterion {
    std::string id;
    std::string description;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
};

struct BenchOutput {
    std::string benchmark;
    std::vector<Criterion> criteria;
    ExitCategory category = ExitCategory::Ok;
    std::string message;
    nlohmann::json data = nlohmann::json::object();
    double runtime_seconds = 0.0;

    bool passed() const;
};

struct RunOptions {
    std::string out_dir = "out";
    int jobs = 1;
    std::uint64_t seed = 0;
    bool write_vtk = true;
};

/// Runs a validated config, writes artifacts and `<out>/<benchmark>/summary.json` (also on failure).
BenchOutput run_benchmark(const Config& config, const RunOptions& options);

/// Exit code: 0 on success; the failure category otherwise. Acceptance failures only count when strict.
int exit_code(const BenchOutput& out, bool strict);

// ----------------------------------------------------------------------------
// Reference solutions and post-processing
// ----------------------------------------------------------------------------

struct HertzReference {
    double b = 0.0;      ///< contact half width
    double p_max = 0.0;  ///< peak contact traction
    double R = 0.0, p = 0.0;
    /// Contact traction at x; throws std::domain_error for |x| > b.
    double pressure(double x) const;
};
HertzReference hertz_reference(double p, double R, double E, double nu);

/// Least-squares slope of log(e) over log(h).
double convergence_slope(const std::vector<double>& h, const std::vector<double>& e);

/// Linear least-squares fit y = a + b x with coefficient of determination.
struct LinearFit {
    double a = 0.0, b = 0.0, r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// ----------------------------------------------------------------------------
// Shared model assembly
// ----------------------------------------------------------------------------

/// Boundary layer embedded in a background mesh and coupled by the penalty mortar method.
struct EmbeddedModel {
    BoundaryLayer layer;
    Mesh background;
    InterfacePolyline polyline;
    CutCellTable cut;
    EmbeddedCoupling coupling;
};

struct EmbeddedOptions {
    int elements_through_thickness = 1;
    int polyline_density = 4;
    CutOptions cut;
    double epsilon = 1000.0;
};

/// Lofts base curves to the given interface curves, cuts the background and assembles the coupling.
EmbeddedModel build_embedded_model(const std::vector<NurbsPatch>& base, const std::vector<NurbsPatch>& interface,
                                   Mesh background, const EmbeddedOptions& options);

/// Problem skeleton for a model: bodies with full (layer) and cut (background) quadrature, coupling,
/// zero load vector.
Problem make_problem(const EmbeddedModel& model, const Material& layer_material, const Material& background_material);

/// Adds layer-edge or background-edge tractions to p.f_ext.
void add_traction(Problem& p, BodyId body, const Mesh& mesh, const std::vector<EdgeRef>& edges, const TractionLaw& t);

/// Cauchy stress averaged per element for both bodies (void background cells get NaN).
struct ElementStresses {
    std::vector<Eigen::Matrix2d> layer;
    std::vector<Eigen::Matrix2d> background;
};
ElementStresses element_stresses(const Problem& p, const Solution& s);

/// VTK of both bodies with displacement and element stress.
void write_solution_vtk(const std::string& prefix, const Problem& p, const Solution& s);

/// CSV helpers with 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace blayer
