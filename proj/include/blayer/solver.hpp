/**
 * @file solver.hpp
 * @brief Load-stepped semismooth Newton solution of the coupled layer/background contact problem.
 */
#pragma once

#include "blayer/cut_cell.hpp"
#include "blayer/elasticity.hpp"
#include "blayer/mortar_contact.hpp"
#include "blayer/mortar_embedded.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace blayer {

class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discretized body: mesh, material and per-element quadrature (empty = element not integrated).
struct Body {
    const Mesh* mesh = nullptr;
    Material material;
    std::vector<std::vector<QuadPoint>> quadrature;

    int num_nodes() const { return mesh ? mesh->num_nodes() : 0; }
};

/// Standard quadrature on every element.
std::vector<std::vector<QuadPoint>> full_quadrature(const Mesh& mesh);
/// Quadrature from a cut-cell table (void cells get none).
std::vector<std::vector<QuadPoint>> cut_quadrature(const CutCellTable& table);

enum class BodyId { Layer = 0, Background = 1 };

struct DirichletBC {
    BodyId body = BodyId::Layer;
    std::vector<int> nodes;
    int component = 0;
    double value = 0.0;
};

struct SolverSettings {
    int load_steps = 1;
    int max_iterations = 50;
    int max_active_set_changes = 10;
    double tol_residual = 1e-8;      ///< relative to max(|f_ext|, 1)
    double tol_increment = 1e-8;     ///< relative to the mesh diagonal
    double initial_gap_tol = 1e-10;  ///< relative to the mesh diagonal
};

/// Pressure on body edges following the current configuration, scaled by the load factor.
struct PressureLoad {
    BodyId body = BodyId::Layer;
    std::vector<EdgeRef> edges;
    double p = 0.0;
};

/// Global unknowns: layer nodes (x, y), background nodes (x, y), contact multipliers.
struct Problem {
    Body layer;
    Body background;
    const EmbeddedCoupling* coupling = nullptr;
    const ContactPair* contact = nullptr;
    Eigen::VectorXd f_ext;  ///< full load on the displacement unknowns
    std::vector<PressureLoad> pressures;
    std::vector<DirichletBC> dirichlet;
    SolverSettings settings;

    int num_displacement_dofs() const { return 2 * (layer.num_nodes() + background.num_nodes()); }
};

struct StepRecord {
    int step = 0;
    double load_factor = 0.0;
    int iterations = 0;
    std::vector<double> residuals;
    std::vector<int> active_counts;
    bool converged = false;
};

struct SolveReport {
    std::vector<StepRecord> steps;
    bool success = false;
    std::string message;
    double final_residual = 0.0;
    KktReport kkt;
    double biorthogonality_residual = 0.0;
};

struct Solution {
    Eigen::VectorXd d;       ///< displacement unknowns
    Eigen::VectorXd lambda;  ///< contact multipliers
    std::vector<bool> active;
    std::vector<Eigen::VectorXd> d_history;
    std::vector<Eigen::VectorXd> lambda_history;
    SolveReport report;

    /// Layer part of d (2 per layer node).
    Eigen::VectorXd layer_part(const Problem& p) const { return d.head(2 * p.layer.num_nodes()); }
    Eigen::VectorXd background_part(const Problem& p) const {
        return d.segment(2 * p.layer.num_nodes(), 2 * p.background.num_nodes());
    }
};

Solution solve_quasi_static(const Problem& problem);

/// Direct sparse LU solve; throws SolverError on singular systems.
Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b);

/// Internal forces and tangent of all bodies plus the embedded coupling at d.
void assemble_bulk(const Problem& p, const Eigen::VectorXd& d, Eigen::VectorXd& f,
                   std::vector<Eigen::Triplet<double>>& K);

/// Sampler of the reference displacement gradient at a point of the coarse mesh.
using GradientSampler = std::function<std::optional<Eigen::Matrix2d>(int element, const Vec2& local, const Vec2& x)>;

/// Energy-norm difference between a coarse field and a reference gradient field, integrated with
/// the coarse quadrature. Samples without a reference value are counted in `missing`.
double energy_norm_squared(const Mesh& coarse, const std::vector<std::vector<QuadPoint>>& quad,
                           const Eigen::VectorXd& u_coarse, const GradientSampler& reference, const Material& m,
                           int* missing = nullptr);

/// Reference sampler on a refined layer mesh sharing the coarse layer's geometry (same patch parameters).
GradientSampler layer_reference_sampler(const Mesh& coarse, const Mesh& ref, const Eigen::VectorXd& u_ref);

/// Reference sampler on a background mesh by point location; cells flagged inactive are avoided
/// and the nearest active cell is used instead.
GradientSampler background_reference_sampler(const Mesh& ref, const Eigen::VectorXd& u_ref,
                                             const std::vector<bool>& active_cells);

/// Displacement gradient of a nodal field at element-local coordinates.
Eigen::Matrix2d field_gradient(const Mesh& mesh, int element, const Vec2& local, const Eigen::VectorXd& u);

}  // namespace blayer
