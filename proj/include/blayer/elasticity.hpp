/**
 * @file elasticity.hpp
 * @brief Plane-strain St. Venant-Kirchhoff elements with linear or finite kinematics.
 */
#pragma once

#include "blayer/cut_cell.hpp"
#include "blayer/mesh.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <vector>

namespace blayer {

enum class Kinematics { Linear, Finite };
std::string to_string(Kinematics k);
Kinematics kinematics_from_string(const std::string& s);

struct Material {
    double E = 1.0;
    double nu = 0.0;
    Kinematics kinematics = Kinematics::Finite;

    Material() = default;
    Material(double E_, double nu_, Kinematics k = Kinematics::Finite);
    double lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
    double mu() const { return E / (2.0 * (1.0 + nu)); }
    /// Voigt constitutive matrix (11, 22, 12 with engineering shear).
    Eigen::Matrix3d voigt() const;
};

struct StressTangent {
    Eigen::Matrix2d S;
    Eigen::Matrix3d C;
};

/// S = lambda tr(E) I + 2 mu E and its constant tangent.
StressTangent svk_stress_tangent(const Eigen::Matrix2d& E_gl, const Material& m);

/// Shape functions with gradients in physical (reference) coordinates.
struct PhysicalShape {
    ShapeValues local;
    std::array<Vec2, 9> dN;
    double detJ = 0.0;
    Vec2 x = Vec2::Zero();
};
PhysicalShape physical_shape(const Mesh& mesh, int element, const Vec2& local);

struct ElementResult {
    Eigen::VectorXd f;  ///< internal force, 2 entries per node (x, y)
    Eigen::MatrixXd K;  ///< tangent stiffness
};

/// Internal force and consistent tangent over the given quadrature (physical weights).
/// `u` holds 2 entries per element node.
ElementResult element_force_stiffness(const Mesh& mesh, int element, const std::vector<QuadPoint>& quad,
                                      const Material& m, const Eigen::VectorXd& u);

/// Displacement gradient at local coordinates.
Eigen::Matrix2d displacement_gradient(const PhysicalShape& sh, const Element& e, const Eigen::VectorXd& u);

/// Cauchy stress (linear kinematics: small-strain stress).
Eigen::Matrix2d cauchy_stress(const Eigen::Matrix2d& grad_u, const Material& m);

/// Weighted average of the Cauchy stress over the quadrature points (u holds element dofs).
Eigen::Matrix2d element_average_stress(const Mesh& mesh, int element, const std::vector<QuadPoint>& quad,
                                       const Material& m, const Eigen::VectorXd& u);

/// Gathers element displacements from a nodal vector with 2 entries per node (offset added to the index).
Eigen::VectorXd gather(const Element& e, const Eigen::VectorXd& d, int offset = 0);

using TractionLaw = std::function<Vec2(const Vec2& X)>;

/// Consistent nodal forces of a dead traction over mesh edges (2 entries per mesh node).
Eigen::VectorXd boundary_load(const Mesh& mesh, const std::vector<EdgeRef>& edges, const TractionLaw& t,
                              int gauss = 4);

/// Pressure p acting along the current outward normal of mesh edges: f = p ∫ N n da.
/// u holds 2 entries per mesh node; K = df/du.
struct FollowerLoad {
    Eigen::VectorXd f;
    std::vector<Eigen::Triplet<double>> K;
};
FollowerLoad follower_pressure(const Mesh& mesh, const std::vector<EdgeRef>& edges, double p,
                               const Eigen::VectorXd& u, int gauss = 4);

/// Local coordinates of a point on a local edge; t in [-1, 1] runs counter-clockwise.
Vec2 edge_local_point(ElementTech tech, int local_edge, double t);
/// Derivative of the edge parametrisation with respect to t.
Vec2 edge_local_tangent(ElementTech tech, int local_edge);

}  // namespace blayer
