/**
 * @file mortar_contact.hpp
 * @brief Frictionless mortar contact of the layer's outer boundary against a rigid plane,
 * with dual Lagrange multipliers and a primal-dual active set.
 */
#pragma once

#include "blayer/mesh.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace blayer {

/// Rigid straight master. `normal` is the unit normal pointing out of the master towards the slave.
struct RigidPlane {
    Vec2 point = Vec2::Zero();
    Vec2 normal = Vec2(0.0, 1.0);
};

/// Signed gap of a slave point: positive when separated, negative when penetrating.
/// Equals -n . (x - x_hat) with the slave normal n = -normal and x_hat the closest master point.
double closest_point_gap(const Vec2& x, const RigidPlane& master);

/// Dual basis coefficients A_e = D_e M_e^-1 from basis values psi[g][a] and integration weights jw[g].
Eigen::MatrixXd dual_basis_coefficients(const std::vector<std::vector<double>>& psi, const std::vector<double>& jw);

/// Slave trace element: a boundary edge of a layer NURBS element.
struct SlaveElement {
    int element = 0;          ///< layer element
    int local_edge = 0;
    std::array<int, 3> nodes{};  ///< layer node ids along the edge
    std::array<int, 3> mult{};   ///< multiplier indices of those nodes
};

struct ContactPair {
    std::vector<SlaveElement> elements;
    std::vector<int> slave_nodes;  ///< multiplier q lives on layer node slave_nodes[q]
    RigidPlane master;
    double c_n = 1.0;
    int gauss = 5;

    int size() const { return static_cast<int>(slave_nodes.size()); }
};

/// Builds the slave side from layer edges (local edge 0 or 2 of NURBS elements).
ContactPair make_contact_pair(const Mesh& layer, const std::vector<EdgeRef>& edges, const RigidPlane& master,
                              double c_n);

/// Contact quantities and their derivatives at a displacement state.
/// Derivatives refer to layer dofs (2 per layer node).
struct ContactState {
    Eigen::VectorXd gap;         ///< weighted gaps g~_q
    Eigen::VectorXd D;           ///< diagonal of D, = integral of Psi_q
    Eigen::VectorXd force;       ///< f_co on layer dofs for the given multipliers
    std::vector<Eigen::Triplet<double>> dgap;    ///< rows q, columns layer dofs
    std::vector<Eigen::Triplet<double>> dforce;  ///< d f_co / d d
    std::vector<Eigen::Triplet<double>> dforce_dlambda;  ///< rows layer dofs, columns q
    double biorthogonality_residual = 0.0;
    int dropped_points = 0;
};

/// Evaluates the mortar integrals on the current slave geometry X + d.
ContactState assemble_contact(const ContactPair& pair, const Mesh& layer, const Eigen::VectorXd& d_layer,
                              const Eigen::VectorXd& lambda);

/// Active iff lambda_q - c_n g~_q / D_q > 0 (ties inactive).
std::vector<bool> active_set_update(const Eigen::VectorXd& gap, const Eigen::VectorXd& D,
                                    const Eigen::VectorXd& lambda, double c_n);

/// Initial active set: nodes whose normalised gap is below tol; the closest node if none is.
std::vector<bool> initial_active_set(const Eigen::VectorXd& gap, const Eigen::VectorXd& D, double tol);

struct KktReport {
    double min_gap = 0.0;      ///< smallest normalised gap
    double min_lambda = 0.0;
    double max_complementarity = 0.0;  ///< max |lambda g~/D|
};
KktReport kkt_report(const Eigen::VectorXd& gap, const Eigen::VectorXd& D, const Eigen::VectorXd& lambda);

/// Slave positions (current configuration) of the multiplier nodes' Greville points.
std::vector<Vec2> contact_node_positions(const ContactPair& pair, const Mesh& layer, const Eigen::VectorXd& d_layer);

/// Traction export: position x, y and arc length along the slave, normal traction lambda_q.
void write_contact_traction_csv(const std::string& path, const ContactPair& pair, const Mesh& layer,
                                const Eigen::VectorXd& d_layer, const Eigen::VectorXd& lambda);

}  // namespace blayer
