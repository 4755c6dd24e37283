/**
 * @file mortar_embedded.hpp
 * @brief Mortar coupling of the boundary layer to the background mesh along the interface,
 * regularized by a scaled penalty.
 */
#pragma once

#include "blayer/cut_cell.hpp"
#include "blayer/mesh.hpp"

#include <Eigen/Sparse>

#include <string>
#include <vector>

namespace blayer {

/// Mortar blocks of the embedded coupling, built once in the reference configuration.
/// Multiplier r lives on layer interface node mult_nodes[r]; D couples it to layer nodes,
/// M to background nodes, per displacement component.
struct EmbeddedCoupling {
    std::vector<int> mult_nodes;
    std::vector<Vec2> mult_points;   ///< interface point at the Greville parameter of each multiplier
    std::vector<Vec2> mult_normals;  ///< unit normal into the bulk at the same parameter
    Eigen::SparseMatrix<double, Eigen::RowMajor> D;  ///< m x layer nodes
    Eigen::SparseMatrix<double, Eigen::RowMajor> M;  ///< m x background nodes
    Eigen::VectorXd kappa;
    std::vector<bool> active;
    double epsilon = 0.0;
    std::vector<std::string> warnings;

    int size() const { return static_cast<int>(mult_nodes.size()); }
};

/// Assembles D*, M* and kappa from paired interface quadrature; the pair patch index refers to
/// layer.interface_curves.
EmbeddedCoupling assemble_embedded_mortar(const BoundaryLayer& layer, const Mesh& background,
                                          const std::vector<InterfacePair>& pairs, double epsilon);

struct CouplingResidual {
    Eigen::MatrixX2d g;       ///< constraint per multiplier (x, y)
    Eigen::MatrixX2d lambda;  ///< recovered multipliers
    Eigen::VectorXd f;        ///< forces on [layer dofs | background dofs]
};

/// g = D d_I - M d_C, lambda = eps kappa^-1 g, f = [D^T; -M^T] lambda.
/// `d` is laid out as [layer nodes (x, y) | background nodes (x, y)].
CouplingResidual coupling_force(const EmbeddedCoupling& c, const Eigen::VectorXd& d);

/// Constant penalty stiffness eps [D, -M]^T kappa^-1 [D, -M] on the same layout.
Eigen::SparseMatrix<double> coupling_stiffness(const EmbeddedCoupling& c);

/// Normal traction per multiplier, -lambda . n with n the layer outward normal.
std::vector<double> coupling_normal_traction(const EmbeddedCoupling& c, const CouplingResidual& r);

/// Diagnostic CSV: multiplier, position, kappa, row sums of D and M, recovered multipliers.
void write_coupling_csv(const std::string& path, const EmbeddedCoupling& c, const CouplingResidual* r = nullptr);

}  // namespace blayer
