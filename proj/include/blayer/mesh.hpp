/**
 * @file mesh.hpp
 * @brief Boundary-layer NURBS meshes, Cartesian background meshes and VTK export.
 */
#pragma once

#include "blayer/nurbs.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace blayer {

enum class ElementTech { Quad4, Quad8, Tri3, Nurbs9 };

std::string to_string(ElementTech t);
ElementTech element_tech_from_string(const std::string& s);
int nodes_per_element(ElementTech t);

/// Knot data of a NURBS patch inside a mesh; control point (i,j) maps to node[i + nu*j].
struct MeshPatch {
    KnotVector u, v;
    int nu = 0, nv = 0;
    std::vector<int> node;
};

struct Element {
    ElementTech tech = ElementTech::Quad4;
    std::vector<int> nodes;
    int patch = -1;                      ///< NURBS only
    std::array<int, 2> span{0, 0};       ///< NURBS only: knot span indices
    std::array<double, 4> box{0, 0, 0, 0};  ///< NURBS only: [u0, u1, v0, v1]
};

/// Element edge; local numbering 0: s=-1, 1: r=+1, 2: s=+1, 3: r=-1 (triangles: 0: s=0, 1: r+s=1, 2: r=0).
struct EdgeRef {
    int element = 0;
    int local_edge = 0;
};

struct Mesh {
    ElementTech tech = ElementTech::Quad4;
    std::vector<Vec2> nodes;
    std::vector<double> weights;
    std::vector<Element> elements;
    std::vector<MeshPatch> patches;
    std::map<std::string, std::vector<int>> node_sets;
    std::map<std::string, std::vector<EdgeRef>> edge_sets;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_elements() const { return static_cast<int>(elements.size()); }
    double bounding_diagonal() const;
};

/// Corner nodes of an element in counter-clockwise order (3 or 4).
std::vector<int> element_corners(const Element& e);

/// Node ids lying on a local edge, ordered along the edge.
std::vector<int> edge_nodes(const Element& e, int local_edge);

struct BoundingBox {
    Vec2 lo = Vec2::Zero();
    Vec2 hi = Vec2::Zero();
    Vec2 extent() const { return hi - lo; }
};

/// Axis-aligned bounding box of planar curves (dense sampling per span).
BoundingBox curves_bounding_box(const std::vector<NurbsPatch>& curves);

/// Reverses the parametrisation of a curve.
NurbsPatch reverse_curve(const NurbsPatch& curve);

/// Straight segment as a degree-p B-spline with `spans` uniform elements.
NurbsPatch straight_curve(const Vec2& a, const Vec2& b, int degree, int spans);

struct LayerOptions {
    int elements_through_thickness = 1;
};

/// Boundary-layer mesh built by lofting base curves to their offsets.
///
/// The layer patch parameter u runs opposite to the base curve (positive Jacobian), v runs from the
/// base (v=0) to the interface (v=1). Patches sharing corners have their nodes merged.
struct BoundaryLayer {
    Mesh mesh;
    std::vector<NurbsPatch> interface_curves;  ///< v=1 edges in layer parametrisation
    std::vector<NurbsPatch> base_curves;       ///< v=0 edges in layer parametrisation
    std::vector<std::vector<int>> interface_nodes;  ///< per patch, along u
    std::vector<std::vector<int>> base_nodes;       ///< per patch, along u
};

BoundaryLayer build_boundary_layer(const std::vector<NurbsPatch>& base,
                                   const std::vector<NurbsPatch>& offsets,
                                   const LayerOptions& options = {});

/// Structured Cartesian mesh over a box; cell counts ceil(extent/h) per direction.
Mesh build_cartesian_mesh(const BoundingBox& box, double h, ElementTech tech, double padding = 0.0);

/// Boundary edges (edges used by a single element) whose nodes all satisfy the predicate.
std::vector<EdgeRef> boundary_edges_where(const Mesh& mesh, const std::function<bool(const Vec2&)>& on_edge);

/// Plain-text Lagrange mesh: `nodes N` then `x y` rows, `elements M` then `tag n0 n1 ...` rows,
/// optional `nodeset NAME K` followed by K ids. Tags: quad4, quad8, tri3.
Mesh read_mesh_file(const std::string& path);
void write_mesh_file(const std::string& path, const Mesh& mesh);

/// Merges nodes closer than tol (default 1e-9 times the bounding diagonal). Returns old->new map.
std::vector<int> merge_conforming_nodes(Mesh& mesh, double tol = -1.0);

/// Element shape functions and their derivatives with respect to local coordinates (r, s).
/// Quad elements live on [-1,1]^2, triangles on the unit triangle; NURBS elements map [-1,1]^2 onto
/// their knot span.
struct ShapeValues {
    int n = 0;
    std::array<double, 9> N{};
    std::array<std::array<double, 2>, 9> dN{};
};

ShapeValues shape_functions(const Mesh& mesh, const Element& e, const Vec2& local);

/// Parent-domain centre of an element.
Vec2 element_center_local(ElementTech t);

/// Whether local coordinates lie inside the parent domain (with tolerance).
bool inside_parent(ElementTech t, const Vec2& local, double tol = 1e-10);

/// Physical position of element-local coordinates.
Vec2 element_point(const Mesh& mesh, int element, const Vec2& local);

/// Jacobian determinant of the geometric map at element-local coordinates.
double element_jacobian(const Mesh& mesh, int element, const Vec2& local);

/// Element area by Gauss quadrature.
double element_area(const Mesh& mesh, int element);

// ----------------------------------------------------------------------------
// VTK export
// ----------------------------------------------------------------------------

/// Unstructured ASCII VTK writer collecting polygonal cells with point and cell data.
class VtkWriter {
public:
    /// Adds a cell given by its vertex coordinates; returns the cell index.
    int add_cell(const std::vector<Vec2>& vertices);
    void add_point_vector(const std::string& name, const std::vector<Vec2>& values);
    void add_point_scalar(const std::string& name, const std::vector<double>& values);
    void add_cell_scalar(const std::string& name, const std::vector<double>& values);
    int num_points() const { return static_cast<int>(points_.size()); }
    int num_cells() const { return static_cast<int>(cells_.size()); }
    void write(const std::string& path, const std::string& title = "blayer") const;

private:
    std::vector<Vec2> points_;
    std::vector<std::vector<int>> cells_;
    std::vector<std::pair<std::string, std::vector<Vec2>>> point_vectors_;
    std::vector<std::pair<std::string, std::vector<double>>> point_scalars_;
    std::vector<std::pair<std::string, std::vector<double>>> cell_scalars_;
};

/// Writes a mesh (NURBS elements as corner quads) with optional nodal displacement.
void write_mesh_vtk(const std::string& path, const Mesh& mesh, const std::vector<Vec2>* displacement = nullptr,
                    const std::map<std::string, std::vector<double>>& cell_data = {});

}  // namespace blayer
