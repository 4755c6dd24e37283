/**
 * @file cut_cell.hpp
 * @brief Background cells cut by the coupling interface: classification, material-region
 * quadrature and paired interface quadrature.
 */
#pragma once

#include "blayer/mesh.hpp"

#include <string>
#include <vector>

namespace blayer {

/// Chord of the linearized interface with its parameter interval on the source curve.
struct InterfaceSegment {
    Vec2 a, b;
    int patch = 0;
    double t0 = 0.0, t1 = 0.0;
    bool joins_next = false;  ///< end point coincides with the start of the next segment
};

/// Piecewise-linear interface. The bulk (background material) lies on the left of the
/// segment direction when bulk_left is set, on the right otherwise.
struct InterfacePolyline {
    std::vector<NurbsPatch> curves;
    std::vector<InterfaceSegment> segments;
    bool closed = false;
    bool bulk_left = true;

    /// Signed side indicator: positive on the bulk side, negative on the layer side.
    double side(const Vec2& x) const;
    /// Number of distinct vertices.
    int num_vertices() const;
};

/// Samples each curve at `per_span` uniform parameters per knot span.
InterfacePolyline linearize_interface(const std::vector<NurbsPatch>& curves, int per_span, bool bulk_left);

enum class CellClass { Material, Void, Cut };
std::string to_string(CellClass c);

/// Quadrature point in element-local coordinates with a physical weight (dA included).
struct QuadPoint {
    Vec2 local;
    double weight = 0.0;
};

/// Triangle quadrature on the unit triangle: barycentric (r, s) and weights summing to 1.
struct TriangleRule {
    std::vector<Vec2> points;
    std::vector<double> weights;
};
/// Positive-weight symmetric rules; order = polynomial degree integrated exactly (1..5).
const TriangleRule& triangle_rule(int order);

/// Tensor Gauss (quads, NURBS) or triangle rule for an uncut element.
std::vector<QuadPoint> standard_quadrature(const Mesh& mesh, int element, int gauss_per_dir = 0);

/// Inverse isoparametric map by Newton iteration; throws GeometryError after 50 iterations.
Vec2 inverse_map(const Mesh& mesh, int element, const Vec2& x);

/// Uniform bucket index of element bounding boxes.
class CellLocator {
public:
    explicit CellLocator(const Mesh& mesh);
    /// Candidate elements whose bounding box contains x (with tolerance).
    std::vector<int> candidates(const Vec2& x) const;
    /// Candidate elements whose bounding box overlaps [lo, hi].
    std::vector<int> candidates(const Vec2& lo, const Vec2& hi) const;
    /// Element containing x with its local coordinates; -1 if none.
    int locate(const Vec2& x, Vec2* local = nullptr, double tol = 1e-9) const;
    /// Element whose centre is nearest to x (fallback).
    int nearest(const Vec2& x) const;

private:
    const Mesh* mesh_;
    Vec2 lo_, cell_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
    std::vector<std::array<Vec2, 2>> boxes_;
    double tol_ = 0.0;
};

/// Result of clipping one convex cell against the interface.
struct ClipResult {
    CellClass cls = CellClass::Material;
    std::vector<std::vector<Vec2>> material;  ///< material polygons (counter-clockwise)
    double material_area = 0.0;
    double cell_area = 0.0;
};

/// Classifies a convex counter-clockwise cell polygon against the polyline.
ClipResult classify_and_clip(const std::vector<Vec2>& cell, const InterfacePolyline& poly,
                             const std::vector<int>& segment_candidates);
ClipResult classify_and_clip(const std::vector<Vec2>& cell, const InterfacePolyline& poly);

/// Ear clipping followed by Lawson edge flips; polygon edges are kept.
std::vector<std::array<Vec2, 3>> triangulate_polygon(const std::vector<Vec2>& polygon);

double polygon_area(const std::vector<Vec2>& polygon);

struct CellQuadrature {
    int cell = 0;
    CellClass cls = CellClass::Material;
    double material_area = 0.0;
    double cell_area = 0.0;
    std::vector<QuadPoint> points;  ///< empty for Void cells
    std::vector<std::array<Vec2, 3>> triangles;  ///< integration triangles of cut cells
};

/// Gauss point on the interface paired with a background cell.
struct InterfacePair {
    int patch = 0;       ///< interface curve index
    double param = 0.0;  ///< curve parameter
    int cell = 0;        ///< background element
    Vec2 local;          ///< background local coordinates
    Vec2 x;              ///< physical position on the curve
    double weight = 0.0; ///< Gauss weight times the curve line element
    Vec2 normal;         ///< unit normal pointing into the bulk
};

struct CutOptions {
    int triangle_order = 2;
    int interface_gauss = 3;
    double prune_threshold = 0.0;
};

struct CutCellTable {
    std::vector<CellQuadrature> cells;
    std::vector<InterfacePair> pairs;
    int pruned = 0;

    int count(CellClass c) const;
    double material_area() const;
};

/// Classifies all background cells and builds volume and interface quadrature.
CutCellTable build_cut_cells(const Mesh& background, const InterfacePolyline& poly, const CutOptions& opt = {});

/// Demotes cut cells whose material fraction is below the threshold; returns demoted cell ids.
std::vector<int> prune_small_cuts(CutCellTable& table, double threshold);

/// Debug dump: cell id, classification, material fraction.
void write_cut_cells_csv(const std::string& path, const CutCellTable& table);
/// VTK overlay of the integration triangles.
void write_cut_cells_vtk(const std::string& path, const CutCellTable& table);

}  // namespace blayer
