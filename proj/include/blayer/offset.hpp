/**
 * @file offset.hpp
 * @brief Offsetting NURBS boundary curves and surfaces by a constant distance.
 *
 * The offset always keeps the degrees, knot vectors, weights and control net
 * dimensions of the base patch; only control point positions change.
 */
#pragma once

#include "blayer/nurbs.hpp"

#include <optional>
#include <string>
#include <vector>

namespace blayer {

enum class OffsetMethod { PolygonTranslation, Interpolation, Optimization };

std::string to_string(OffsetMethod m);
OffsetMethod offset_method_from_string(const std::string& s);

struct OptimizerSettings {
    int samples = 100;             ///< sampling points per parametric direction
    int max_iterations = 2000;
    double gradient_tolerance = 1e-10;  ///< relative to the initial gradient norm
};

/// Replacement normals at the ends of a curve shared with neighbouring patches.
struct EndNormals {
    std::optional<Vec2> start;
    std::optional<Vec2> end;
};

struct OffsetRequest {
    NurbsPatch base;
    double distance = 0.0;
    OffsetMethod method = OffsetMethod::Interpolation;
    OptimizerSettings optimizer;
    double surface_normal_sign = 1.0;  ///< surfaces: n = sign * S_u x S_v / |.|
    EndNormals end_normals;            ///< curves in a multi-patch B-rep
};

struct OffsetResult {
    NurbsPatch patch;
    int iterations = 0;
    bool converged = true;
    double energy = 0.0;
    std::vector<std::string> diagnostics;
};

/// Offsets the base patch inwards by `distance`.
OffsetResult compute_offset(const OffsetRequest& request);

/// Smallest radius of curvature on the offset side (infinite if the base never bends towards it).
double min_offset_side_radius(const NurbsPatch& base, double surface_normal_sign = 1.0);

/// Exact offset point of the base at a parameter.
Eigen::VectorXd exact_offset_point(const NurbsPatch& base, const double* params, double distance,
                                   double surface_normal_sign = 1.0);

struct OffsetErrors {
    double e_inf = 0.0;
    double e_L2 = 0.0;
};

/// Maximum and length (area) normalised L2 deviation of an approximate offset from the exact one.
OffsetErrors offset_error_metrics(const NurbsPatch& base, const NurbsPatch& approx, double distance,
                                  int samples_per_span = 200, double surface_normal_sign = 1.0);

/// Averages the unit normals of curves meeting at shared end points (2D B-reps).
/// Throws GeometryError when the averaged normal nearly vanishes.
std::vector<EndNormals> average_patch_edge_normals(const std::vector<NurbsPatch>& curves,
                                                   double tolerance = 1e-9);

/// Offsets every curve of a multi-patch B-rep with shared-corner normal averaging.
std::vector<OffsetResult> offset_brep(const std::vector<NurbsPatch>& curves, double distance,
                                      OffsetMethod method, const OptimizerSettings& opt = {});

}  // namespace blayer
