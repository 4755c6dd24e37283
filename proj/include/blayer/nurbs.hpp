/**
 * @file nurbs.hpp
 * @brief Knot vectors, B-spline and NURBS basis evaluation, NURBS curves and surfaces.
 */
#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace blayer {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Thrown when a parameter lies outside the knot vector domain.
class DomainError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Thrown for inconsistent geometric input.
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tolerance for recognising a parameter as sitting on a knot.
inline constexpr double kKnotTolerance = 1e-12;

/// Open (clamped), non-decreasing knot vector of a given degree.
class KnotVector {
public:
    KnotVector() = default;
    KnotVector(std::vector<double> knots, int degree);

    /// Open uniform knot vector on [0,1] with `spans` equal elements.
    static KnotVector open_uniform(int degree, int spans);

    int degree() const { return p_; }
    const std::vector<double>& knots() const { return u_; }
    double operator[](std::size_t i) const { return u_[i]; }
    std::size_t size() const { return u_.size(); }
    int num_basis() const { return static_cast<int>(u_.size()) - p_ - 1; }
    double front() const { return u_.front(); }
    double back() const { return u_.back(); }

    /// Index i with u in [u_i, u_{i+1}); the last non-empty span for u == back().
    int find_span(double u) const;
    /// Distinct knot values (element boundaries).
    std::vector<double> breakpoints() const;
    int num_spans() const { return static_cast<int>(breakpoints().size()) - 1; }
    /// Multiplicity of the knot value u (0 if u is not a knot).
    int multiplicity(double u) const;

private:
    std::vector<double> u_;
    int p_ = 0;
};

/// Non-vanishing basis functions at a parameter and their derivatives.
struct BasisValues {
    int span = 0;                           ///< knot span index; functions span-p..span
    std::vector<std::vector<double>> ders;  ///< ders[k][j]: k-th derivative of function span-p+j
    const std::vector<double>& values() const { return ders[0]; }
};

/// Cox-de Boor evaluation of the p+1 non-zero B-spline functions and `nderiv` derivatives.
BasisValues eval_bspline_basis(const KnotVector& kv, double u, int nderiv = 0);

/// Same as eval_bspline_basis but on a prescribed knot span (element-wise evaluation at span ends).
BasisValues eval_bspline_basis_on_span(const KnotVector& kv, int span, double u, int nderiv = 0);

/// Rational basis R_i = N_i w_i / sum_j N_j w_j with up to second derivatives.
BasisValues eval_nurbs_basis(const KnotVector& kv, const std::vector<double>& weights, double u,
                             int nderiv = 0);

/// Greville abscissae: averages of p consecutive interior knots.
std::vector<double> greville_abscissae(const KnotVector& kv);

/// Tensor-product NURBS patch with one or two parametric directions, embedded in 2D or 3D.
/// Control point (i,j) is stored at index i + n_u * j.
class NurbsPatch {
public:
    NurbsPatch() = default;
    /// Curve.
    NurbsPatch(KnotVector u, Eigen::MatrixXd points, std::vector<double> weights);
    /// Surface.
    NurbsPatch(KnotVector u, KnotVector v, Eigen::MatrixXd points, std::vector<double> weights);

    int param_dim() const { return static_cast<int>(kv_.size()); }
    int spatial_dim() const { return static_cast<int>(cp_.cols()); }
    const KnotVector& knots(int dir) const { return kv_[dir]; }
    int num_cp(int dir) const { return n_[dir]; }
    int num_cp() const { return static_cast<int>(cp_.rows()); }
    int index(int i, int j = 0) const { return i + n_[0] * j; }

    const Eigen::MatrixXd& points() const { return cp_; }
    Eigen::MatrixXd& points() { return cp_; }
    const std::vector<double>& weights() const { return w_; }
    Eigen::VectorXd point(int k) const { return cp_.row(k).transpose(); }
    void set_point(int k, const Eigen::VectorXd& x) { cp_.row(k) = x.transpose(); }

    /// Parametric domain of direction dir.
    std::array<double, 2> domain(int dir) const { return {kv_[dir].front(), kv_[dir].back()}; }

    /// Weights of the control points of a parametric row (curves: all weights).
    std::vector<double> weights_along(int dir, int fixed_index) const;

    /// Whether the geometric data describe the same patch (degrees, knots, weights, points).
    bool same_structure(const NurbsPatch& other) const;

private:
    void validate() const;

    std::vector<KnotVector> kv_;
    std::vector<int> n_;
    Eigen::MatrixXd cp_;
    std::vector<double> w_;
};

/// Non-zero rational basis functions of a patch at a parameter point.
struct PatchBasis {
    std::vector<int> index;            ///< global control point indices
    std::vector<double> R;             ///< values
    std::vector<std::array<double, 2>> dR;   ///< first derivatives per parametric direction
    std::vector<std::array<double, 3>> d2R;  ///< second derivatives (uu, uv, vv); filled on request
};

/// Rational basis of a patch; `params` has param_dim() entries.
PatchBasis eval_patch_basis(const NurbsPatch& patch, const double* params, bool second = false);

/// Position and parametric derivatives of a patch point.
struct PatchPoint {
    Eigen::VectorXd x;
    std::array<Eigen::VectorXd, 2> d;   ///< first derivatives
    std::array<Eigen::VectorXd, 3> dd;  ///< second derivatives (uu, uv, vv); filled on request
};

PatchPoint eval_patch(const NurbsPatch& patch, const double* params, bool second = false);

/// Curve helpers.
Vec2 curve_point(const NurbsPatch& curve, double u);
Vec2 curve_tangent(const NurbsPatch& curve, double u);
/// Inward unit normal n = (y', -x') / |.| of a clockwise-oriented planar curve.
Vec2 curve_inward_normal(const NurbsPatch& curve, double u);
/// Signed curvature with respect to the inward normal (positive when the curve bends towards it).
double curve_signed_curvature(const NurbsPatch& curve, double u);
/// Arc length by Gauss quadrature per span.
double curve_length(const NurbsPatch& curve);

/// Surface helpers (3D).
Vec3 surface_point(const NurbsPatch& surf, double u, double v);
/// Unit normal sign * (S_u x S_v) / |S_u x S_v|.
Vec3 surface_normal(const NurbsPatch& surf, double u, double v, double sign = 1.0);

/// Boehm knot insertion of `u` (times r) in direction dir; geometry is preserved.
NurbsPatch insert_knot(const NurbsPatch& patch, int dir, double u, int r = 1);

/// Uniform h-refinement: inserts `per_span` equally spaced knots into each non-empty span.
NurbsPatch refine_uniform(const NurbsPatch& patch, int dir, int per_span);

/// Signed area enclosed by a closed chain of planar curves (negative for clockwise traversal).
double brep_signed_area(const std::vector<NurbsPatch>& loop);
/// Throws GeometryError unless the closed loop is traversed clockwise.
void validate_clockwise(const std::vector<NurbsPatch>& loop);

/// Plain-text patch format (degrees, knot vectors, rows `x y [z] w`) with 17 significant digits.
void write_patch(std::ostream& os, const NurbsPatch& patch);
NurbsPatch read_patch(std::istream& is);
void write_patch_file(const std::string& path, const NurbsPatch& patch);
NurbsPatch read_patch_file(const std::string& path);

/// Gauss-Legendre points and weights on [-1,1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace blayer
