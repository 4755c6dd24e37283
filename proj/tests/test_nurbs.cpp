#include "blayer/nurbs.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace blayer;

namespace {

/// Clockwise quarter of the unit circle from (0,1) to (1,0).
NurbsPatch quarter_circle() {
    Eigen::MatrixXd P(3, 2);
    P << 0.0, 1.0, 1.0, 1.0, 1.0, 0.0;
    return NurbsPatch(KnotVector::open_uniform(2, 1), P, {1.0, std::sqrt(0.5), 1.0});
}

NurbsPatch wavy_cubic() {
    Eigen::MatrixXd P(6, 2);
    P << 0.0, 0.0, 0.5, 1.0, 1.2, -0.3, 2.0, 0.8, 2.6, 0.1, 3.0, 0.5;
    return NurbsPatch(KnotVector({0, 0, 0, 0, 0.2, 0.5, 1, 1, 1, 1}, 3), P, {1.0, 0.7, 1.3, 1.0, 0.9, 1.0});
}

}  // namespace

TEST(KnotVector, RejectsInvalidVectors) {
    EXPECT_THROW(KnotVector({0, 0, 1, 1}, 2), GeometryError);
    EXPECT_THROW(KnotVector({0, 0, 0, 0.6, 0.4, 1, 1, 1}, 2), GeometryError);
    EXPECT_THROW(KnotVector({0, 0, 0.5, 1, 1, 1}, 2), GeometryError);
    EXPECT_THROW(KnotVector({0, 0, 0, 0.5, 0.5, 0.5, 1, 1, 1}, 2), GeometryError);
}

TEST(KnotVector, SpansAndGreville) {
    const KnotVector kv({0, 0, 0, 0.5, 1, 1, 1}, 2);
    EXPECT_EQ(kv.num_basis(), 4);
    EXPECT_EQ(kv.find_span(0.0), 2);
    EXPECT_EQ(kv.find_span(0.5), 3);
    EXPECT_EQ(kv.find_span(1.0), 3);
    EXPECT_THROW(kv.find_span(1.5), DomainError);
    EXPECT_EQ(kv.num_spans(), 2);
    EXPECT_EQ(kv.multiplicity(0.0), 3);
    EXPECT_EQ(kv.multiplicity(0.5), 1);
    const auto g = greville_abscissae(kv);
    ASSERT_EQ(g.size(), 4u);
    EXPECT_DOUBLE_EQ(g[0], 0.0);
    EXPECT_DOUBLE_EQ(g[1], 0.25);
    EXPECT_DOUBLE_EQ(g[2], 0.75);
    EXPECT_DOUBLE_EQ(g[3], 1.0);
}

TEST(Basis, SingleSpanQuadraticIsBernstein) {
    const KnotVector kv = KnotVector::open_uniform(2, 1);
    for (double u : {0.0, 0.3, 0.5, 1.0}) {
        const auto b = eval_bspline_basis(kv, u, 1);
        EXPECT_NEAR(b.ders[0][0], (1 - u) * (1 - u), 1e-15);
        EXPECT_NEAR(b.ders[0][1], 2 * u * (1 - u), 1e-15);
        EXPECT_NEAR(b.ders[0][2], u * u, 1e-15);
        EXPECT_NEAR(b.ders[1][0], -2 * (1 - u), 1e-14);
        EXPECT_NEAR(b.ders[1][1], 2 - 4 * u, 1e-14);
        EXPECT_NEAR(b.ders[1][2], 2 * u, 1e-14);
    }
}

TEST(Basis, PartitionOfUnityAndDerivativesByDifferences) {
    const NurbsPatch c = wavy_cubic();
    const auto& kv = c.knots(0);
    for (double u = 0.0; u <= 1.0; u += 0.0625) {
        const auto b = eval_nurbs_basis(kv, c.weights(), u, 2);
        double s = 0, s1 = 0, s2 = 0;
        for (std::size_t j = 0; j < b.ders[0].size(); ++j) {
            s += b.ders[0][j];
            s1 += b.ders[1][j];
            s2 += b.ders[2][j];
        }
        EXPECT_NEAR(s, 1.0, 1e-14);
        EXPECT_NEAR(s1, 0.0, 1e-12);
        EXPECT_NEAR(s2, 0.0, 1e-10);
    }
    const double u = 0.37, h = 1e-6;
    const auto b = eval_nurbs_basis(kv, c.weights(), u, 2);
    const auto bp = eval_nurbs_basis(kv, c.weights(), u + h, 1);
    const auto bm = eval_nurbs_basis(kv, c.weights(), u - h, 1);
    for (std::size_t j = 0; j < b.ders[0].size(); ++j) {
        EXPECT_NEAR(b.ders[1][j], (bp.ders[0][j] - bm.ders[0][j]) / (2 * h), 1e-7);
        EXPECT_NEAR(b.ders[2][j], (bp.ders[1][j] - bm.ders[1][j]) / (2 * h), 1e-6);
    }
}

TEST(Curve, RationalQuadraticIsExactCircle) {
    const NurbsPatch c = quarter_circle();
    for (double u = 0.0; u <= 1.0; u += 0.05) {
        EXPECT_NEAR(curve_point(c, u).norm(), 1.0, 1e-14);
        EXPECT_NEAR(curve_signed_curvature(c, u), 1.0, 1e-12);
        const Vec2 x = curve_point(c, u);
        EXPECT_NEAR((curve_inward_normal(c, u) + x).norm(), 0.0, 1e-12);
    }
    EXPECT_NEAR(curve_length(c), std::numbers::pi / 2, 1e-6);
}

TEST(Curve, KnotInsertionPreservesGeometry) {
    const NurbsPatch c = wavy_cubic();
    const NurbsPatch r = insert_knot(insert_knot(c, 0, 0.31), 0, 0.77, 2);
    EXPECT_EQ(r.num_cp(), c.num_cp() + 3);
    const NurbsPatch f = refine_uniform(c, 0, 3);
    EXPECT_EQ(f.knots(0).num_spans(), 4 * c.knots(0).num_spans());
    for (double u = 0.0; u <= 1.0; u += 0.01) {
        EXPECT_NEAR((curve_point(r, u) - curve_point(c, u)).norm(), 0.0, 1e-13);
        EXPECT_NEAR((curve_point(f, u) - curve_point(c, u)).norm(), 0.0, 1e-13);
    }
    EXPECT_THROW(insert_knot(c, 0, 0.2, 3), GeometryError);
}

TEST(Surface, PlaneHasConstantNormalAndKnotInsertionKeepsPoints) {
    Eigen::MatrixXd P(9, 3);
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) P.row(i + 3 * j) << i, j, 0.1 * i * j;
    const NurbsPatch s(KnotVector::open_uniform(2, 1), KnotVector::open_uniform(2, 1), P,
                       std::vector<double>(9, 1.0));
    const NurbsPatch r = insert_knot(insert_knot(s, 0, 0.4), 1, 0.6);
    for (double u : {0.0, 0.25, 0.8})
        for (double v : {0.1, 0.5, 1.0}) {
            EXPECT_NEAR((surface_point(r, u, v) - surface_point(s, u, v)).norm(), 0.0, 1e-14);
            // bilinear z = 0.1 x y with x = 2u, y = 2v
            EXPECT_NEAR(surface_point(s, u, v).z(), 0.4 * u * v, 1e-14);
        }
    const Vec3 n = surface_normal(s, 0.0, 0.0);
    EXPECT_NEAR(n.z(), 1.0, 1e-14);
}

TEST(Brep, OrientationOfUnitSquare) {
    auto seg = [](Vec2 a, Vec2 b) {
        Eigen::MatrixXd P(2, 2);
        P.row(0) = a.transpose();
        P.row(1) = b.transpose();
        return NurbsPatch(KnotVector::open_uniform(1, 1), P, {1.0, 1.0});
    };
    const std::vector<NurbsPatch> cw = {seg({0, 0}, {0, 1}), seg({0, 1}, {1, 1}), seg({1, 1}, {1, 0}),
                                        seg({1, 0}, {0, 0})};
    EXPECT_NEAR(brep_signed_area(cw), -1.0, 1e-14);
    EXPECT_NO_THROW(validate_clockwise(cw));
    const std::vector<NurbsPatch> ccw = {seg({0, 0}, {1, 0}), seg({1, 0}, {1, 1}), seg({1, 1}, {0, 1}),
                                         seg({0, 1}, {0, 0})};
    EXPECT_THROW(validate_clockwise(ccw), GeometryError);
}

TEST(PatchIo, RoundTripIsExact) {
    const NurbsPatch c = wavy_cubic();
    std::stringstream ss;
    write_patch(ss, c);
    const NurbsPatch r = read_patch(ss);
    EXPECT_TRUE(r.same_structure(c));
}

TEST(Gauss, IntegratesPolynomialsExactly) {
    for (int n = 1; n <= 8; ++n) {
        const auto& g = gauss_legendre(n);
        for (int k = 0; k <= 2 * n - 1; ++k) {
            double s = 0;
            for (int i = 0; i < n; ++i) s += g.w[i] * std::pow(g.x[i], k);
            EXPECT_NEAR(s, k % 2 ? 0.0 : 2.0 / (k + 1), 1e-14);
        }
    }
}
