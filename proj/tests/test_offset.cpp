#include "blayer/mesh.hpp"
#include "blayer/offset.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blayer;

namespace {

/// Clockwise circular arc of radius R about the origin from angle a0 to a1 < a0, one rational span.
NurbsPatch arc(double R, double a0, double a1) {
    const double half = 0.5 * (a1 - a0), mid = 0.5 * (a0 + a1), w = std::cos(half);
    Eigen::MatrixXd P(3, 2);
    P << R * std::cos(a0), R * std::sin(a0), R / w * std::cos(mid), R / w * std::sin(mid), R * std::cos(a1),
        R * std::sin(a1);
    return NurbsPatch(KnotVector::open_uniform(2, 1), P, {1.0, w, 1.0});
}

OffsetResult offset(const NurbsPatch& base, double d, OffsetMethod m) {
    OffsetRequest rq;
    rq.base = base;
    rq.distance = d;
    rq.method = m;
    return compute_offset(rq);
}

}  // namespace

TEST(Offset, MethodNamesRoundTrip) {
    for (auto m : {OffsetMethod::PolygonTranslation, OffsetMethod::Interpolation, OffsetMethod::Optimization})
        EXPECT_EQ(offset_method_from_string(to_string(m)), m);
    EXPECT_THROW(offset_method_from_string("bogus"), std::exception);
}

TEST(Offset, StraightLineIsShiftedExactlyByAllMethods) {
    // clockwise traversal from (2,0) to (0,0): the inward normal points to +y
    const NurbsPatch base = straight_curve(Vec2(2.0, 0.0), Vec2(0.0, 0.0), 2, 3);
    for (auto m : {OffsetMethod::PolygonTranslation, OffsetMethod::Interpolation, OffsetMethod::Optimization}) {
        const OffsetResult r = offset(base, 0.3, m);
        for (int k = 0; k < base.num_cp(); ++k) {
            EXPECT_NEAR(r.patch.point(k).x(), base.point(k).x(), 1e-9) << to_string(m);
            EXPECT_NEAR(r.patch.point(k).y(), 0.3, 1e-9) << to_string(m);
        }
        const OffsetErrors e = offset_error_metrics(base, r.patch, 0.3);
        EXPECT_LT(e.e_inf, 1e-9);
    }
}

TEST(Offset, KeepsDegreeKnotsAndWeights) {
    const NurbsPatch base = refine_uniform(arc(1.0, 1.4, 0.2), 0, 2);
    const OffsetResult r = offset(base, 0.1, OffsetMethod::Optimization);
    EXPECT_EQ(r.patch.num_cp(), base.num_cp());
    EXPECT_EQ(r.patch.knots(0).knots(), base.knots(0).knots());
    EXPECT_EQ(r.patch.weights(), base.weights());
}

TEST(Offset, CircleOffsetIsConcentricCircle) {
    // the exact offset of a rational circle is representable with the same weights and knots;
    // quadratic control legs touch the circle, so translating them is exact as well
    const NurbsPatch base = refine_uniform(arc(1.0, 1.5, 0.0), 0, 3);
    EXPECT_NEAR(min_offset_side_radius(base), 1.0, 1e-9);
    for (auto m : {OffsetMethod::PolygonTranslation, OffsetMethod::Interpolation, OffsetMethod::Optimization}) {
        const OffsetResult r = offset(base, 0.25, m);
        for (double u = 0.0; u <= 1.0; u += 0.05)
            EXPECT_NEAR(curve_point(r.patch, u).norm(), 0.75, 1e-7) << to_string(m);
        EXPECT_LT(offset_error_metrics(base, r.patch, 0.25).e_inf, 1e-7);
    }
}

TEST(Offset, PolygonTranslationIsInexactForCubics) {
    Eigen::MatrixXd P(4, 2);
    P << 0.0, 0.0, 1.0, -0.6, 2.0, 0.6, 3.0, 0.0;
    const NurbsPatch base(KnotVector::open_uniform(3, 1), P, std::vector<double>(4, 1.0));
    const double e_poly = offset_error_metrics(base, offset(base, 0.1, OffsetMethod::PolygonTranslation).patch, 0.1).e_inf;
    const double e_opt = offset_error_metrics(base, offset(base, 0.1, OffsetMethod::Optimization).patch, 0.1).e_inf;
    EXPECT_GT(e_poly, 1e-3);
    EXPECT_LT(e_opt, e_poly);
}

TEST(Offset, ExactOffsetPointOfCircle) {
    const NurbsPatch base = arc(2.0, 1.0, 0.0);
    const double u = 0.4;
    const Eigen::VectorXd x = exact_offset_point(base, &u, 0.5);
    EXPECT_NEAR(x.norm(), 1.5, 1e-14);
    EXPECT_NEAR((x.normalized() - curve_point(base, u).normalized()).norm(), 0.0, 1e-14);
}

TEST(Offset, ErrorMetricsOfUniformMisfit) {
    // a straight offset shifted by an extra 0.01 deviates by 0.01 everywhere
    const NurbsPatch base = straight_curve(Vec2(1.0, 0.0), Vec2(0.0, 0.0), 2, 2);
    NurbsPatch shifted = base;
    for (int k = 0; k < shifted.num_cp(); ++k) {
        Eigen::VectorXd x = shifted.point(k);
        x.y() += 0.11;
        shifted.set_point(k, x);
    }
    const OffsetErrors e = offset_error_metrics(base, shifted, 0.1);
    EXPECT_NEAR(e.e_inf, 0.01, 1e-12);
    EXPECT_NEAR(e.e_L2, 0.01, 1e-12);
}

TEST(Offset, SharedCornerNormalsAreAveraged) {
    // clockwise L: up the left side, then right along the top
    const NurbsPatch a = straight_curve(Vec2(0.0, 0.0), Vec2(0.0, 1.0), 2, 1);
    const NurbsPatch b = straight_curve(Vec2(0.0, 1.0), Vec2(1.0, 1.0), 2, 1);
    const auto n = average_patch_edge_normals({a, b});
    ASSERT_TRUE(n[0].end.has_value());
    ASSERT_TRUE(n[1].start.has_value());
    EXPECT_FALSE(n[0].start.has_value());
    const Vec2 expected = Vec2(1.0, -1.0).normalized();
    EXPECT_NEAR((*n[0].end - expected).norm(), 0.0, 1e-14);
    EXPECT_NEAR((*n[1].start - expected).norm(), 0.0, 1e-14);

    const auto off = offset_brep({a, b}, 0.1, OffsetMethod::Interpolation);
    const Vec2 ea = off[0].patch.point(off[0].patch.num_cp() - 1).head<2>();
    const Vec2 sb = off[1].patch.point(0).head<2>();
    EXPECT_NEAR((ea - sb).norm(), 0.0, 1e-14);
    EXPECT_NEAR((ea - (Vec2(0.0, 1.0) + 0.1 * expected)).norm(), 0.0, 1e-14);
}

TEST(Offset, OpposingNormalsAtCornerAreRejected) {
    const NurbsPatch a = straight_curve(Vec2(0.0, 0.0), Vec2(1.0, 0.0), 1, 1);
    const NurbsPatch b = straight_curve(Vec2(1.0, 0.0), Vec2(0.0, 0.0), 1, 1);
    EXPECT_THROW(average_patch_edge_normals({a, b}), GeometryError);
}
