#include "blayer/cut_cell.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace blayer;

namespace {

const std::vector<Vec2> kUnitSquare = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

BoundingBox unit_box() {
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 1);
    return b;
}

}  // namespace

TEST(TriangleRule, IntegratesMonomialsExactly) {
    for (int order = 1; order <= 5; ++order) {
        const TriangleRule& r = triangle_rule(order);
        double wsum = 0.0;
        for (double w : r.weights) {
            EXPECT_GT(w, 0.0);
            wsum += w;
        }
        EXPECT_NEAR(wsum, 1.0, 1e-14);
        for (int a = 0; a <= order; ++a)
            for (int b = 0; a + b <= order; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < r.points.size(); ++q)
                    s += 0.5 * r.weights[q] * std::pow(r.points[q].x(), a) * std::pow(r.points[q].y(), b);
                EXPECT_NEAR(s, factorial(a) * factorial(b) / factorial(a + b + 2), 1e-14)
                    << "order " << order << " x^" << a << " y^" << b;
            }
    }
}

TEST(Polygon, AreaAndTriangulation) {
    EXPECT_NEAR(polygon_area(kUnitSquare), 1.0, 1e-15);
    const std::vector<Vec2> L = {{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
    EXPECT_NEAR(polygon_area(L), 3.0, 1e-15);
    const auto tris = triangulate_polygon(L);
    EXPECT_EQ(tris.size(), 4u);
    double a = 0.0;
    for (const auto& t : tris) {
        const double at = polygon_area({t[0], t[1], t[2]});
        EXPECT_GT(at, 0.0);
        a += at;
    }
    EXPECT_NEAR(a, 3.0, 1e-14);
}

TEST(Clip, HorizontalLineSplitsSquare) {
    const NurbsPatch line = straight_curve(Vec2(-1.0, 0.3), Vec2(2.0, 0.3), 1, 1);
    const InterfacePolyline above = linearize_interface({line}, 1, true);
    EXPECT_GT(above.side(Vec2(0.5, 0.9)), 0.0);
    EXPECT_LT(above.side(Vec2(0.5, 0.1)), 0.0);
    const ClipResult r = classify_and_clip(kUnitSquare, above);
    EXPECT_EQ(r.cls, CellClass::Cut);
    EXPECT_NEAR(r.material_area, 0.7, 1e-14);
    EXPECT_NEAR(r.cell_area, 1.0, 1e-14);

    const InterfacePolyline below = linearize_interface({line}, 1, false);
    EXPECT_NEAR(classify_and_clip(kUnitSquare, below).material_area, 0.3, 1e-14);

    const std::vector<Vec2> high = {{0, 1}, {1, 1}, {1, 2}, {0, 2}};
    EXPECT_EQ(classify_and_clip(high, above).cls, CellClass::Material);
    EXPECT_EQ(classify_and_clip(high, below).cls, CellClass::Void);
}

TEST(Clip, CornerCut) {
    // line x + y = 0.5 leaves a triangle of area 1/8 on the lower-left side
    const NurbsPatch line = straight_curve(Vec2(1.0, -0.5), Vec2(-0.5, 1.0), 1, 1);
    const InterfacePolyline poly = linearize_interface({line}, 1, false);
    const ClipResult r = classify_and_clip(kUnitSquare, poly);
    EXPECT_EQ(r.cls, CellClass::Cut);
    EXPECT_NEAR(r.material_area, 0.875, 1e-14);
}

TEST(CutTable, InclinedInterfaceIntegratesExactly) {
    const Mesh m = build_cartesian_mesh(unit_box(), 0.25, ElementTech::Quad4);
    // y = 0.3 + 0.1 x, bulk above
    const NurbsPatch line = straight_curve(Vec2(-0.5, 0.25), Vec2(1.5, 0.45), 2, 2);
    const InterfacePolyline poly = linearize_interface({line}, 2, true);
    CutOptions opt;
    opt.triangle_order = 3;
    const CutCellTable t = build_cut_cells(m, poly, opt);
    EXPECT_EQ(t.count(CellClass::Cut), 4);
    EXPECT_EQ(t.count(CellClass::Void), 4);
    EXPECT_EQ(t.count(CellClass::Material), 8);
    EXPECT_NEAR(t.material_area(), 0.65, 1e-14);

    double area = 0.0, x2 = 0.0;
    for (const auto& c : t.cells)
        for (const QuadPoint& q : c.points) {
            const Vec2 x = element_point(m, c.cell, q.local);
            area += q.weight;
            x2 += q.weight * x.x() * x.x();
        }
    EXPECT_NEAR(area, 0.65, 1e-14);
    EXPECT_NEAR(x2, 0.7 / 3.0 - 0.1 / 4.0, 1e-14);

    double len = 0.0;
    for (const InterfacePair& p : t.pairs) {
        len += p.weight;
        EXPECT_NEAR((element_point(m, p.cell, p.local) - p.x).norm(), 0.0, 1e-12);
        EXPECT_NEAR(p.normal.dot(Vec2(-0.1, 1.0).normalized()), 1.0, 1e-12);
    }
    EXPECT_NEAR(len, std::sqrt(1.01), 1e-13);
}

TEST(CutTable, CurvesListedOutOfOrderAreChained) {
    // lower half circle about (0.5, 0.55), counter-clockwise, bulk inside; the second arc is listed first
    auto quarter = [](double a0) {
        const double r = 0.5, w = std::sqrt(0.5), a1 = a0 + 0.5 * std::numbers::pi, mid = 0.5 * (a0 + a1);
        const Vec2 c(0.5, 0.55);
        Eigen::MatrixXd P(3, 2);
        P.row(0) = (c + r * Vec2(std::cos(a0), std::sin(a0))).transpose();
        P.row(1) = (c + r / w * Vec2(std::cos(mid), std::sin(mid))).transpose();
        P.row(2) = (c + r * Vec2(std::cos(a1), std::sin(a1))).transpose();
        return NurbsPatch(KnotVector::open_uniform(2, 1), P, {1.0, w, 1.0});
    };
    const InterfacePolyline poly =
        linearize_interface({quarter(1.5 * std::numbers::pi), quarter(std::numbers::pi)}, 4, true);
    for (std::size_t i = 0; i + 1 < poly.segments.size(); ++i) EXPECT_TRUE(poly.segments[i].joins_next);
    EXPECT_FALSE(poly.closed);
    // enclosed polygon closed by the chord y = 0.55, plus the strip above it
    double area = 0.0;
    for (const auto& s : poly.segments) area += 0.5 * (s.a.x() * s.b.y() - s.b.x() * s.a.y());
    const Vec2 a = poly.segments.back().b, b = poly.segments.front().a;
    area += 0.5 * (a.x() * b.y() - b.x() * a.y()) + 0.45;
    const CutCellTable t = build_cut_cells(build_cartesian_mesh(unit_box(), 0.125, ElementTech::Quad4), poly, {});
    EXPECT_NEAR(t.material_area(), area, 1e-13);
}

TEST(CutTable, PruningDemotesSmallCuts) {
    const Mesh m = build_cartesian_mesh(unit_box(), 0.5, ElementTech::Quad4);
    // y = 0.49: the lower cells keep 2 % material
    const NurbsPatch line = straight_curve(Vec2(1.5, 0.49), Vec2(-0.5, 0.49), 1, 1);
    CutCellTable t = build_cut_cells(m, linearize_interface({line}, 1, false), {});
    EXPECT_EQ(t.count(CellClass::Cut), 2);
    const auto demoted = prune_small_cuts(t, 0.05);
    EXPECT_EQ(demoted.size(), 2u);
    EXPECT_EQ(t.count(CellClass::Cut), 0);
}

TEST(Locator, InverseMapAndLocate) {
    const Mesh m = build_cartesian_mesh(unit_box(), 0.25, ElementTech::Quad8);
    const CellLocator loc(m);
    Vec2 local;
    const Vec2 x(0.61, 0.13);
    const int e = loc.locate(x, &local);
    ASSERT_GE(e, 0);
    EXPECT_NEAR((element_point(m, e, local) - x).norm(), 0.0, 1e-12);
    EXPECT_NEAR((inverse_map(m, e, x) - local).norm(), 0.0, 1e-12);
    EXPECT_EQ(loc.locate(Vec2(2.0, 2.0)), -1);
}
