#include "blayer/elasticity.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blayer;

namespace {

Mesh skewed_quad(ElementTech tech) {
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 1);
    Mesh m = build_cartesian_mesh(b, 1.0, tech);
    for (Vec2& x : m.nodes) x = Vec2(x.x() + 0.2 * x.y() * x.x(), x.y() + 0.1 * x.x());
    return m;
}

Eigen::VectorXd nodal(const Mesh& m, const Element& e, const std::function<Vec2(const Vec2&)>& u) {
    Eigen::VectorXd v(2 * e.nodes.size());
    for (std::size_t a = 0; a < e.nodes.size(); ++a) v.segment<2>(2 * a) = u(m.nodes[e.nodes[a]]);
    return v;
}

}  // namespace

TEST(Material, VoigtMatrixAndSvkStress) {
    const Material m(10.0, 0.25);
    const Eigen::Matrix3d C = m.voigt();
    EXPECT_NEAR(C(0, 0), m.lambda() + 2 * m.mu(), 1e-12);
    EXPECT_NEAR(C(0, 1), m.lambda(), 1e-12);
    EXPECT_NEAR(C(2, 2), m.mu(), 1e-12);
    Eigen::Matrix2d E;
    E << 0.01, 0.003, 0.003, -0.02;
    const StressTangent st = svk_stress_tangent(E, m);
    EXPECT_NEAR(st.S(0, 0), m.lambda() * E.trace() + 2 * m.mu() * E(0, 0), 1e-12);
    EXPECT_NEAR(st.S(0, 1), 2 * m.mu() * E(0, 1), 1e-12);
    EXPECT_TRUE(st.C.isApprox(C));
    EXPECT_EQ(kinematics_from_string(to_string(Kinematics::Linear)), Kinematics::Linear);
}

TEST(Material, CauchyStressOfUniaxialStretch) {
    const Material m(1.0, 0.0);
    Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
    H(0, 0) = 0.5;  // F = diag(1.5, 1)
    // E11 = (1.5^2 - 1)/2, S11 = E E11, sigma = F S F^T / J
    const double S11 = 0.5 * (2.25 - 1.0);
    EXPECT_NEAR(cauchy_stress(H, m)(0, 0), 1.5 * 1.5 * S11 / 1.5, 1e-14);
    const Material lin(1.0, 0.0, Kinematics::Linear);
    EXPECT_NEAR(cauchy_stress(H, lin)(0, 0), 0.5, 1e-14);
}

TEST(Element, RigidMotionsGiveNoForce) {
    for (ElementTech t : {ElementTech::Quad4, ElementTech::Quad8}) {
        const Mesh mesh = skewed_quad(t);
        const auto quad = standard_quadrature(mesh, 0);
        const Element& e = mesh.elements[0];
        const Material fin(3.0, 0.3);
        // large rigid rotation plus translation
        const double c = std::cos(0.7), s = std::sin(0.7);
        const auto rot = [&](const Vec2& X) { return Vec2(c * X.x() - s * X.y() + 0.3, s * X.x() + c * X.y() - 1.0) - X; };
        EXPECT_LT(element_force_stiffness(mesh, 0, quad, fin, nodal(mesh, e, rot)).f.norm(), 1e-12);
        const Material lin(3.0, 0.3, Kinematics::Linear);
        const auto inf_rot = [](const Vec2& X) { return Vec2(-0.01 * X.y() + 0.2, 0.01 * X.x()); };
        const ElementResult r = element_force_stiffness(mesh, 0, quad, lin, nodal(mesh, e, inf_rot));
        EXPECT_LT(r.f.norm(), 1e-14);
        EXPECT_LT((r.K - r.K.transpose()).norm(), 1e-12);
    }
}

TEST(Element, TangentMatchesFiniteDifferences) {
    const Mesh mesh = skewed_quad(ElementTech::Quad8);
    const auto quad = standard_quadrature(mesh, 0);
    const Material m(2.0, 0.3);
    Eigen::VectorXd u(16);
    for (int i = 0; i < 16; ++i) u[i] = 0.05 * std::sin(1.3 * i + 0.4);
    const ElementResult r = element_force_stiffness(mesh, 0, quad, m, u);
    const double h = 1e-7;
    for (int j = 0; j < 16; ++j) {
        Eigen::VectorXd up = u, um = u;
        up[j] += h;
        um[j] -= h;
        const Eigen::VectorXd col = (element_force_stiffness(mesh, 0, quad, m, up).f -
                                     element_force_stiffness(mesh, 0, quad, m, um).f) / (2 * h);
        EXPECT_LT((col - r.K.col(j)).norm(), 1e-7 * (1.0 + r.K.col(j).norm()));
    }
}

TEST(Element, UniformStrainGivesExactStress) {
    const Mesh mesh = skewed_quad(ElementTech::Quad4);
    const auto quad = standard_quadrature(mesh, 0);
    const Material m(5.0, 0.2, Kinematics::Linear);
    const auto u = nodal(mesh, mesh.elements[0], [](const Vec2& X) { return Vec2(0.01 * X.x() + 0.004 * X.y(), 0.0); });
    const Eigen::Matrix2d s = element_average_stress(mesh, 0, quad, m, u);
    EXPECT_NEAR(s(0, 0), (m.lambda() + 2 * m.mu()) * 0.01, 1e-14);
    EXPECT_NEAR(s(1, 1), m.lambda() * 0.01, 1e-14);
    EXPECT_NEAR(s(0, 1), m.mu() * 0.004, 1e-14);
}

TEST(Loads, DeadTractionResultants) {
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(2, 1);
    for (ElementTech t : {ElementTech::Quad4, ElementTech::Quad8}) {
        const Mesh m = build_cartesian_mesh(b, 0.5, t);
        // linearly varying traction on the top edge: resultant and moment about the origin
        const Eigen::VectorXd f =
            boundary_load(m, m.edge_sets.at("top"), [](const Vec2& X) { return Vec2(0.0, -X.x()); });
        double fy = 0, mz = 0;
        for (int a = 0; a < m.num_nodes(); ++a) {
            fy += f[2 * a + 1];
            mz += m.nodes[a].x() * f[2 * a + 1];
        }
        EXPECT_NEAR(fy, -2.0, 1e-13);
        EXPECT_NEAR(mz, -8.0 / 3.0, 1e-13);
    }
}

TEST(Loads, FollowerPressureResultantAndTangent) {
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 1);
    const Mesh m = build_cartesian_mesh(b, 0.5, ElementTech::Quad8);
    const auto& top = m.edge_sets.at("top");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * m.num_nodes());
    const FollowerLoad f0 = follower_pressure(m, top, 0.3, u);
    double fx = 0, fy = 0;
    for (int a = 0; a < m.num_nodes(); ++a) {
        fx += f0.f[2 * a];
        fy += f0.f[2 * a + 1];
    }
    EXPECT_NEAR(fx, 0.0, 1e-14);
    EXPECT_NEAR(fy, 0.3, 1e-14);

    // rigidly rotated body: the resultant turns with the edge
    const double c = std::cos(0.5), s = std::sin(0.5);
    for (int a = 0; a < m.num_nodes(); ++a) {
        const Vec2 X = m.nodes[a];
        u.segment<2>(2 * a) = Vec2(c * X.x() - s * X.y(), s * X.x() + c * X.y()) - X;
    }
    const FollowerLoad f1 = follower_pressure(m, top, 0.3, u);
    fx = fy = 0;
    for (int a = 0; a < m.num_nodes(); ++a) {
        fx += f1.f[2 * a];
        fy += f1.f[2 * a + 1];
    }
    EXPECT_NEAR(fx, -0.3 * s, 1e-14);
    EXPECT_NEAR(fy, 0.3 * c, 1e-14);

    Eigen::SparseMatrix<double> K(u.size(), u.size());
    K.setFromTriplets(f1.K.begin(), f1.K.end());
    const double h = 1e-7;
    for (int j = 0; j < u.size(); ++j) {
        Eigen::VectorXd up = u, um = u;
        up[j] += h;
        um[j] -= h;
        const Eigen::VectorXd col = (follower_pressure(m, top, 0.3, up).f - follower_pressure(m, top, 0.3, um).f) / (2 * h);
        EXPECT_LT((col - Eigen::VectorXd(K.col(j))).norm(), 1e-8);
    }
}
