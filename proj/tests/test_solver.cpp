#include "blayer/bench.hpp"
#include "blayer/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blayer;

namespace {

/// Flat layer [0,1] x [0,0.2] under a Cartesian background [0,1]^2 cut at y = 0.2.
EmbeddedModel column(double eps) {
    const NurbsPatch base = straight_curve(Vec2(1.0, 0.0), Vec2(0.0, 0.0), 2, 3);
    const NurbsPatch iface = straight_curve(Vec2(1.0, 0.2), Vec2(0.0, 0.2), 2, 3);
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 1);
    EmbeddedOptions o;
    o.epsilon = eps;
    return build_embedded_model({base}, {iface}, build_cartesian_mesh(b, 0.3, ElementTech::Quad4), o);
}

int node_at(const Mesh& m, const Vec2& x) {
    for (int i = 0; i < m.num_nodes(); ++i)
        if ((m.nodes[i] - x).norm() < 1e-12) return i;
    return -1;
}

}  // namespace

TEST(LinearSolve, SmallSystem) {
    Eigen::SparseMatrix<double> A(3, 3);
    std::vector<Eigen::Triplet<double>> t = {{0, 0, 4}, {0, 1, 1}, {1, 0, 1}, {1, 1, 3}, {2, 2, 2}, {2, 0, -1}};
    A.setFromTriplets(t.begin(), t.end());
    const Eigen::VectorXd x = (Eigen::VectorXd(3) << 1, -2, 0.5).finished();
    const Eigen::VectorXd b = A * x;
    EXPECT_LT((linear_solve(A, b) - x).norm(), 1e-14);
    Eigen::SparseMatrix<double> S(2, 2);
    S.insert(0, 0) = 1.0;
    EXPECT_THROW(linear_solve(S, Eigen::VectorXd::Ones(2)), SolverError);
}

TEST(Solve, UniaxialCompressionGivesUniformStress) {
    const EmbeddedModel m = column(1000.0);
    const Material mat(1.0, 0.0, Kinematics::Linear);
    Problem p = make_problem(m, mat, mat);
    const double q = -0.01;
    add_traction(p, BodyId::Background, m.background, m.background.edge_sets.at("top"),
                 [&](const Vec2&) { return Vec2(0.0, q); });
    p.dirichlet.push_back({BodyId::Layer, m.layer.mesh.node_sets.at("base"), 1, 0.0});
    p.dirichlet.push_back({BodyId::Layer, {node_at(m.layer.mesh, Vec2(0.0, 0.0))}, 0, 0.0});
    const Solution s = solve_quasi_static(p);
    ASSERT_TRUE(s.report.success) << s.report.message;
    const ElementStresses st = element_stresses(p, s);
    for (const auto& S : st.layer) {
        EXPECT_NEAR(S(1, 1), q, 1e-12);
        EXPECT_NEAR(S(0, 0), 0.0, 1e-12);
    }
    for (std::size_t e = 0; e < st.background.size(); ++e) {
        if (p.background.quadrature[e].empty()) continue;
        EXPECT_NEAR(st.background[e](1, 1), q, 1e-12);
    }
    // the penalty leaves a uniform normal jump q / eps across the interface
    const Eigen::VectorXd dl = s.layer_part(p), db = s.background_part(p);
    const int top_bg = node_at(m.background, Vec2(0.0, 1.0));
    EXPECT_NEAR(db[2 * top_bg + 1], q * 1.0 + q / 1000.0, 1e-12);
    EXPECT_NEAR(dl[2 * node_at(m.layer.mesh, Vec2(1.0, 0.2)) + 1], q * 0.2, 1e-12);
}

TEST(Solve, FlatPunchOnRigidPlaneCarriesUniformContactTraction) {
    const EmbeddedModel m = column(1e4);
    const Material mat(1.0, 0.0, Kinematics::Linear);
    Problem p = make_problem(m, mat, mat);
    const double q = 0.02;
    add_traction(p, BodyId::Background, m.background, m.background.edge_sets.at("top"),
                 [&](const Vec2&) { return Vec2(0.0, -q); });
    p.dirichlet.push_back({BodyId::Layer, {node_at(m.layer.mesh, Vec2(0.0, 0.0))}, 0, 0.0});
    const ContactPair pair = make_contact_pair(m.layer.mesh, m.layer.mesh.edge_sets.at("base"), RigidPlane{}, 10.0);
    p.contact = &pair;
    p.settings.load_steps = 2;
    const Solution s = solve_quasi_static(p);
    ASSERT_TRUE(s.report.success) << s.report.message;
    ASSERT_EQ(s.lambda.size(), pair.size());
    for (int k = 0; k < pair.size(); ++k) {
        EXPECT_TRUE(s.active[k]);
        EXPECT_NEAR(s.lambda[k], q, 1e-10);
    }
    EXPECT_GE(s.report.kkt.min_lambda, 0.0);
    EXPECT_GT(s.report.kkt.min_gap, -1e-12);
    EXPECT_EQ(static_cast<int>(s.report.steps.size()), 2);
}

TEST(Solve, LiftOffReleasesContact) {
    const EmbeddedModel m = column(1e4);
    const Material mat(1.0, 0.0, Kinematics::Linear);
    Problem p = make_problem(m, mat, mat);
    // the top is pulled up between two supported base corners, so the base bows away from the plane
    add_traction(p, BodyId::Background, m.background, m.background.edge_sets.at("top"),
                 [](const Vec2& X) { return Vec2(0.0, 0.01 * std::sin(3.14159265358979 * X.x())); });
    const int left = node_at(m.layer.mesh, Vec2(0.0, 0.0)), right = node_at(m.layer.mesh, Vec2(1.0, 0.0));
    p.dirichlet.push_back({BodyId::Layer, {left}, 0, 0.0});
    p.dirichlet.push_back({BodyId::Layer, {left, right}, 1, 0.0});
    const ContactPair pair = make_contact_pair(m.layer.mesh, m.layer.mesh.edge_sets.at("base"), RigidPlane{}, 10.0);
    p.contact = &pair;
    const Solution s = solve_quasi_static(p);
    ASSERT_TRUE(s.report.success) << s.report.message;
    int open = 0;
    for (int k = 0; k < pair.size(); ++k) {
        EXPECT_GE(s.lambda[k], -1e-12);
        if (!s.active[k]) ++open;
    }
    EXPECT_GT(open, 0);
    EXPECT_LT(s.report.kkt.max_complementarity, 1e-10);
    EXPECT_GT(s.report.kkt.min_gap, -1e-10);
}

TEST(EnergyNorm, UniformStrainAgainstZeroField) {
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 2);
    const Mesh mesh = build_cartesian_mesh(b, 0.5, ElementTech::Quad8);
    const Material mat(3.0, 0.0, Kinematics::Linear);
    const auto quad = full_quadrature(mesh);
    Eigen::Matrix2d H;
    H << 0.01, 0.0, 0.0, 0.0;
    const GradientSampler ref = [&](int, const Vec2&, const Vec2&) { return std::optional<Eigen::Matrix2d>(H); };
    int missing = -1;
    const double e2 = energy_norm_squared(mesh, quad, Eigen::VectorXd::Zero(2 * mesh.num_nodes()), ref, mat, &missing);
    EXPECT_NEAR(e2, 2.0 * 3.0 * 1e-4, 1e-15);
    EXPECT_EQ(missing, 0);

    // the background sampler of the same field reproduces it exactly
    Eigen::VectorXd u(2 * mesh.num_nodes());
    for (int i = 0; i < mesh.num_nodes(); ++i) u.segment<2>(2 * i) = H * mesh.nodes[i];
    const GradientSampler self = background_reference_sampler(mesh, u, std::vector<bool>(mesh.num_elements(), true));
    EXPECT_NEAR(energy_norm_squared(mesh, quad, u, self, mat), 0.0, 1e-20);
}
