#include "blayer/mortar_contact.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blayer;

namespace {

/// Flat layer [0,1] x [g0, g0 + 0.2] above the plane y = 0.
BoundaryLayer flat_layer(double g0, int spans) {
    const NurbsPatch base = straight_curve(Vec2(1.0, g0), Vec2(0.0, g0), 2, spans);
    const NurbsPatch off = straight_curve(Vec2(1.0, g0 + 0.2), Vec2(0.0, g0 + 0.2), 2, spans);
    return build_boundary_layer({base}, {off});
}

ContactPair plane_pair(const BoundaryLayer& L) {
    return make_contact_pair(L.mesh, L.mesh.edge_sets.at("base"), RigidPlane{}, 10.0);
}

}  // namespace

TEST(Contact, ClosestPointGapSign) {
    RigidPlane p;
    p.point = Vec2(0.0, 1.0);
    p.normal = Vec2(0.0, 1.0);
    EXPECT_NEAR(closest_point_gap(Vec2(3.0, 1.25), p), 0.25, 1e-15);
    EXPECT_NEAR(closest_point_gap(Vec2(-2.0, 0.9), p), -0.1, 1e-15);
}

TEST(Contact, LinearDualBasisIsClassical) {
    // two-point Gauss on [-1,1] for linear shape functions: psi_1 = 2 N_1 - N_2
    const double g = 1.0 / std::sqrt(3.0);
    const std::vector<std::vector<double>> N = {{0.5 * (1 + g), 0.5 * (1 - g)}, {0.5 * (1 - g), 0.5 * (1 + g)}};
    const Eigen::MatrixXd A = dual_basis_coefficients(N, {1.0, 1.0});
    Eigen::Matrix2d expected;
    expected << 2, -1, -1, 2;
    EXPECT_LT((A - expected).norm(), 1e-13);
}

TEST(Contact, FlatSlaveWeightedGapsAndBiorthogonality) {
    const double g0 = 0.05;
    const BoundaryLayer L = flat_layer(g0, 4);
    const ContactPair pair = plane_pair(L);
    EXPECT_EQ(pair.size(), 6);
    const Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * L.mesh.num_nodes());
    const ContactState s = assemble_contact(pair, L.mesh, d, Eigen::VectorXd::Zero(pair.size()));
    EXPECT_NEAR(s.D.sum(), 1.0, 1e-14);
    for (int q = 0; q < pair.size(); ++q) EXPECT_NEAR(s.gap[q], g0 * s.D[q], 1e-15);
    EXPECT_LT(s.biorthogonality_residual, 1e-12);
    EXPECT_EQ(s.dropped_points, 0);

    // uniform multiplier: resultant force equals lambda times the contact length, pushing the slave up
    const ContactState sl = assemble_contact(pair, L.mesh, d, Eigen::VectorXd::Constant(pair.size(), 2.0));
    double fy = 0;
    for (int i = 0; i < L.mesh.num_nodes(); ++i) fy += sl.force[2 * i + 1];
    EXPECT_NEAR(std::abs(fy), 2.0, 1e-13);
}

TEST(Contact, GapDerivativeMatchesFiniteDifferences) {
    const BoundaryLayer L = flat_layer(0.02, 3);
    const ContactPair pair = plane_pair(L);
    Eigen::VectorXd d(2 * L.mesh.num_nodes());
    for (int i = 0; i < d.size(); ++i) d[i] = 0.01 * std::sin(0.9 * i + 0.2);
    const Eigen::VectorXd lam = Eigen::VectorXd::LinSpaced(pair.size(), 0.5, 1.5);
    const ContactState s = assemble_contact(pair, L.mesh, d, lam);
    Eigen::SparseMatrix<double> G(pair.size(), d.size()), F(d.size(), d.size());
    G.setFromTriplets(s.dgap.begin(), s.dgap.end());
    F.setFromTriplets(s.dforce.begin(), s.dforce.end());
    const double h = 1e-7;
    for (int j = 0; j < d.size(); ++j) {
        Eigen::VectorXd up = d, um = d;
        up[j] += h;
        um[j] -= h;
        const ContactState p = assemble_contact(pair, L.mesh, up, lam);
        const ContactState m = assemble_contact(pair, L.mesh, um, lam);
        EXPECT_LT(((p.gap - m.gap) / (2 * h) - Eigen::VectorXd(G.col(j))).norm(), 1e-7);
        EXPECT_LT(((p.force - m.force) / (2 * h) - Eigen::VectorXd(F.col(j))).norm(), 1e-6);
    }
}

TEST(Contact, ActiveSetRuleAndKkt) {
    const Eigen::VectorXd gap = (Eigen::VectorXd(4) << 0.1, -0.1, 0.0, 0.0).finished();
    const Eigen::VectorXd D = Eigen::VectorXd::Ones(4);
    const Eigen::VectorXd lam = (Eigen::VectorXd(4) << 0.5, 0.0, 0.0, 0.2).finished();
    const auto act = active_set_update(gap, D, lam, 10.0);
    // 0.5 - 1 < 0, 0 + 1 > 0, tie inactive, 0.2 > 0
    EXPECT_EQ(act, (std::vector<bool>{false, true, false, true}));
    const KktReport k = kkt_report(gap, D, lam);
    EXPECT_NEAR(k.min_gap, -0.1, 1e-15);
    EXPECT_NEAR(k.min_lambda, 0.0, 1e-15);
    EXPECT_NEAR(k.max_complementarity, 0.05, 1e-15);

    const auto init = initial_active_set((Eigen::VectorXd(3) << 0.3, 0.2, 0.4).finished(), Eigen::VectorXd::Ones(3), 1e-10);
    EXPECT_EQ(init, (std::vector<bool>{false, true, false}));
}

TEST(Contact, NodePositionsFollowDisplacement) {
    const BoundaryLayer L = flat_layer(0.1, 2);
    const ContactPair pair = plane_pair(L);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(2 * L.mesh.num_nodes());
    for (int i = 0; i < L.mesh.num_nodes(); ++i) d[2 * i + 1] = -0.04;
    const auto x = contact_node_positions(pair, L.mesh, d);
    ASSERT_EQ(static_cast<int>(x.size()), pair.size());
    for (const Vec2& p : x) EXPECT_NEAR(p.y(), 0.06, 1e-15);
}
