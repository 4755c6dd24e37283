#include "blayer/bench.hpp"
#include "blayer/mortar_embedded.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace blayer;

namespace {

/// Flat layer [0,1] x [0,0.2] under a Cartesian background [0,1]^2; the interface y = 0.2 cuts cells.
EmbeddedModel flat_model(double eps, int spans) {
    const NurbsPatch base = straight_curve(Vec2(1.0, 0.0), Vec2(0.0, 0.0), 2, spans);
    const NurbsPatch iface = straight_curve(Vec2(1.0, 0.2), Vec2(0.0, 0.2), 2, spans);
    BoundingBox b;
    b.lo = Vec2(0, 0);
    b.hi = Vec2(1, 1);
    EmbeddedOptions o;
    o.epsilon = eps;
    return build_embedded_model({base}, {iface}, build_cartesian_mesh(b, 0.3, ElementTech::Quad4), o);
}

Eigen::VectorXd field(const EmbeddedModel& m, const Vec2& layer_shift, const Vec2& bg_shift) {
    const int nl = m.layer.mesh.num_nodes(), nb = m.background.num_nodes();
    Eigen::VectorXd d(2 * (nl + nb));
    for (int i = 0; i < nl; ++i) d.segment<2>(2 * i) = layer_shift;
    for (int i = 0; i < nb; ++i) d.segment<2>(2 * (nl + i)) = bg_shift;
    return d;
}

}  // namespace

TEST(EmbeddedMortar, RowSumsEqualKappaAndInterfaceLength) {
    const EmbeddedModel m = flat_model(100.0, 5);
    const EmbeddedCoupling& c = m.coupling;
    EXPECT_EQ(c.size(), 7);
    const Eigen::VectorXd rd = c.D * Eigen::VectorXd::Ones(c.D.cols());
    const Eigen::VectorXd rm = c.M * Eigen::VectorXd::Ones(c.M.cols());
    EXPECT_LT((rd - c.kappa).norm(), 1e-14);
    EXPECT_LT((rm - c.kappa).norm(), 1e-14);
    EXPECT_NEAR(c.kappa.sum(), 1.0, 1e-14);
    for (int q = 0; q < c.size(); ++q) {
        EXPECT_NEAR(c.mult_points[q].y(), 0.2, 1e-14);
        EXPECT_NEAR(c.mult_normals[q].y(), 1.0, 1e-14);
    }
    EXPECT_TRUE(c.warnings.empty());
}

TEST(EmbeddedMortar, CommonTranslationIsFree) {
    const EmbeddedModel m = flat_model(100.0, 3);
    const CouplingResidual r = coupling_force(m.coupling, field(m, Vec2(0.3, -0.7), Vec2(0.3, -0.7)));
    EXPECT_LT(r.g.norm(), 1e-14);
    EXPECT_LT(r.f.norm(), 1e-12);
}

TEST(EmbeddedMortar, RelativeShiftGivesUniformPenaltyTraction) {
    const double eps = 250.0, delta = 1e-3;
    const EmbeddedModel m = flat_model(eps, 4);
    const CouplingResidual r = coupling_force(m.coupling, field(m, Vec2::Zero(), Vec2(0.0, delta)));
    for (int q = 0; q < m.coupling.size(); ++q) {
        EXPECT_NEAR(r.lambda(q, 0), 0.0, 1e-14);
        EXPECT_NEAR(r.lambda(q, 1), -eps * delta, 1e-12);
    }
    for (double t : coupling_normal_traction(m.coupling, r)) EXPECT_NEAR(t, eps * delta, 1e-12);
    // total force on each body is the traction times the interface length
    const int nl = m.layer.mesh.num_nodes();
    double fl = 0, fb = 0;
    for (int i = 0; i < nl; ++i) fl += r.f[2 * i + 1];
    for (int i = 0; i < m.background.num_nodes(); ++i) fb += r.f[2 * (nl + i) + 1];
    EXPECT_NEAR(fl, -eps * delta, 1e-12);
    EXPECT_NEAR(fb, eps * delta, 1e-12);
}

TEST(EmbeddedMortar, StiffnessIsTheDerivativeOfTheForce) {
    const EmbeddedModel m = flat_model(1000.0, 3);
    const Eigen::SparseMatrix<double> K = coupling_stiffness(m.coupling);
    Eigen::VectorXd d = field(m, Vec2::Zero(), Vec2::Zero());
    for (int i = 0; i < d.size(); ++i) d[i] = 1e-3 * std::cos(0.37 * i);
    const Eigen::VectorXd f = coupling_force(m.coupling, d).f;
    EXPECT_LT((Eigen::VectorXd(K * d) - f).norm(), 1e-12 * (1.0 + f.norm()));
    EXPECT_LT(Eigen::MatrixXd(K - Eigen::SparseMatrix<double>(K.transpose())).norm(), 1e-10);
}
