#include "../support/checks.hpp"

#include <gtest/gtest.h>

namespace supg {
namespace {

using testing::random_point;
using testing::random_polynomial;

TEST(Advection, VanishesForConstantData) {
  const auto b = evaluate_jet<3>(constant_velocity<3>(Vec<3>(1.0, -2.0, 0.5)), Vec<3>(0.3, 0.2, 0.1));
  const auto u = evaluate_jet<3>(constant_velocity<3>(Vec<3>(4.0, 1.0, -1.0)), Vec<3>(0.3, 0.2, 0.1));
  EXPECT_LT(lie_advection<3>(b, u).norm(), 1e-15);
}

TEST(Advection, HandComputedCases) {
  const Vec<3> x(0.4, 0.7, 0.2);
  JetField<3> beta = [](const JetVec<3>& p) { return JetVec<3>{p[0], 0.0, 0.0}; };
  const JetVec<3> bj = beta(seed<3>(x));
  const JetVec<3> uj = constant_velocity<3>(Vec<3>(1.0, 0.0, 0.0))(seed<3>(x));
  const Vec<3> lu = lie_advection<3>(to_field_jet<3>(bj), to_field_jet<3>(uj));
  const Vec<3> dual = lie_advection_dual<3>(bj, uj);
  EXPECT_LT((lu - Vec<3>(1.0, 0.0, 0.0)).norm(), 1e-15);
  EXPECT_LT(dual.norm(), 1e-15);

  // beta = e1, u = (y, 0, 0): grad(beta . u) = (0, 1, 0) cancels -beta x curl u = (0, -1, 0).
  JetField<3> u2 = [](const JetVec<3>& p) { return JetVec<3>{p[1], 0.0, 0.0}; };
  const auto b2 = evaluate_jet<3>(constant_velocity<3>(Vec<3>(1.0, 0.0, 0.0)), x);
  const auto uu = evaluate_jet<3>(u2, x);
  EXPECT_LT((uu.jacobian.transpose() * b2.value - Vec<3>(0.0, 1.0, 0.0)).norm(), 1e-15);
  EXPECT_LT(lie_advection<3>(b2, uu).norm(), 1e-15);
}

TEST(Advection, SumWithDualIsAZerothOrderOperator) {
  std::mt19937 rng(21);
  EXPECT_LT(testing::advection_sum_defect<2>(200, rng), 1e-10);
  EXPECT_LT(testing::advection_sum_defect<3>(200, rng), 1e-10);
}

TEST(Advection, CurlFormMatchesJacobianForm) {
  std::mt19937 rng(22);
  for (int t = 0; t < 100; ++t) {
    const auto b = evaluate_jet<3>(random_polynomial<3>(2, rng), random_point<3>(rng));
    const auto u = evaluate_jet<3>(random_polynomial<3>(2, rng), random_point<3>(rng));
    const Vec<3> a = lie_advection<3>(b, u);
    const Vec<3> j = lie_advection_jacobian<3>(b.value, b.jacobian, u.value, u.jacobian);
    EXPECT_LT((a - j).norm(), 1e-12 * std::max(1.0, a.norm()));
  }
}

TEST(Advection, RotatedFormMatchesJacobianFormIn2D) {
  std::mt19937 rng(23);
  for (int t = 0; t < 100; ++t) {
    const Vec<2> x = random_point<2>(rng);
    const auto b = evaluate_jet<2>(random_polynomial<2>(2, rng), x);
    const auto u = evaluate_jet<2>(random_polynomial<2>(2, rng), x);
    const Vec<2> r = lie_advection_rotated(b, u);
    const Vec<2> j = lie_advection_jacobian<2>(b.value, b.jacobian, u.value, u.jacobian);
    EXPECT_LT((r - j).norm(), 1e-12 * std::max(1.0, r.norm()));
  }
}

TEST(Advection, DualClosedFormMatchesJets) {
  std::mt19937 rng(24);
  for (int t = 0; t < 100; ++t) {
    const Vec<3> x = random_point<3>(rng);
    const JetVec<3> bj = random_polynomial<3>(2, rng)(seed<3>(x));
    const JetVec<3> vj = random_polynomial<3>(2, rng)(seed<3>(x));
    const auto b = to_field_jet<3>(bj);
    const auto v = to_field_jet<3>(vj);
    const Vec<3> a = lie_advection_dual<3>(bj, vj);
    const Vec<3> c = lie_advection_dual_jacobian<3>(b.value, b.jacobian, v.value, v.jacobian);
    EXPECT_LT((a - c).norm(), 1e-12 * std::max(1.0, a.norm()));
  }
}

TEST(Advection, IntegrationByPartsOnCells) {
  std::mt19937 rng(25);
  EXPECT_LT(testing::integration_by_parts_defect<2>(2, 2, rng), 1e-10);
  EXPECT_LT(testing::integration_by_parts_defect<3>(1, 2, rng), 1e-10);
}

TEST(Friedrichs, RotatingVelocityGivesGamma) {
  const auto p = make_example<2>(2, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(4);
  const auto r = friedrichs_rho(p, m, 1.0 - 1e-12);
  EXPECT_NEAR(r.min_rho, 1.0, 1e-14);
  EXPECT_TRUE(r.pass);
}

TEST(Friedrichs, ThreeDimensionalExampleMatchesEigenOracle) {
  // beta = (1 - z/2, 2 + x, 3 - y) has a constant Jacobian and zero divergence.
  Mat<3> db;
  db << 0, 0, -0.5, 1, 0, 0, 0, -1, 0;
  const Mat<3> s = 8.0 * Mat<3>::Identity() + 0.5 * (db + db.transpose());
  const double lam = Eigen::SelfAdjointEigenSolver<Mat<3>>(s).eigenvalues()(0);
  EXPECT_NEAR(lam, 7.406929669182746, 1e-12);
  const auto p = make_example<3>(1, 1e-6);
  std::mt19937 rng(26);
  for (int t = 0; t < 20; ++t) EXPECT_NEAR(friedrichs_rho_at(p, random_point<3>(rng)), lam, 1e-12);
}

TEST(Friedrichs, ConstantVelocityWithoutReactionFails) {
  const auto p = make_example<2>(4, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(2);
  const auto r = friedrichs_rho(p, m, 1e-3);
  EXPECT_NEAR(r.min_rho, 0.0, 1e-15);
  EXPECT_FALSE(r.pass);
}

TEST(Examples, LayerProblemData) {
  const Vec<2> x(0.3, 0.6);
  const auto e4 = make_example<2>(4, 1e-6);
  EXPECT_EQ(e4.beta_value(x), Vec<2>(1.0, 2.0));
  EXPECT_EQ(e4.gamma(x), 0.0);
  EXPECT_EQ(e4.source(x), Vec<2>(1.0, 1.0));
  EXPECT_EQ(e4.boundary(x, Vec<2>(1.0, 0.0)), Vec<2>::Zero());
  EXPECT_FALSE(e4.has_exact());

  const auto e5 = make_example<2>(5, 1e-3);
  EXPECT_EQ(e5.source(Vec<2>(0.5, 0.5)), Vec<2>(1.0, 1.0));
  EXPECT_EQ(e5.source(Vec<2>(0.5, 0.1)), Vec<2>(0.0, 0.0));
  EXPECT_EQ(e5.source(Vec<2>(0.5, 0.9)), Vec<2>(0.0, 0.0));
  EXPECT_EQ(example_default_epsilon(5), 1e-3);

  const auto e6 = make_example<2>(6, 1e-6);
  EXPECT_EQ(e6.beta_value(x), Vec<2>(1.0, 0.0));
  EXPECT_EQ(e6.source(x), Vec<2>(1.0, 0.0));
}

TEST(Examples, InvalidRequestsThrow) {
  EXPECT_THROW(make_example<2>(1, 1e-6), ArgumentError);
  EXPECT_THROW(make_example<3>(2, 1e-6), ArgumentError);
  EXPECT_THROW(make_example<2>(7, 1e-6), ArgumentError);
  EXPECT_THROW(make_example<2>(2, 0.0), ArgumentError);
  EXPECT_EQ(make_example<3>(3, 1e-6).name, "example3");
}

TEST(Examples, ManufacturedSourceSatisfiesStrongForm) {
  // Recompute f = eps curl curl u + L u + gamma u with the rotated 2D form.
  const auto p = make_example<2>(2, 1e-2);
  std::mt19937 rng(27);
  for (int t = 0; t < 50; ++t) {
    const Vec<2> x = random_point<2>(rng);
    const auto u = p.exact_jet(x);
    const auto b = p.beta_jet(x);
    const Vec<2> f = 1e-2 * u.curlcurl() + lie_advection_rotated(b, u) + u.value;
    EXPECT_LT((f - p.source(x)).norm(), 1e-11);
  }
}

TEST(Boundary, TracesSplitTangentialAndNormalParts) {
  const Vec<3> n(0.0, 0.0, 1.0);
  const Vec<3> u(1.0, 2.0, 3.0);
  const Vec<3> g_out = boundary_operator<3>(u, n, false);
  const Vec<3> g_in = boundary_operator<3>(u, n, true);
  EXPECT_LT((tangential_trace<3>(g_out, n) - Vec<3>(1.0, 2.0, 0.0)).norm(), 1e-15);
  EXPECT_LT((inflow_trace<3>(g_in, n) - u).norm(), 1e-15);
  const Vec<2> n2(1.0, 0.0);
  const Vec<2> u2(0.5, -1.5);
  EXPECT_LT((tangential_trace<2>(boundary_operator<2>(u2, n2, false), n2) - Vec<2>(0.0, -1.5)).norm(), 1e-15);
  EXPECT_LT((inflow_trace<2>(boundary_operator<2>(u2, n2, true), n2) - u2).norm(), 1e-15);
}

}  // namespace
}  // namespace supg
