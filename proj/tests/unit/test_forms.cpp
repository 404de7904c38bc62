#include "../support/checks.hpp"

#include <gtest/gtest.h>

namespace supg {
namespace {

using testing::random_vector;

TEST(Lifting, AdjointIdentityAgainstFacetSums) {
  std::mt19937 rng(31);
  for (AlphaRule a : {AlphaRule::Upwind, AlphaRule::Centered}) {
    for (int k : {1, 2}) EXPECT_LT(testing::lifting_identity_defect<2>(k, 4, a, 5, rng), 1e-10);
    EXPECT_LT(testing::lifting_identity_defect<3>(1, 2, a, 3, rng), 1e-10);
  }
}

TEST(Lifting, ZeroDataLiftsToZero) {
  const auto spec = make_example<2>(2, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(2);
  const FeSpace<2> s(m, 2);
  const Discretization<2> disc(s, spec, variant_config(Variant::Supg));
  for (Index c = 0; c < m.n_cells(); ++c) {
    const auto cd = disc.cell_data(c);
    EXPECT_EQ(disc.lifting_apply(cd, [](const FacetPoint<2>&) { return Vec<2>::Zero().eval(); }).norm(), 0.0);
  }
}

TEST(Lifting, StableUnderRefinement) {
  // ||r(w)||_T / (h^-1/2 ||w||_dT) for smooth facet data stays bounded.
  const auto spec = make_example<2>(2, 1e-6);
  auto data = [](const FacetPoint<2>& fp) {
    return Vec<2>(std::sin(7.0 * fp.x(0) + 3.0 * fp.x(1)), std::cos(5.0 * fp.x(1)));
  };
  std::vector<double> ratios;
  for (int n : {4, 16, 64}) {
    const Mesh<2> m = build_uniform_mesh<2>(n);
    const FeSpace<2> s(m, 1);
    const Discretization<2> disc(s, spec, variant_config(Variant::Supg));
    double worst = 0.0;
    for (Index c = 0; c < std::min<Index>(m.n_cells(), 64); ++c) {
      const auto cd = disc.cell_data(c);
      const Eigen::VectorXd r = disc.lifting_apply(cd, data);
      double facet = 0.0;
      for (const auto& fp : cd.facet_points) facet += fp.weight * fp.alpha * data(fp).squaredNorm();
      if (facet == 0.0) continue;
      const double h = m.cell_diameter(c);
      worst = std::max(worst, std::sqrt(r.dot(cd.mass * r)) / (std::sqrt(facet) / std::sqrt(h)));
    }
    ratios.push_back(worst);
  }
  EXPECT_GT(ratios.front(), 0.0);
  EXPECT_LT(ratios.back() / ratios.front(), 1.5);
  EXPECT_LT(ratios[1] / ratios.front(), 1.5);
}

TEST(Alpha, RulesAndPreset) {
  StabilizationConfig up;
  EXPECT_EQ(alpha_plus(up, 1.0), 0.0);
  EXPECT_EQ(alpha_plus(up, -1.0), 1.0);
  StabilizationConfig centered = variant_config(Variant::Galerkin);
  EXPECT_EQ(alpha_plus(centered, 3.0), 0.5);
  StabilizationConfig custom;
  custom.alpha = AlphaRule::Custom;
  EXPECT_THROW(alpha_plus(custom, 1.0), ArgumentError);
  custom.custom_alpha_plus = [](double) { return 0.25; };
  EXPECT_EQ(alpha_plus(custom, 1.0), 0.25);
  EXPECT_EQ(parse_variant("none"), Variant::Galerkin);
  EXPECT_EQ(parse_variant("s1"), Variant::S1Only);
  EXPECT_EQ(parse_variant("sold"), Variant::Sold);
  EXPECT_THROW(parse_variant("upwind"), ArgumentError);
}

Eigen::MatrixXd dense(const Eigen::SparseMatrix<double>& a) { return Eigen::MatrixXd(a); }

TEST(Assembly, CenteredWeightsWithoutDeltaGiveGalerkin) {
  const auto spec = make_example<2>(2, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(4);
  const FeSpace<2> s(m, 1);
  StabilizationConfig custom = variant_config(Variant::Supg);
  custom.alpha = AlphaRule::Custom;
  custom.custom_alpha_plus = [](double) { return 0.5; };
  custom.delta = DeltaRule::Zero;
  const auto a = Discretization<2>(s, spec, variant_config(Variant::Galerkin)).assemble();
  const auto b = Discretization<2>(s, spec, custom).assemble();
  EXPECT_LT((dense(a.matrix) - dense(b.matrix)).norm(), 1e-13);
  EXPECT_LT((a.rhs - b.rhs).norm(), 1e-13);
}

TEST(Assembly, UpwindTermIsTheWeightedJumpSeminorm) {
  // a_upwind - a_centered on the diagonal equals 1/2 sum_F <|beta . n|, |[[v]]|^2>.
  const auto spec = make_example<2>(2, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(4);
  const FeSpace<2> s(m, 2);
  const Eigen::MatrixXd s1 = dense(Discretization<2>(s, spec, variant_config(Variant::S1Only)).assemble().matrix) -
                             dense(Discretization<2>(s, spec, variant_config(Variant::Galerkin)).assemble().matrix);
  const Eigen::MatrixXd sym = 0.5 * (s1 + s1.transpose());
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff(), -1e-12);

  std::mt19937 rng(32);
  const auto rule = simplex_quadrature<1>(6);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd v = random_vector(s.n_dofs(), rng);
    const DiscreteField<2> f(s, v);
    double jump = 0.0;
    for (const auto& fa : m.facets()) {
      if (fa.is_boundary()) continue;
      const auto fq = map_facet_rule<2>(rule, {m.vertex(fa.vertices[0]), m.vertex(fa.vertices[1])}, fa.measure);
      for (std::size_t q = 0; q < fq.points.size(); ++q) {
        const Vec<2>& x = fq.points[q];
        const Vec<2> d = f.value(fa.cells[0], m.map(fa.cells[0]).to_reference(x)) -
                         f.value(fa.cells[1], m.map(fa.cells[1]).to_reference(x));
        jump += 0.5 * fq.weights[q] * std::abs(spec.beta_value(x).dot(fa.normal)) * d.squaredNorm();
      }
    }
    EXPECT_NEAR(v.dot(s1 * v), jump, 1e-10 * std::max(1.0, jump));
  }
}

TEST(Assembly, ZeroDataGivesZeroRightHandSide) {
  const auto spec = make_layer_problem<2>("zero", 1e-6, Vec<2>(1.0, 2.0), [](const Vec<2>&) { return Vec<2>::Zero().eval(); });
  const Mesh<2> m = build_uniform_mesh<2>(3);
  const FeSpace<2> s(m, 2);
  const Discretization<2> disc(s, spec, variant_config(Variant::Supg));
  EXPECT_EQ(disc.assemble().rhs.norm(), 0.0);
  EXPECT_EQ(disc.boundary_values().norm(), 0.0);
}

TEST(Assembly, BoundaryValuesMatchInterpolant) {
  const auto spec = make_example<2>(2, 1e-6);
  for (int k : {1, 2}) {
    const Mesh<2> m = build_uniform_mesh<2>(4);
    const FeSpace<2> s(m, k);
    const Discretization<2> disc(s, spec, variant_config(Variant::Supg));
    const Eigen::VectorXd full = s.interpolate([&](const Vec<2>& x) { return spec.exact_jet(x).value; });
    const Eigen::VectorXd b = disc.boundary_values();
    for (std::size_t i = 0; i < s.boundary_dofs().size(); ++i) EXPECT_NEAR(b(i), full(s.boundary_dofs()[i]), 1e-12);
  }
  const auto spec3 = make_example<3>(1, 1e-6);
  const Mesh<3> m = build_uniform_mesh<3>(2);
  const FeSpace<3> s(m, 2);
  const Discretization<3> disc(s, spec3, variant_config(Variant::Supg));
  const Eigen::VectorXd full = s.interpolate([&](const Vec<3>& x) { return spec3.exact_jet(x).value; });
  const Eigen::VectorXd b = disc.boundary_values();
  for (std::size_t i = 0; i < s.boundary_dofs().size(); ++i) EXPECT_NEAR(b(i), full(s.boundary_dofs()[i]), 1e-12);
}

TEST(Delta, PerNRule) {
  const auto spec = make_example<2>(2, 1e-6);
  const Mesh<2> m = build_uniform_mesh<2>(16);
  const FeSpace<2> s(m, 1);
  const Discretization<2> disc(s, spec, variant_config(Variant::Supg));
  for (double d : disc.deltas()) EXPECT_DOUBLE_EQ(d, 0.4 / 16);
  const Discretization<2> s1(s, spec, variant_config(Variant::S1Only));
  for (double d : s1.deltas()) EXPECT_EQ(d, 0.0);
}

TEST(Delta, RegimeRule) {
  const Mesh<2> m = build_uniform_mesh<2>(16);
  const FeSpace<2> s(m, 1);
  StabilizationConfig cfg = variant_config(Variant::Supg);
  cfg.delta = DeltaRule::Regime;
  cfg.c1 = 1.0;
  const auto diffusive = make_example<2>(2, 1.0);
  const auto advective = make_example<2>(2, 1e-6);
  const Discretization<2> dd(s, diffusive, cfg);
  const Discretization<2> da(s, advective, cfg);
  for (Index c = 0; c < m.n_cells(); ++c) {
    const double h = m.cell_diameter(c);
    EXPECT_DOUBLE_EQ(dd.deltas()[c], h * h);
    EXPECT_DOUBLE_EQ(da.deltas()[c], 0.4 * h);
  }
}

TEST(Delta, CapsApply) {
  // gamma = 0: only the inverse-estimate cap can act; it is inactive for k = 1
  // in 2D where curl curl vanishes cellwise.
  const auto layer = make_example<2>(4, 1.0);
  const Mesh<2> m = build_uniform_mesh<2>(4);
  StabilizationConfig cfg = variant_config(Variant::Supg);
  cfg.cap_delta = true;
  const FeSpace<2> s1(m, 1);
  const Discretization<2> d1(s1, layer, cfg);
  EXPECT_NEAR(d1.c_inv(), 0.0, 1e-6);
  for (double d : d1.deltas()) EXPECT_DOUBLE_EQ(d, 0.1);

  const FeSpace<2> s2(m, 2);
  const Discretization<2> d2(s2, layer, cfg);
  EXPECT_GT(d2.c_inv(), 0.0);
  for (Index c = 0; c < m.n_cells(); ++c) {
    const double h = m.cell_diameter(c);
    EXPECT_DOUBLE_EQ(d2.deltas()[c], std::min(0.1, h * h / (2.0 * d2.c_inv() * d2.c_inv())));
  }

  // gamma = 8, rho0 = 7.4: the reaction cap rho0 / (2 gamma^2) is below 0.4 / 4.
  const auto ex1 = make_example<3>(1, 1e-6);
  const Mesh<3> m3 = build_uniform_mesh<3>(4);
  const FeSpace<3> s3(m3, 1);
  cfg.rho0 = 7.4;
  const Discretization<3> d3(s3, ex1, cfg);
  for (double d : d3.deltas()) EXPECT_DOUBLE_EQ(d, 7.4 / 128.0);
}

TEST(Delta, InverseConstantIsMeshIndependent) {
  const Mesh<2> a = build_uniform_mesh<2>(2);
  const Mesh<2> b = build_uniform_mesh<2>(8);
  const double ca = measure_c_inv(FeSpace<2>(a, 2));
  const double cb = measure_c_inv(FeSpace<2>(b, 2));
  EXPECT_GT(ca, 0.0);
  EXPECT_NEAR(ca, cb, 1e-8 * ca);
}

TEST(Coercivity, RandomFunctionsOnSmallMeshes) {
  std::mt19937 rng(33);
  const auto r2 = testing::coercivity_check<2>(make_example<2>(2, 1e-6), 2, 4, 30, rng);
  EXPECT_GE(r2.min_ratio, 0.5);
  const auto r3 = testing::coercivity_check<3>(make_example<3>(1, 1e-6), 1, 2, 30, rng);
  EXPECT_GE(r3.min_ratio, 0.5);
}

}  // namespace
}  // namespace supg
