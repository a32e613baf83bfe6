#include <gtest/gtest.h>

#include <numbers>

#include "support.hpp"

using namespace eqtest;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Up to 100 points spread over the sample grid.
std::vector<Vec> hundred_points(const Scenario& s) {
  const auto all = sample_points(s, 8);
  std::vector<Vec> out;
  const std::size_t step = std::max<std::size_t>(1, all.size() / 100);
  for (std::size_t i = 0; i < all.size() && out.size() < 100; i += step) out.push_back(all[i]);
  return out;
}

std::vector<double> group_elements(const GroupAction& g) {
  if (g.kind() == GroupKind::circle) return {0.1 * g.period(), 0.37 * g.period(), 0.5 * g.period(), 0.81 * g.period()};
  if (g.kind() == GroupKind::finite_cyclic) {
    std::vector<double> out;
    for (int k = 0; k < g.order(); ++k) out.push_back(k);
    return out;
  }
  return {0.0};
}

// Two tangent vectors at x built from fixed ambient vectors.
std::pair<Vec, Vec> tangent_pair(const Scenario& s, const Vec& x) {
  const int n = s.ambient_dimension();
  Vec u = Vec::LinSpaced(n, 0.3, 1.1), w = Vec::LinSpaced(n, -0.7, 0.4);
  return {s.manifold->project(x, u), s.manifold->project(x, w)};
}

class CatalogueTest : public ::testing::TestWithParam<std::string> {};

TEST_P(CatalogueTest, FunctionIsInvariant) {
  const Scenario& s = scenario(GetParam());
  double worst = 0;
  for (const Vec& x : hundred_points(s))
    for (double a : group_elements(*s.action)) worst = std::max(worst, std::abs(s.value(s.action->act(a, x)) - s.value(x)));
  EXPECT_LE(worst, 1e-10);
}

TEST_P(CatalogueTest, MetricIsInvariantAndPositive) {
  const Scenario& s = scenario(GetParam());
  double worst = 0;
  for (const Vec& x : hundred_points(s)) {
    const Eigen::SelfAdjointEigenSolver<Mat> es(s.manifold->metric_matrix(x));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    const auto [u, w] = tangent_pair(s, x);
    for (double a : group_elements(*s.action)) {
      const Vec y = s.action->act(a, x);
      const Vec du = act_on_tangent(s, a, x, u), dw = act_on_tangent(s, a, x, w);
      worst = std::max(worst, std::abs(s.manifold->inner(y, du, dw) - s.manifold->inner(x, u, w)));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

TEST_P(CatalogueTest, GradientAndHessianMatchFiniteDifferences) {
  const Scenario& s = scenario(GetParam());
  for (const Vec& x : hundred_points(s)) {
    const Jet j = s.jet(x);
    const Vec g = fd_gradient([&](const Vec& y) { return s.function->value(y); }, x);
    EXPECT_LE((g - j.gradient).norm(), 1e-6 * (1.0 + j.gradient.norm())) << x.transpose();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Vec col = fd_gradient([&](const Vec& y) { return s.function->jet(y).gradient[i]; }, x);
      EXPECT_LE((col - j.hessian.row(i).transpose()).norm(), 1e-6 * (1.0 + j.hessian.norm())) << x.transpose();
    }
  }
}

TEST_P(CatalogueTest, ActionAxioms) {
  const Scenario& s = scenario(GetParam());
  const GroupAction& g = *s.action;
  const auto elems = group_elements(g);
  for (const Vec& x : hundred_points(s)) {
    EXPECT_EQ(s.manifold->canonical(g.act(0.0, x)), s.manifold->canonical(x));
    for (double a : elems)
      for (double b : elems) {
        const Vec lhs = g.act(a, g.act(b, x));
        const Vec rhs = g.act(g.compose(a, b), x);
        EXPECT_LE(s.manifold->displacement(lhs, rhs).norm(), 1e-12);
      }
    if (g.kind() == GroupKind::circle) {
      const double h = 1e-6;
      const Vec fd = s.manifold->displacement(g.act(-h, x), g.act(h, x)) / (2 * h);
      EXPECT_LE((fd - g.fundamental_field(x)).norm(), 1e-6);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, CatalogueTest,
                         ::testing::Values("sphere_height", "sphere_stabilized", "torus_with_legs", "mapping_torus",
                                           "mapping_torus_stabilized"));

TEST(BuildScenario, ValuesAtKnownPoints) {
  const Scenario& sh = scenario("sphere_height");
  EXPECT_EQ(sh.value(v3(0, 0, 1)), 1.0);
  EXPECT_EQ(sh.value(v3(0, 0, -1)), -1.0);
  const Scenario& mt = scenario("mapping_torus");
  for (double tau : {0.0, 0.25, 0.5, 0.9}) EXPECT_NEAR(mt.value(v3(0, 0.25, tau)), 4.0, 1e-14);
  const Scenario& tl = scenario("torus_with_legs");
  for (double phi : {0.0, 1.0, 2.5, 5.0}) EXPECT_NEAR(tl.value(v2(phi, kPi)), 0.0, 1e-14);
}

TEST(BuildScenario, RejectsBadInput) {
  EXPECT_THROW(build_scenario("klein_bottle"), ConfigurationError);
  EXPECT_THROW(build_scenario("torus_with_legs", {{"n", 0}}), ConfigurationError);
  EXPECT_THROW(build_scenario("torus_with_legs", {{"n", 2.5}}), ConfigurationError);
  EXPECT_THROW(build_scenario("mapping_torus_stabilized", {{"lambda", 0.05}, {"delta", 0.05}}), ConfigurationError);
  EXPECT_THROW(build_scenario("mapping_torus_stabilized", {{"lambda", 0.05}, {"epsilon", 0.0}}), ConfigurationError);
  EXPECT_THROW(build_scenario("sphere_height", {{"lambda", 1}}), ConfigurationError);
}

TEST(EvaluateGradient, SphereEquatorPointsNorth) {
  const Scenario& s = scenario("sphere_height");
  const Vec x = v3(1, 0, 0);
  const Vec g = evaluate_gradient(s, x);
  EXPECT_NEAR(s.manifold->norm(x, g), 1.0, 1e-12);
  EXPECT_NEAR(g[2], 1.0, 1e-12);
  EXPECT_THROW(evaluate_gradient(s, v3(2, 0, 0)), DomainError);
}

TEST(EvaluateGradient, VanishesAtKnownCriticalPoints) {
  EXPECT_LE(evaluate_gradient(scenario("sphere_height"), v3(0, 0, 1)).norm(), 1e-10);
  EXPECT_LE(evaluate_gradient(scenario("sphere_height"), v3(0, 0, -1)).norm(), 1e-10);
  for (const auto& p : {v3(0, 0.25, 0.3), v3(0.5, 0.25, 0.3), v3(0.5, 0.75, 0.3), v3(0, 0.75, 0.3)}) {
    EXPECT_LE(evaluate_gradient(scenario("mapping_torus"), p).norm(), 1e-10);
  }
  // Legs of the torus: minima at (2 pi k / n, 0), saddles between them.
  EXPECT_LE(evaluate_gradient(scenario("torus_with_legs"), v2(0, 0)).norm(), 1e-10);
  EXPECT_LE(evaluate_gradient(scenario("torus_with_legs"), v2(kPi / 3, 0)).norm(), 1e-10);
}

TEST(EvaluateGradient, MappingTorusHasNoTauComponent) {
  EXPECT_EQ(evaluate_gradient(scenario("mapping_torus"), v3(0.25, 0.25, 0))[2], 0.0);
}

TEST(EvaluateGradient, ContinuousAcrossGluing) {
  for (const char* name : {"mapping_torus", "mapping_torus_stabilized"}) {
    const Scenario& s = scenario(name);
    for (double t1 : {0.03, 0.2, 0.45, 0.5, 0.77}) {
      for (double t2 : {0.1, 0.25, 0.6, 0.75}) {
        const double eta = 1e-12;
        const Vec below = v3(std::fmod(1.0 - t1, 1.0), t2, 1.0 - eta);
        const Vec above = v3(t1, t2, eta);
        Vec pushed = s.gradient(below);
        pushed[0] = -pushed[0];
        EXPECT_LE((pushed - s.gradient(above)).norm(), 1e-8) << name << " " << t1 << " " << t2;
      }
    }
  }
}

TEST(ActOnTangent, Examples) {
  const Scenario& mt = scenario("mapping_torus");
  const Vec x = v3(0.25, 0.25, 0);
  const Vec e1 = v3(1, 0, 0);
  EXPECT_EQ(act_on_tangent(mt, 0.0, x, e1), e1);
  EXPECT_LE((act_on_tangent(mt, 1.0, x, e1) + e1).norm(), 1e-15);
  EXPECT_LE((mt.action->act(1.0, x) - v3(0.75, 0.25, 0)).norm(), 1e-15);

  const Scenario& sh = scenario("sphere_height");
  const Vec ex = v3(1, 0, 0);
  EXPECT_LE((act_on_tangent(sh, kPi, v3(0, 0, 1), ex) + ex).norm(), 1e-15);
}

TEST(Charts, GluingIsAnInvolution) {
  const Scenario& mt = scenario("mapping_torus");
  const CoordinateChart& c = mt.manifold->charts().front();
  ASSERT_TRUE(c.gluing.has_value());
  // 1 - (1 - a) may differ from a in the last bit.
  for (const Vec& x : sample_points(mt, 5)) EXPECT_LE((c.reduce(c.identify(c.identify(x))) - c.reduce(x)).norm(), 1e-15);
  // Periodic reduction into [0, 1).
  const Vec r = c.reduce(v3(1.25, -0.25, 0.5));
  EXPECT_NEAR(r[0], 0.25, 1e-15);
  EXPECT_NEAR(r[1], 0.75, 1e-15);
  // Leaving tau through 1 flips theta1.
  const Vec g = c.reduce(v3(0.25, 0.5, 1.25));
  EXPECT_NEAR(g[0], 0.75, 1e-15);
  EXPECT_NEAR(g[2], 0.25, 1e-15);
}

TEST(SamplePoints, Examples) {
  const auto sp = sample_points(scenario("sphere_height"), 2);
  auto has = [&](const Vec& p) {
    for (const auto& x : sp)
      if ((x - p).norm() < 1e-12) return true;
    return false;
  };
  EXPECT_TRUE(has(v3(0, 0, 1)));
  EXPECT_TRUE(has(v3(0, 0, -1)));
  EXPECT_EQ(sample_points(scenario("mapping_torus"), 4).size(), 64u);
  for (const char* name : {"sphere_height", "torus_with_legs", "mapping_torus"}) {
    const Scenario& s = scenario(name);
    const auto pts = sample_points(s, 6);
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) ASSERT_GT(s.manifold->distance(pts[i], pts[j]), 1e-9) << name;
    EXPECT_EQ(pts.size(), sample_points(s, 6).size());
  }
  EXPECT_THROW(sample_points(scenario("sphere_height"), 1), ConfigurationError);
}

}  // namespace
