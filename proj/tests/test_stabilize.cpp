#include <gtest/gtest.h>

#include <numbers>

#include "eqmorse/profile.hpp"
#include "eqmorse/stabilize.hpp"
#include "support.hpp"

using namespace eqtest;

namespace {

// Root of the derivative of the oracle profile on (lambda, 3 lambda), by
// bisection on the hand-differentiated blend formula.
double t0_oracle(double lambda) {
  auto d = [&](double t) {
    const double s = (t - lambda) / (2 * lambda);
    const double b = smoothstep(s), db = 30 * s * s * (1 - s) * (1 - s);
    return -2 * db / (2 * lambda) * t * t + 2 * (1 - 2 * b) * t;
  };
  double lo = lambda, hi = 3 * lambda;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (d(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Left and right derivative limits at a junction, from the analytic branch
// on each side.
template <class D>
double limit_mismatch(D&& d, double j) {
  return std::abs(d(std::nextafter(j, 1e300)) - d(std::nextafter(j, -1e300)));
}

// Second-order one-sided differences at step h; rounding limits their
// agreement to about 1e-16 |f| / h.
template <class F>
std::pair<double, double> one_sided(F&& f, double j, double h = 1e-6) {
  return {(3 * f(j) - 4 * f(j - h) + f(j - 2 * h)) / (2 * h), (-3 * f(j) + 4 * f(j + h) - f(j + 2 * h)) / (2 * h)};
}

class ProfileTest : public ::testing::TestWithParam<double> {};

TEST_P(ProfileTest, PhiIsExactOutsideTheBlend) {
  const double l = GetParam();
  const BumpProfile p = make_profile(l, l / 8);
  for (int i = 0; i < 20; ++i) {
    const double t = l * i / 19.0;
    EXPECT_EQ(phi(p, t), t * t);
    const double u = 3 * l + l * i / 7.0;
    EXPECT_EQ(phi(p, u), -u * u);
  }
}

TEST_P(ProfileTest, PhiMatchesBlendOracle) {
  const double l = GetParam();
  const BumpProfile p = make_profile(l, l / 8);
  for (int i = 0; i <= 100; ++i) {
    const double t = 4 * l * i / 100.0;
    EXPECT_NEAR(phi(p, t), phi_oracle(l, t), 1e-13 * (1 + t * t));
  }
}

TEST_P(ProfileTest, ExactlyTwoCriticalPoints) {
  const double l = GetParam();
  const BumpProfile p = make_profile(l, l / 8);
  EXPECT_GT(p.t0, l);
  EXPECT_LT(p.t0, 2 * l);
  EXPECT_NEAR(p.t0, t0_oracle(l), 1e-9 * l);
  EXPECT_LT(phi_jet(p, p.t0).d2, 0.0);
  EXPECT_EQ(phi_prime(p, 0.0), 0.0);
  // Sign changes of phi' on a 10^4-point grid over (0, 4 lambda]: one at t0;
  // the critical point at 0 is the left end.
  int changes = 0;
  double prev = phi_prime(p, 4 * l / 1e4);
  for (int i = 2; i <= 10000; ++i) {
    const double v = phi_prime(p, 4 * l * i / 1e4);
    if ((prev > 0) != (v > 0)) ++changes;
    prev = v;
  }
  EXPECT_EQ(changes + 1, 2);
}

TEST_P(ProfileTest, PsiPlateaus) {
  const double l = GetParam(), d = l / 8;
  const BumpProfile p = make_profile(l, d);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(psi(p, p.t0 - d + 2 * d * i / 19.0), 1.0);
    EXPECT_EQ(psi(p, (l - d) * i / 19.0), 0.0);
    EXPECT_EQ(psi(p, 3 * l + d + l * i / 19.0), 0.0);
  }
  EXPECT_EQ(psi(p, p.t0), 1.0);
  EXPECT_EQ(psi(p, 0.0), 0.0);
  const double mid = 0.5 * ((l - d) + (p.t0 - d));
  EXPECT_GT(psi(p, mid), 0.0);
  EXPECT_LT(psi(p, mid), 1.0);
  EXPECT_NEAR(psi(p, mid), smoothstep(0.5 * (p.t0 - l) / (p.t0 - l)), 1e-14);
  double prev = -1;
  for (int i = 0; i <= 200; ++i) {
    const double v = psi(p, (l - d) + (p.t0 - l) * i / 200.0);
    if (i > 0 && i < 200) { EXPECT_GT(v, prev); }
    prev = v;
  }
}

TEST_P(ProfileTest, C1AtJunctions) {
  const double l = GetParam(), d = l / 8;
  const BumpProfile p = make_profile(l, d);
  auto ph = [&](double t) { return phi(p, t); };
  auto ps = [&](double t) { return psi(p, t); };
  auto dph = [&](double t) { return phi_prime(p, t); };
  auto dps = [&](double t) { return psi_prime(p, t); };
  for (double j : {l, 3 * l}) {
    EXPECT_LE(limit_mismatch(dph, j), 1e-9);
    const auto [left, right] = one_sided(ph, j);
    EXPECT_NEAR(left, dph(j), 1e-6);
    EXPECT_NEAR(right, dph(j), 1e-6);
  }
  for (double j : {l - d, p.t0 - d, p.t0 + d, 3 * l + d}) {
    EXPECT_LE(limit_mismatch(dps, j), 1e-9);
    const auto [left, right] = one_sided(ps, j);
    EXPECT_NEAR(left, dps(j), 1e-6);
    EXPECT_NEAR(right, dps(j), 1e-6);
  }
}

INSTANTIATE_TEST_SUITE_P(Lambdas, ProfileTest, ::testing::Values(1.0, 0.1));

TEST(Profile, Examples) {
  const BumpProfile p = make_profile(1.0, 0.125);
  EXPECT_EQ(phi(p, 0.5), 0.25);
  EXPECT_EQ(phi(p, 3.5), -12.25);
  EXPECT_NEAR(phi(p, 1.5), (1 - 2 * smoothstep(0.25)) * 2.25, 1e-15);
  const BumpProfile q = make_profile(0.1, 0.0125);
  EXPECT_NEAR(q.t0, 0.1 * p.t0, 1e-12);
  EXPECT_THROW(phi(p, -0.1), DomainError);
  EXPECT_THROW(make_profile(1.0, 0.3), ConfigurationError);
  EXPECT_THROW(make_profile(0.0, 0.1), ConfigurationError);
  EXPECT_EQ(blend(0).v, 0.0);
  EXPECT_EQ(blend(1).v, 1.0);
  EXPECT_EQ(blend(0).d1, 0.0);
  EXPECT_EQ(blend(1).d1, 0.0);
}

TEST(LocalFunction, Examples) {
  const StabilizationRecipe r = make_recipe("X", 0.1, 0.0125, 0.0025, SphereFunction{SphereFunction::Kind::constant, 1.5, 0});
  const LocalModel m{2, 0, 1};
  Vec x(3);
  x << 0, 0, 0.07;
  const LocalValue at_axis = stabilized_local_function(r, m, x);
  EXPECT_EQ(at_axis.value, 0.07 * 0.07);

  const double t0 = r.profile.t0;
  x << t0 * std::cos(0.3), t0 * std::sin(0.3), 0.05;
  const LocalValue ring = stabilized_local_function(r, m, x);
  EXPECT_NEAR(ring.value, 0.05 * 0.05 + phi_oracle(0.1, t0) + 0.0025 * 1.5, 1e-15);
  const Vec u = x.head(2) / t0;
  EXPECT_NEAR(ring.gradient.head(2).dot(u), 0.0, 1e-12);

  StabilizationRecipe flat = r;
  flat.epsilon = 0.0;
  Vec y(3), z(3);
  y << 0.15, 0.0, 0.02;
  z << 0.15 * std::cos(1.1), 0.15 * std::sin(1.1), 0.02;
  EXPECT_NEAR(stabilized_local_function(flat, m, y).value, stabilized_local_function(flat, m, z).value, 1e-15);

  Vec far(3);
  far << 1.0, 0, 0;
  EXPECT_THROW(stabilized_local_function(r, m, far), DomainError);
}

TEST(LocalFunction, GradientMatchesFiniteDifferences) {
  const StabilizationRecipe r = make_recipe("X", 0.1, 0.0125, 0.0025, SphereFunction{SphereFunction::Kind::linear, 1.0, 0});
  const LocalModel m{2, 1, 1};
  for (double t : {0.004, 0.009, 0.05, 0.1, 0.13, 0.2, 0.28, 0.33}) {
    for (double a : {0.2, 1.9, 4.0}) {
      Vec x(4);
      x << t * std::cos(a), t * std::sin(a), 0.03, -0.02;
      const Vec fd = fd_gradient([&](const Vec& y) { return stabilized_local_function(r, m, y).value; }, x, 1e-7);
      EXPECT_LE((fd - stabilized_local_function(r, m, x).gradient).norm(), 1e-6) << t << " " << a;
    }
  }
}

TEST(ApplyStabilization, SphereNorthPoleBecomesMinimumAndCircle) {
  const Scenario& s = scenario("sphere_height");
  const CriticalAnalysis& a = analysis("sphere_height");
  const Scenario t = apply_stabilization(s, a, make_recipe("S_N", 0.1));
  const CriticalAnalysis b = analyze_scenario(t);
  ASSERT_EQ(b.orbits.size(), 3u);
  EXPECT_EQ(b.by_label("S_N").index, 0);
  EXPECT_EQ(b.by_label("S_N").orbit_dim, 0);
  EXPECT_EQ(b.by_label("S_N'").index, 1);
  EXPECT_EQ(b.by_label("S_N'").orbit_dim, 1);
  EXPECT_EQ(b.by_label("S_S").index, 0);
  EXPECT_TRUE(b.all_stable());
  EXPECT_TRUE(verify_index_shift(s, a, t, b, make_recipe("S_N", 0.1)).ok);
  // Refused on a stable orbit.
  EXPECT_THROW(apply_stabilization(s, a, make_recipe("S_S", 0.1)), PreconditionError);
}

TEST(ApplyStabilization, MappingTorusSixCircles) {
  const CriticalAnalysis& a = analysis("mapping_torus_stabilized");
  const std::vector<std::pair<std::string, int>> expected = {{"S0", 0}, {"Rbar0", 0}, {"R1'", 1},
                                                             {"Q1", 1}, {"Pbar1", 1}, {"P2'", 2}};
  ASSERT_EQ(a.orbits.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(a.orbits[i].label, expected[i].first);
    EXPECT_EQ(a.orbits[i].index, expected[i].second);
    EXPECT_EQ(a.orbits[i].orbit_dim, 1);
    EXPECT_TRUE(a.orbits[i].stable);
  }
  // New circles meet each tau fiber in two points: the circle has period 2
  // through points off the fixed locus.
  EXPECT_EQ(a.by_label("R1'").isotropy.kind, IsotropyKind::trivial);
  EXPECT_EQ(a.by_label("P2'").isotropy.kind, IsotropyKind::trivial);
}

TEST(ApplyStabilization, IndexShiftAtBothSites) {
  const Scenario& base = scenario("mapping_torus");
  const CriticalAnalysis& a = analysis("mapping_torus");
  const std::vector<StabilizationRecipe> recipes = {make_recipe("P2", 0.05), make_recipe("R1", 0.05)};
  const Scenario s = stabilize_at(base, recipes);
  const CriticalAnalysis b = analyze_scenario(s);
  for (const auto& r : recipes) {
    const IndexShiftReport rep = verify_index_shift(base, a, s, b, r);
    EXPECT_TRUE(rep.ok) << r.target;
    int spheres = 0;
    for (const auto& e : rep.entries)
      if (!e.origin) {
        ++spheres;
        EXPECT_EQ(e.index, e.expected);
      }
    EXPECT_EQ(spheres, 1) << r.target;
  }
}

TEST(ApplyStabilization, FunctionUnchangedOutsideSupport) {
  const Scenario& base = scenario("mapping_torus");
  const Scenario& s = scenario("mapping_torus_stabilized");
  const auto& field = dynamic_cast<const StabilizedField&>(*s.function);
  int outside = 0;
  for (const Vec& x : sample_points(s, 24)) {
    bool in_support = false;
    for (const auto& p : field.patches()) {
      double r2 = 0;
      for (const auto& f : p.chart.rest) r2 += std::pow(f(x).value, 2);
      if (r2 >= p.chart.rest_outer * p.chart.rest_outer) continue;
      double t2 = 0;
      for (const auto& f : p.chart.stabilized) t2 += std::pow(f(x).value, 2);
      if (std::sqrt(t2) < support_radius(p.recipe.profile)) in_support = true;
    }
    if (in_support) continue;
    ++outside;
    EXPECT_EQ(s.value(x), base.value(x)) << x.transpose();
  }
  EXPECT_GT(outside, 1000);
}

TEST(ApplyStabilization, C1DistanceDecreasesWithLambda) {
  const Scenario& base = scenario("mapping_torus");
  double prev = 1e300;
  for (double l : {0.2, 0.1, 0.05}) {
    const Scenario s = build_scenario("mapping_torus_stabilized", {{"lambda", l}, {"delta", l / 8}, {"epsilon", l * l / 4}});
    // Independent sampled sup of |F - f| + |grad F - grad f| on the product metric.
    double sup = 0;
    for (const Vec& x : sample_points(base, 20)) {
      const Jet a = s.jet(x), b = base.jet(x);
      sup = std::max(sup, std::abs(a.value - b.value) + (a.gradient - b.gradient).norm());
    }
    EXPECT_NEAR(sup, c1_distance(s, base, 20), 1e-12);
    EXPECT_LT(sup, prev) << l;
    prev = sup;
  }
}

TEST(ApplyStabilization, RejectsBadRecipes) {
  const Scenario& base = scenario("mapping_torus");
  EXPECT_THROW(stabilize_at(base, {make_recipe("Q1", 0.05)}), ConfigurationError);
  EXPECT_THROW(stabilize_at(base, {make_recipe("P2", 0.5)}), ConfigurationError);
  StabilizationRecipe big_eps = make_recipe("P2", 0.05);
  big_eps.epsilon = 0.5;
  EXPECT_THROW(stabilize_at(base, {big_eps}), ConfigurationError);
}

}  // namespace
