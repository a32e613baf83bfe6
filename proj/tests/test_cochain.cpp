#include <gtest/gtest.h>

#include "support.hpp"

using namespace eqtest;

namespace {

const RunReport& torus() { return pipeline("mapping_torus_stabilized"); }
const RunReport& sphere() { return pipeline("sphere_stabilized"); }

std::vector<int> head(const std::vector<int>& v, std::size_t n) {
  return {v.begin(), v.begin() + static_cast<long>(std::min(n, v.size()))};
}

// Multiplication by theta built from generator names alone.
RationalMatrix name_shift(const CochainComplex& c, int p) {
  const auto src = c.in_degree(p), tgt = c.in_degree(p + 2);
  RationalMatrix m(tgt.size(), src.size());
  for (std::size_t j = 0; j < src.size(); ++j) {
    const auto& g = c.generators[src[j]];
    const std::string base = g.name.substr(0, g.name.find("*t^"));
    for (std::size_t i = 0; i < tgt.size(); ++i)
      if (c.generators[tgt[i]].name == with_theta(base, g.theta_power + 1)) m(i, j) = 1;
  }
  return m;
}

TEST(Ordinary, MappingTorusTableMatchesReference) {
  ASSERT_TRUE(torus().ordinary.has_value());
  EXPECT_EQ(table_of(*torus().ordinary), mapping_torus_ordinary_table());
  EXPECT_EQ(torus().ordinary->generators.size(), 12u);
}

TEST(Cartan, MappingTorusTableMatchesReference) {
  ASSERT_TRUE(torus().cartan.has_value());
  const int K = torus().cartan->truncation;
  EXPECT_EQ(K, 6);
  EXPECT_EQ(table_of(*torus().cartan), mapping_torus_cartan_table(K));
  EXPECT_EQ(up_to_theta(table_of(*torus().cartan), 4), up_to_theta(mapping_torus_cartan_table(K), 4));
}

TEST(Cartan, SphereTableMatchesReference) {
  ASSERT_TRUE(sphere().cartan.has_value());
  EXPECT_EQ(table_of(*sphere().cartan), sphere_cartan_table(sphere().cartan->truncation));
}

TEST(Cohomology, MappingTorusRanks) {
  const auto& ord = torus().ordinary_cohomology->ranks;
  EXPECT_EQ(ord, (std::vector<int>{1, 2, 1, 0}));
  const auto& eq = torus().cartan_cohomology->ranks;
  ASSERT_GE(eq.size(), 11u);
  std::vector<int> expect(11, 0);
  expect[0] = expect[1] = 1;
  EXPECT_EQ(head(eq, 11), expect);
}

TEST(Cohomology, EulerCharacteristicMatchesChainGroups) {
  for (const RunReport* r : {&torus(), &sphere()}) {
    const CochainComplex& c = *r->ordinary;
    int chi_chain = 0, chi_h = 0;
    for (int p = 0; p <= c.max_degree(); ++p) chi_chain += (p % 2 ? -1 : 1) * static_cast<int>(c.in_degree(p).size());
    const auto& ranks = r->ordinary_cohomology->ranks;
    for (std::size_t p = 0; p < ranks.size(); ++p) chi_h += (p % 2 ? -1 : 1) * ranks[p];
    EXPECT_EQ(chi_h, chi_chain);
  }
  EXPECT_EQ(torus().ordinary_cohomology->ranks[0] - torus().ordinary_cohomology->ranks[1] +
                torus().ordinary_cohomology->ranks[2],
            0);
}

TEST(Cohomology, SphereRanks) {
  std::vector<int> expect(11, 0);
  for (int p = 2; p <= 10; p += 2) expect[static_cast<std::size_t>(p)] = 2;
  expect[0] = 1;
  EXPECT_EQ(head(sphere().cartan_cohomology->ranks, 11), expect);
  EXPECT_EQ(sphere().ordinary_cohomology->ranks, (std::vector<int>{1, 0, 1}));

  const RunReport& unstable = pipeline("sphere_height_unstable");
  ASSERT_TRUE(unstable.cartan.has_value());
  for (const auto& [p, m] : unstable.cartan->differential) EXPECT_TRUE(m.is_zero()) << p;
  EXPECT_EQ(head(unstable.cartan_cohomology->ranks, 11), expect);
}

class ComplexProperties : public ::testing::TestWithParam<std::string> {};

const CochainComplex& complex_named(const std::string& key) {
  const RunReport& r = key.starts_with("torus") ? torus() : sphere();
  return key.ends_with("cartan") ? *r.cartan : *r.ordinary;
}

TEST_P(ComplexProperties, DifferentialSquaresToZero) {
  const CochainComplex& c = complex_named(GetParam());
  EXPECT_TRUE(squares_to_zero(c));
  for (int p = 0; p + 1 <= c.max_degree(); ++p) EXPECT_TRUE((c.d(p + 1) * c.d(p)).is_zero()) << p;
}

TEST_P(ComplexProperties, RespectsGrading) {
  const CochainComplex& c = complex_named(GetParam());
  for (const auto& [p, m] : c.differential) {
    const auto src = c.in_degree(p), tgt = c.in_degree(p + 1);
    ASSERT_EQ(m.cols(), src.size());
    ASSERT_EQ(m.rows(), tgt.size());
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m(i, j) == 0) continue;
        const auto& a = c.generators[src[j]];
        const auto& b = c.generators[tgt[i]];
        EXPECT_EQ(b.total_degree, a.total_degree + 1);
        EXPECT_GE(b.theta_power, a.theta_power);
      }
  }
}

TEST_P(ComplexProperties, RepresentativesAreIndependentCocycles) {
  const CochainComplex& c = complex_named(GetParam());
  const RunReport& r = GetParam().starts_with("torus") ? torus() : sphere();
  const CohomologyReport& h = GetParam().ends_with("cartan") ? *r.cartan_cohomology : *r.ordinary_cohomology;
  for (const auto& [p, reps] : h.representatives) {
    ASSERT_EQ(static_cast<int>(reps.size()), h.ranks[static_cast<std::size_t>(p)]) << p;
    if (reps.empty()) continue;
    const std::size_t n = c.in_degree(p).size();
    const RationalMatrix v = from_columns(reps, n);
    EXPECT_TRUE((c.d(p) * v).is_zero()) << p;
    // Independent modulo the image of the previous differential.
    std::vector<std::vector<Rational>> cols = reps;
    if (p > 0) {
      const RationalMatrix im = c.d(p - 1);
      for (std::size_t j = 0; j < im.cols(); ++j) {
        std::vector<Rational> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = im(i, j);
        cols.push_back(col);
      }
      EXPECT_EQ(rank(from_columns(cols, n)), rank(im) + reps.size()) << p;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(All, ComplexProperties,
                         ::testing::Values("torus_ordinary", "torus_cartan", "sphere_ordinary", "sphere_cartan"));

TEST(Cartan, ThetaShiftCommutesWithDifferential) {
  for (const RunReport* r : {&torus(), &sphere()}) {
    const CochainComplex& c = *r->cartan;
    EXPECT_NO_THROW(theta_module_action(c));
    for (int p = 0; p + 3 <= c.safe_max_degree; ++p)
      EXPECT_EQ(c.d(p + 2) * name_shift(c, p), name_shift(c, p + 1) * c.d(p)) << p;
  }
}

TEST(Cartan, RanksStableInTruncation) {
  const RunReport& r = torus();
  for (int K = 2; K <= 6; ++K) {
    const CochainComplex a = assemble_cartan(r.scenario, r.analysis, r.covers, K);
    const CochainComplex b = assemble_cartan(r.scenario, r.analysis, r.covers, K + 1);
    EXPECT_EQ(a.safe_max_degree, 2 * K - 2 + 1);
    const auto ha = cohomology(a).ranks, hb = cohomology(b).ranks;
    const std::size_t n = static_cast<std::size_t>(2 * K - 2 + 1);
    EXPECT_EQ(head(ha, n), head(hb, n)) << K;
  }
}

TEST(Cartan, SmallTruncations) {
  const RunReport& r = torus();
  const CochainComplex one = assemble_cartan(r.scenario, r.analysis, r.covers, 1);
  EXPECT_TRUE(squares_to_zero(one));
  const auto h = cohomology(one);
  EXPECT_EQ(head(h.ranks, 2), (std::vector<int>{1, 1}));
  EXPECT_THROW(assemble_cartan(r.scenario, r.analysis, r.covers, 0), AssemblyError);
}

TEST(Cartan, TruncationWindowIsEnforced) {
  const CochainComplex& c = *torus().cartan;
  CohomologyOptions opts;
  opts.max_degree = c.safe_max_degree + 1;
  EXPECT_THROW(cohomology(c, opts), TruncationError);
  opts.acknowledge_truncation = true;
  EXPECT_NO_THROW(cohomology(c, opts));
  opts = {};
  opts.max_degree = c.safe_max_degree;
  EXPECT_NO_THROW(cohomology(c, opts));
}

TEST(Ordinary, GlobalSignFlipKeepsRanks) {
  const RunReport& r = torus();
  std::vector<ModuliCover> flipped = r.covers;
  for (auto& cov : flipped) {
    for (auto& sh : cov.sheets) sh.sign = -sh.sign;
    cov.fiber_num = -cov.fiber_num;
    cov.fiber_integral = -cov.fiber_integral;
  }
  const CochainComplex o = assemble_ordinary(r.scenario, r.analysis, flipped);
  EXPECT_EQ(cohomology(o).ranks, r.ordinary_cohomology->ranks);
  for (const auto& [key, v] : table_of(*r.ordinary)) EXPECT_EQ(table_of(o).at(key), -v);
  const CochainComplex e = assemble_cartan(r.scenario, r.analysis, flipped, 6);
  EXPECT_EQ(cohomology(e).ranks, r.cartan_cohomology->ranks);
}

TEST(Ordinary, MissingCoverIsAnError) {
  const RunReport& r = torus();
  ASSERT_FALSE(r.covers.empty());
  for (std::size_t drop = 0; drop < r.covers.size(); ++drop) {
    std::vector<ModuliCover> partial = r.covers;
    partial.erase(partial.begin() + static_cast<long>(drop));
    EXPECT_THROW(assemble_cartan(r.scenario, r.analysis, partial, 6), AssemblyError) << drop;
  }
}

TEST(Ordinary, FormatCombination) {
  const CochainComplex& c = *torus().ordinary;
  std::vector<Rational> v(c.in_degree(0).size());
  v[0] = 1;
  v[1] = -2;
  const std::string text = format_combination(c, 0, v);
  EXPECT_NE(text.find(c.generators[c.in_degree(0)[0]].name), std::string::npos);
  EXPECT_NE(text.find(" - 2/1 "), std::string::npos) << text;
}

}  // namespace
