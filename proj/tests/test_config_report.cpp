#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"

using namespace eqtest;

namespace {

const char* kFull = R"([scenario]
name = mapping_torus
[stabilize:P2]
lambda = 0.05
delta = 0.004
h = linear
h_value = 2
h_axis = 1
[flow]
capture_radius = 0.0005
samples = 24
directions = 8
[cochain]
truncation = 5
table_theta_max = 3
allow_unstable = true
[output]
directory = /tmp/x
emit_flows = yes
)";

TEST(Config, ParsesEverySection) {
  const RunConfig c = parse_config(kFull);
  EXPECT_EQ(c.scenario, "mapping_torus");
  ASSERT_EQ(c.recipes.size(), 1u);
  EXPECT_EQ(c.recipes[0].target, "P2");
  EXPECT_EQ(c.recipes[0].lambda, 0.05);
  EXPECT_EQ(c.recipes[0].delta, 0.004);
  EXPECT_EQ(c.recipes[0].h, "linear");
  EXPECT_EQ(c.recipes[0].h_axis, 1);
  EXPECT_EQ(c.flow.capture_radius, 0.0005);
  EXPECT_EQ(c.flow.samples, 24);
  EXPECT_EQ(c.flow.directions, 8);
  EXPECT_EQ(c.truncation, 5);
  EXPECT_EQ(c.table_theta_max, 3);
  EXPECT_TRUE(c.allow_unstable);
  EXPECT_EQ(c.output_directory, "/tmp/x");
  EXPECT_TRUE(c.emit_flows);
}

TEST(Config, Defaults) {
  const RunConfig c = parse_config("[scenario]\nname = sphere_height\n");
  EXPECT_EQ(c.truncation, 6);
  EXPECT_EQ(c.table_theta_max, 4);
  EXPECT_FALSE(c.allow_unstable);
  EXPECT_EQ(c.flow.capture_radius, 1e-3);
  EXPECT_TRUE(c.recipes.empty());
}

TEST(Config, SerializeRoundTrip) {
  for (const std::string& text :
       {std::string(kFull), read_file(data_path("configs/mapping_torus_recipes.ini")),
        read_file(data_path("configs/torus_with_legs.ini")), read_file(data_path("configs/sphere_height_unstable.ini"))}) {
    const RunConfig c = parse_config(text);
    const std::string once = serialize_config(c);
    const RunConfig back = parse_config(once);
    EXPECT_EQ(serialize_config(back), once);
    EXPECT_EQ(back.scenario, c.scenario);
    EXPECT_EQ(back.params, c.params);
    EXPECT_EQ(back.recipes.size(), c.recipes.size());
    EXPECT_EQ(back.truncation, c.truncation);
    EXPECT_EQ(back.flow.capture_radius, c.flow.capture_radius);
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[bogus]\nx = 1\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[flow]\nspeed = 1\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[flow]\ncapture_radius = -1\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[flow]\nsamples = many\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[cochain]\ntruncation = 0\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[scenario]\nname = sphere_height\n[cochain]\nallow_unstable = maybe\n"), ConfigurationError);
  EXPECT_THROW(parse_config("[flow]\nsamples = 8\n"), ConfigurationError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigurationError);
}

TEST(Report, FormatParsesBack) {
  const RunReport& r = pipeline("mapping_torus_stabilized");
  const std::string text = format_report(r);
  const ReportSections s = parse_report(text);
  for (const char* name : {"scenario", "orbits", "ordinary", "cartan", "cohomology"}) EXPECT_TRUE(s.count(name)) << name;
  bool found = false;
  for (const auto& [k, v] : s.at("cohomology"))
    if (k == "ordinary.ranks") {
      EXPECT_EQ(v, "1 2 1 0");
      found = true;
    }
  EXPECT_TRUE(found);
  EXPECT_EQ(text.find("time"), std::string::npos);
  EXPECT_EQ(format_report(r), text);
}

class Goldens : public ::testing::TestWithParam<std::string> {};

TEST_P(Goldens, ShippedGoldenMatches) {
  const std::string report = format_report(pipeline(GetParam()));
  const GoldenDiff d = compare_against_golden_file(report, data_path("golden/" + GetParam() + ".golden"));
  std::string all;
  for (const auto& l : d.lines) all += l + "\n";
  EXPECT_TRUE(d.empty()) << all;
}

INSTANTIATE_TEST_SUITE_P(All, Goldens,
                         ::testing::Values("mapping_torus_stabilized", "sphere_stabilized", "torus_with_legs"));

TEST(Golden, FlippedSignGivesOneLine) {
  const std::string report = format_report(pipeline("sphere_stabilized"));
  std::string golden = read_file(data_path("golden/sphere_stabilized.golden"));
  const std::string entry = "d0 n -> n0' = 1/1";
  const auto pos = golden.find(entry);
  ASSERT_NE(pos, std::string::npos);
  golden.replace(pos, entry.size(), "d0 n -> n0' = -1/1");
  const GoldenDiff d = compare_against_golden(report, golden);
  ASSERT_EQ(d.lines.size(), 1u);
  EXPECT_NE(d.lines[0].find("d0 n -> n0'"), std::string::npos) << d.lines[0];
}

TEST(Golden, SubsetTokensAndStrictSections) {
  const std::string report = format_report(pipeline("torus_with_legs"));
  // Token subsets pass.
  EXPECT_TRUE(compare_against_golden(report, "[orbits]\norbit.Q = index=0\norbit.P = index=1\norbit.S = index=1\n").empty());
  // A missing key in a strict section is reported.
  EXPECT_FALSE(compare_against_golden(report, "[orbits]\norbit.Q = index=0\n").empty());
  EXPECT_FALSE(compare_against_golden(report, "[orbits]\norbit.Q = index=1\norbit.P = index=1\norbit.S = index=1\n").empty());
  EXPECT_THROW(compare_against_golden(report, "no sections here\n"), ConfigurationError);
}

TEST(FlowCsv, EmitAndReadBack) {
  const RunReport& r = pipeline("mapping_torus_stabilized");
  const auto path = std::filesystem::temp_directory_path() / "eqmorse_test_flows.csv";
  emit_flow_csv(r, path.string());
  std::istringstream in(read_file(path.string()));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "line_id,t,chart,c1,c2,c3");
  std::size_t rows = 0, expected = 0;
  for (const auto& fl : r.flows) expected += fl.points.size();
  int last_id = -1;
  while (std::getline(in, line)) {
    const int id = std::stoi(line.substr(0, line.find(',')));
    EXPECT_GE(id, last_id);
    last_id = id;
    ++rows;
  }
  EXPECT_EQ(rows, expected);
  std::filesystem::remove(path);
}

}  // namespace
