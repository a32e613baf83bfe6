#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eqmorse/flow.hpp"
#include "eqmorse/types.hpp"

namespace eqmorse {

struct RecipeConfig {
  std::string target;
  double lambda = 0.0;
  // <= 0 selects lambda/8 and lambda^2/4.
  double delta = 0.0;
  double epsilon = 0.0;
  std::string h = "constant";
  double h_value = 1.0;
  int h_axis = 0;
};

struct RunConfig {
  std::string scenario;
  std::map<std::string, double> params;
  std::vector<RecipeConfig> recipes;
  FlowSettings flow;
  int truncation = 6;
  // Highest theta power listed in the Cartan table of the report.
  int table_theta_max = 4;
  bool allow_unstable = false;
  std::string output_directory = ".";
  bool emit_flows = false;
  bool verbose = false;
};

// INI text with sections [scenario], [stabilize:<orbit>], [flow], [cochain]
// and [output]. Unknown sections or keys and out-of-range values raise
// ConfigurationError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical INI form; parse_config(serialize_config(c)) reproduces c.
std::string serialize_config(const RunConfig& c);

// Range checks shared by the parser and command-line overrides.
void validate_config(const RunConfig& c);

}  // namespace eqmorse
