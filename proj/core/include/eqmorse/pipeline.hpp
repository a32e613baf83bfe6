#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqmorse/cochain.hpp"
#include "eqmorse/config.hpp"
#include "eqmorse/critstruct.hpp"
#include "eqmorse/flow.hpp"
#include "eqmorse/stabilize.hpp"

namespace eqmorse {

// Failure inside one pipeline stage; what() starts with the stage name.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RecipeOutcome {
  StabilizationRecipe recipe;
  IndexShiftReport index_shift;
};

struct RunReport {
  RunConfig config;
  Scenario scenario;
  CriticalAnalysis analysis;
  std::vector<RecipeOutcome> recipes;
  std::vector<TransversalityReport> transversality;
  std::vector<ModuliCover> covers;
  std::optional<CochainComplex> ordinary;
  std::optional<CochainComplex> cartan;
  std::optional<CohomologyReport> ordinary_cohomology;
  std::optional<CohomologyReport> cartan_cohomology;
  std::vector<std::string> warnings;
  // Witness lines and cover lines, numbered from 1.
  std::vector<FlowLine> flows;
  // Seconds per stage; kept out of the written report.
  std::map<std::string, double> timing;
};

using Logger = std::function<void(const std::string&)>;

// scenario -> critical orbits -> stabilization -> transversality -> covers
// -> complexes -> cohomology. The complex stages are skipped with a warning
// when an orbit is unstable, a critical set is not a single orbit, or a
// transversality failure was detected.
RunReport run(const RunConfig& config, const Logger& log = {});

}  // namespace eqmorse
