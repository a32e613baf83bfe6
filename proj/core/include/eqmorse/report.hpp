#pragma once

#include <map>
#include <string>
#include <vector>

#include "eqmorse/pipeline.hpp"

namespace eqmorse {

// Deterministic text: sections [scenario], [stabilization], [orbits],
// [transversality], [covers], [ordinary], [cartan], [cohomology], [warnings],
// each holding "key = value" lines. Timing is not written.
std::string format_report(const RunReport& r);
void write_report(const RunReport& r, const std::string& path);

// Sections of a report as ordered (key, value) lists.
using ReportSections = std::map<std::string, std::vector<std::pair<std::string, std::string>>>;
ReportSections parse_report(const std::string& text);

struct GoldenDiff {
  std::vector<std::string> lines;
  bool empty() const { return lines.empty(); }
};

// Keyed diff of a report against a golden file. Values made of "k=v" tokens
// compare only the tokens present in the golden; other values compare
// exactly. The orbit, complex and cohomology sections must match key for
// key; in the transversality and covers sections extra keys are allowed.
// Throws ConfigurationError when the golden has no recognizable sections.
GoldenDiff compare_against_golden(const std::string& report_text, const std::string& golden_text);
GoldenDiff compare_against_golden_file(const std::string& report_text, const std::string& golden_path);

// Writes "line_id,t,chart,c1,c2,c3" rows for r.flows.
void emit_flow_csv(const RunReport& r, const std::string& path);

}  // namespace eqmorse
