#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "eqmorse/critstruct.hpp"
#include "eqmorse/geometry.hpp"

namespace eqmorse {

enum class FlowDirection { down, up };

struct FlowSettings {
  double capture_radius = 1e-3;
  // Distance from the source at which lines are seeded. Kept below 1e-4 so
  // the first sample of every line is close to its source orbit.
  double seed_radius = 1e-5;
  double tolerance = 1e-10;
  double t_max = 500.0;
  double max_step = 1.0;
  // Directions on a descending circle (index 2 sources).
  int directions = 16;
  // Points along a source orbit or component.
  int samples = 16;
  // Directions used for fiber integrals.
  int fiber_samples = 64;
};

enum class FlowStatus {
  converged,   // limit orbit resolved
  near_miss,   // truncated at the closest approach to end_orbit
  constant,    // started on a critical orbit
  unresolved,  // t_max reached without capture
};

std::string to_string(FlowStatus s);

struct NearMiss {
  std::string orbit;
  double distance = 0.0;
  std::size_t sample = 0;
};

struct FlowLine {
  int id = 0;
  std::string start_orbit;
  std::string end_orbit;
  FlowStatus status = FlowStatus::unresolved;
  std::vector<double> times;
  std::vector<Vec> points;
  // Source point on the start orbit and unit start direction in its
  // descending space (up lines: ascending space of the target).
  Vec start_point;
  Vec start_direction;
  double source_parameter = 0.0;
  double direction_angle = 0.0;
  // First sample inside the capture ball of end_orbit.
  std::size_t capture_sample = 0;
  double end_distance = 0.0;
  // Nearest point of end_orbit and its orbit parameter.
  Vec end_point;
  double end_parameter = 0.0;
  std::vector<NearMiss> near_misses;
  int sign = 0;
  // Largest increase of f between accepted steps (down lines).
  double max_value_increase = 0.0;
  // Reversed ascending line; orientation is then transported backwards.
  bool from_ascent = false;
};

// Integrates -grad f (down) or grad f (up) from x0 until capture by a
// critical orbit of `a`, refining the limit to 1e-3 of the capture radius.
FlowLine integrate_flow(const Scenario& s, const CriticalAnalysis& a, const Vec& x0,
                        FlowDirection dir, const FlowSettings& fs);

// Point reached by the flow after time t exactly (no capture logic).
Vec flow_map(const Scenario& s, const Vec& x0, double t, FlowDirection dir,
             const FlowSettings& fs = {});

// Point of the orbit at a parameter: group element for orbits, polyline
// parameter for Morse-Bott components. Parameters range over [0, orbit_period).
Vec orbit_point(const Scenario& s, const CriticalOrbit& o, double parameter);
double orbit_period(const Scenario& s, const CriticalOrbit& o);

// Seeds rays on the descending sphere at `samples` points of the orbit;
// sorted by (source parameter, direction angle).
std::vector<FlowLine> shoot_descending_sphere(const Scenario& s, const CriticalAnalysis& a,
                                              const CriticalOrbit& o, const FlowSettings& fs);

// Down line from the orbit point at `parameter` in direction angle `angle`
// of the descending frame.
FlowLine shoot_ray(const Scenario& s, const CriticalAnalysis& a, const CriticalOrbit& o,
                   double parameter, double angle, const FlowSettings& fs);

// +1/-1 from the transported descending frame of the source against
// (flow direction, target frame). Needs index gap 1 and stable endpoints.
// `start_sample` restarts the transport from a later sample of the line.
// Lines reconstructed from an ascent carry (flow direction, target frame)
// backwards to the source instead; the change of basis has the same sign.
int orientation_sign(const Scenario& s, const CriticalAnalysis& a, const FlowLine& fl,
                     const FlowSettings& fs, std::size_t start_sample = 0,
                     double* determinant = nullptr);

struct CoverSheet {
  int sign = 0;
  // Degree of the endpoint map from the source orbit onto the target orbit.
  int target_winding = 0;
  double direction_angle = 0.0;
};

struct FiberArc {
  double angle_begin = 0.0;
  double angle_end = 0.0;
  // Change of the target orbit parameter along the arc.
  double delta = 0.0;
};

struct ModuliCover {
  std::string source_orbit;
  std::string target_orbit;
  int index_gap = 0;
  int fiber_dim = 0;
  int dim = 0;
  std::string method;
  std::vector<CoverSheet> sheets;
  // fiber_dim = 1: arcs of the fiber over the representative and the snapped
  // integral of the target's invariant 1-form over the fiber.
  std::vector<FiberArc> arcs;
  double fiber_integral = 0.0;
  long fiber_num = 0;
  long fiber_den = 1;
  // Sheet count at every sampled source point.
  std::vector<int> sheet_counts;
  // Lines from the representative.
  std::vector<FlowLine> lines;
  bool negative_virtual_dimension = false;

  bool empty() const { return sheets.empty() && arcs.empty(); }
  // Signed sheet count; fiber integral for fiber_dim = 1.
  long signed_count() const;
};

int moduli_dimension(const CriticalOrbit& source, const CriticalOrbit& target);

// `shots` are lines from shoot_descending_sphere of the source; gap-1 covers
// of index >= 2 sources are found by ascending shooting from the target.
ModuliCover extract_moduli_cover(const Scenario& s, const CriticalAnalysis& a,
                                 const CriticalOrbit& source, const CriticalOrbit& target,
                                 const std::vector<FlowLine>& shots, const FlowSettings& fs);
ModuliCover extract_moduli_cover(const Scenario& s, const CriticalAnalysis& a,
                                 const CriticalOrbit& source, const CriticalOrbit& target,
                                 const FlowSettings& fs);

enum class Verdict { transverse, failure_detected, inconclusive };
std::string to_string(Verdict v);

struct TransversalityReport {
  std::string source;
  std::string target;
  Verdict verdict = Verdict::inconclusive;
  std::optional<FlowLine> witness;
  int expected_dim = 0;
  int observed_family_dim = 0;
  bool weak_self_indexing_violated = false;
  std::string note;
};

// All pairs joined by a discovered line, plus separatrix searches between
// basins; `pairs` (source, target ids) adds entries reported as inconclusive
// when nothing is found.
std::vector<TransversalityReport> diagnose_transversality(
    const Scenario& s, const CriticalAnalysis& a, const FlowSettings& fs,
    const std::vector<std::pair<std::string, std::string>>& pairs = {});

// Rows "line_id,t,chart,c1,c2,c3" at 9 significant digits, sorted by (line_id, t).
void write_flow_csv(std::ostream& out, const Scenario& s, const std::vector<FlowLine>& lines);

}  // namespace eqmorse
