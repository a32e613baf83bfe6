#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eqmorse/geometry.hpp"

namespace eqmorse {

enum class IsotropyKind { trivial, cyclic, full_circle };

struct IsotropyDescriptor {
  IsotropyKind kind = IsotropyKind::trivial;
  int order = 1;
  std::vector<double> generators;

  std::string describe() const;
  // Group elements used for averaging; quadrature nodes for the full circle.
  std::vector<double> elements(const GroupAction& action, int circle_nodes = 64) const;
};

struct CriticalOrbit {
  std::string id;
  std::string label;
  Vec representative;
  double value = 0.0;
  int orbit_dim = 0;
  // Dimension of the connected critical set; exceeds orbit_dim only for
  // Morse-Bott components that are not single orbits.
  int component_dim = 0;
  bool g_morse_bott = true;
  int index = 0;
  IsotropyDescriptor isotropy;
  bool stable = true;
  // Ambient columns, g-orthonormal, oriented by the scenario references.
  Mat neg_frame;
  int orientation = 1;
  std::vector<std::string> generator_names;
  // Points along the orbit (circle orbits), the orbit members (finite
  // groups) or the traced component.
  std::vector<Vec> samples;
  std::vector<double> sample_parameters;
  std::vector<Mat> sample_frames;
};

struct CriticalAnalysis {
  std::vector<CriticalOrbit> orbits;
  std::vector<std::string> warnings;

  const CriticalOrbit& by_label(const std::string& label) const;
  std::size_t index_of(const std::string& label) const;
  bool all_stable() const;
};

struct CritOptions {
  double gradient_tolerance = 1e-11;
  int max_iterations = 80;
  double cluster_tolerance = 1e-6;
  double degeneracy_tolerance = 1e-7;
  double component_step = 0.02;
};

std::vector<Vec> default_seeds(const Scenario& s, int density = 8);
CriticalAnalysis find_critical_orbits(const Scenario& s, const std::vector<Vec>& seeds,
                                      const CritOptions& opts = {});
CriticalAnalysis analyze_scenario(const Scenario& s, int density = 8);

struct NormalDecomposition {
  Vec point;
  // Ambient columns, g-orthonormal.
  Mat normal_basis;
  Mat trivial_part;
  Mat nontrivial_part;
  // A_p in the normal basis.
  Mat hessian_operator;
  Vec eigenvalues;
  Mat eigenvectors;
  Mat negative;
  Mat positive;
  Mat zero;
  // Averaging projector in the normal basis.
  Mat projector;
  // Restriction of A_p to N'' in an orthonormal basis of N''.
  Mat nontrivial_hessian;
};

NormalDecomposition normal_decomposition(const Scenario& s, const CriticalOrbit& o);
NormalDecomposition normal_decomposition_at(const Scenario& s, const CriticalOrbit& o,
                                            const Vec& point);
bool check_stability(const NormalDecomposition& nd, double tol = 1e-7);

struct MetricVerdict {
  std::string metric;
  bool stable = false;
  bool contained = false;
  double residual = 0.0;
  bool agrees = false;
};

std::vector<MetricVerdict> check_stability_equivalences(
    const Scenario& s, const CriticalOrbit& o,
    const std::vector<std::shared_ptr<const MetricField>>& metrics);

// Oriented frame of N^- at the representative; refuses unstable orbits.
Mat negative_frame(const Scenario& s, const CriticalOrbit& o);
// Frame at another point of the orbit, transported by the group action
// (or by continuity along a Morse-Bott component).
Mat frame_at(const Scenario& s, const CriticalOrbit& o, const Vec& point);
// Orient a frame against the scenario reference directions.
Mat orient_frame(const Scenario& s, Mat frame);

struct OrbitLocation {
  double parameter = 0.0;
  Vec point;
  double distance = 0.0;
};

OrbitLocation locate_on_orbit(const Scenario& s, const CriticalOrbit& o, const Vec& x);
double orbit_distance(const Scenario& s, const CriticalOrbit& o, const Vec& x);

}  // namespace eqmorse
