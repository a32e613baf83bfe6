#pragma once

#include <memory>
#include <string>
#include <vector>

#include "eqmorse/critstruct.hpp"
#include "eqmorse/geometry.hpp"
#include "eqmorse/profile.hpp"

namespace eqmorse {

// Function h on the unit sphere of the stabilized block.
struct SphereFunction {
  enum class Kind { constant, linear };
  Kind kind = Kind::constant;
  double c = 1.0;
  int axis = 0;

  double value(const Vec& u) const;
  // Euclidean gradient of the linear extension.
  Vec gradient(int dim) const;
  // Morse-Bott index of h at a critical point u (0 for constant h).
  int index_at(const Vec& u) const;
  std::string describe() const;
};

struct StabilizationRecipe {
  std::string target;
  BumpProfile profile;
  double epsilon = 0.0;
  SphereFunction h;
};

// Defaults delta = lambda/8 and epsilon = lambda^2/4 when passed as <= 0.
StabilizationRecipe make_recipe(const std::string& target, double lambda, double delta = 0.0,
                                double epsilon = 0.0, SphereFunction h = {});

// Block sizes of the local model x = (x_s, x_fn, x_+): the stabilized
// negative block, the remaining negative block and the positive block.
struct LocalModel {
  int stabilized = 1;
  int fixed_negative = 0;
  int positive = 0;
  int dimension() const { return stabilized + fixed_negative + positive; }
};

struct LocalValue {
  double value = 0.0;
  Vec gradient;
};

// -|x_fn|^2 + |x_+|^2 + Phi(|x_s|) + eps Psi(|x_s|) h(x_s/|x_s|).
LocalValue stabilized_local_function(const StabilizationRecipe& r, const LocalModel& m,
                                     const Vec& x);

// f plus, on each patch, chi(|w_rest|) * (|w_s|^2 + Phi(|w_s|) + eps c Psi(|w_s|)).
class StabilizedField : public ScalarField {
 public:
  struct Patch {
    SliceChart chart;
    StabilizationRecipe recipe;
  };

  StabilizedField(std::shared_ptr<const ScalarField> base, std::vector<Patch> patches);
  Jet jet(const Vec& x) const override;
  std::string describe() const override;
  const ScalarField& base() const { return *base_; }
  const std::vector<Patch>& patches() const { return patches_; }
  // Contribution of one patch; zero outside its support.
  Jet patch_jet(std::size_t i, const Vec& x) const;

 private:
  std::shared_ptr<const ScalarField> base_;
  std::vector<Patch> patches_;
};

// Builds the stabilized scenario from slice charts without re-analysing the
// critical set; used by the catalogue.
Scenario stabilize_at(const Scenario& s, const std::vector<StabilizationRecipe>& recipes);

// Checked version: the target must be an unstable orbit of `analysis`.
Scenario apply_stabilization(const Scenario& s, const CriticalAnalysis& analysis,
                             const StabilizationRecipe& r);

struct IndexShiftEntry {
  std::string label;
  double radius = 0.0;
  int index = 0;
  int expected = 0;
  bool origin = false;
  bool ok = false;
};

struct IndexShiftReport {
  std::vector<IndexShiftEntry> entries;
  bool ok = false;
};

IndexShiftReport verify_index_shift(const Scenario& s_old, const CriticalAnalysis& old_analysis,
                                    const Scenario& s_new, const CriticalAnalysis& new_analysis,
                                    const StabilizationRecipe& r);

// Sampled sup of |F - f| + |grad F - grad f|_g over the sample grid.
double c1_distance(const Scenario& a, const Scenario& b, int density);

}  // namespace eqmorse
