#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "eqmorse/types.hpp"

namespace eqmorse {

struct StepperOptions {
  double abs_tolerance = 1e-10;
  double rel_tolerance = 1e-10;
  double initial_step = 1e-3;
  double max_step = 1.0;
  double min_step = 1e-14;
};

// Adaptive Dormand-Prince 5(4) stepping on an autonomous system. The caller
// may modify the state between steps (chart reduction, re-orthonormalization);
// the derivative is recomputed before every attempt.
class AdaptiveStepper {
 public:
  using Rhs = std::function<void(const Vec& y, Vec& dydt)>;

  AdaptiveStepper(Rhs rhs, StepperOptions opts = {});
  ~AdaptiveStepper();
  AdaptiveStepper(AdaptiveStepper&&) noexcept;
  AdaptiveStepper& operator=(AdaptiveStepper&&) noexcept;

  // One accepted step, never beyond t_limit. Throws NumericalError when the
  // step size underflows.
  void step(Vec& y, double& t, double t_limit);
  double step_size() const { return dt_; }
  long evaluations() const { return evaluations_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Rhs rhs_;
  StepperOptions opts_;
  double dt_;
  long evaluations_ = 0;
};

}  // namespace eqmorse
