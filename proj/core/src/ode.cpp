#include "eqmorse/ode.hpp"

#include <algorithm>
#include <boost/numeric/odeint.hpp>

namespace eqmorse {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;
using Dopri = odeint::runge_kutta_dopri5<State>;
using Controlled = odeint::controlled_runge_kutta<Dopri>;

}  // namespace

struct AdaptiveStepper::Impl {
  Controlled controlled;
  State y;
  State dydt;
};

AdaptiveStepper::AdaptiveStepper(Rhs rhs, StepperOptions opts)
    : rhs_(std::move(rhs)), opts_(opts), dt_(opts.initial_step) {
  impl_ = std::make_unique<Impl>(Impl{
      Controlled(odeint::default_error_checker<double, odeint::range_algebra,
                                               odeint::default_operations>(
                     opts_.abs_tolerance, opts_.rel_tolerance, 1.0, 1.0),
                 odeint::default_step_adjuster<double, double>(opts_.max_step)),
      {},
      {}});
}

AdaptiveStepper::~AdaptiveStepper() = default;
AdaptiveStepper::AdaptiveStepper(AdaptiveStepper&&) noexcept = default;
AdaptiveStepper& AdaptiveStepper::operator=(AdaptiveStepper&&) noexcept = default;

void AdaptiveStepper::step(Vec& y, double& t, double t_limit) {
  const std::size_t n = static_cast<std::size_t>(y.size());
  Impl& im = *impl_;
  im.y.assign(y.data(), y.data() + n);
  im.dydt.resize(n);
  auto system = [this, n](const State& s, State& ds, double) {
    Eigen::Map<const Vec> sv(s.data(), static_cast<Eigen::Index>(n));
    Vec out(static_cast<Eigen::Index>(n));
    rhs_(Vec(sv), out);
    ++evaluations_;
    std::copy(out.data(), out.data() + n, ds.begin());
  };
  system(im.y, im.dydt, t);
  while (true) {
    double dt = std::min(dt_, t_limit - t);
    if (dt <= 0) return;
    const auto res = im.controlled.try_step(system, im.y, im.dydt, t, dt);
    dt_ = dt;
    if (res == odeint::success) break;
    if (dt_ < opts_.min_step) throw NumericalError("step size underflow in flow integration");
  }
  y = Eigen::Map<const Vec>(im.y.data(), static_cast<Eigen::Index>(n));
}

}  // namespace eqmorse
