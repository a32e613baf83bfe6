#include <cmath>
#include <numbers>

#include "eqmorse/geometry.hpp"

namespace eqmorse {

namespace {

// Ordering key on [0, 1) that treats values just below 1 as negative.
double unit_key(double v) { return v > 1.0 - 1e-7 ? v - 1.0 : v; }

}  // namespace

double GroupAction::reduce(double a) const {
  switch (kind()) {
    case GroupKind::trivial:
      return 0.0;
    case GroupKind::finite_cyclic: {
      const long n = order();
      long k = std::lround(a) % n;
      if (k < 0) k += n;
      return static_cast<double>(k);
    }
    case GroupKind::circle: {
      const double p = period();
      double r = std::fmod(a, p);
      if (r < 0) r += p;
      if (r >= p) r -= p;
      return r;
    }
  }
  return 0.0;
}

double GroupAction::compose(double a, double b) const { return reduce(a + b); }

std::vector<double> GroupAction::finite_elements() const {
  std::vector<double> out;
  if (kind() == GroupKind::circle) return out;
  for (int k = 0; k < order(); ++k) out.push_back(k);
  return out;
}

Mat TrivialAction::pushforward(double, const Vec& x) const {
  return Mat::Identity(x.size(), x.size());
}

Vec TrivialAction::fundamental_field(const Vec& x) const { return Vec::Zero(x.size()); }

// ---------------------------------------------------------------- sphere

double SphereRotation::period() const { return 2 * std::numbers::pi; }

Vec SphereRotation::act(double a, const Vec& x) const {
  return pushforward(a, x) * x;
}

Mat SphereRotation::pushforward(double a, const Vec&) const {
  Mat r = Mat::Identity(3, 3);
  const double c = std::cos(a), s = std::sin(a);
  r(0, 0) = c;
  r(0, 1) = -s;
  r(1, 0) = s;
  r(1, 1) = c;
  return r;
}

Vec SphereRotation::fundamental_field(const Vec& x) const {
  Vec v(3);
  v << -x[1], x[0], 0.0;
  return v;
}

Vec SphereRotation::representative(const Vec& x) const {
  const double rho = std::hypot(x[0], x[1]);
  Vec r(3);
  if (rho < 1e-9) {
    r << 0.0, 0.0, x[2];
    return r;
  }
  r << rho, 0.0, x[2];
  return r;
}

// ---------------------------------------------------------------- Z_n

Vec CyclicRotation::act(double a, const Vec& x) const {
  Vec y = x;
  y[0] += 2 * std::numbers::pi * reduce(a) / n_;
  return chart_.reduce(y);
}

Mat CyclicRotation::pushforward(double, const Vec& x) const {
  return Mat::Identity(x.size(), x.size());
}

Vec CyclicRotation::fundamental_field(const Vec& x) const { return Vec::Zero(x.size()); }

Vec CyclicRotation::representative(const Vec& x) const {
  Vec best = chart_.reduce(x);
  double best_key = unit_key(best[0] / (2 * std::numbers::pi));
  for (int k = 1; k < n_; ++k) {
    const Vec y = act(k, x);
    const double key = unit_key(y[0] / (2 * std::numbers::pi));
    if (key < best_key) {
      best = y;
      best_key = key;
    }
  }
  return best;
}

std::string CyclicRotation::describe() const { return "Z_" + std::to_string(n_) + " rotation"; }

// ---------------------------------------------------------------- mapping torus

Vec MappingTorusFlow::act(double a, const Vec& x) const {
  Vec y = x;
  y[2] += a;
  return chart_.reduce(y);
}

Mat MappingTorusFlow::pushforward(double a, const Vec& x) const {
  Vec y = x;
  y[2] += a;
  return chart_.reduce_jacobian(y);
}

Vec MappingTorusFlow::fundamental_field(const Vec& x) const {
  Vec v = Vec::Zero(x.size());
  v[2] = 1.0;
  return v;
}

Vec MappingTorusFlow::representative(const Vec& x) const {
  Vec base = x;
  base[2] = 0.0;
  base = chart_.reduce(base);
  const Vec flipped = act(1.0, base);
  return unit_key(flipped[0]) > unit_key(base[0]) ? flipped : base;
}

}  // namespace eqmorse
