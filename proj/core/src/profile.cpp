#include "eqmorse/profile.hpp"

#include <cmath>
#include <string>

#include "eqmorse/types.hpp"

namespace eqmorse {

Jet1 blend(double s) {
  if (s <= 0.0) return {0.0, 0.0, 0.0};
  if (s >= 1.0) return {1.0, 0.0, 0.0};
  const double s2 = s * s, s3 = s2 * s;
  return {s3 * (10.0 + s * (-15.0 + 6.0 * s)),
          30.0 * s2 * (1.0 - s) * (1.0 - s),
          60.0 * s * (1.0 - s) * (1.0 - 2.0 * s)};
}

Jet1 phi_jet(const BumpProfile& p, double t) {
  if (t < 0.0) throw DomainError("phi: negative argument");
  const double l = p.lambda;
  if (t <= l) return {t * t, 2.0 * t, 2.0};
  if (t >= 3.0 * l) return {-t * t, -2.0 * t, -2.0};
  const double w = 2.0 * l;
  const Jet1 b = blend((t - l) / w);
  const double a = 1.0 - 2.0 * b.v;
  const double a1 = -2.0 * b.d1 / w;
  const double a2 = -2.0 * b.d2 / (w * w);
  return {a * t * t, a1 * t * t + 2.0 * a * t, a2 * t * t + 4.0 * a1 * t + 2.0 * a};
}

double phi(const BumpProfile& p, double t) { return phi_jet(p, t).v; }
double phi_prime(const BumpProfile& p, double t) { return phi_jet(p, t).d1; }

double locate_t0(const BumpProfile& p) {
  const double l = p.lambda;
  if (!(l > 0.0)) throw ConfigurationError("profile: lambda must be positive");
  const int n = 10000;
  int changes = 0;
  double lo = 0.0, hi = 0.0;
  double prev_t = l, prev = phi_prime(p, l);
  for (int i = 1; i <= n; ++i) {
    const double t = l + 2.0 * l * i / n;
    const double v = phi_prime(p, t);
    if ((prev > 0.0) != (v > 0.0)) {
      ++changes;
      lo = prev_t;
      hi = t;
    }
    prev_t = t;
    prev = v;
  }
  if (changes != 1) {
    throw NumericalError("profile violates the two-critical-point shape: " +
                         std::to_string(changes) + " sign changes of phi'");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * l; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (phi_prime(p, mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double t0 = 0.5 * (lo + hi);
  if (!(t0 > l && t0 < 2.0 * l)) throw NumericalError("profile: t0 outside (lambda, 2 lambda)");
  const double h = 1e-4 * l;
  const double second = (phi(p, t0 + h) - 2.0 * phi(p, t0) + phi(p, t0 - h)) / (h * h);
  if (!(second < 0.0)) throw NumericalError("profile: phi'' at t0 is not negative");
  return t0;
}

BumpProfile make_profile(double lambda, double delta) {
  if (!(lambda > 0.0)) throw ConfigurationError("profile: lambda must be positive");
  if (!(delta > 0.0)) throw ConfigurationError("profile: delta must be positive");
  if (!(delta < lambda / 4.0)) throw ConfigurationError("profile: delta must be below lambda/4");
  BumpProfile p{lambda, delta, 0.0};
  p.t0 = locate_t0(p);
  return p;
}

Jet1 psi_jet(const BumpProfile& p, double t) {
  if (t < 0.0) throw DomainError("psi: negative argument");
  const double l = p.lambda, d = p.delta, t0 = p.t0;
  if (t <= l - d || t >= 3.0 * l + d) return {};
  if (t < t0 - d) {
    const double w = t0 - l;
    const Jet1 b = blend((t - (l - d)) / w);
    return {b.v, b.d1 / w, b.d2 / (w * w)};
  }
  if (t <= t0 + d) return {1.0, 0.0, 0.0};
  const double w = 3.0 * l - t0;
  const Jet1 b = blend((t - (t0 + d)) / w);
  return {1.0 - b.v, -b.d1 / w, -b.d2 / (w * w)};
}

double psi(const BumpProfile& p, double t) { return psi_jet(p, t).v; }
double psi_prime(const BumpProfile& p, double t) { return psi_jet(p, t).d1; }

}  // namespace eqmorse
