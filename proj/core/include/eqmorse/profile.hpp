#pragma once

namespace eqmorse {

// Value with first and second derivative in one real variable.
struct Jet1 {
  double v = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Quintic smoothstep B(s) = 6s^5 - 15s^4 + 10s^3, clamped to [0, 1].
Jet1 blend(double s);

struct BumpProfile {
  double lambda = 0.0;
  double delta = 0.0;
  double t0 = 0.0;
};

// Validates lambda, delta and locates t0.
BumpProfile make_profile(double lambda, double delta);
double locate_t0(const BumpProfile& p);

double phi(const BumpProfile& p, double t);
double phi_prime(const BumpProfile& p, double t);
Jet1 phi_jet(const BumpProfile& p, double t);

double psi(const BumpProfile& p, double t);
double psi_prime(const BumpProfile& p, double t);
Jet1 psi_jet(const BumpProfile& p, double t);

// Radius of the region where the profiles differ from the unperturbed model.
inline double support_radius(const BumpProfile& p) { return 3.0 * p.lambda + p.delta; }

// 4 lambda + 2 delta padded by 20 percent.
inline double slice_ball_radius(const BumpProfile& p) {
  return 1.2 * (4.0 * p.lambda + 2.0 * p.delta);
}

}  // namespace eqmorse
