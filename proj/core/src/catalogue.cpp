#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "eqmorse/geometry.hpp"
#include "eqmorse/stabilize.hpp"

namespace eqmorse {

namespace {

constexpr double kPi = std::numbers::pi;

double centered(double v) {
  double r = v - std::round(v);
  if (r <= -0.5) r += 1.0;
  return r;
}

class SphereHeight : public ScalarField {
 public:
  Jet jet(const Vec& x) const override {
    Jet j = Jet::zero(3);
    j.value = x[2];
    j.gradient[2] = 1.0;
    return j;
  }
  std::string describe() const override { return "z"; }
};

class SphereQuadratic : public ScalarField {
 public:
  Jet jet(const Vec& x) const override {
    Jet j = Jet::zero(3);
    j.value = 1.0 - x[2] * x[2];
    j.gradient[2] = -2.0 * x[2];
    j.hessian(2, 2) = -2.0;
    return j;
  }
  std::string describe() const override { return "1 - z^2"; }
};

class TorusLegsHeight : public ScalarField {
 public:
  explicit TorusLegsHeight(int n) : n_(n) {}
  Jet jet(const Vec& x) const override {
    const double n = n_;
    const double a = 2.0 + std::cos(n * x[0]), da = -n * std::sin(n * x[0]), dda = -n * n * std::cos(n * x[0]);
    const double b = 1.0 + std::cos(x[1]), db = -std::sin(x[1]), ddb = -std::cos(x[1]);
    Jet j = Jet::zero(2);
    j.value = -a * b;
    j.gradient << -da * b, -a * db;
    j.hessian << -dda * b, -da * db, -da * db, -a * ddb;
    return j;
  }
  std::string describe() const override { return "-(2+cos n phi)(1+cos psi)"; }

 private:
  int n_;
};

class MappingTorusHeight : public ScalarField {
 public:
  Jet jet(const Vec& x) const override {
    const double c1 = std::cos(2 * kPi * x[0]), s1 = std::sin(2 * kPi * x[0]);
    const double c2 = std::cos(2 * kPi * x[1]), s2 = std::sin(2 * kPi * x[1]);
    const double a = 3.0 + c1;
    const double w = 2 * kPi;
    Jet j = Jet::zero(3);
    j.value = a * s2;
    j.gradient[0] = -w * s1 * s2;
    j.gradient[1] = w * a * c2;
    j.hessian(0, 0) = -w * w * c1 * s2;
    j.hessian(0, 1) = j.hessian(1, 0) = -w * w * s1 * c2;
    j.hessian(1, 1) = -w * w * a * s2;
    return j;
  }
  std::string describe() const override { return "(3+cos 2pi t1) sin 2pi t2"; }
};

CoordinateChart mapping_torus_chart() {
  CoordinateChart c{"box", {"theta1", "theta2", "tau"}, {{0, 1, true}, {0, 1, true}, {0, 1, true}}, {}};
  c.gluing = Gluing{2, {-1.0, 1.0, 1.0}};
  return c;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// sin(pi * d) with d the centered offset of coordinate k from `center`.
JetFunction sine_coordinate(int k, double center, double scale) {
  return [=](const Vec& x) {
    const double d = centered(x[k] - center);
    Jet j = Jet::zero(static_cast<int>(x.size()));
    j.value = scale * std::sin(kPi * d);
    j.gradient[k] = scale * kPi * std::cos(kPi * d);
    j.hessian(k, k) = -scale * kPi * kPi * std::sin(kPi * d);
    return j;
  };
}

// sin(pi (theta1 - c1)) * sqrt(sign * 2 sin 2 pi theta2); defined where the
// radicand is positive.
JetFunction fiber_coordinate(double c1, double sign) {
  return [=](const Vec& x) {
    const double d = centered(x[0] - c1);
    const double sv = sign * std::sin(2 * kPi * x[1]);
    const double s1 = sign * 2 * kPi * std::cos(2 * kPi * x[1]);
    const double s2 = -sign * 4 * kPi * kPi * std::sin(2 * kPi * x[1]);
    Jet j = Jet::zero(static_cast<int>(x.size()));
    if (!(sv > 0.0)) throw DomainError("slice coordinate evaluated outside its chart");
    const double q = std::sqrt(2.0 * sv);
    const double q1 = s1 / q;
    const double q2 = (s2 - q1 * q1) / q;
    const double sg = std::sin(kPi * d), sg1 = kPi * std::cos(kPi * d), sg2 = -kPi * kPi * sg;
    j.value = q * sg;
    j.gradient[0] = q * sg1;
    j.gradient[1] = q1 * sg;
    j.hessian(0, 0) = q * sg2;
    j.hessian(0, 1) = j.hessian(1, 0) = q1 * sg1;
    j.hessian(1, 1) = q2 * sg;
    return j;
  };
}

SliceChart mapping_torus_chart_at(bool at_p2) {
  SliceChart c;
  const double c1 = at_p2 ? 0.0 : 0.5;
  const double c2 = at_p2 ? 0.25 : 0.75;
  c.orbit_label = at_p2 ? "P2" : "R1";
  c.center = vec3(c1, c2, 0.0);
  c.center_value = at_p2 ? 4.0 : -2.0;
  c.stabilized = {fiber_coordinate(c1, at_p2 ? 1.0 : -1.0)};
  c.rest = {sine_coordinate(1, c2, at_p2 ? 2.0 * std::sqrt(2.0) : 2.0)};
  c.rest_negative = at_p2 ? 1 : 0;
  c.validity_radius = 1.0;
  c.rest_inner = 0.5;
  c.rest_outer = 1.2;
  c.seed = [=](double t, double angle) {
    const double d = std::asin(std::clamp(t * std::cos(angle) / std::sqrt(2.0), -1.0, 1.0)) / kPi;
    double th1 = c1 + d;
    th1 -= std::floor(th1);
    return vec3(th1, c2, 0.0);
  };
  if (at_p2) {
    c.origin_label = "Pbar1";
    c.origin_generators = {"pbar10", "pbar11"};
    c.sphere_label = "P2'";
    c.sphere_generators = {"p'20", "p'21"};
  } else {
    c.origin_label = "Rbar0";
    c.origin_generators = {"rbar00", "rbar01"};
    c.sphere_label = "R1'";
    c.sphere_generators = {"r'10", "r'11"};
  }
  return c;
}

SliceChart sphere_north_chart() {
  SliceChart c;
  c.orbit_label = "S_N";
  c.center = vec3(0, 0, 1);
  c.center_value = 1.0;
  for (int k = 0; k < 2; ++k) {
    c.stabilized.push_back([k](const Vec& x) {
      const double u = 1.0 + x[2];
      if (!(u > 0.0)) throw DomainError("slice coordinate evaluated outside its chart");
      const double r = 1.0 / std::sqrt(u);
      Jet j = Jet::zero(3);
      j.value = x[k] * r;
      j.gradient[k] = r;
      j.gradient[2] = -0.5 * x[k] * r / u;
      j.hessian(k, 2) = j.hessian(2, k) = -0.5 * r / u;
      j.hessian(2, 2) = 0.75 * x[k] * r / (u * u);
      return j;
    });
  }
  c.validity_radius = 1.0;
  c.seed = [](double t, double angle) {
    const double z = 1.0 - t * t;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return vec3(rho * std::cos(angle), rho * std::sin(angle), z);
  };
  c.origin_label = "S_N";
  c.origin_generators = {"n"};
  c.sphere_label = "S_N'";
  c.sphere_generators = {"n0'", "n1'"};
  return c;
}

Scenario sphere_base(const std::string& name, std::shared_ptr<const ScalarField> f) {
  Scenario s;
  s.name = name;
  s.manifold = std::make_shared<EmbeddedSphere>();
  s.function = std::move(f);
  s.action = std::make_shared<SphereRotation>();
  s.reference_directions = {vec3(0, 0, 1), vec3(1, 0, 0), vec3(0, 1, 0)};
  s.orbit_hints = {{"S_N", vec3(0, 0, 1), {"n"}, 1}, {"S_S", vec3(0, 0, -1), {"s"}, -1}};
  return s;
}

Scenario mapping_torus_base() {
  Scenario s;
  s.name = "mapping_torus";
  const CoordinateChart chart = mapping_torus_chart();
  s.manifold = std::make_shared<BoxManifold>(chart, std::make_shared<ConstantMetric>(Vec::Ones(3)));
  s.function = std::make_shared<MappingTorusHeight>();
  s.action = std::make_shared<MappingTorusFlow>(chart);
  s.reference_directions = {vec3(0, 1, 0), vec3(1, 0, 0), vec3(0, 0, 1)};
  s.orbit_hints = {{"S0", vec3(0, 0.75, 0), {"s00", "s01"}, 1},
                   {"R1", vec3(0.5, 0.75, 0), {"r10", "r11"}, 1},
                   {"Q1", vec3(0.5, 0.25, 0), {"q10", "q11"}, 1},
                   {"P2", vec3(0, 0.25, 0), {"p20", "p21"}, 1}};
  s.slice_charts = {mapping_torus_chart_at(true), mapping_torus_chart_at(false)};
  return s;
}

void check_keys(const std::string& name, const std::map<std::string, double>& params,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : params) {
    if (!allowed.count(k)) throw ConfigurationError("scenario " + name + ": unknown parameter '" + k + "'");
    if (!std::isfinite(v)) throw ConfigurationError("scenario " + name + ": parameter '" + k + "' is not finite");
  }
}

double param(const std::map<std::string, double>& p, const std::string& k, double fallback) {
  const auto it = p.find(k);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

Vec Scenario::gradient(const Vec& x) const {
  return manifold->gradient(x, function->jet(x).gradient);
}

Mat Scenario::hessian_form(const Vec& x) const {
  const Jet j = function->jet(x);
  return manifold->hessian_form(x, j.gradient, j.hessian);
}

Vec Scenario::flow_field(const Vec& x) const { return -gradient(x); }

Mat Scenario::flow_jacobian(const Vec& x) const {
  const Jet j = function->jet(x);
  return manifold->flow_jacobian(x, j.gradient, j.hessian);
}

Scenario Scenario::with_metric(std::shared_ptr<const MetricField> metric) const {
  Scenario s = *this;
  s.manifold = manifold->with_metric(std::move(metric));
  return s;
}

const SliceChart* Scenario::slice_chart(const std::string& label) const {
  for (const auto& c : slice_charts) {
    if (c.orbit_label == label) return &c;
  }
  return nullptr;
}

const std::vector<std::string>& catalogue_names() {
  static const std::vector<std::string> names = {"sphere_height", "sphere_stabilized", "torus_with_legs",
                                                 "mapping_torus", "mapping_torus_stabilized"};
  return names;
}

Scenario build_scenario(const std::string& name, const std::map<std::string, double>& params) {
  if (name == "sphere_height") {
    check_keys(name, params, {});
    Scenario s = sphere_base(name, std::make_shared<SphereHeight>());
    s.slice_charts = {sphere_north_chart()};
    return s;
  }
  if (name == "sphere_stabilized") {
    check_keys(name, params, {});
    Scenario s = sphere_base(name, std::make_shared<SphereQuadratic>());
    s.orbit_hints.push_back({"S_N'", vec3(1, 0, 0), {"n0'", "n1'"}, 1});
    return s;
  }
  if (name == "torus_with_legs") {
    check_keys(name, params, {"n"});
    const double nv = param(params, "n", 3.0);
    if (nv < 1.0 || nv != std::floor(nv) || nv > 64) {
      throw ConfigurationError("torus_with_legs: n must be an integer in [1, 64]");
    }
    const int n = static_cast<int>(nv);
    Scenario s;
    s.name = name;
    s.params["n"] = n;
    CoordinateChart chart{"box", {"phi", "psi"}, {{0, 2 * kPi, true}, {0, 2 * kPi, true}}, {}};
    s.manifold = std::make_shared<BoxManifold>(chart, std::make_shared<TorusEmbeddingMetric>(2.0, 1.0));
    s.function = std::make_shared<TorusLegsHeight>(n);
    s.action = std::make_shared<CyclicRotation>(n, chart);
    s.reference_directions = {vec2(0, 1), vec2(1, 0)};
    s.orbit_hints = {{"S", vec2(0, kPi), {"s0", "s1"}, 1},
                     {"P", vec2(kPi / n, 0), {"p"}, 1},
                     {"Q", vec2(0, 0), {"q"}, 1}};
    return s;
  }
  if (name == "mapping_torus") {
    check_keys(name, params, {});
    return mapping_torus_base();
  }
  if (name == "mapping_torus_stabilized") {
    check_keys(name, params, {"lambda", "delta", "epsilon"});
    const double lambda = param(params, "lambda", 0.05);
    const double delta = param(params, "delta", lambda / 8.0);
    const double epsilon = param(params, "epsilon", lambda * lambda / 4.0);
    if (!(lambda > 0.0) || !(delta > 0.0) || delta >= lambda) {
      throw ConfigurationError("mapping_torus_stabilized: need lambda > delta > 0");
    }
    if (!(epsilon > 0.0)) throw ConfigurationError("mapping_torus_stabilized: epsilon must be positive");
    const Scenario base = mapping_torus_base();
    Scenario s = stabilize_at(base, {make_recipe("P2", lambda, delta, epsilon),
                                     make_recipe("R1", lambda, delta, epsilon)});
    s.name = name;
    return s;
  }
  throw ConfigurationError("unknown scenario '" + name + "'");
}

Vec evaluate_gradient(const Scenario& s, const Vec& x) {
  if (!s.manifold->in_domain(x)) throw DomainError("evaluate_gradient: point outside the chart domains");
  return s.gradient(x);
}

Vec act_on_tangent(const Scenario& s, double a, const Vec& x, const Vec& v) {
  if (!s.manifold->in_domain(x)) throw DomainError("act_on_tangent: point outside the chart domains");
  if ((s.manifold->project(x, v) - v).norm() > 1e-9 * (1.0 + v.norm())) {
    throw DomainError("act_on_tangent: vector is not tangent");
  }
  return s.action->pushforward(a, x) * v;
}

std::vector<Vec> sample_points(const Scenario& s, int density) {
  if (density < 2) throw ConfigurationError("sample_points: density must be at least 2");
  // Grid points are canonical, so duplicates agree coordinate by coordinate.
  std::set<std::vector<long long>> seen;
  std::vector<Vec> out;
  for (const Vec& p : s.manifold->grid(density)) {
    std::vector<long long> key(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) key[i] = std::llround(p[i] * 1e12);
    if (seen.insert(std::move(key)).second) out.push_back(p);
  }
  return out;
}

}  // namespace eqmorse
