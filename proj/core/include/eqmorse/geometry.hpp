#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "eqmorse/types.hpp"

namespace eqmorse {

struct CoordinateRange {
  double lo = 0.0;
  double hi = 1.0;
  bool periodic = false;
};

// When `coordinate` wraps once, every coordinate is multiplied by the
// matching entry of `signs` before periodic reduction.
struct Gluing {
  int coordinate = -1;
  std::vector<double> signs;
};

struct CoordinateChart {
  std::string id;
  std::vector<std::string> coordinate_names;
  std::vector<CoordinateRange> domain_box;
  std::optional<Gluing> gluing;

  int dimension() const { return static_cast<int>(domain_box.size()); }
  Vec reduce(const Vec& raw) const;
  // Differential of `reduce` at `raw`; piecewise constant.
  Mat reduce_jacobian(const Vec& raw) const;
  // One application of the gluing map, used to test that it is an involution.
  Vec identify(const Vec& x) const;
  bool contains(const Vec& x) const;
};

class MetricField {
 public:
  virtual ~MetricField() = default;
  // Coordinate metric g_ij at x.
  virtual Mat matrix(const Vec& x) const = 0;
  // Partial derivative of g_ij with respect to coordinate l.
  virtual Mat derivative(const Vec& x, int l) const = 0;
  virtual std::string describe() const = 0;
};

class ConstantMetric : public MetricField {
 public:
  explicit ConstantMetric(Vec weights) : weights_(std::move(weights)) {}
  Mat matrix(const Vec& x) const override;
  Mat derivative(const Vec& x, int l) const override;
  std::string describe() const override;

 private:
  Vec weights_;
};

// Metric induced on the flat torus by the standard embedding in R^3:
// diag((R + r cos psi)^2, r^2) in coordinates (phi, psi).
class TorusEmbeddingMetric : public MetricField {
 public:
  TorusEmbeddingMetric(double big_r, double small_r) : R_(big_r), r_(small_r) {}
  Mat matrix(const Vec& x) const override;
  Mat derivative(const Vec& x, int l) const override;
  std::string describe() const override;

 private:
  double R_;
  double r_;
};

class Manifold {
 public:
  virtual ~Manifold() = default;

  virtual int dimension() const = 0;
  virtual int ambient_dimension() const = 0;
  virtual const std::vector<CoordinateChart>& charts() const = 0;
  virtual std::string chart_id(const Vec& x) const = 0;

  virtual Vec canonical(const Vec& raw) const = 0;
  virtual Mat canonical_jacobian(const Vec& raw) const = 0;
  virtual bool in_domain(const Vec& x, double tol = 1e-9) const = 0;

  // Ambient columns spanning the tangent space at x.
  virtual Mat tangent_basis(const Vec& x) const = 0;
  // Metric in the tangent basis.
  virtual Mat metric_matrix(const Vec& x) const = 0;
  virtual double inner(const Vec& x, const Vec& u, const Vec& v) const = 0;
  double norm(const Vec& x, const Vec& u) const;
  // Orthogonal projection of an ambient vector onto the tangent space.
  virtual Vec project(const Vec& x, const Vec& v) const = 0;

  // Riemannian gradient as an ambient vector, from ambient partials of F.
  virtual Vec gradient(const Vec& x, const Vec& dF) const = 0;
  // Covariant Hessian as a bilinear form in the tangent basis.
  virtual Mat hessian_form(const Vec& x, const Vec& dF, const Mat& d2F) const = 0;
  // Ambient Jacobian of the vector field -grad F.
  virtual Mat flow_jacobian(const Vec& x, const Vec& dF, const Mat& d2F) const = 0;

  virtual double distance(const Vec& x, const Vec& y) const = 0;
  // Ambient vector v with canonical(from + v) = to, choosing the shortest lift.
  virtual Vec displacement(const Vec& from, const Vec& to) const = 0;

  virtual std::vector<Vec> grid(int density) const = 0;

  // Copy with a different metric; only box-chart manifolds support it.
  virtual std::shared_ptr<const Manifold> with_metric(
      std::shared_ptr<const MetricField> metric) const;
};

// Unit sphere in R^3 with the round metric.
class EmbeddedSphere : public Manifold {
 public:
  EmbeddedSphere();
  int dimension() const override { return 2; }
  int ambient_dimension() const override { return 3; }
  const std::vector<CoordinateChart>& charts() const override { return charts_; }
  std::string chart_id(const Vec&) const override { return "ambient"; }
  Vec canonical(const Vec& raw) const override;
  Mat canonical_jacobian(const Vec& raw) const override;
  bool in_domain(const Vec& x, double tol) const override;
  Mat tangent_basis(const Vec& x) const override;
  Mat metric_matrix(const Vec& x) const override;
  double inner(const Vec& x, const Vec& u, const Vec& v) const override;
  Vec project(const Vec& x, const Vec& v) const override;
  Vec gradient(const Vec& x, const Vec& dF) const override;
  Mat hessian_form(const Vec& x, const Vec& dF, const Mat& d2F) const override;
  Mat flow_jacobian(const Vec& x, const Vec& dF, const Mat& d2F) const override;
  double distance(const Vec& x, const Vec& y) const override;
  Vec displacement(const Vec& from, const Vec& to) const override;
  std::vector<Vec> grid(int density) const override;

 private:
  std::vector<CoordinateChart> charts_;
};

// A single box chart with periodic coordinates and an optional gluing,
// carrying an arbitrary metric. Ambient coordinates are the chart coordinates.
class BoxManifold : public Manifold {
 public:
  BoxManifold(CoordinateChart chart, std::shared_ptr<const MetricField> metric);
  int dimension() const override { return chart_.dimension(); }
  int ambient_dimension() const override { return chart_.dimension(); }
  const std::vector<CoordinateChart>& charts() const override { return charts_; }
  std::string chart_id(const Vec&) const override { return chart_.id; }
  Vec canonical(const Vec& raw) const override;
  Mat canonical_jacobian(const Vec& raw) const override;
  bool in_domain(const Vec& x, double tol) const override;
  Mat tangent_basis(const Vec& x) const override;
  Mat metric_matrix(const Vec& x) const override;
  double inner(const Vec& x, const Vec& u, const Vec& v) const override;
  Vec project(const Vec& x, const Vec& v) const override;
  Vec gradient(const Vec& x, const Vec& dF) const override;
  Mat hessian_form(const Vec& x, const Vec& dF, const Mat& d2F) const override;
  Mat flow_jacobian(const Vec& x, const Vec& dF, const Mat& d2F) const override;
  double distance(const Vec& x, const Vec& y) const override;
  Vec displacement(const Vec& from, const Vec& to) const override;
  std::vector<Vec> grid(int density) const override;
  std::shared_ptr<const Manifold> with_metric(
      std::shared_ptr<const MetricField> metric) const override;

  const MetricField& metric() const { return *metric_; }

 private:
  CoordinateChart chart_;
  std::vector<CoordinateChart> charts_;
  std::shared_ptr<const MetricField> metric_;
};

enum class GroupKind { trivial, finite_cyclic, circle };

// Group elements are encoded as doubles: an integer k in [0, n) for Z_n,
// a real parameter modulo period() for the circle.
class GroupAction {
 public:
  virtual ~GroupAction() = default;
  virtual GroupKind kind() const = 0;
  virtual int order() const { return 1; }
  virtual double period() const { return 0.0; }
  virtual Vec act(double a, const Vec& x) const = 0;
  // Ambient Jacobian of x -> act(a, x).
  virtual Mat pushforward(double a, const Vec& x) const = 0;
  // Fundamental vector field of the generator normalized to period(); zero
  // vector for discrete groups.
  virtual Vec fundamental_field(const Vec& x) const = 0;
  // Deterministic point on the orbit of x.
  virtual Vec representative(const Vec& x) const = 0;
  virtual std::string describe() const = 0;

  double compose(double a, double b) const;
  double reduce(double a) const;
  std::vector<double> finite_elements() const;
};

class TrivialAction : public GroupAction {
 public:
  GroupKind kind() const override { return GroupKind::trivial; }
  Vec act(double, const Vec& x) const override { return x; }
  Mat pushforward(double, const Vec& x) const override;
  Vec fundamental_field(const Vec& x) const override;
  Vec representative(const Vec& x) const override { return x; }
  std::string describe() const override { return "trivial"; }
};

// Rotation of the unit sphere about the z-axis, period 2 pi.
class SphereRotation : public GroupAction {
 public:
  GroupKind kind() const override { return GroupKind::circle; }
  double period() const override;
  Vec act(double a, const Vec& x) const override;
  Mat pushforward(double a, const Vec& x) const override;
  Vec fundamental_field(const Vec& x) const override;
  Vec representative(const Vec& x) const override;
  std::string describe() const override { return "S1 rotation about z"; }
};

// Z_n acting on (phi, psi) by phi -> phi + 2 pi k / n.
class CyclicRotation : public GroupAction {
 public:
  CyclicRotation(int n, CoordinateChart chart) : n_(n), chart_(std::move(chart)) {}
  GroupKind kind() const override { return GroupKind::finite_cyclic; }
  int order() const override { return n_; }
  Vec act(double a, const Vec& x) const override;
  Mat pushforward(double a, const Vec& x) const override;
  Vec fundamental_field(const Vec& x) const override;
  Vec representative(const Vec& x) const override;
  std::string describe() const override;

 private:
  int n_;
  CoordinateChart chart_;
};

// Translation in the mapping-torus direction tau; period 2 because the
// gluing flips theta1.
class MappingTorusFlow : public GroupAction {
 public:
  explicit MappingTorusFlow(CoordinateChart chart) : chart_(std::move(chart)) {}
  GroupKind kind() const override { return GroupKind::circle; }
  double period() const override { return 2.0; }
  Vec act(double a, const Vec& x) const override;
  Mat pushforward(double a, const Vec& x) const override;
  Vec fundamental_field(const Vec& x) const override;
  Vec representative(const Vec& x) const override;
  std::string describe() const override { return "S1 suspension flow"; }

 private:
  CoordinateChart chart_;
};

class ScalarField {
 public:
  virtual ~ScalarField() = default;
  virtual Jet jet(const Vec& x) const = 0;
  virtual double value(const Vec& x) const { return jet(x).value; }
  virtual std::string describe() const = 0;
};

using JetFunction = std::function<Jet(const Vec&)>;

// Closed-form slice coordinates around a critical orbit. The stabilized
// block spans the isotropy-nontrivial part of the negative normal space;
// `rest` holds the remaining slice coordinates.
struct SliceChart {
  std::string orbit_label;
  Vec center;
  double center_value = 0.0;
  std::vector<JetFunction> stabilized;
  std::vector<JetFunction> rest;
  int rest_negative = 0;
  // Coordinates are exact normal-form coordinates on this radius.
  double validity_radius = 0.0;
  // Cutoff on |rest|: 1 below inner, 0 above outer.
  double rest_inner = 0.0;
  double rest_outer = 0.0;
  // Point with stabilized coordinates t * (cos a, sin a, ...), rest = 0.
  std::function<Vec(double t, double angle)> seed;
  std::string origin_label;
  std::string sphere_label;
  std::vector<std::string> origin_generators;
  std::vector<std::string> sphere_generators;
};

struct OrbitHint {
  std::string label;
  Vec point;
  std::vector<std::string> generator_names;
  int orientation = 1;
};

struct Scenario {
  std::string name;
  std::map<std::string, double> params;
  std::shared_ptr<const Manifold> manifold;
  std::shared_ptr<const ScalarField> function;
  std::shared_ptr<const GroupAction> action;
  // Coordinate directions used to orient negative frames, in priority order.
  std::vector<Vec> reference_directions;
  std::vector<OrbitHint> orbit_hints;
  std::vector<Vec> extra_seeds;
  std::vector<SliceChart> slice_charts;
  std::vector<std::string> warnings;

  int dimension() const { return manifold->dimension(); }
  int ambient_dimension() const { return manifold->ambient_dimension(); }
  double value(const Vec& x) const { return function->value(x); }
  Jet jet(const Vec& x) const { return function->jet(x); }
  Vec gradient(const Vec& x) const;
  Mat hessian_form(const Vec& x) const;
  Vec flow_field(const Vec& x) const;
  Mat flow_jacobian(const Vec& x) const;

  Scenario with_metric(std::shared_ptr<const MetricField> metric) const;
  const SliceChart* slice_chart(const std::string& label) const;
};

const std::vector<std::string>& catalogue_names();
Scenario build_scenario(const std::string& name,
                        const std::map<std::string, double>& params = {});

Vec evaluate_gradient(const Scenario& s, const Vec& x);
Vec act_on_tangent(const Scenario& s, double a, const Vec& x, const Vec& v);
std::vector<Vec> sample_points(const Scenario& s, int density);

}  // namespace eqmorse
