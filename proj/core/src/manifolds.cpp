#include <algorithm>
#include <cmath>
#include <numbers>

#include "eqmorse/geometry.hpp"

namespace eqmorse {

double Manifold::norm(const Vec& x, const Vec& u) const {
  return std::sqrt(std::max(0.0, inner(x, u, u)));
}

std::shared_ptr<const Manifold> Manifold::with_metric(std::shared_ptr<const MetricField>) const {
  throw ConfigurationError("this manifold only supports its built-in metric");
}

// ---------------------------------------------------------------- sphere

EmbeddedSphere::EmbeddedSphere() {
  CoordinateChart ambient{"ambient", {"x", "y", "z"}, {{-1, 1, false}, {-1, 1, false}, {-1, 1, false}}, {}};
  CoordinateChart polar{"polar", {"polar", "azimuth"}, {{0, std::numbers::pi, false}, {0, 2 * std::numbers::pi, true}}, {}};
  charts_ = {ambient, polar};
}

Vec EmbeddedSphere::canonical(const Vec& raw) const {
  const double n = raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError("sphere: cannot normalize point");
  return raw / n;
}

Mat EmbeddedSphere::canonical_jacobian(const Vec& raw) const {
  const double n = raw.norm();
  const Vec u = raw / n;
  return (Mat::Identity(3, 3) - u * u.transpose()) / n;
}

bool EmbeddedSphere::in_domain(const Vec& x, double tol) const {
  return x.size() == 3 && x.allFinite() && std::abs(x.norm() - 1.0) <= tol;
}

Mat EmbeddedSphere::tangent_basis(const Vec& x) const {
  int axis = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(x[i]) < std::abs(x[axis])) axis = i;
  }
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e[axis] = 1.0;
  const Eigen::Vector3d p = x.head<3>();
  Eigen::Vector3d b1 = (e - e.dot(p) * p).normalized();
  Eigen::Vector3d b2 = p.cross(b1);
  Mat basis(3, 2);
  basis.col(0) = b1;
  basis.col(1) = b2;
  return basis;
}

Mat EmbeddedSphere::metric_matrix(const Vec&) const { return Mat::Identity(2, 2); }

double EmbeddedSphere::inner(const Vec&, const Vec& u, const Vec& v) const { return u.dot(v); }

Vec EmbeddedSphere::project(const Vec& x, const Vec& v) const { return v - x.dot(v) * x; }

Vec EmbeddedSphere::gradient(const Vec& x, const Vec& dF) const { return project(x, dF); }

Mat EmbeddedSphere::hessian_form(const Vec& x, const Vec& dF, const Mat& d2F) const {
  const Mat e = tangent_basis(x);
  return e.transpose() * (d2F - x.dot(dF) * Mat::Identity(3, 3)) * e;
}

Mat EmbeddedSphere::flow_jacobian(const Vec& x, const Vec& dF, const Mat& d2F) const {
  const Mat p = Mat::Identity(3, 3) - x * x.transpose();
  return -(p * d2F - x * dF.transpose() - x.dot(dF) * Mat::Identity(3, 3));
}

double EmbeddedSphere::distance(const Vec& x, const Vec& y) const {
  const double chord = (x - y).norm();
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

Vec EmbeddedSphere::displacement(const Vec& from, const Vec& to) const { return to - from; }

std::vector<Vec> EmbeddedSphere::grid(int density) const {
  const int d = std::max(density, 2);
  std::vector<Vec> pts;
  for (int i = 0; i < d; ++i) {
    const double th = std::numbers::pi * i / (d - 1);
    const bool pole = (i == 0 || i == d - 1);
    for (int j = 0; j < (pole ? 1 : d); ++j) {
      const double ph = 2 * std::numbers::pi * j / d;
      Vec p(3);
      p << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      if (pole) p << 0.0, 0.0, (i == 0 ? 1.0 : -1.0);
      pts.push_back(p);
    }
  }
  return pts;
}

// ---------------------------------------------------------------- box

BoxManifold::BoxManifold(CoordinateChart chart, std::shared_ptr<const MetricField> metric)
    : chart_(std::move(chart)), charts_{chart_}, metric_(std::move(metric)) {}

Vec BoxManifold::canonical(const Vec& raw) const {
  if (!raw.allFinite()) throw DomainError("box chart: non-finite point");
  return chart_.reduce(raw);
}

Mat BoxManifold::canonical_jacobian(const Vec& raw) const { return chart_.reduce_jacobian(raw); }

bool BoxManifold::in_domain(const Vec& x, double) const {
  return x.size() == chart_.dimension() && x.allFinite();
}

Mat BoxManifold::tangent_basis(const Vec&) const {
  return Mat::Identity(dimension(), dimension());
}

Mat BoxManifold::metric_matrix(const Vec& x) const { return metric_->matrix(x); }

double BoxManifold::inner(const Vec& x, const Vec& u, const Vec& v) const {
  return u.dot(metric_->matrix(x) * v);
}

Vec BoxManifold::project(const Vec&, const Vec& v) const { return v; }

Vec BoxManifold::gradient(const Vec& x, const Vec& dF) const {
  return metric_->matrix(x).ldlt().solve(dF);
}

Mat BoxManifold::hessian_form(const Vec& x, const Vec& dF, const Mat& d2F) const {
  const int n = dimension();
  const Vec w = metric_->matrix(x).ldlt().solve(dF);
  std::vector<Mat> d(n);
  for (int l = 0; l < n; ++l) d[l] = metric_->derivative(x, l);
  Mat h = d2F;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double c = 0.0;
      for (int l = 0; l < n; ++l) c += w[l] * (d[i](j, l) + d[j](i, l) - d[l](i, j));
      h(i, j) -= 0.5 * c;
    }
  }
  return h;
}

Mat BoxManifold::flow_jacobian(const Vec& x, const Vec& dF, const Mat& d2F) const {
  const int n = dimension();
  const auto g = metric_->matrix(x).ldlt();
  const Vec w = g.solve(dF);
  Mat j = -g.solve(d2F);
  for (int l = 0; l < n; ++l) j.col(l) += g.solve(metric_->derivative(x, l) * w);
  return j;
}

Vec BoxManifold::displacement(const Vec& from, const Vec& to) const {
  const int n = dimension();
  auto wrapped = [&](const Vec& target, int skip) {
    Vec d = target - from;
    for (int i = 0; i < n; ++i) {
      const auto& b = chart_.domain_box[i];
      if (i == skip || !b.periodic) continue;
      const double len = b.hi - b.lo;
      d[i] -= len * std::round(d[i] / len);
    }
    return d;
  };
  if (!chart_.gluing) return wrapped(to, -1);
  const auto& g = *chart_.gluing;
  const double len = chart_.domain_box[g.coordinate].hi - chart_.domain_box[g.coordinate].lo;
  Vec best;
  for (int shift = -1; shift <= 1; ++shift) {
    Vec lift = to;
    lift[g.coordinate] += shift * len;
    if (shift != 0) {
      for (int i = 0; i < n; ++i) {
        if (i != g.coordinate) lift[i] *= g.signs[i];
      }
    }
    Vec d = wrapped(lift, g.coordinate);
    if (best.size() == 0 || d.norm() < best.norm()) best = d;
  }
  return best;
}

double BoxManifold::distance(const Vec& x, const Vec& y) const {
  return displacement(x, y).norm();
}

std::vector<Vec> BoxManifold::grid(int density) const {
  const int n = dimension();
  const int d = std::max(density, 1);
  std::vector<Vec> pts;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec p(n);
    for (int i = 0; i < n; ++i) {
      const auto& b = chart_.domain_box[i];
      const bool closed = !b.periodic && !(chart_.gluing && chart_.gluing->coordinate == i);
      const double frac = closed ? (d > 1 ? double(idx[i]) / (d - 1) : 0.5) : double(idx[i]) / d;
      p[i] = b.lo + (b.hi - b.lo) * frac;
    }
    pts.push_back(canonical(p));
    int k = 0;
    while (k < n && ++idx[k] == d) idx[k++] = 0;
    if (k == n) break;
  }
  return pts;
}

std::shared_ptr<const Manifold> BoxManifold::with_metric(std::shared_ptr<const MetricField> metric) const {
  return std::make_shared<BoxManifold>(chart_, std::move(metric));
}

}  // namespace eqmorse
