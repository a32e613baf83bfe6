#include <cmath>
#include <sstream>

#include "eqmorse/geometry.hpp"

namespace eqmorse {

namespace {

double wrap(double v, double lo, double hi) {
  const double len = hi - lo;
  double r = lo + std::fmod(v - lo, len);
  if (r < lo) r += len;
  if (r >= hi) r -= len;
  if (r < lo) r = lo;
  return r;
}

// Number of whole periods to subtract so the gluing coordinate lands in range.
long gluing_wraps(const CoordinateChart& c, const Vec& raw) {
  const auto& g = *c.gluing;
  const auto& box = c.domain_box[g.coordinate];
  const double len = box.hi - box.lo;
  long k = static_cast<long>(std::floor((raw[g.coordinate] - box.lo) / len));
  const double rest = raw[g.coordinate] - static_cast<double>(k) * len;
  if (rest >= box.hi) ++k;
  return k;
}

}  // namespace

Vec CoordinateChart::reduce(const Vec& raw) const {
  if (raw.size() != dimension()) throw DomainError("chart " + id + ": dimension mismatch");
  Vec x = raw;
  if (gluing) {
    const auto& g = *gluing;
    const auto& box = domain_box[g.coordinate];
    const long k = gluing_wraps(*this, raw);
    x[g.coordinate] = raw[g.coordinate] - static_cast<double>(k) * (box.hi - box.lo);
    if (x[g.coordinate] < box.lo) x[g.coordinate] = box.lo;
    if (k % 2 != 0) {
      for (int i = 0; i < dimension(); ++i) {
        if (i != g.coordinate) x[i] *= g.signs[i];
      }
    }
  }
  for (int i = 0; i < dimension(); ++i) {
    if (gluing && i == gluing->coordinate) continue;
    if (domain_box[i].periodic) x[i] = wrap(x[i], domain_box[i].lo, domain_box[i].hi);
  }
  return x;
}

Mat CoordinateChart::reduce_jacobian(const Vec& raw) const {
  Mat j = Mat::Identity(dimension(), dimension());
  if (gluing && gluing_wraps(*this, raw) % 2 != 0) {
    for (int i = 0; i < dimension(); ++i) {
      if (i != gluing->coordinate) j(i, i) = gluing->signs[i];
    }
  }
  return j;
}

Vec CoordinateChart::identify(const Vec& x) const {
  if (!gluing) return reduce(x);
  Vec raw = x;
  const auto& box = domain_box[gluing->coordinate];
  raw[gluing->coordinate] += box.hi - box.lo;
  return reduce(raw);
}

bool CoordinateChart::contains(const Vec& x) const {
  if (x.size() != dimension()) return false;
  for (int i = 0; i < dimension(); ++i) {
    const auto& b = domain_box[i];
    if (!std::isfinite(x[i]) || x[i] < b.lo) return false;
    if (b.periodic || (gluing && i == gluing->coordinate) ? x[i] >= b.hi : x[i] > b.hi) return false;
  }
  return true;
}

Mat ConstantMetric::matrix(const Vec&) const { return weights_.asDiagonal(); }

Mat ConstantMetric::derivative(const Vec&, int) const {
  return Mat::Zero(weights_.size(), weights_.size());
}

std::string ConstantMetric::describe() const {
  std::ostringstream os;
  os << "diag(";
  for (int i = 0; i < weights_.size(); ++i) os << (i ? "," : "") << weights_[i];
  os << ")";
  return os.str();
}

Mat TorusEmbeddingMetric::matrix(const Vec& x) const {
  Mat g = Mat::Zero(2, 2);
  const double a = R_ + r_ * std::cos(x[1]);
  g(0, 0) = a * a;
  g(1, 1) = r_ * r_;
  return g;
}

Mat TorusEmbeddingMetric::derivative(const Vec& x, int l) const {
  Mat d = Mat::Zero(2, 2);
  if (l == 1) d(0, 0) = -2.0 * (R_ + r_ * std::cos(x[1])) * r_ * std::sin(x[1]);
  return d;
}

std::string TorusEmbeddingMetric::describe() const {
  std::ostringstream os;
  os << "torus-embedding(R=" << R_ << ",r=" << r_ << ")";
  return os.str();
}

}  // namespace eqmorse
