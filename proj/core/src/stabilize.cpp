#include "eqmorse/stabilize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace eqmorse {

namespace {

struct RadialJet {
  double value = 0.0;
  Vec gradient;
  Mat hessian;
};

// |w|^2 accumulated from component jets.
RadialJet squared_norm(const std::vector<Jet>& comps, int n) {
  RadialJet r{0.0, Vec::Zero(n), Mat::Zero(n, n)};
  for (const Jet& c : comps) {
    r.value += c.value * c.value;
    r.gradient += 2.0 * c.value * c.gradient;
    r.hessian += 2.0 * (c.gradient * c.gradient.transpose() + c.value * c.hessian);
  }
  return r;
}

std::vector<Jet> eval(const std::vector<JetFunction>& fs, const Vec& x) {
  std::vector<Jet> out;
  out.reserve(fs.size());
  for (const auto& f : fs) out.push_back(f(x));
  return out;
}

}  // namespace

double SphereFunction::value(const Vec& u) const {
  return kind == Kind::constant ? c : c * u[axis];
}

Vec SphereFunction::gradient(int dim) const {
  Vec g = Vec::Zero(dim);
  if (kind == Kind::linear) g[axis] = c;
  return g;
}

int SphereFunction::index_at(const Vec& u) const {
  if (kind == Kind::constant) return 0;
  const bool at_max = (c > 0) == (u[axis] > 0);
  return at_max ? static_cast<int>(u.size()) - 1 : 0;
}

std::string SphereFunction::describe() const {
  std::ostringstream os;
  if (kind == Kind::constant) os << "constant(" << c << ")";
  else os << "linear(" << c << ",axis=" << axis << ")";
  return os.str();
}

StabilizationRecipe make_recipe(const std::string& target, double lambda, double delta,
                                double epsilon, SphereFunction h) {
  if (delta <= 0.0) delta = lambda / 8.0;
  if (epsilon <= 0.0) epsilon = lambda * lambda / 4.0;
  StabilizationRecipe r;
  r.target = target;
  r.profile = make_profile(lambda, delta);
  r.epsilon = epsilon;
  r.h = h;
  return r;
}

LocalValue stabilized_local_function(const StabilizationRecipe& r, const LocalModel& m,
                                     const Vec& x) {
  if (x.size() != m.dimension()) throw DomainError("local model: dimension mismatch");
  if (x.norm() > slice_ball_radius(r.profile)) throw DomainError("local model: point outside the slice ball");
  const Vec xs = x.head(m.stabilized);
  const Vec xf = x.segment(m.stabilized, m.fixed_negative);
  const Vec xp = x.tail(m.positive);
  LocalValue out;
  out.gradient = Vec::Zero(x.size());
  out.value = -xf.squaredNorm() + xp.squaredNorm();
  out.gradient.segment(m.stabilized, m.fixed_negative) = -2.0 * xf;
  out.gradient.tail(m.positive) = 2.0 * xp;
  const double t = xs.norm();
  const BumpProfile& p = r.profile;
  const Jet1 ph = phi_jet(p, t);
  out.value += ph.v;
  if (t < p.lambda - p.delta) {
    out.gradient.head(m.stabilized) = 2.0 * xs;
    return out;
  }
  const Vec u = xs / t;
  const Jet1 ps = psi_jet(p, t);
  const double hu = r.h.value(u);
  out.value += r.epsilon * ps.v * hu;
  const Vec dh = r.h.gradient(m.stabilized);
  const Vec tangential = dh - u.dot(dh) * u;
  out.gradient.head(m.stabilized) =
      (ph.d1 + r.epsilon * ps.d1 * hu) * u + (r.epsilon * ps.v / t) * tangential;
  return out;
}

StabilizedField::StabilizedField(std::shared_ptr<const ScalarField> base, std::vector<Patch> patches)
    : base_(std::move(base)), patches_(std::move(patches)) {
  for (const auto& p : patches_) {
    if (p.recipe.h.kind != SphereFunction::Kind::constant) {
      throw ConfigurationError("stabilization: only isotropy-invariant (constant) sphere functions extend over the orbit");
    }
  }
}

Jet StabilizedField::patch_jet(std::size_t i, const Vec& x) const {
  const auto& patch = patches_.at(i);
  const SliceChart& c = patch.chart;
  const BumpProfile& p = patch.recipe.profile;
  const int n = static_cast<int>(x.size());
  Jet out = Jet::zero(n);

  double chi = 1.0;
  Vec dchi = Vec::Zero(n);
  Mat hchi = Mat::Zero(n, n);
  if (!c.rest.empty()) {
    const RadialJet r2 = squared_norm(eval(c.rest, x), n);
    const double lo = c.rest_inner * c.rest_inner, hi = c.rest_outer * c.rest_outer;
    if (r2.value >= hi) return out;
    const double span = hi - lo;
    const Jet1 b = blend((r2.value - lo) / span);
    chi = 1.0 - b.v;
    dchi = -(b.d1 / span) * r2.gradient;
    hchi = -(b.d2 / (span * span)) * r2.gradient * r2.gradient.transpose() - (b.d1 / span) * r2.hessian;
  }

  // Outside the chart domain means outside the support, which stabilize_at
  // keeps inside the validity radius.
  std::vector<Jet> ws;
  try {
    ws = eval(c.stabilized, x);
  } catch (const DomainError&) {
    return out;
  }
  const RadialJet t2 = squared_norm(ws, n);
  const double reach = support_radius(p);
  if (t2.value >= reach * reach) return out;

  double m0 = 0.0;
  Vec dm;
  Mat hm;
  if (t2.value < (p.lambda - p.delta) * (p.lambda - p.delta)) {
    m0 = 2.0 * t2.value;
    dm = 2.0 * t2.gradient;
    hm = 2.0 * t2.hessian;
  } else {
    const double t = std::sqrt(t2.value);
    const Vec dt = t2.gradient / (2.0 * t);
    const Mat ht = (0.5 * t2.hessian - dt * dt.transpose()) / t;
    const Jet1 ph = phi_jet(p, t);
    const Jet1 ps = psi_jet(p, t);
    const double ec = patch.recipe.epsilon * patch.recipe.h.c;
    m0 = t * t + ph.v + ec * ps.v;
    const double m1 = 2.0 * t + ph.d1 + ec * ps.d1;
    const double m2 = 2.0 + ph.d2 + ec * ps.d2;
    dm = m1 * dt;
    hm = m2 * dt * dt.transpose() + m1 * ht;
  }
  out.value = chi * m0;
  out.gradient = chi * dm + m0 * dchi;
  out.hessian = chi * hm + dchi * dm.transpose() + dm * dchi.transpose() + m0 * hchi;
  return out;
}

Jet StabilizedField::jet(const Vec& x) const {
  Jet j = base_->jet(x);
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    const Jet d = patch_jet(i, x);
    j.value += d.value;
    j.gradient += d.gradient;
    j.hessian += d.hessian;
  }
  return j;
}

std::string StabilizedField::describe() const {
  std::ostringstream os;
  os << base_->describe();
  for (const auto& p : patches_) {
    os << " + stab[" << p.chart.orbit_label << ", lambda=" << p.recipe.profile.lambda
       << ", delta=" << p.recipe.profile.delta << ", eps=" << p.recipe.epsilon << "]";
  }
  return os.str();
}

Scenario stabilize_at(const Scenario& s, const std::vector<StabilizationRecipe>& recipes) {
  Scenario out = s;
  std::vector<StabilizedField::Patch> patches;
  std::string suffix;
  for (const auto& r : recipes) {
    const SliceChart* c = s.slice_chart(r.target);
    if (!c) throw ConfigurationError("no slice chart for orbit '" + r.target + "' in scenario " + s.name);
    const BumpProfile& p = r.profile;
    // Normal-form coordinates have Hessian eigenvalues +-2.
    if (!(r.epsilon > 0.0) || !(r.epsilon < std::min(0.1, p.lambda * p.lambda) * 2.0)) {
      throw ConfigurationError("stabilization: epsilon outside the small-epsilon regime");
    }
    if (support_radius(p) >= c->validity_radius) {
      throw ConfigurationError("stabilization: profile support exceeds the slice chart");
    }
    if (slice_ball_radius(p) > c->validity_radius) {
      out.warnings.push_back("slice ball radius " + std::to_string(slice_ball_radius(p)) +
                             " exceeds the chart bound " + std::to_string(c->validity_radius) +
                             " at " + r.target);
    }
    patches.push_back({*c, r});
    suffix += "+" + r.target;

    std::vector<OrbitHint> hints;
    int orientation = 1;
    for (const auto& h : out.orbit_hints) {
      if (h.label == r.target) orientation = h.orientation;
      else hints.push_back(h);
    }
    hints.push_back({c->origin_label, c->center, c->origin_generators, orientation});
    hints.push_back({c->sphere_label, c->seed(p.t0, 0.0), c->sphere_generators, 1});
    out.orbit_hints = hints;
    for (double t : {0.0, 0.5 * p.t0, p.t0, 0.5 * (p.t0 + 3.0 * p.lambda)}) {
      for (int k = 0; k < 4; ++k) out.extra_seeds.push_back(c->seed(t, k * std::numbers::pi / 2));
    }
    out.params["lambda"] = p.lambda;
    out.params["delta"] = p.delta;
    out.params["epsilon"] = r.epsilon;
  }
  std::vector<SliceChart> charts;
  for (const auto& c : s.slice_charts) {
    bool used = false;
    for (const auto& r : recipes) used = used || r.target == c.orbit_label;
    if (!used) charts.push_back(c);
  }
  out.slice_charts = charts;
  out.function = std::make_shared<StabilizedField>(s.function, patches);
  out.name = s.name + suffix;
  return out;
}

Scenario apply_stabilization(const Scenario& s, const CriticalAnalysis& analysis,
                             const StabilizationRecipe& r) {
  const CriticalOrbit& o = analysis.by_label(r.target);
  if (o.stable) throw PreconditionError("stabilization refused: orbit " + r.target + " is already stable");
  if (r.h.kind != SphereFunction::Kind::constant) {
    throw ConfigurationError("stabilization: sphere function must be invariant under the isotropy group");
  }
  const SliceChart* c = s.slice_chart(r.target);
  if (!c) throw ConfigurationError("no slice chart for orbit '" + r.target + "'");
  // The split U- / U+ must be preserved by the isotropy group.
  const BumpProfile& p = r.profile;
  for (double el : o.isotropy.elements(*s.action, 8)) {
    for (double t : {p.lambda, 2.0 * p.lambda}) {
      for (int k = 0; k < 6; ++k) {
        const Vec x = c->seed(t, k * std::numbers::pi / 3);
        const Vec y = s.action->act(el, x);
        const double a = squared_norm(eval(c->stabilized, x), static_cast<int>(x.size())).value;
        const double b = squared_norm(eval(c->stabilized, y), static_cast<int>(y.size())).value;
        double ra = 0.0, rb = 0.0;
        for (const auto& f : c->rest) {
          ra += std::pow(f(x).value, 2);
          rb += std::pow(f(y).value, 2);
        }
        if (std::abs(a - b) > 1e-10 || std::abs(ra - rb) > 1e-10) {
          throw ConfigurationError("slice split is not invariant under the isotropy group of " + r.target);
        }
      }
    }
  }
  return stabilize_at(s, {r});
}

IndexShiftReport verify_index_shift(const Scenario& s_old, const CriticalAnalysis& old_analysis,
                                    const Scenario&, const CriticalAnalysis& new_analysis,
                                    const StabilizationRecipe& r) {
  const SliceChart* c = s_old.slice_chart(r.target);
  if (!c) throw ConfigurationError("no slice chart for orbit '" + r.target + "'");
  const BumpProfile& p = r.profile;
  IndexShiftReport rep;
  int origins = 0, spheres = 0;
  const CriticalOrbit& old = old_analysis.by_label(r.target);
  const bool old_ok = old.index == c->rest_negative + static_cast<int>(c->stabilized.size());
  for (const auto& o : new_analysis.orbits) {
    const Vec& x = o.representative;
    double rr = 0.0;
    for (const auto& f : c->rest) rr += std::pow(f(x).value, 2);
    if (std::sqrt(rr) > c->rest_inner) continue;
    double tt = 0.0;
    try {
      for (const auto& f : c->stabilized) tt += std::pow(f(x).value, 2);
    } catch (const DomainError&) {
      continue;
    }
    const double t = std::sqrt(tt);
    IndexShiftEntry e;
    e.label = o.label;
    e.radius = t;
    e.index = o.index;
    if (t < 0.1 * p.lambda) {
      e.origin = true;
      e.expected = c->rest_negative;
      ++origins;
    } else if (std::abs(t - p.t0) < 0.5 * p.lambda) {
      Vec u = Vec::Zero(static_cast<int>(c->stabilized.size()));
      u[0] = 1.0;
      e.expected = c->rest_negative + r.h.index_at(u) + 1;
      ++spheres;
    } else {
      continue;
    }
    e.ok = e.index == e.expected;
    rep.entries.push_back(e);
  }
  rep.ok = old_ok && origins == 1 && spheres >= 1 &&
           std::all_of(rep.entries.begin(), rep.entries.end(), [](const IndexShiftEntry& e) { return e.ok; });
  return rep;
}

double c1_distance(const Scenario& a, const Scenario& b, int density) {
  double sup = 0.0;
  for (const Vec& x : sample_points(a, density)) {
    const Jet ja = a.jet(x), jb = b.jet(x);
    const Vec ga = a.manifold->gradient(x, ja.gradient);
    const Vec gb = b.manifold->gradient(x, jb.gradient);
    sup = std::max(sup, std::abs(ja.value - jb.value) + a.manifold->norm(x, ga - gb));
  }
  return sup;
}

}  // namespace eqmorse
