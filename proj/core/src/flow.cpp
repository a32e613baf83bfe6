#include "eqmorse/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>

#include "eqmorse/ode.hpp"

namespace eqmorse {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;
// Orbits farther than this in value are not tested for capture.
constexpr double kValueGate = 1e-3;
constexpr double kStartTolerance = 1e-6;

const CriticalOrbit& orbit_by_id(const CriticalAnalysis& a, const std::string& id) {
  for (const auto& o : a.orbits) {
    if (o.id == id) return o;
  }
  throw PreconditionError("unknown orbit id " + id);
}

StepperOptions stepper_options(const FlowSettings& fs) {
  StepperOptions so;
  so.abs_tolerance = fs.tolerance;
  so.rel_tolerance = fs.tolerance;
  so.max_step = fs.max_step;
  return so;
}

double signed_value(const Scenario& s, const Vec& x, FlowDirection dir) {
  const double v = s.value(x);
  return dir == FlowDirection::down ? v : -v;
}

// Orbits the line can still approach: strictly below the current level.
std::vector<std::size_t> candidates(const Scenario& s, const CriticalAnalysis& a, const Vec& x,
                                    FlowDirection dir) {
  std::vector<std::size_t> out;
  const double fx = s.value(x);
  for (std::size_t i = 0; i < a.orbits.size(); ++i) {
    const double fo = a.orbits[i].value;
    const bool below = dir == FlowDirection::down ? fo < fx : fo > fx;
    if (below && std::abs(fx - fo) <= kValueGate) out.push_back(i);
  }
  return out;
}

Mat orthonormalize_positive(const Mat& e) {
  if (e.cols() == 0) return e;
  Eigen::HouseholderQR<Mat> qr(e);
  Mat q = qr.householderQ() * Mat::Identity(e.rows(), e.cols());
  const Mat r = qr.matrixQR();
  for (int i = 0; i < e.cols(); ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

struct CoreResult {
  FlowLine line;
  Mat frame;
  bool reached_stop = false;
};

// Shared integration loop. With `frame`, the variational equation is solved
// alongside; with `stop_at`, integration ends on first entry into its
// capture ball.
CoreResult integrate_core(const Scenario& s, const CriticalAnalysis& a, const Vec& x0,
                          FlowDirection dir, const FlowSettings& fs, const Mat* frame,
                          const CriticalOrbit* stop_at) {
  const int n = s.ambient_dimension();
  const int k = frame ? static_cast<int>(frame->cols()) : 0;
  const double sgn = dir == FlowDirection::down ? 1.0 : -1.0;
  CoreResult res;
  FlowLine& fl = res.line;

  auto rhs = [&](const Vec& y, Vec& dy) {
    const Vec x = y.head(n);
    dy.resize(y.size());
    dy.head(n) = sgn * s.flow_field(x);
    if (k > 0) {
      const Mat j = sgn * s.flow_jacobian(x);
      const Eigen::Map<const Mat> e(y.data() + n, n, k);
      Eigen::Map<Mat> de(dy.data() + n, n, k);
      de = j * e;
    }
  };

  Vec y(n + n * k);
  y.head(n) = s.manifold->canonical(x0);
  if (k > 0) {
    Eigen::Map<Mat>(y.data() + n, n, k) = orthonormalize_positive(*frame);
  }
  double t = 0.0;
  fl.times.push_back(t);
  fl.points.push_back(y.head(n));

  // The start may sit on an orbit at its own level, so no value ordering here.
  const double f0 = s.value(y.head(n));
  for (std::size_t i = 0; i < a.orbits.size(); ++i) {
    if (std::abs(a.orbits[i].value - f0) > kValueGate) continue;
    const OrbitLocation loc = locate_on_orbit(s, a.orbits[i], y.head(n));
    if (loc.distance <= kStartTolerance) {
      fl.status = FlowStatus::constant;
      fl.end_orbit = a.orbits[i].id;
      fl.end_distance = loc.distance;
      fl.end_point = loc.point;
      fl.end_parameter = loc.parameter;
      if (k > 0) res.frame = *frame;
      return res;
    }
  }

  AdaptiveStepper stepper(rhs, stepper_options(fs));
  const double refine = fs.capture_radius * 1e-3;
  long in_ball = -1;
  double dmin = 0.0;
  std::size_t dmin_sample = 0;
  double prev_value = signed_value(s, y.head(n), dir);

  while (t < fs.t_max) {
    stepper.step(y, t, fs.t_max);
    const Vec raw = y.head(n);
    const Vec x = s.manifold->canonical(raw);
    if (k > 0) {
      Eigen::Map<Mat> e(y.data() + n, n, k);
      const Mat moved = s.manifold->canonical_jacobian(raw) * e;
      Mat tangent(n, k);
      for (int c = 0; c < k; ++c) tangent.col(c) = s.manifold->project(x, moved.col(c));
      e = orthonormalize_positive(tangent);
    }
    y.head(n) = x;
    fl.times.push_back(t);
    fl.points.push_back(x);
    const double value = signed_value(s, x, dir);
    fl.max_value_increase = std::max(fl.max_value_increase, value - prev_value);
    prev_value = value;
    const std::size_t sample = fl.points.size() - 1;

    if (stop_at) {
      if (orbit_distance(s, *stop_at, x) <= fs.capture_radius) {
        res.reached_stop = true;
        fl.end_orbit = stop_at->id;
        break;
      }
    }

    if (in_ball >= 0) {
      const CriticalOrbit& o = a.orbits[static_cast<std::size_t>(in_ball)];
      const double d = orbit_distance(s, o, x);
      if (d < dmin) {
        dmin = d;
        dmin_sample = sample;
      }
      const double speed = s.manifold->norm(x, s.flow_field(x));
      if (d <= refine || speed < 1e-12) {
        const OrbitLocation loc = locate_on_orbit(s, o, x);
        fl.status = FlowStatus::converged;
        fl.end_orbit = o.id;
        fl.end_distance = loc.distance;
        fl.end_point = loc.point;
        fl.end_parameter = loc.parameter;
        break;
      }
      if (d > fs.capture_radius) {
        fl.near_misses.push_back({o.id, dmin, dmin_sample});
        in_ball = -1;
      }
      continue;
    }
    for (std::size_t i : candidates(s, a, x, dir)) {
      const double d = orbit_distance(s, a.orbits[i], x);
      if (d <= fs.capture_radius) {
        in_ball = static_cast<long>(i);
        dmin = d;
        dmin_sample = sample;
        fl.capture_sample = sample;
        break;
      }
    }
  }
  if (fl.status == FlowStatus::unresolved && in_ball >= 0 && !stop_at) {
    fl.near_misses.push_back({a.orbits[static_cast<std::size_t>(in_ball)].id, dmin, dmin_sample});
  }
  if (k > 0) res.frame = Eigen::Map<const Mat>(y.data() + n, n, k);
  return res;
}

double angle_of(const Mat& frame, const Scenario& s, const Vec& p, const Vec& u) {
  if (frame.cols() == 1) return s.manifold->inner(p, frame.col(0), u) >= 0 ? 0.0 : std::numbers::pi;
  double ang = std::atan2(s.manifold->inner(p, frame.col(1), u), s.manifold->inner(p, frame.col(0), u));
  if (ang < 0) ang += kTwoPi;
  return ang;
}

Vec direction_at(const Mat& frame, double angle) {
  if (frame.cols() == 1) return std::cos(angle) >= 0 ? Vec(frame.col(0)) : Vec(-frame.col(0));
  return std::cos(angle) * frame.col(0) + std::sin(angle) * frame.col(1);
}

std::vector<double> source_parameters(const Scenario& s, const CriticalOrbit& o, int samples) {
  std::vector<double> out;
  if (o.component_dim > o.orbit_dim || o.orbit_dim == 1) {
    const double per = orbit_period(s, o);
    for (int m = 0; m < samples; ++m) out.push_back(per * m / samples);
    return out;
  }
  return o.sample_parameters;
}

std::vector<double> ray_angles(const CriticalOrbit& o, int directions) {
  if (o.index == 1) return {0.0, std::numbers::pi};
  if (o.index == 2) {
    std::vector<double> out;
    for (int j = 0; j < directions; ++j) out.push_back(kTwoPi * j / directions);
    return out;
  }
  throw PreconditionError("shooting from orbit " + o.label + " of index " +
                          std::to_string(o.index) + " is not supported");
}

double wrap(double v, double period) {
  double r = std::fmod(v, period);
  if (r < 0) r += period;
  return r;
}

double centered(double v, double period) {
  double r = wrap(v, period);
  if (r > period / 2) r -= period;
  return r;
}

}  // namespace

std::string to_string(FlowStatus st) {
  switch (st) {
    case FlowStatus::converged:
      return "converged";
    case FlowStatus::near_miss:
      return "near_miss";
    case FlowStatus::constant:
      return "constant";
    case FlowStatus::unresolved:
      return "unresolved";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::transverse:
      return "transverse";
    case Verdict::failure_detected:
      return "failure_detected";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

FlowLine integrate_flow(const Scenario& s, const CriticalAnalysis& a, const Vec& x0,
                        FlowDirection dir, const FlowSettings& fs) {
  FlowLine fl = integrate_core(s, a, x0, dir, fs, nullptr, nullptr).line;
  fl.start_point = fl.points.front();
  return fl;
}

Vec flow_map(const Scenario& s, const Vec& x0, double t, FlowDirection dir, const FlowSettings& fs) {
  const double sgn = dir == FlowDirection::down ? 1.0 : -1.0;
  AdaptiveStepper stepper([&](const Vec& y, Vec& dy) { dy = sgn * s.flow_field(y); },
                          stepper_options(fs));
  Vec y = s.manifold->canonical(x0);
  double time = 0.0;
  while (time < t) {
    stepper.step(y, time, t);
    y = s.manifold->canonical(y);
  }
  return y;
}

double orbit_period(const Scenario& s, const CriticalOrbit& o) {
  if (o.component_dim > o.orbit_dim) return static_cast<double>(o.samples.size());
  if (o.orbit_dim == 1) {
    const int iso = o.isotropy.kind == IsotropyKind::cyclic ? o.isotropy.order : 1;
    return s.action->period() / iso;
  }
  return static_cast<double>(std::max(1, s.action->order()));
}

Vec orbit_point(const Scenario& s, const CriticalOrbit& o, double parameter) {
  if (o.component_dim > o.orbit_dim) {
    const std::size_t n = o.samples.size();
    const double p = wrap(parameter, static_cast<double>(n));
    const std::size_t i = static_cast<std::size_t>(std::floor(p)) % n;
    const double w = p - std::floor(p);
    const Vec& a = o.samples[i];
    const Vec& b = o.samples[(i + 1) % n];
    return s.manifold->canonical(a + w * s.manifold->displacement(a, b));
  }
  if (o.orbit_dim == 1) return s.action->act(parameter, o.representative);
  if (s.action->kind() == GroupKind::finite_cyclic) {
    return s.action->act(std::round(parameter), o.representative);
  }
  return o.representative;
}

FlowLine shoot_ray(const Scenario& s, const CriticalAnalysis& a, const CriticalOrbit& o,
                   double parameter, double angle, const FlowSettings& fs) {
  const Vec p = orbit_point(s, o, parameter);
  const Mat frame = frame_at(s, o, p);
  const Vec u = direction_at(frame, angle);
  const Vec x0 = s.manifold->canonical(p + fs.seed_radius * u / s.manifold->norm(p, u));
  FlowLine fl = integrate_flow(s, a, x0, FlowDirection::down, fs);
  fl.start_orbit = o.id;
  fl.start_point = p;
  fl.start_direction = u / s.manifold->norm(p, u);
  fl.source_parameter = parameter;
  fl.direction_angle = angle;
  return fl;
}

std::vector<FlowLine> shoot_descending_sphere(const Scenario& s, const CriticalAnalysis& a,
                                              const CriticalOrbit& o, const FlowSettings& fs) {
  if (o.index < 1) throw PreconditionError("orbit " + o.label + " has no descending directions");
  std::vector<FlowLine> out;
  for (double par : source_parameters(s, o, fs.samples)) {
    for (double ang : ray_angles(o, fs.directions)) out.push_back(shoot_ray(s, a, o, par, ang, fs));
  }
  std::stable_sort(out.begin(), out.end(), [](const FlowLine& x, const FlowLine& y) {
    if (x.source_parameter != y.source_parameter) return x.source_parameter < y.source_parameter;
    return x.direction_angle < y.direction_angle;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<int>(i);
  return out;
}

namespace {

// Determinant of the change of basis expressing `e` in the columns of `b`,
// both at x; `e` is orthonormalized in the metric first.
double basis_determinant(const Scenario& s, const Vec& x, Mat e, const Mat& b) {
  const int k = static_cast<int>(e.cols());
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < c; ++j) e.col(c) -= s.manifold->inner(x, e.col(j), e.col(c)) * e.col(j);
    e.col(c) /= s.manifold->norm(x, e.col(c));
  }
  Mat gbb(k, k), gbe(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      gbb(i, j) = s.manifold->inner(x, b.col(i), b.col(j));
      gbe(i, j) = s.manifold->inner(x, b.col(i), e.col(j));
    }
  }
  return gbb.ldlt().solve(gbe).determinant();
}

Mat target_basis(const Scenario& s, const CriticalOrbit& tgt, const Vec& x) {
  const Vec v = s.flow_field(x);
  const Mat ft = frame_at(s, tgt, x);
  Mat b(x.size(), ft.cols() + 1);
  b.col(0) = v / s.manifold->norm(x, v);
  for (int c = 0; c < ft.cols(); ++c) b.col(c + 1) = ft.col(c) / s.manifold->norm(x, ft.col(c));
  return b;
}

}  // namespace

int orientation_sign(const Scenario& s, const CriticalAnalysis& a, const FlowLine& fl,
                     const FlowSettings& fs, std::size_t start_sample, double* determinant) {
  const CriticalOrbit& src = orbit_by_id(a, fl.start_orbit);
  const CriticalOrbit& tgt = orbit_by_id(a, fl.end_orbit);
  if (!src.stable || !tgt.stable) {
    throw PreconditionError("orientation needs stable endpoints: " + src.label + ", " + tgt.label);
  }
  if (src.index - tgt.index != 1) {
    throw PreconditionError("orientation sign is defined for index gap 1");
  }
  if (start_sample >= fl.points.size()) throw PreconditionError("start sample out of range");
  double det = 0.0;
  if (fl.from_ascent) {
    const Vec x0 = fl.points[fl.points.size() - 1 - start_sample];
    const Mat b0 = target_basis(s, tgt, x0);
    const CoreResult cr = integrate_core(s, a, x0, FlowDirection::up, fs, &b0, &src);
    if (!cr.reached_stop) {
      throw NumericalError("orientation transport from " + tgt.label + " did not reach " + src.label);
    }
    const Vec x = cr.line.points.back();
    det = basis_determinant(s, x, cr.frame, frame_at(s, src, x));
  } else {
    const Mat e0 = frame_at(s, src, fl.start_point);
    const CoreResult cr =
        integrate_core(s, a, fl.points[start_sample], FlowDirection::down, fs, &e0, &tgt);
    if (!cr.reached_stop) {
      throw NumericalError("orientation transport from " + src.label + " did not reach " + tgt.label);
    }
    const Vec x = cr.line.points.back();
    det = basis_determinant(s, x, cr.frame, target_basis(s, tgt, x));
  }
  if (determinant) *determinant = det;
  if (std::abs(det) < 1e-6) {
    throw NumericalError("near-degenerate orientation on a line from " + src.label + " to " +
                         tgt.label);
  }
  return (det > 0 ? 1 : -1) * src.orientation * tgt.orientation;
}

int moduli_dimension(const CriticalOrbit& source, const CriticalOrbit& target) {
  return source.index - target.index + source.orbit_dim - 1;
}

long ModuliCover::signed_count() const {
  long sum = 0;
  for (const auto& sh : sheets) sum += sh.sign;
  return sum;
}

namespace {

int winding(const Scenario& s, const CriticalOrbit& src, const CriticalOrbit& tgt) {
  if (src.orbit_dim != 1 || tgt.orbit_dim != 1) return 0;
  return static_cast<int>(std::lround(orbit_period(s, src) / orbit_period(s, tgt)));
}

// Gap 1 from an index-1 source: the rays themselves.
void cover_from_rays(const Scenario& s, const CriticalAnalysis& a, const CriticalOrbit& src,
                     const CriticalOrbit& tgt, const std::vector<FlowLine>& shots,
                     const FlowSettings& fs, ModuliCover& cov) {
  std::map<double, std::vector<const FlowLine*>> by_point;
  for (const auto& fl : shots) {
    if (fl.start_orbit != src.id) continue;
    auto& slot = by_point[fl.source_parameter];
    if (fl.status == FlowStatus::converged && fl.end_orbit == tgt.id) slot.push_back(&fl);
  }
  if (by_point.empty()) throw PreconditionError("no shooting data for orbit " + src.label);
  std::vector<CoverSheet> sheets;
  bool first = true;
  for (const auto& [par, lines] : by_point) {
    cov.sheet_counts.push_back(static_cast<int>(lines.size()));
    std::vector<CoverSheet> here;
    for (const FlowLine* fl : lines) {
      CoverSheet sh;
      sh.sign = orientation_sign(s, a, *fl, fs);
      sh.target_winding = winding(s, src, tgt);
      sh.direction_angle = fl->direction_angle;
      here.push_back(sh);
    }
    if (first) {
      sheets = here;
      for (const FlowLine* fl : lines) {
        FlowLine copy = *fl;
        copy.sign = 0;
        cov.lines.push_back(copy);
      }
      for (std::size_t i = 0; i < here.size(); ++i) cov.lines[i].sign = here[i].sign;
      first = false;
      continue;
    }
    if (here.size() != sheets.size()) {
      throw NumericalError("cover extraction unstable: sheet count of M(" + src.label + ", " +
                           tgt.label + ") varies over the source orbit");
    }
    // Frames are carried by the group action, so a sheet keeps its angle.
    for (const auto& sh : here) {
      auto it = std::min_element(sheets.begin(), sheets.end(), [&](const CoverSheet& x, const CoverSheet& y) {
        return std::abs(centered(x.direction_angle - sh.direction_angle, kTwoPi)) <
               std::abs(centered(y.direction_angle - sh.direction_angle, kTwoPi));
      });
      if (it->sign != sh.sign) {
        throw NumericalError("orientation sign varies along a sheet of M(" + src.label + ", " +
                             tgt.label + ")");
      }
    }
  }
  cov.sheets = sheets;
}

// Gap 1 from a source of index >= 2: ascend from the target representative,
// carry each line back to the source representative by the group, and
// re-integrate it downward for the sign.
void cover_from_ascent(const Scenario& s, const CriticalAnalysis& a, const CriticalOrbit& src,
                       const CriticalOrbit& tgt, const FlowSettings& fs, ModuliCover& cov) {
  const NormalDecomposition nd = normal_decomposition(s, tgt);
  if (nd.positive.cols() != 1) {
    throw PreconditionError("ascending reconstruction needs one ascending direction at " + tgt.label);
  }
  const Vec q = tgt.representative;
  const Mat src_frame = frame_at(s, src, src.representative);
  std::vector<FlowLine> found;
  for (double side : {1.0, -1.0}) {
    const Vec u = side * nd.positive.col(0);
    const Vec x0 = s.manifold->canonical(q + fs.seed_radius * u / s.manifold->norm(q, u));
    const FlowLine up = integrate_flow(s, a, x0, FlowDirection::up, fs);
    if (up.status != FlowStatus::converged || up.end_orbit != src.id) continue;
    const double g = s.action->reduce(-up.end_parameter);
    FlowLine down;
    down.from_ascent = true;
    const double t_end = up.times.back();
    for (std::size_t i = up.points.size(); i-- > 0;) {
      down.times.push_back(t_end - up.times[i]);
      down.points.push_back(s.action->act(g, up.points[i]));
    }
    const Vec disp = s.manifold->displacement(src.representative, down.points.front());
    const double ang = angle_of(src_frame, s, src.representative, disp);
    bool dup = false;
    for (const auto& f : found) dup = dup || std::abs(centered(f.direction_angle - ang, kTwoPi)) < 1e-4;
    if (dup) continue;
    const OrbitLocation loc = locate_on_orbit(s, tgt, down.points.back());
    down.status = FlowStatus::converged;
    down.start_orbit = src.id;
    down.end_orbit = tgt.id;
    down.end_point = loc.point;
    down.end_parameter = loc.parameter;
    down.end_distance = loc.distance;
    down.capture_sample = down.points.size() - 1;
    down.start_point = src.representative;
    down.start_direction = disp / s.manifold->norm(src.representative, disp);
    down.direction_angle = ang;
    down.source_parameter = 0.0;
    found.push_back(down);
  }
  std::sort(found.begin(), found.end(),
            [](const FlowLine& x, const FlowLine& y) { return x.direction_angle < y.direction_angle; });
  cov.sheet_counts.push_back(static_cast<int>(found.size()));
  for (auto& fl : found) {
    fl.id = static_cast<int>(cov.lines.size());
    fl.sign = orientation_sign(s, a, fl, fs);
    cov.sheets.push_back({fl.sign, winding(s, src, tgt), fl.direction_angle});
    cov.lines.push_back(fl);
  }
}

// Gap 2: the fiber over a source point is an arc of directions; integrate
// the change of the target parameter along it. The fiber is oriented so
// that (fiber tangent, outgoing direction) is positive in the source frame,
// i.e. by decreasing angle.
void cover_from_fibers(const Scenario& s, const CriticalAnalysis& a, const CriticalOrbit& src,
                       const CriticalOrbit& tgt, const FlowSettings& fs, ModuliCover& cov) {
  const int m = fs.fiber_samples;
  const double per_t = tgt.orbit_dim == 1 ? orbit_period(s, tgt) : 0.0;
  std::vector<double> params{0.0};
  if (src.orbit_dim == 1) params.push_back(orbit_period(s, src) / 2);
  std::vector<double> integrals;
  for (double par : params) {
    std::vector<FlowLine> ring;
    for (int j = 0; j < m; ++j) ring.push_back(shoot_ray(s, a, src, par, kTwoPi * j / m, fs));
    auto hit = [&](int j) {
      const FlowLine& fl = ring[static_cast<std::size_t>((j % m + m) % m)];
      // A ray grazing a saddle lies on an arc boundary.
      return fl.status == FlowStatus::converged && fl.end_orbit == tgt.id && fl.near_misses.empty();
    };
    std::vector<FiberArc> arcs;
    int begin = -1;
    for (int j = 0; j < m; ++j) {
      if (hit(j) && !hit(j - 1)) {
        begin = j;
        break;
      }
    }
    if (begin < 0 && hit(0)) throw NumericalError("fiber of M(" + src.label + ", " + tgt.label + ") is a full circle");
    if (begin >= 0) {
      for (int j = begin; j < begin + m; ++j) {
        if (!hit(j) || hit(j - 1)) continue;
        FiberArc arc;
        arc.angle_begin = kTwoPi * (j % m) / m;
        int e = j;
        double delta = 0.0;
        while (hit(e + 1) && e + 1 < j + m) {
          if (per_t > 0) {
            const double p0 = ring[static_cast<std::size_t>(e % m)].end_parameter;
            const double p1 = ring[static_cast<std::size_t>((e + 1) % m)].end_parameter;
            delta += centered(p1 - p0, per_t);
          }
          ++e;
        }
        arc.angle_end = kTwoPi * (e % m) / m;
        arc.delta = delta;
        arcs.push_back(arc);
      }
    }
    double integral = 0.0;
    for (const auto& arc : arcs) integral -= arc.delta;
    integrals.push_back(integral);
    cov.sheet_counts.push_back(static_cast<int>(arcs.size()));
    if (cov.arcs.empty() && par == params.front()) {
      cov.arcs = arcs;
      for (auto& fl : ring) {
        if (fl.status == FlowStatus::converged && fl.end_orbit == tgt.id) {
          fl.id = static_cast<int>(cov.lines.size());
          cov.lines.push_back(fl);
        }
      }
    }
  }
  for (double v : integrals) {
    if (std::abs(v - integrals.front()) > 1e-3) {
      throw NumericalError("cover extraction unstable: fiber integral of M(" + src.label + ", " +
                           tgt.label + ") varies over the source orbit");
    }
  }
  const double value = integrals.front();
  cov.fiber_integral = value;
  for (long den = 1; den <= 4; ++den) {
    const long num = std::lround(value * static_cast<double>(den));
    if (std::abs(value - static_cast<double>(num) / static_cast<double>(den)) <= 1e-3) {
      cov.fiber_num = num;
      cov.fiber_den = den;
      return;
    }
  }
  throw NumericalError("fiber integral of M(" + src.label + ", " + tgt.label + ") = " +
                       std::to_string(value) + " does not snap to a rational with denominator <= 4");
}

}  // namespace

ModuliCover extract_moduli_cover(const Scenario& s, const CriticalAnalysis& a,
                                 const CriticalOrbit& source, const CriticalOrbit& target,
                                 const std::vector<FlowLine>& shots, const FlowSettings& fs) {
  ModuliCover cov;
  cov.source_orbit = source.id;
  cov.target_orbit = target.id;
  cov.index_gap = source.index - target.index;
  cov.dim = moduli_dimension(source, target);
  cov.fiber_dim = cov.dim - source.orbit_dim;
  if (source.id == target.id || cov.index_gap <= 0) {
    cov.method = "none";
    cov.negative_virtual_dimension = cov.dim < 0;
    return cov;
  }
  if (source.component_dim > source.orbit_dim) {
    throw PreconditionError("moduli covers need G-Morse-Bott orbits; " + source.label +
                            " is a Morse-Bott component");
  }
  if (cov.index_gap == 1 && source.index == 1) {
    cov.method = "descending";
    cover_from_rays(s, a, source, target, shots, fs, cov);
  } else if (cov.index_gap == 1) {
    cov.method = "ascending";
    cover_from_ascent(s, a, source, target, fs, cov);
  } else if (cov.index_gap == 2 && cov.fiber_dim == 1) {
    cov.method = "fiber";
    cover_from_fibers(s, a, source, target, fs, cov);
  } else {
    throw PreconditionError("moduli covers with index gap " + std::to_string(cov.index_gap) +
                            " are not supported");
  }
  return cov;
}

ModuliCover extract_moduli_cover(const Scenario& s, const CriticalAnalysis& a,
                                 const CriticalOrbit& source, const CriticalOrbit& target,
                                 const FlowSettings& fs) {
  std::vector<FlowLine> shots;
  if (source.index == 1 && target.index == 0 && source.id != target.id) {
    shots = shoot_descending_sphere(s, a, source, fs);
  }
  return extract_moduli_cover(s, a, source, target, shots, fs);
}

namespace {

struct PairKey {
  std::size_t src;
  std::size_t tgt;
  bool operator<(const PairKey& o) const { return src != o.src ? src < o.src : tgt < o.tgt; }
};

struct Bisection {
  std::optional<FlowLine> witness;
  std::string orbit;
};

// Shrinks [lo, hi] around the basin boundary of a one-parameter family of
// lines and returns the boundary line, truncated at its closest approach to
// the orbit it passes (or the line itself if it converges there).
Bisection bisect_family(const std::function<FlowLine(double)>& make,
                        const std::function<bool(const FlowLine&, const FlowLine&)>& same_end,
                        double lo, double hi) {
  Bisection out;
  FlowLine line_lo = make(lo), line_hi = make(hi);
  const std::string end_lo = line_lo.end_orbit, end_hi = line_hi.end_orbit;
  for (int it = 0; it < 60 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    FlowLine m = make(mid);
    if (m.status == FlowStatus::converged && m.end_orbit != end_lo && m.end_orbit != end_hi) {
      out.witness = m;
      out.orbit = m.end_orbit;
      return out;
    }
    if (same_end(m, line_lo)) {
      lo = mid;
      line_lo = std::move(m);
    } else {
      hi = mid;
      line_hi = std::move(m);
    }
  }
  const NearMiss* best = nullptr;
  const FlowLine* owner = nullptr;
  for (const FlowLine* fl : {&line_lo, &line_hi}) {
    for (const auto& nm : fl->near_misses) {
      if (nm.orbit == end_lo || nm.orbit == end_hi) continue;
      if (!best || nm.distance < best->distance) {
        best = &nm;
        owner = fl;
      }
    }
  }
  if (!best) return out;
  FlowLine w = *owner;
  w.times.resize(best->sample + 1);
  w.points.resize(best->sample + 1);
  w.status = FlowStatus::near_miss;
  w.end_orbit = best->orbit;
  w.end_distance = best->distance;
  w.near_misses.clear();
  out.witness = std::move(w);
  out.orbit = best->orbit;
  return out;
}

}  // namespace

std::vector<TransversalityReport> diagnose_transversality(
    const Scenario& s, const CriticalAnalysis& a, const FlowSettings& fs,
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < a.orbits.size(); ++i) pos[a.orbits[i].id] = i;
  std::map<PairKey, TransversalityReport> found;

  // Lines end in the same basin; points of a discrete orbit are told apart.
  auto same_end = [&](const FlowLine& x, const FlowLine& y) {
    if (x.end_orbit != y.end_orbit) return false;
    if (x.status != FlowStatus::converged || y.status != FlowStatus::converged) return true;
    const CriticalOrbit& o = a.orbits[pos.at(x.end_orbit)];
    if (o.orbit_dim > 0 || o.component_dim > 0) return true;
    return s.manifold->distance(x.end_point, y.end_point) < 10 * fs.capture_radius;
  };

  auto record = [&](const CriticalOrbit& src, const std::string& tgt_id, const FlowLine& witness,
                    int observed, const std::string& how) {
    const CriticalOrbit& tgt = a.orbits[pos.at(tgt_id)];
    TransversalityReport& r = found[{pos.at(src.id), pos.at(tgt_id)}];
    const bool fresh = r.source.empty();
    r.source = src.id;
    r.target = tgt.id;
    r.expected_dim = src.index - tgt.index - 1;
    r.weak_self_indexing_violated = src.index <= tgt.index;
    if (fresh || observed > r.observed_family_dim) {
      r.observed_family_dim = observed;
      r.witness = witness;
      r.note = how;
    }
  };

  for (const auto& src : a.orbits) {
    if (src.index < 1) continue;
    const std::vector<FlowLine> shots = shoot_descending_sphere(s, a, src, fs);
    const std::vector<double> params = source_parameters(s, src, fs.samples);
    const std::vector<double> angles = ray_angles(src, fs.directions);
    const std::size_t na = angles.size();
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
      for (std::size_t ai = 0; ai < na; ++ai) {
        const FlowLine& fl = shots[pi * na + ai];
        if (fl.status != FlowStatus::converged) continue;
        int observed = 0;
        if (src.index == 2) {
          const FlowLine& next = shots[pi * na + (ai + 1) % na];
          const FlowLine& prev = shots[pi * na + (ai + na - 1) % na];
          if (next.end_orbit == fl.end_orbit || prev.end_orbit == fl.end_orbit) observed = 1;
        }
        record(src, fl.end_orbit, fl, observed, "direct shooting");
      }
    }
    // Basin boundaries on the descending circle at the first source point.
    if (src.index == 2) {
      for (std::size_t ai = 0; ai < na; ++ai) {
        const FlowLine& l0 = shots[ai];
        const FlowLine& l1 = shots[(ai + 1) % na];
        if (l0.status != FlowStatus::converged || l1.status != FlowStatus::converged) continue;
        if (same_end(l0, l1)) continue;
        const double hi = ai + 1 == na ? kTwoPi : angles[ai + 1];
        const double par = params.front();
        const Bisection b = bisect_family(
            [&](double ang) { return shoot_ray(s, a, src, par, ang, fs); }, same_end, angles[ai],
            hi);
        if (b.witness && b.witness->end_distance <= 1e-4) {
          record(src, b.orbit, *b.witness, 0, "basin boundary on the descending sphere");
        }
      }
    }
    // Basin boundaries along a Morse-Bott component.
    if (src.component_dim > src.orbit_dim) {
      const double per = orbit_period(s, src);
      for (std::size_t ai = 0; ai < na; ++ai) {
        for (std::size_t pi = 0; pi < params.size(); ++pi) {
          const FlowLine& l0 = shots[pi * na + ai];
          const FlowLine& l1 = shots[((pi + 1) % params.size()) * na + ai];
          if (l0.status != FlowStatus::converged || l1.status != FlowStatus::converged) continue;
          if (same_end(l0, l1)) continue;
          const double hi = pi + 1 == params.size() ? per : params[pi + 1];
          const double ang = angles[ai];
          const Bisection b = bisect_family(
              [&](double par) { return shoot_ray(s, a, src, par, ang, fs); }, same_end,
              params[pi], hi);
          if (b.witness && b.witness->end_distance <= 1e-4) {
            record(src, b.orbit, *b.witness, 0, "basin boundary along the critical component");
          }
        }
      }
    }
  }

  std::vector<TransversalityReport> out;
  for (auto& [key, r] : found) {
    r.verdict = r.observed_family_dim > r.expected_dim ? Verdict::failure_detected : Verdict::transverse;
    if (r.verdict == Verdict::transverse) r.note += "; dimension matches";
    out.push_back(r);
  }
  for (const auto& [sid, tid] : pairs) {
    const PairKey key{pos.at(sid), pos.at(tid)};
    if (found.count(key)) continue;
    TransversalityReport r;
    r.source = sid;
    r.target = tid;
    r.expected_dim = a.orbits[key.src].index - a.orbits[key.tgt].index - 1;
    r.observed_family_dim = -1;
    r.verdict = Verdict::inconclusive;
    r.note = "no connecting line found";
    out.push_back(r);
  }
  return out;
}

void write_flow_csv(std::ostream& out, const Scenario& s, const std::vector<FlowLine>& lines) {
  out << "line_id,t,chart,c1,c2,c3\n";
  std::vector<const FlowLine*> order;
  for (const auto& fl : lines) order.push_back(&fl);
  std::stable_sort(order.begin(), order.end(),
                   [](const FlowLine* x, const FlowLine* y) { return x->id < y->id; });
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
    return std::string(buf);
  };
  for (const FlowLine* fl : order) {
    for (std::size_t i = 0; i < fl->points.size(); ++i) {
      const Vec& x = fl->points[i];
      out << fl->id << ',' << num(fl->times[i]) << ',' << s.manifold->chart_id(x);
      for (int c = 0; c < 3; ++c) {
        out << ',';
        if (c < x.size()) out << num(x[c]);
      }
      out << '\n';
    }
  }
}

}  // namespace eqmorse
