#include "eqmorse/critstruct.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace eqmorse {

namespace {

constexpr int kOrbitSamples = 64;

Mat left_inverse(const Mat& e) {
  return (e.transpose() * e).ldlt().solve(e.transpose());
}

struct LocalData {
  Mat E;
  Mat G;
  Vec g;
  Mat H;
  Vec X;
};

LocalData local_data(const Scenario& s, const Vec& x) {
  const Jet j = s.jet(x);
  LocalData ld;
  ld.E = s.manifold->tangent_basis(x);
  ld.G = s.manifold->metric_matrix(x);
  ld.g = ld.E.transpose() * j.gradient;
  ld.H = s.manifold->hessian_form(x, j.gradient, j.hessian);
  ld.X = left_inverse(ld.E) * s.action->fundamental_field(x);
  return ld;
}

double grad_norm(const LocalData& ld) {
  return std::sqrt(std::max(0.0, ld.g.dot(ld.G.ldlt().solve(ld.g))));
}

double gradient_norm_at(const Scenario& s, const Vec& x) {
  const Jet j = s.jet(x);
  return s.manifold->norm(x, s.manifold->gradient(x, j.gradient));
}

// Euclidean orthonormal complement of the span of the columns of d.
Mat complement(const Mat& d, int n) {
  if (d.cols() == 0) return Mat::Identity(n, n);
  Eigen::ColPivHouseholderQR<Mat> qr(d);
  const int r = static_cast<int>(qr.rank());
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - r);
}

Vec pinv_solve(const Mat& a, const Vec& b) {
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  const double cut = 1e-10 * (sv.size() ? sv[0] : 0.0);
  Vec y = Vec::Zero(a.cols());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > cut && sv[i] > 1e-300) {
      y += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(b) / sv[i]);
    }
  }
  return y;
}

struct NewtonResult {
  Vec x;
  bool converged = false;
  double grad = 0.0;
};

// Newton on df = 0 restricted to the complement of the orbit directions and
// of `excluded` (ambient vectors), with backtracking on |grad f|.
NewtonResult newton(const Scenario& s, const Vec& x0, const std::vector<Vec>& excluded,
                    const CritOptions& opts) {
  Vec x = s.manifold->canonical(x0);
  const int d = s.dimension();
  double gn = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const LocalData ld = local_data(s, x);
    gn = grad_norm(ld);
    if (gn < opts.gradient_tolerance) return {x, true, gn};
    const Mat einv = left_inverse(ld.E);
    std::vector<Vec> dirs;
    if (ld.X.norm() > 1e-10) dirs.push_back(ld.X);
    for (const Vec& e : excluded) dirs.push_back(einv * e);
    Mat dm(d, static_cast<int>(dirs.size()));
    for (std::size_t i = 0; i < dirs.size(); ++i) dm.col(static_cast<int>(i)) = dirs[i];
    const Mat b = complement(dm, d);
    const Vec y = pinv_solve(b.transpose() * ld.H * b, -(b.transpose() * ld.g));
    Vec step = b * y;
    if (step.norm() > 0.2) step *= 0.2 / step.norm();
    double alpha = 1.0;
    Vec xn = x;
    for (int k = 0; k < 12; ++k) {
      xn = s.manifold->canonical(x + ld.E * (alpha * step));
      if (grad_norm(local_data(s, xn)) < gn) break;
      alpha *= 0.5;
    }
    x = xn;
  }
  gn = gradient_norm_at(s, x);
  return {x, gn < 10.0 * opts.gradient_tolerance, gn};
}

double golden_min(const std::function<double(double)>& f, double a, double b, double* arg) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 80 && b - a > 1e-15; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = fc < fd ? c : d;
  if (arg) *arg = x;
  return std::min(fc, fd);
}

IsotropyDescriptor compute_isotropy(const Scenario& s, const Vec& p, int orbit_dim) {
  const GroupAction& g = *s.action;
  IsotropyDescriptor iso;
  if (g.kind() == GroupKind::trivial) return iso;
  if (g.kind() == GroupKind::finite_cyclic) {
    int count = 1;
    double gen = 0.0;
    for (int k = 1; k < g.order(); ++k) {
      if (s.manifold->distance(g.act(k, p), p) < 1e-10) {
        if (count == 1) gen = k;
        ++count;
      }
    }
    if (count > 1) {
      iso.kind = IsotropyKind::cyclic;
      iso.order = count;
      iso.generators = {gen};
    }
    return iso;
  }
  if (orbit_dim == 0) {
    iso.kind = IsotropyKind::full_circle;
    iso.order = 0;
    return iso;
  }
  const double period = g.period();
  const int n = 720;
  std::vector<double> dist(n + 1);
  for (int i = 0; i <= n; ++i) dist[i] = s.manifold->distance(g.act(period * i / n, p), p);
  int count = 1;
  for (int i = 1; i < n; ++i) {
    if (dist[i] <= dist[i - 1] && dist[i] <= dist[i + 1] && dist[i] < 0.05) {
      const double m = golden_min(
          [&](double t) { return s.manifold->distance(g.act(t, p), p); },
          period * (i - 1) / n, period * (i + 1) / n, nullptr);
      if (m < 1e-9) ++count;
    }
  }
  if (count > 1) {
    iso.kind = IsotropyKind::cyclic;
    iso.order = count;
    iso.generators = {period / count};
  }
  return iso;
}

// Normal decomposition at p. `tangent_extra` lists ambient directions that
// belong to the critical set but not to the orbit (Morse-Bott components).
NormalDecomposition decompose(const Scenario& s, const Vec& p, const IsotropyDescriptor& iso,
                              const std::vector<Vec>& tangent_extra) {
  const LocalData ld = local_data(s, p);
  const int d = s.dimension();
  const Mat einv = left_inverse(ld.E);
  auto ginner = [&](const Vec& a, const Vec& b) { return a.dot(ld.G * b); };

  std::vector<Vec> tangent;
  auto push_orthonormal = [&](Vec v, std::vector<Vec>& into, const std::vector<Vec>& against) {
    for (const Vec& u : against) v -= ginner(u, v) * u;
    for (const Vec& u : into) v -= ginner(u, v) * u;
    const double n = std::sqrt(std::max(0.0, ginner(v, v)));
    if (n < 1e-8) return false;
    into.push_back(v / n);
    return true;
  };
  if (ld.X.norm() > 1e-10) push_orthonormal(ld.X, tangent, {});
  for (const Vec& e : tangent_extra) push_orthonormal(einv * e, tangent, {});
  std::vector<Vec> normal;
  for (int i = 0; i < d; ++i) push_orthonormal(Vec::Unit(d, i), normal, tangent);
  const int n = static_cast<int>(normal.size());
  Mat u(d, n);
  for (int i = 0; i < n; ++i) u.col(i) = normal[i];

  NormalDecomposition nd;
  nd.point = p;
  nd.normal_basis = ld.E * u;
  Mat a = u.transpose() * ld.H * u;
  nd.hessian_operator = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(nd.hessian_operator);
  nd.eigenvalues = es.eigenvalues();
  nd.eigenvectors = es.eigenvectors();
  std::vector<int> neg, pos, zer;
  for (int i = 0; i < n; ++i) {
    if (nd.eigenvalues[i] < -1e-7) neg.push_back(i);
    else if (nd.eigenvalues[i] > 1e-7) pos.push_back(i);
    else zer.push_back(i);
  }
  auto gather = [&](const std::vector<int>& idx) {
    Mat m(ld.E.rows(), static_cast<int>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      m.col(static_cast<int>(k)) = nd.normal_basis * nd.eigenvectors.col(idx[k]);
    }
    return m;
  };
  nd.negative = gather(neg);
  nd.positive = gather(pos);
  nd.zero = gather(zer);

  const std::vector<double> elems = iso.elements(*s.action);
  Mat proj = Mat::Zero(n, n);
  for (double el : elems) {
    const Mat jc = einv * s.action->pushforward(el, p) * ld.E;
    proj += u.transpose() * ld.G * jc * u;
  }
  proj /= static_cast<double>(elems.size());
  nd.projector = proj;
  if ((proj * proj - proj).norm() > 1e-8) {
    throw NumericalError("averaging projector is not idempotent");
  }
  Eigen::SelfAdjointEigenSolver<Mat> ps(0.5 * (proj + proj.transpose()));
  std::vector<int> triv, nontriv;
  for (int i = 0; i < n; ++i) (ps.eigenvalues()[i] > 0.5 ? triv : nontriv).push_back(i);
  Mat vt(n, static_cast<int>(triv.size())), vn(n, static_cast<int>(nontriv.size()));
  for (std::size_t k = 0; k < triv.size(); ++k) vt.col(static_cast<int>(k)) = ps.eigenvectors().col(triv[k]);
  for (std::size_t k = 0; k < nontriv.size(); ++k) vn.col(static_cast<int>(k)) = ps.eigenvectors().col(nontriv[k]);
  nd.trivial_part = nd.normal_basis * vt;
  nd.nontrivial_part = nd.normal_basis * vn;
  nd.nontrivial_hessian = vn.transpose() * nd.hessian_operator * vn;
  return nd;
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void fill_samples(const Scenario& s, CriticalOrbit& o) {
  o.samples.clear();
  o.sample_parameters.clear();
  const GroupAction& g = *s.action;
  if (o.orbit_dim == 1) {
    for (int j = 0; j < kOrbitSamples; ++j) {
      const double a = g.period() * j / kOrbitSamples;
      o.samples.push_back(g.act(a, o.representative));
      o.sample_parameters.push_back(a);
    }
    return;
  }
  for (double a : g.finite_elements().empty() ? std::vector<double>{0.0} : g.finite_elements()) {
    const Vec y = g.act(a, o.representative);
    bool dup = false;
    for (const Vec& q : o.samples) dup = dup || s.manifold->distance(q, y) < 1e-10;
    if (dup) continue;
    o.samples.push_back(y);
    o.sample_parameters.push_back(a);
  }
}

// Follows a one-dimensional critical manifold through x by predictor-corrector
// continuation along the kernel of the Hessian.
std::vector<Vec> trace_component(const Scenario& s, const Vec& x0, const CritOptions& opts) {
  auto kernel_direction = [&](const Vec& x) {
    const LocalData ld = local_data(s, x);
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ld.H, ld.G);
    int best = 0;
    for (int i = 1; i < es.eigenvalues().size(); ++i) {
      if (std::abs(es.eigenvalues()[i]) < std::abs(es.eigenvalues()[best])) best = i;
    }
    Vec v = ld.E * es.eigenvectors().col(best);
    return Vec(v / v.norm());
  };
  const double h = opts.component_step;
  std::vector<Vec> pts{x0};
  Vec x = x0;
  Vec dir = kernel_direction(x0);
  for (int step = 0; step < 20000; ++step) {
    const Vec pred = s.manifold->canonical(x + h * dir);
    const NewtonResult nr = newton(s, pred, {dir}, opts);
    if (!nr.converged) throw NumericalError("degenerate critical orbit: continuation corrector failed");
    Vec nd = kernel_direction(nr.x);
    if (nd.dot(dir) < 0) nd = -nd;
    x = nr.x;
    dir = nd;
    if (step > 10 && s.manifold->distance(x, x0) < 0.75 * h) return pts;
    pts.push_back(x);
  }
  throw NumericalError("degenerate critical orbit: critical set is not a closed curve");
}

double polyline_distance(const Scenario& s, const std::vector<Vec>& pts, const Vec& x,
                         double* parameter) {
  const std::size_t n = pts.size();
  std::size_t best = 0;
  double bd = s.manifold->distance(pts[0], x);
  for (std::size_t i = 1; i < n; ++i) {
    const double d = s.manifold->distance(pts[i], x);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  double bp = static_cast<double>(best);
  for (int side : {-1, 1}) {
    const std::size_t j = (best + n + side) % n;
    const Vec seg = s.manifold->displacement(pts[best], pts[j]);
    const Vec off = s.manifold->displacement(pts[best], x);
    const double len2 = seg.squaredNorm();
    if (len2 <= 0) continue;
    const double t = std::clamp(off.dot(seg) / len2, 0.0, 1.0);
    const double d = (off - t * seg).norm();
    if (d < bd) {
      bd = d;
      bp = static_cast<double>(best) + side * t;
    }
  }
  if (parameter) *parameter = bp;
  return bd;
}

Mat local_component_frame(const Scenario& s, const CriticalOrbit& o, const Vec& x,
                          const Mat& hint) {
  const LocalData ld = local_data(s, x);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ld.H, ld.G);
  std::vector<int> neg;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    if (es.eigenvalues()[i] < -1e-7) neg.push_back(i);
  }
  Mat f(ld.E.rows(), static_cast<int>(neg.size()));
  for (std::size_t k = 0; k < neg.size(); ++k) {
    Vec v = ld.E * es.eigenvectors().col(neg[k]);
    v /= s.manifold->norm(x, v);
    f.col(static_cast<int>(k)) = v;
  }
  (void)o;
  if (hint.cols() == f.cols()) {
    for (int k = 0; k < f.cols(); ++k) {
      if (f.col(k).dot(hint.col(k)) < 0) f.col(k) = -f.col(k);
    }
  }
  return f;
}

}  // namespace

std::string IsotropyDescriptor::describe() const {
  switch (kind) {
    case IsotropyKind::trivial:
      return "trivial";
    case IsotropyKind::cyclic:
      return "cyclic(" + std::to_string(order) + ")";
    case IsotropyKind::full_circle:
      return "full_circle";
  }
  return "?";
}

std::vector<double> IsotropyDescriptor::elements(const GroupAction& action, int circle_nodes) const {
  switch (kind) {
    case IsotropyKind::trivial:
      return {0.0};
    case IsotropyKind::cyclic: {
      std::vector<double> out;
      for (int k = 0; k < order; ++k) out.push_back(action.reduce(k * generators.at(0)));
      return out;
    }
    case IsotropyKind::full_circle: {
      std::vector<double> out;
      for (int k = 0; k < circle_nodes; ++k) out.push_back(action.period() * k / circle_nodes);
      return out;
    }
  }
  return {0.0};
}

const CriticalOrbit& CriticalAnalysis::by_label(const std::string& label) const {
  return orbits.at(index_of(label));
}

std::size_t CriticalAnalysis::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    if (orbits[i].label == label) return i;
  }
  throw ConfigurationError("no critical orbit labelled " + label);
}

bool CriticalAnalysis::all_stable() const {
  return std::all_of(orbits.begin(), orbits.end(), [](const CriticalOrbit& o) { return o.stable; });
}

Mat orient_frame(const Scenario& s, Mat f) {
  const int k = static_cast<int>(f.cols());
  if (k == 0) return f;
  const auto& refs = s.reference_directions;
  for (const Vec& r : refs) {
    const double c = r.dot(f.col(0));
    if (std::abs(c) > 1e-8) {
      if (c < 0) f.col(0) = -f.col(0);
      break;
    }
  }
  if (k < 2) return f;
  const int nr = static_cast<int>(refs.size());
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    Mat c(k, k);
    for (int i = 0; i < k; ++i) c.row(i) = refs[idx[i]].transpose() * f;
    const double det = c.determinant();
    if (std::abs(det) > 1e-6) {
      if (det < 0) f.col(k - 1) = -f.col(k - 1);
      return f;
    }
    int i = k - 1;
    while (i >= 0 && idx[i] == nr - k + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return f;
}

std::vector<Vec> default_seeds(const Scenario& s, int density) {
  std::vector<Vec> seeds = sample_points(s, density);
  seeds.insert(seeds.end(), s.extra_seeds.begin(), s.extra_seeds.end());
  for (const auto& h : s.orbit_hints) seeds.push_back(h.point);
  return seeds;
}

CriticalAnalysis find_critical_orbits(const Scenario& s, const std::vector<Vec>& seeds,
                                      const CritOptions& opts) {
  if (seeds.empty()) throw ConfigurationError("find_critical_orbits: no seeds");
  CriticalAnalysis out;
  int failures = 0;
  std::vector<CriticalOrbit>& orbits = out.orbits;

  auto member_of = [&](const CriticalOrbit& o, const Vec& x) {
    if (o.component_dim > o.orbit_dim) {
      if (std::abs(s.value(x) - o.value) > 1e-8) return false;
      const double d = polyline_distance(s, o.samples, x, nullptr);
      return d < 2.0 * opts.component_step;
    }
    return orbit_distance(s, o, x) <= opts.cluster_tolerance;
  };

  for (const Vec& seed : seeds) {
    NewtonResult nr = newton(s, seed, {}, opts);
    if (!nr.converged) {
      ++failures;
      continue;
    }
    bool known = false;
    for (const auto& o : orbits) known = known || member_of(o, nr.x);
    if (known) continue;

    CriticalOrbit o;
    o.representative = s.action->representative(nr.x);
    o.value = s.value(o.representative);
    o.orbit_dim = s.action->fundamental_field(o.representative).norm() > 1e-8 ? 1 : 0;
    o.component_dim = o.orbit_dim;
    o.isotropy = compute_isotropy(s, o.representative, o.orbit_dim);
    NormalDecomposition nd = decompose(s, o.representative, o.isotropy, {});
    if (nd.zero.cols() > 0) {
      if (nd.zero.cols() != 1 || o.orbit_dim != 0) {
        throw NumericalError("degenerate critical orbit near value " + std::to_string(o.value));
      }
      std::vector<Vec> pts = trace_component(s, o.representative, opts);
      std::size_t best = 0;
      for (std::size_t i = 1; i < pts.size(); ++i) {
        if (std::lexicographical_compare(pts[i].data(), pts[i].data() + pts[i].size(),
                                         pts[best].data(), pts[best].data() + pts[best].size())) {
          best = i;
        }
      }
      std::rotate(pts.begin(), pts.begin() + static_cast<long>(best), pts.end());
      o.representative = pts[0];
      o.samples = pts;
      o.component_dim = 1;
      o.g_morse_bott = false;
      const Vec tangent = s.manifold->displacement(pts[0], pts[1]);
      nd = decompose(s, o.representative, o.isotropy, {tangent});
      if (nd.zero.cols() > 0) throw NumericalError("degenerate Morse-Bott component");
      for (std::size_t i = 0; i < pts.size(); ++i) o.sample_parameters.push_back(static_cast<double>(i));
    } else {
      fill_samples(s, o);
    }
    o.index = static_cast<int>(nd.negative.cols());
    o.stable = check_stability(nd);
    o.neg_frame = orient_frame(s, nd.negative);
    if (o.component_dim > o.orbit_dim) {
      Mat prev = o.neg_frame;
      for (const Vec& q : o.samples) {
        prev = local_component_frame(s, o, q, prev);
        o.sample_frames.push_back(prev);
      }
    }
    orbits.push_back(std::move(o));
  }
  if (failures > 0) {
    out.warnings.push_back("Newton did not converge from " + std::to_string(failures) + " of " +
                           std::to_string(seeds.size()) + " seeds");
  }

  for (auto& o : orbits) {
    for (const auto& h : s.orbit_hints) {
      const bool hit = o.component_dim > o.orbit_dim
                           ? polyline_distance(s, o.samples, h.point, nullptr) < 1e-3
                           : orbit_distance(s, o, h.point) < 1e-3;
      if (hit) {
        o.label = h.label;
        o.generator_names = h.generator_names;
        o.orientation = h.orientation;
        break;
      }
    }
  }
  std::stable_sort(orbits.begin(), orbits.end(), [](const CriticalOrbit& a, const CriticalOrbit& b) {
    if (std::abs(a.value - b.value) > 1e-9) return a.value < b.value;
    if (a.label != b.label) return a.label < b.label;
    return std::lexicographical_compare(a.representative.data(), a.representative.data() + a.representative.size(),
                                        b.representative.data(), b.representative.data() + b.representative.size());
  });
  int unnamed = 0;
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    auto& o = orbits[i];
    o.id = "O" + std::to_string(i + 1);
    if (o.label.empty()) o.label = "C" + std::to_string(o.index) + "_" + std::to_string(++unnamed);
    if (o.generator_names.empty()) {
      if (o.orbit_dim == 1) o.generator_names = {lower(o.label) + "0", lower(o.label) + "1"};
      else o.generator_names = {lower(o.label)};
    }
  }
  return out;
}

CriticalAnalysis analyze_scenario(const Scenario& s, int density) {
  return find_critical_orbits(s, default_seeds(s, density));
}

NormalDecomposition normal_decomposition(const Scenario& s, const CriticalOrbit& o) {
  return normal_decomposition_at(s, o, o.representative);
}

NormalDecomposition normal_decomposition_at(const Scenario& s, const CriticalOrbit& o,
                                            const Vec& point) {
  std::vector<Vec> extra;
  IsotropyDescriptor iso = o.isotropy;
  if (o.component_dim > o.orbit_dim) {
    double par = 0;
    polyline_distance(s, o.samples, point, &par);
    const std::size_t n = o.samples.size();
    const std::size_t i = static_cast<std::size_t>(std::lround(std::floor(par))) % n;
    extra.push_back(s.manifold->displacement(o.samples[i], o.samples[(i + 1) % n]));
  } else if (o.orbit_dim == 1 && iso.kind == IsotropyKind::cyclic) {
    // Same subgroup at every point of the orbit since the group is abelian.
  }
  return decompose(s, point, iso, extra);
}

bool check_stability(const NormalDecomposition& nd, double tol) {
  if (nd.nontrivial_hessian.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (nd.nontrivial_hessian + nd.nontrivial_hessian.transpose()));
  return es.eigenvalues().minCoeff() > tol;
}

std::vector<MetricVerdict> check_stability_equivalences(
    const Scenario& s, const CriticalOrbit& o,
    const std::vector<std::shared_ptr<const MetricField>>& metrics) {
  std::vector<MetricVerdict> out;
  for (const auto& m : metrics) {
    const Scenario sm = s.with_metric(m);
    const int n = sm.ambient_dimension();
    std::vector<double> elems = s.action->finite_elements();
    if (s.action->kind() == GroupKind::circle) elems = {0.3, 1.0, 1.7};
    for (const Vec& x : sample_points(sm, 4)) {
      for (double a : elems) {
        const Mat j = s.action->pushforward(a, x);
        const Vec y = s.action->act(a, x);
        for (int i = 0; i < n; ++i) {
          for (int k = 0; k < n; ++k) {
            const Vec u = Vec::Unit(n, i), v = Vec::Unit(n, k);
            const double r = sm.manifold->inner(y, j * u, j * v) - sm.manifold->inner(x, u, v);
            if (std::abs(r) > 1e-8) throw ConfigurationError("metric " + m->describe() + " is not invariant");
          }
        }
      }
    }
    const NormalDecomposition nd = normal_decomposition_at(sm, o, o.representative);
    MetricVerdict v;
    v.metric = m->describe();
    v.stable = check_stability(nd);
    const Mat g = sm.manifold->metric_matrix(o.representative);
    const Mat e = sm.manifold->tangent_basis(o.representative);
    const Mat ident = Mat::Identity(nd.projector.rows(), nd.projector.cols());
    double res = 0.0;
    for (int k = 0; k < nd.negative.cols(); ++k) {
      const Vec c = nd.normal_basis.transpose() * e * g * left_inverse(e) * nd.negative.col(k);
      res = std::max(res, ((ident - nd.projector) * c).norm());
    }
    v.residual = res;
    v.contained = res <= 1e-8;
    v.agrees = (v.stable == v.contained);
    out.push_back(v);
  }
  return out;
}

Mat negative_frame(const Scenario&, const CriticalOrbit& o) {
  if (!o.stable) throw PreconditionError("frame not guaranteed trivial: orbit " + o.label + " is unstable");
  return o.neg_frame;
}

OrbitLocation locate_on_orbit(const Scenario& s, const CriticalOrbit& o, const Vec& x) {
  OrbitLocation loc;
  if (o.component_dim > o.orbit_dim) {
    double par = 0;
    loc.distance = polyline_distance(s, o.samples, x, &par);
    loc.parameter = par;
    const std::size_t n = o.samples.size();
    loc.point = o.samples[static_cast<std::size_t>(std::lround(par)) % n];
    return loc;
  }
  std::size_t best = 0;
  double bd = s.manifold->distance(o.samples[0], x);
  for (std::size_t i = 1; i < o.samples.size(); ++i) {
    const double d = s.manifold->distance(o.samples[i], x);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  loc.parameter = o.sample_parameters[best];
  loc.point = o.samples[best];
  loc.distance = bd;
  if (o.orbit_dim == 1) {
    const double w = s.action->period() / kOrbitSamples;
    double arg = loc.parameter;
    const double d = golden_min(
        [&](double t) { return s.manifold->distance(s.action->act(t, o.representative), x); },
        loc.parameter - w, loc.parameter + w, &arg);
    if (d < loc.distance) {
      loc.distance = d;
      loc.parameter = s.action->reduce(arg);
      loc.point = s.action->act(loc.parameter, o.representative);
    }
  }
  return loc;
}

double orbit_distance(const Scenario& s, const CriticalOrbit& o, const Vec& x) {
  return locate_on_orbit(s, o, x).distance;
}

Mat frame_at(const Scenario& s, const CriticalOrbit& o, const Vec& point) {
  if (o.component_dim > o.orbit_dim) {
    double par = 0;
    polyline_distance(s, o.samples, point, &par);
    const std::size_t i = static_cast<std::size_t>(std::lround(par)) % o.samples.size();
    return local_component_frame(s, o, point, o.sample_frames[i]);
  }
  const OrbitLocation loc = locate_on_orbit(s, o, point);
  const Mat f = s.action->pushforward(loc.parameter, o.representative) * o.neg_frame;
  // Express the frame in the coordinates of `point`, which may lie across a
  // gluing from the orbit point.
  const Vec lift = loc.point + s.manifold->displacement(loc.point, point);
  return s.manifold->canonical_jacobian(lift) * f;
}

}  // namespace eqmorse
