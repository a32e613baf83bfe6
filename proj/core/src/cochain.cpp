#include "eqmorse/cochain.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

namespace eqmorse {

std::string to_string(ComplexVariant v) {
  return v == ComplexVariant::ordinary ? "ordinary" : "cartan";
}

std::vector<InvariantFormBasis> invariant_form_bases(const Scenario& s, const CriticalAnalysis& a) {
  std::vector<InvariantFormBasis> out;
  for (const auto& o : a.orbits) {
    if (o.component_dim > o.orbit_dim) {
      throw AssemblyError("critical set " + o.label + " is not a single orbit");
    }
    InvariantFormBasis b;
    b.orbit = o.id;
    b.label = o.label;
    b.index = o.index;
    b.orbit_dim = o.orbit_dim;
    b.names = o.generator_names;
    const std::size_t want = o.orbit_dim == 1 ? 2 : 1;
    if (b.names.size() != want) throw AssemblyError("generator names of " + o.label + " do not match its dimension");
    // On a circle orbit X is nowhere zero and d(tau) is scaled to <d(tau), X> = 1.
    b.pairing = (o.orbit_dim == 1 && s.action->kind() == GroupKind::circle) ? 1 : 0;
    out.push_back(std::move(b));
  }
  return out;
}

int CochainComplex::max_degree() const {
  int m = 0;
  for (const auto& g : generators) m = std::max(m, g.total_degree);
  return m;
}

std::vector<std::size_t> CochainComplex::in_degree(int p) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < generators.size(); ++i)
    if (generators[i].total_degree == p) out.push_back(i);
  return out;
}

RationalMatrix CochainComplex::d(int p) const {
  const auto it = differential.find(p);
  if (it != differential.end()) return it->second;
  return RationalMatrix(in_degree(p + 1).size(), in_degree(p).size());
}

std::size_t CochainComplex::position_in_degree(std::size_t generator) const {
  std::size_t pos = 0;
  for (std::size_t i = 0; i < generator; ++i)
    if (generators[i].total_degree == generators[generator].total_degree) ++pos;
  return pos;
}

namespace {

struct PairKey {
  std::string src, tgt;
  bool operator<(const PairKey& o) const { return std::tie(src, tgt) < std::tie(o.src, o.tgt); }
};

// Form degree on the source receiving the image of a degree-j form on the target.
int image_degree(int j, int gap) { return j - gap + 1; }

// Signed pushforward-pullback of the degree-j generator of the target.
Rational contribution(const ModuliCover& c, const InvariantFormBasis& src, const InvariantFormBasis& tgt,
                      int j) {
  const int gap = src.index - tgt.index;
  if (c.negative_virtual_dimension) return 0;
  if (gap == 1) {
    long sum = 0;
    for (const auto& sh : c.sheets) sum += sh.sign;
    // The endpoint map is equivariant, so the pullback of the normalized
    // d(tau) is the normalized d(tau) of every sheet.
    if (j == 0) return sum;
    if (j == 1 && src.orbit_dim == 1 && tgt.orbit_dim == 1) return sum;
    return 0;
  }
  if (gap == 2 && j == 1) {
    if (c.fiber_dim != 1) return 0;
    return Rational(c.fiber_num, c.fiber_den);
  }
  return 0;
}

void check_inputs(const CriticalAnalysis& a, const AssemblyOptions& opts) {
  if (opts.allow_unstable) return;
  for (const auto& o : a.orbits) {
    if (!o.stable) throw PreconditionError("unstable orbit " + o.label);
  }
}

std::string generator_name(const std::string& base, int k) {
  if (k == 0) return base;
  return base + "*t^" + std::to_string(k);
}

CochainComplex make_generators(const Scenario& s, const CriticalAnalysis& a, ComplexVariant variant,
                               int truncation) {
  CochainComplex c;
  c.variant = variant;
  c.bases = invariant_form_bases(s, a);
  const bool has_theta = variant == ComplexVariant::cartan && s.action->kind() == GroupKind::circle;
  c.truncation = has_theta ? truncation : 0;
  for (std::size_t oi = 0; oi < c.bases.size(); ++oi) {
    const auto& b = c.bases[oi];
    for (int j = 0; j <= b.top_degree(); ++j) {
      for (int k = 0; k <= c.truncation; ++k) {
        CartanGenerator g;
        g.orbit = oi;
        g.form_degree = j;
        g.theta_power = k;
        g.total_degree = b.index + j + 2 * k;
        g.name = generator_name(b.names[static_cast<std::size_t>(j)], k);
        g.truncation_boundary = has_theta && k == c.truncation && b.pairing != 0 && j == 1;
        c.generators.push_back(std::move(g));
      }
    }
  }
  std::stable_sort(c.generators.begin(), c.generators.end(), [](const auto& x, const auto& y) {
    return std::tie(x.total_degree, x.orbit, x.form_degree, x.theta_power) <
           std::tie(y.total_degree, y.orbit, y.form_degree, y.theta_power);
  });
  int max_j = 0;
  for (const auto& b : c.bases) max_j = std::max(max_j, b.top_degree());
  c.safe_max_degree = has_theta ? 2 * c.truncation - 2 + max_j : c.max_degree();
  return c;
}

std::size_t find_generator(const CochainComplex& c, std::size_t orbit, int j, int k) {
  for (std::size_t i = 0; i < c.generators.size(); ++i) {
    const auto& g = c.generators[i];
    if (g.orbit == orbit && g.form_degree == j && g.theta_power == k) return i;
  }
  return c.generators.size();
}

void add_entry(CochainComplex& c, std::size_t from, std::size_t to, const Rational& v) {
  if (v == 0) return;
  const int p = c.generators[from].total_degree;
  if (c.generators[to].total_degree != p + 1) throw AssemblyError("entry breaks the grading");
  auto it = c.differential.find(p);
  if (it == c.differential.end()) it = c.differential.emplace(p, c.d(p)).first;
  it->second(c.position_in_degree(to), c.position_in_degree(from)) += v;
}

CochainComplex assemble(const Scenario& s, const CriticalAnalysis& a, const std::vector<ModuliCover>& covers,
                        ComplexVariant variant, int truncation, const AssemblyOptions& opts) {
  check_inputs(a, opts);
  CochainComplex c = make_generators(s, a, variant, truncation);
  std::map<PairKey, const ModuliCover*> by_pair;
  for (const auto& cov : covers) by_pair[{cov.source_orbit, cov.target_orbit}] = &cov;

  const std::size_t n = c.bases.size();
  for (std::size_t si = 0; si < n; ++si) {
    for (std::size_t ti = 0; ti < n; ++ti) {
      const auto& src = c.bases[si];
      const auto& tgt = c.bases[ti];
      const int gap = src.index - tgt.index;
      if (gap < 1) continue;
      const auto it = by_pair.find({src.orbit, tgt.orbit});
      for (int j = 0; j <= 1; ++j) {
        const int dj = image_degree(j, gap);
        const bool exists = j <= tgt.top_degree() && dj >= 0 && dj <= src.top_degree();
        if (it == by_pair.end()) {
          if (exists) throw AssemblyError("missing moduli cover " + src.label + " -> " + tgt.label);
          continue;
        }
        const Rational v = contribution(*it->second, src, tgt, j);
        if (!exists) {
          if (v != 0) {
            throw AssemblyError("nonzero entry in a nonexistent degree for " + src.label + " -> " + tgt.label);
          }
          continue;
        }
        const Rational entry = (j % 2 == 0 ? 1 : -1) * v;
        for (int k = 0; k <= c.truncation; ++k) {
          add_entry(c, find_generator(c, ti, j, k), find_generator(c, si, dj, k), entry);
        }
      }
    }
  }
  if (variant == ComplexVariant::cartan) {
    for (std::size_t oi = 0; oi < n; ++oi) {
      const auto& b = c.bases[oi];
      if (b.pairing == 0) continue;
      for (int k = 0; k < c.truncation; ++k) {
        add_entry(c, find_generator(c, oi, 1, k), find_generator(c, oi, 0, k + 1), Rational(-b.pairing));
      }
    }
  }
  return c;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> required_covers(const Scenario& s,
                                                                 const CriticalAnalysis& a) {
  const auto bases = invariant_form_bases(s, a);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& src : bases) {
    for (const auto& tgt : bases) {
      const int gap = src.index - tgt.index;
      if (gap < 1) continue;
      for (int j = 0; j <= tgt.top_degree(); ++j) {
        const int dj = image_degree(j, gap);
        if (dj >= 0 && dj <= src.top_degree()) {
          out.emplace_back(src.orbit, tgt.orbit);
          break;
        }
      }
    }
  }
  return out;
}

CochainComplex assemble_ordinary(const Scenario& s, const CriticalAnalysis& a,
                                 const std::vector<ModuliCover>& covers, const AssemblyOptions& opts) {
  return assemble(s, a, covers, ComplexVariant::ordinary, 0, opts);
}

CochainComplex assemble_cartan(const Scenario& s, const CriticalAnalysis& a,
                               const std::vector<ModuliCover>& covers, int truncation,
                               const AssemblyOptions& opts) {
  if (truncation < 1) throw AssemblyError("truncation must be at least 1");
  return assemble(s, a, covers, ComplexVariant::cartan, truncation, opts);
}

bool squares_to_zero(const CochainComplex& c) {
  for (int p = 0; p + 1 <= c.max_degree(); ++p) {
    if (!(c.d(p + 1) * c.d(p)).is_zero()) return false;
  }
  return true;
}

namespace {

// Columns of m as vectors.
std::vector<std::vector<Rational>> columns(const RationalMatrix& m) {
  std::vector<std::vector<Rational>> out(m.cols(), std::vector<Rational>(m.rows()));
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out[j][i] = m(i, j);
  return out;
}

std::vector<Rational> apply(const RationalMatrix& m, const std::vector<Rational>& v) {
  std::vector<Rational> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0 && v[j] != 0) out[i] += m(i, j) * v[j];
  return out;
}

RationalMatrix shift_matrix(const CochainComplex& c, int p) {
  const auto from = c.in_degree(p);
  const auto to = c.in_degree(p + 2);
  RationalMatrix m(to.size(), from.size());
  for (std::size_t a = 0; a < from.size(); ++a) {
    const auto& g = c.generators[from[a]];
    for (std::size_t b = 0; b < to.size(); ++b) {
      const auto& h = c.generators[to[b]];
      if (h.orbit == g.orbit && h.form_degree == g.form_degree && h.theta_power == g.theta_power + 1) m(b, a) = 1;
    }
  }
  return m;
}

}  // namespace

CohomologyReport cohomology(const CochainComplex& c, const CohomologyOptions& opts) {
  int top = opts.max_degree < 0 ? c.safe_max_degree : opts.max_degree;
  if (top > c.safe_max_degree && !opts.acknowledge_truncation) {
    throw TruncationError("degree " + std::to_string(top) + " exceeds the reliable window (max " +
                          std::to_string(c.safe_max_degree) + ")");
  }
  CohomologyReport r;
  for (int p = 0; p <= top; ++p) {
    const std::size_t dim = c.in_degree(p).size();
    const RationalMatrix out_map = c.d(p);
    const RationalMatrix in_map = p > 0 ? c.d(p - 1) : RationalMatrix(dim, 0);
    std::vector<std::vector<Rational>> kernel;
    if (out_map.rows() == 0) {
      for (std::size_t i = 0; i < dim; ++i) {
        std::vector<Rational> e(dim);
        e[i] = 1;
        kernel.push_back(std::move(e));
      }
    } else {
      kernel = nullspace(out_map);
    }
    const std::size_t img = rank(in_map);
    r.ranks.push_back(static_cast<int>(kernel.size()) - static_cast<int>(img));
    auto basis = columns(in_map);
    std::size_t have = img;
    auto& reps = r.representatives[p];
    for (const auto& v : kernel) {
      basis.push_back(v);
      const std::size_t rk = rank(from_columns(basis, dim));
      if (rk > have) {
        have = rk;
        reps.push_back(v);
      } else {
        basis.pop_back();
      }
    }
  }
  if (c.variant == ComplexVariant::cartan && c.truncation > 0) {
    for (int p = 0; p + 2 <= top; ++p) {
      const auto& reps = r.representatives[p];
      if (reps.empty()) continue;
      const RationalMatrix sh = shift_matrix(c, p);
      const std::size_t dim2 = c.in_degree(p + 2).size();
      auto basis = columns(c.d(p + 1));
      const std::size_t base_rank = rank(from_columns(basis, dim2));
      for (const auto& v : reps) basis.push_back(apply(sh, v));
      const std::size_t induced = rank(from_columns(basis, dim2)) - base_rank;
      r.module_notes.push_back("theta: H^" + std::to_string(p) + " -> H^" + std::to_string(p + 2) +
                               " rank " + std::to_string(induced));
    }
  }
  return r;
}

ThetaAction theta_module_action(const CochainComplex& c) {
  if (c.variant != ComplexVariant::cartan) throw AssemblyError("theta action needs the Cartan complex");
  ThetaAction t;
  for (int p = 0; p + 2 <= c.max_degree(); ++p) t.shift[p] = shift_matrix(c, p);
  t.checked_below = 0;
  for (int p = 0; p + 3 <= c.safe_max_degree; ++p) {
    const RationalMatrix lhs = c.d(p + 2) * t.shift.at(p);
    const RationalMatrix rhs = shift_matrix(c, p + 1) * c.d(p);
    if (!(lhs == rhs)) {
      throw AssemblyError("theta shift does not commute with the differential in degree " + std::to_string(p));
    }
    t.checked_below = p + 1;
  }
  return t;
}

std::string format_combination(const CochainComplex& c, int p, const std::vector<Rational>& v) {
  const auto gens = c.in_degree(p);
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < gens.size() && i < v.size(); ++i) {
    if (v[i] == 0) continue;
    Rational q = v[i];
    const bool neg = q < 0;
    if (neg) q = -q;
    if (first) {
      if (neg) os << "-";
    } else {
      os << (neg ? " - " : " + ");
    }
    if (q != 1) os << format_rational(q) << " ";
    os << c.generators[gens[i]].name;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

void write_complex(std::ostream& out, const CochainComplex& c, int max_theta) {
  auto shown = [&](std::size_t i) { return max_theta < 0 || c.generators[i].theta_power <= max_theta; };
  int top = 0;
  for (std::size_t i = 0; i < c.generators.size(); ++i)
    if (shown(i)) top = std::max(top, c.generators[i].total_degree);
  out << "variant = " << to_string(c.variant) << "\n";
  out << "truncation = " << c.truncation << "\n";
  out << "safe_max_degree = " << c.safe_max_degree << "\n";
  if (max_theta >= 0) out << "listed_theta_max = " << max_theta << "\n";
  for (int p = 0; p <= top; ++p) {
    out << "C" << p << " =";
    for (auto i : c.in_degree(p))
      if (shown(i)) out << " " << c.generators[i].name;
    out << "\n";
  }
  std::vector<std::string> boundary;
  for (const auto& g : c.generators)
    if (g.truncation_boundary) boundary.push_back(g.name);
  if (!boundary.empty()) {
    out << "truncation_boundary =";
    for (const auto& b : boundary) out << " " << b;
    out << "\n";
  }
  for (const auto& [p, m] : c.differential) {
    const auto from = c.in_degree(p);
    const auto to = c.in_degree(p + 1);
    for (std::size_t j = 0; j < from.size(); ++j) {
      if (!shown(from[j])) continue;
      for (std::size_t i = 0; i < to.size(); ++i) {
        if (m(i, j) == 0) continue;
        out << "d" << p << " " << c.generators[from[j]].name << " -> " << c.generators[to[i]].name << " = "
            << format_rational(m(i, j)) << "\n";
      }
    }
  }
}

}  // namespace eqmorse
