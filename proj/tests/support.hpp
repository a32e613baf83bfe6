#pragma once

// Fixtures shared by the test binaries and independent oracles used to check
// library results. Nothing here calls the library code it is checking.

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "eqmorse/cochain.hpp"
#include "eqmorse/config.hpp"
#include "eqmorse/critstruct.hpp"
#include "eqmorse/flow.hpp"
#include "eqmorse/pipeline.hpp"
#include "eqmorse/report.hpp"

namespace eqtest {

using namespace eqmorse;

inline std::string data_path(const std::string& rel) { return std::string(EQMORSE_TEST_DATA) + "/" + rel; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Scenarios and analyses are cached per process.
inline const Scenario& scenario(const std::string& name) {
  static std::map<std::string, Scenario> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, build_scenario(name)).first;
  return it->second;
}

inline const CriticalAnalysis& analysis(const std::string& name) {
  static std::map<std::string, CriticalAnalysis> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, analyze_scenario(scenario(name))).first;
  return it->second;
}

inline const RunReport& pipeline(const std::string& config) {
  static std::map<std::string, RunReport> cache;
  auto it = cache.find(config);
  if (it == cache.end()) it = cache.emplace(config, run(load_config(data_path("configs/" + config + ".ini")))).first;
  return it->second;
}

inline const CriticalOrbit& orbit(const CriticalAnalysis& a, const std::string& label) {
  return a.by_label(label);
}

// Covers for every pair the assembly reads, computed the way the pipeline
// does but without going through it.
inline std::vector<ModuliCover> covers_for(const Scenario& s, const CriticalAnalysis& a,
                                           const FlowSettings& fs = {}) {
  std::vector<ModuliCover> out;
  auto find = [&](const std::string& id) -> const CriticalOrbit& {
    for (const auto& o : a.orbits)
      if (o.id == id) return o;
    throw std::runtime_error("no orbit " + id);
  };
  for (const auto& [sid, tid] : required_covers(s, a)) out.push_back(extract_moduli_cover(s, a, find(sid), find(tid), fs));
  return out;
}

// --- oracles -------------------------------------------------------------

// Quintic smoothstep evaluated by direct polynomial arithmetic.
inline double smoothstep(double s) {
  if (s <= 0) return 0;
  if (s >= 1) return 1;
  return 6 * std::pow(s, 5) - 15 * std::pow(s, 4) + 10 * std::pow(s, 3);
}

inline double phi_oracle(double lambda, double t) {
  if (t <= lambda) return t * t;
  if (t >= 3 * lambda) return -t * t;
  return (1 - 2 * smoothstep((t - lambda) / (2 * lambda))) * t * t;
}

// Central differences of a scalar function of the ambient coordinates.
template <class F>
Eigen::VectorXd fd_gradient(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

// Rank of an integer-valued matrix in double precision with full pivoting;
// exact for the small {0, +-1} matrices of the catalogue.
inline int float_rank(const RationalMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::MatrixXd d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = static_cast<double>(m(i, j));
  Eigen::FullPivLU<Eigen::MatrixXd> lu(d);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

// Entries (source, target) -> value keyed by generator names.
using Table = std::map<std::pair<std::string, std::string>, int>;

inline Table table_of(const CochainComplex& c) {
  Table t;
  for (const auto& [p, m] : c.differential) {
    const auto src = c.in_degree(p);
    const auto tgt = c.in_degree(p + 1);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (m(i, j) == 0) continue;
        t[{c.generators[src[j]].name, c.generators[tgt[i]].name}] = static_cast<int>(m(i, j));
      }
  }
  return t;
}

inline std::string with_theta(const std::string& base, int k) {
  return k == 0 ? base : base + "*t^" + std::to_string(k);
}

// Reference ordinary differential of the stabilized mapping torus.
inline Table mapping_torus_ordinary_table() {
  return {{{"s00", "r'10"}, 1},    {{"rbar00", "r'10"}, -1}, {{"s01", "r'11"}, -1},
          {{"rbar01", "r'11"}, 1}, {{"q10", "p'20"}, 1},     {{"pbar10", "p'20"}, -1},
          {{"q11", "p'21"}, -1},   {{"pbar11", "p'21"}, 1}};
}

// Equivariant differential of the stabilized mapping torus for theta powers
// up to K; terms raising the power beyond K are dropped.
inline Table mapping_torus_cartan_table(int K) {
  Table t;
  auto add = [&](const std::string& a, int ka, const std::string& b, int kb, int v) {
    if (ka <= K && kb <= K) t[{with_theta(a, ka), with_theta(b, kb)}] = v;
  };
  for (int k = 0; k <= K; ++k) {
    add("s00", k, "r'10", k, 1);
    add("s01", k, "r'11", k, -1);
    add("s01", k, "s00", k + 1, -1);
    add("rbar00", k, "r'10", k, -1);
    add("rbar01", k, "r'11", k, 1);
    add("rbar01", k, "rbar00", k + 1, -1);
    add("r'11", k, "r'10", k + 1, -1);
    add("q10", k, "p'20", k, 1);
    add("q11", k, "p'21", k, -1);
    add("q11", k, "q10", k + 1, -1);
    add("pbar10", k, "p'20", k, -1);
    add("pbar11", k, "p'21", k, 1);
    add("pbar11", k, "pbar10", k + 1, -1);
    add("p'21", k, "p'20", k + 1, -1);
  }
  return t;
}

// Equivariant differential of the stabilized sphere: n1' carries theta^(k-1)
// in degree 2k.
inline Table sphere_cartan_table(int K) {
  Table t;
  for (int k = 0; k <= K; ++k) {
    t[{with_theta("n", k), with_theta("n0'", k)}] = 1;
    t[{with_theta("s", k), with_theta("n0'", k)}] = 1;
    if (k + 1 <= K) t[{with_theta("n1'", k), with_theta("n0'", k + 1)}] = -1;
  }
  return t;
}

// Restricts a table to entries whose source and target have theta power <= k.
inline Table up_to_theta(const Table& t, int k) {
  auto power = [](const std::string& n) {
    const auto pos = n.find("*t^");
    return pos == std::string::npos ? 0 : std::stoi(n.substr(pos + 3));
  };
  Table out;
  for (const auto& [key, v] : t)
    if (power(key.first) <= k && power(key.second) <= k) out[key] = v;
  return out;
}

// The lines of one "[name]" section, header included, up to the next blank line.
inline std::string section_text(const std::string& text, const std::string& name) {
  const std::string header = "[" + name + "]\n";
  const auto b = text.find(header);
  if (b == std::string::npos) return {};
  auto e = text.find("\n\n", b);
  if (e == std::string::npos) e = text.size();
  else e += 1;
  return text.substr(b, e - b);
}

}  // namespace eqtest
