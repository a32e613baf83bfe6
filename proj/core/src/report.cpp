#include "eqmorse/report.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace eqmorse {

namespace {

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string point(const Vec& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += fixed(x[i]);
  }
  return s + ")";
}

std::string label_of(const CriticalAnalysis& a, const std::string& id) {
  for (const auto& o : a.orbits)
    if (o.id == id) return o.label;
  return id;
}

std::string ranks(const std::vector<int>& r) {
  std::string s;
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? " " : "") + std::to_string(r[i]);
  return s;
}

void cohomology_lines(std::ostream& os, const std::string& prefix, const CochainComplex& c,
                      const CohomologyReport& h) {
  os << prefix << ".ranks = " << ranks(h.ranks) << "\n";
  os << prefix << ".max_degree = " << static_cast<int>(h.ranks.size()) - 1 << "\n";
  for (const auto& [p, reps] : h.representatives) {
    for (std::size_t i = 0; i < reps.size(); ++i) {
      os << prefix << ".H" << p << "." << i + 1 << " = " << format_combination(c, p, reps[i]) << "\n";
    }
  }
  for (std::size_t i = 0; i < h.module_notes.size(); ++i) {
    os << prefix << ".module." << i + 1 << " = " << h.module_notes[i] << "\n";
  }
}

}  // namespace

std::string format_report(const RunReport& r) {
  const CriticalAnalysis& a = r.analysis;
  std::ostringstream os;
  os << "[scenario]\n";
  os << "name = " << r.config.scenario << "\n";
  for (const auto& [k, v] : r.config.params) os << "param." << k << " = " << general(v) << "\n";
  os << "group = " << r.scenario.action->describe() << "\n";

  if (!r.recipes.empty()) {
    os << "\n[stabilization]\n";
    for (const auto& ro : r.recipes) {
      const auto& rec = ro.recipe;
      os << "recipe." << rec.target << " = lambda=" << general(rec.profile.lambda)
         << " delta=" << general(rec.profile.delta) << " epsilon=" << general(rec.epsilon)
         << " h=" << rec.h.describe() << "\n";
      os << "index_shift." << rec.target << " = " << (ro.index_shift.ok ? "ok" : "failed") << "\n";
    }
  }

  os << "\n[orbits]\n";
  for (const auto& o : a.orbits) {
    os << "orbit." << o.label << " = id=" << o.id << " rep=" << point(o.representative)
       << " value=" << fixed(o.value) << " dim=" << o.orbit_dim << " component_dim=" << o.component_dim
       << " index=" << o.index << " isotropy=" << o.isotropy.describe()
       << " stable=" << (o.stable ? "true" : "false") << " orientation=" << o.orientation << "\n";
  }

  os << "\n[transversality]\n";
  for (const auto& t : r.transversality) {
    const std::string key = "pair." + label_of(a, t.source) + "->" + label_of(a, t.target);
    os << key << " = verdict=" << to_string(t.verdict) << " expected=" << t.expected_dim
       << " observed=" << t.observed_family_dim
       << " weak_self_indexing=" << (t.weak_self_indexing_violated ? "violated" : "ok")
       << " witness=" << (t.witness ? "yes" : "no") << "\n";
    if (t.witness) os << key << ".witness_distance = " << sci(t.witness->end_distance) << "\n";
    os << key << ".note = " << t.note << "\n";
  }

  if (!r.covers.empty()) {
    os << "\n[covers]\n";
    for (const auto& c : r.covers) {
      os << "cover." << label_of(a, c.source_orbit) << "->" << label_of(a, c.target_orbit) << " = gap="
         << c.index_gap << " dim=" << c.dim << " fiber_dim=" << c.fiber_dim << " method=" << c.method;
      if (c.fiber_dim == 0) {
        os << " sheets=";
        if (c.sheets.empty()) os << "none";
        for (std::size_t i = 0; i < c.sheets.size(); ++i) {
          os << (i ? "," : "") << (c.sheets[i].sign > 0 ? "+1" : "-1") << "w" << c.sheets[i].target_winding;
        }
      } else {
        os << " arcs=" << c.arcs.size() << " fiber_integral=" << c.fiber_num << "/" << c.fiber_den;
      }
      os << "\n";
    }
  }

  if (r.ordinary) {
    os << "\n[ordinary]\n";
    write_complex(os, *r.ordinary);
  }
  if (r.cartan) {
    os << "\n[cartan]\n";
    write_complex(os, *r.cartan, r.config.table_theta_max);
  }
  if (r.ordinary_cohomology || r.cartan_cohomology) {
    os << "\n[cohomology]\n";
    if (r.ordinary_cohomology) cohomology_lines(os, "ordinary", *r.ordinary, *r.ordinary_cohomology);
    if (r.cartan_cohomology) cohomology_lines(os, "cartan", *r.cartan, *r.cartan_cohomology);
  }

  os << "\n[warnings]\n";
  for (std::size_t i = 0; i < r.warnings.size(); ++i) os << "warning." << i + 1 << " = " << r.warnings[i] << "\n";
  return os.str();
}

void write_report(const RunReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path);
  out << format_report(r);
  if (!out) throw std::runtime_error("write failed for " + path);
}

ReportSections parse_report(const std::string& text) {
  ReportSections out;
  std::istringstream in(text);
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      out[section];
      continue;
    }
    const auto eq = line.find(" = ");
    std::string key = eq == std::string::npos ? line : line.substr(0, eq);
    std::string value = eq == std::string::npos ? "" : line.substr(eq + 3);
    if (eq == std::string::npos && !line.empty() && line.back() == '=') {
      key = line.substr(0, line.size() - 2);
    }
    out[section].emplace_back(key, value);
  }
  return out;
}

namespace {

// Values made only of k=v tokens.
bool tokenized(const std::string& v, std::map<std::string, std::string>* fields) {
  std::istringstream in(v);
  std::string tok;
  bool any = false;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) return false;
    if (fields) (*fields)[tok.substr(0, eq)] = tok.substr(eq + 1);
    any = true;
  }
  return any;
}

}  // namespace

GoldenDiff compare_against_golden(const std::string& report_text, const std::string& golden_text) {
  const ReportSections golden = parse_report(golden_text);
  const ReportSections actual = parse_report(report_text);
  if (golden.empty() || golden.count("")) {
    throw ConfigurationError("golden file: expected '[section]' headers with 'key = value' lines");
  }
  static const std::set<std::string> strict = {"orbits", "ordinary", "cartan", "cohomology"};
  GoldenDiff d;
  std::set<std::string> names;
  for (const auto& [name, _] : golden) names.insert(name);
  for (const auto& [name, _] : actual)
    if (strict.count(name)) names.insert(name);
  for (const auto& name : names) {
    const auto g = golden.find(name);
    const auto a = actual.find(name);
    if (g == golden.end()) {
      d.lines.push_back("[" + name + "] unexpected section");
      continue;
    }
    if (a == actual.end()) {
      d.lines.push_back("[" + name + "] missing section");
      continue;
    }
    std::map<std::string, std::string> amap(a->second.begin(), a->second.end());
    std::set<std::string> seen;
    for (const auto& [key, gv] : g->second) {
      seen.insert(key);
      const auto it = amap.find(key);
      if (it == amap.end()) {
        d.lines.push_back("[" + name + "] " + key + ": missing (golden: " + gv + ")");
        continue;
      }
      std::map<std::string, std::string> gf, af;
      if (tokenized(gv, &gf) && tokenized(it->second, &af)) {
        for (const auto& [k, v] : gf) {
          const auto f = af.find(k);
          const std::string got = f == af.end() ? "<absent>" : f->second;
          if (got != v) d.lines.push_back("[" + name + "] " + key + ": " + k + " golden=" + v + " actual=" + got);
        }
      } else if (gv != it->second) {
        d.lines.push_back("[" + name + "] " + key + ": golden=" + gv + " actual=" + it->second);
      }
    }
    if (strict.count(name)) {
      for (const auto& [key, v] : a->second) {
        if (!seen.count(key)) d.lines.push_back("[" + name + "] " + key + ": unexpected (actual: " + v + ")");
      }
    }
  }
  return d;
}

GoldenDiff compare_against_golden_file(const std::string& report_text, const std::string& golden_path) {
  std::ifstream in(golden_path);
  if (!in) throw ConfigurationError("cannot read golden file " + golden_path);
  std::stringstream ss;
  ss << in.rdbuf();
  return compare_against_golden(report_text, ss.str());
}

void emit_flow_csv(const RunReport& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write flow CSV " + path);
  write_flow_csv(out, r.scenario, r.flows);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace eqmorse
