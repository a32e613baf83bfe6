#include "eqmorse/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace eqmorse {

namespace pt = boost::property_tree;

namespace {

std::string where(const std::string& section, const std::string& key) { return "[" + section + "] " + key; }

double to_double(const std::string& section, const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigurationError(where(section, key) + ": not a number: '" + v + "'");
  }
}

int to_int(const std::string& section, const std::string& key, const std::string& v) {
  const double d = to_double(section, key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) {
    throw ConfigurationError(where(section, key) + ": not an integer: '" + v + "'");
  }
  return static_cast<int>(d);
}

bool to_bool(const std::string& section, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigurationError(where(section, key) + ": not a boolean: '" + v + "'");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigurationError(what);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void validate_config(const RunConfig& c) {
  require(!c.scenario.empty(), "[scenario] name is required");
  const FlowSettings& f = c.flow;
  require(f.directions >= 4 && f.directions <= 256, "[flow] directions must lie in [4, 256]");
  require(f.samples >= 4 && f.samples <= 1024, "[flow] samples must lie in [4, 1024]");
  require(f.fiber_samples >= 8 && f.fiber_samples <= 4096, "[flow] fiber_samples must lie in [8, 4096]");
  require(f.t_max > 0 && f.t_max <= 1e5, "[flow] t_max must lie in (0, 1e5]");
  require(f.capture_radius >= 1e-5 && f.capture_radius <= 1e-2, "[flow] capture_radius must lie in [1e-5, 1e-2]");
  require(f.max_step > 0 && f.max_step <= 10, "[flow] max_step must lie in (0, 10]");
  require(f.tolerance >= 1e-14 && f.tolerance <= 1e-6, "[flow] tolerance must lie in [1e-14, 1e-6]");
  require(c.truncation >= 1 && c.truncation <= 64, "[cochain] truncation must lie in [1, 64]");
  require(c.table_theta_max >= 0 && c.table_theta_max <= c.truncation,
          "[cochain] table_theta_max must lie in [0, truncation]");
  std::set<std::string> targets;
  for (const auto& r : c.recipes) {
    require(targets.insert(r.target).second, "duplicate stabilization target " + r.target);
    require(r.lambda > 0, "[stabilize:" + r.target + "] lambda must be positive");
    require(r.delta <= 0 || r.delta < r.lambda, "[stabilize:" + r.target + "] need delta < lambda");
    require(r.h == "constant" || r.h == "linear", "[stabilize:" + r.target + "] h must be constant or linear");
    require(r.h_axis >= 0 && r.h_axis < 8, "[stabilize:" + r.target + "] h_axis out of range");
  }
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigurationError(std::string("config syntax: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigurationError("key '" + section + "' outside a section");
    }
    auto each = [&](auto&& fn) {
      for (const auto& [key, node] : body) fn(key, node.template get_value<std::string>());
    };
    if (section == "scenario") {
      each([&](const std::string& k, const std::string& v) {
        if (k == "name") c.scenario = v;
        else c.params[k] = to_double(section, k, v);
      });
    } else if (section.rfind("stabilize:", 0) == 0) {
      RecipeConfig r;
      r.target = section.substr(10);
      require(!r.target.empty(), "[stabilize:] needs a target orbit label");
      bool has_lambda = false;
      each([&](const std::string& k, const std::string& v) {
        if (k == "lambda") {
          r.lambda = to_double(section, k, v);
          has_lambda = true;
        } else if (k == "delta") r.delta = to_double(section, k, v);
        else if (k == "epsilon") r.epsilon = to_double(section, k, v);
        else if (k == "h") r.h = v;
        else if (k == "h_value") r.h_value = to_double(section, k, v);
        else if (k == "h_axis") r.h_axis = to_int(section, k, v);
        else throw ConfigurationError("unknown key " + where(section, k));
      });
      require(has_lambda, "[" + section + "] lambda is required");
      c.recipes.push_back(r);
    } else if (section == "flow") {
      each([&](const std::string& k, const std::string& v) {
        if (k == "directions") c.flow.directions = to_int(section, k, v);
        else if (k == "samples") c.flow.samples = to_int(section, k, v);
        else if (k == "fiber_samples") c.flow.fiber_samples = to_int(section, k, v);
        else if (k == "t_max") c.flow.t_max = to_double(section, k, v);
        else if (k == "capture_radius") c.flow.capture_radius = to_double(section, k, v);
        else if (k == "max_step") c.flow.max_step = to_double(section, k, v);
        else if (k == "tolerance") c.flow.tolerance = to_double(section, k, v);
        else throw ConfigurationError("unknown key " + where(section, k));
      });
    } else if (section == "cochain") {
      each([&](const std::string& k, const std::string& v) {
        if (k == "truncation") c.truncation = to_int(section, k, v);
        else if (k == "table_theta_max") c.table_theta_max = to_int(section, k, v);
        else if (k == "allow_unstable") c.allow_unstable = to_bool(section, k, v);
        else throw ConfigurationError("unknown key " + where(section, k));
      });
    } else if (section == "output") {
      each([&](const std::string& k, const std::string& v) {
        if (k == "directory") c.output_directory = v;
        else if (k == "emit_flows") c.emit_flows = to_bool(section, k, v);
        else if (k == "verbose") c.verbose = to_bool(section, k, v);
        else throw ConfigurationError("unknown key " + where(section, k));
      });
    } else {
      throw ConfigurationError("unknown section [" + section + "]");
    }
  }
  validate_config(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[scenario]\nname = " << c.scenario << "\n";
  for (const auto& [k, v] : c.params) os << k << " = " << num(v) << "\n";
  for (const auto& r : c.recipes) {
    os << "\n[stabilize:" << r.target << "]\n";
    os << "lambda = " << num(r.lambda) << "\n";
    os << "delta = " << num(r.delta) << "\n";
    os << "epsilon = " << num(r.epsilon) << "\n";
    os << "h = " << r.h << "\n";
    os << "h_value = " << num(r.h_value) << "\n";
    os << "h_axis = " << r.h_axis << "\n";
  }
  const FlowSettings& f = c.flow;
  os << "\n[flow]\n";
  os << "directions = " << f.directions << "\n";
  os << "samples = " << f.samples << "\n";
  os << "fiber_samples = " << f.fiber_samples << "\n";
  os << "t_max = " << num(f.t_max) << "\n";
  os << "capture_radius = " << num(f.capture_radius) << "\n";
  os << "max_step = " << num(f.max_step) << "\n";
  os << "tolerance = " << num(f.tolerance) << "\n";
  os << "\n[cochain]\n";
  os << "truncation = " << c.truncation << "\n";
  os << "table_theta_max = " << c.table_theta_max << "\n";
  os << "allow_unstable = " << (c.allow_unstable ? "true" : "false") << "\n";
  os << "\n[output]\n";
  os << "directory = " << c.output_directory << "\n";
  os << "emit_flows = " << (c.emit_flows ? "true" : "false") << "\n";
  os << "verbose = " << (c.verbose ? "true" : "false") << "\n";
  return os.str();
}

}  // namespace eqmorse
