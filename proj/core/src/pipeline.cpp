#include "eqmorse/pipeline.hpp"

#include <chrono>

namespace eqmorse {

namespace {

class StageTimer {
 public:
  StageTimer(RunReport& r, std::string name, const Logger& log)
      : report_(r), name_(std::move(name)), log_(log), start_(std::chrono::steady_clock::now()) {
    if (log_) log_("stage " + name_);
  }
  ~StageTimer() {
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    report_.timing[name_] += dt;
    if (log_) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.3f s", dt);
      log_("stage " + name_ + " done in " + buf);
    }
  }

 private:
  RunReport& report_;
  std::string name_;
  const Logger& log_;
  std::chrono::steady_clock::time_point start_;
};

template <class F>
auto stage(RunReport& r, const std::string& name, const Logger& log, F&& fn) {
  StageTimer t(r, name, log);
  try {
    return fn();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

StabilizationRecipe to_recipe(const RecipeConfig& rc) {
  SphereFunction h;
  h.kind = rc.h == "linear" ? SphereFunction::Kind::linear : SphereFunction::Kind::constant;
  h.c = rc.h_value;
  h.axis = rc.h_axis;
  return make_recipe(rc.target, rc.lambda, rc.delta, rc.epsilon, h);
}

const CriticalOrbit& orbit_by_id(const CriticalAnalysis& a, const std::string& id) {
  for (const auto& o : a.orbits)
    if (o.id == id) return o;
  throw PreconditionError("no orbit with id " + id);
}

}  // namespace

RunReport run(const RunConfig& config, const Logger& log) {
  RunReport r;
  r.config = config;
  stage(r, "config", log, [&] {
    validate_config(config);
    return 0;
  });

  const Scenario base = stage(r, "scenario", log, [&] { return build_scenario(config.scenario, config.params); });
  r.scenario = base;
  r.analysis = stage(r, "critical", log, [&] { return analyze_scenario(base); });

  if (!config.recipes.empty()) {
    stage(r, "stabilize", log, [&] {
      std::vector<StabilizationRecipe> recipes;
      for (const auto& rc : config.recipes) {
        const StabilizationRecipe rec = to_recipe(rc);
        apply_stabilization(base, r.analysis, rec);  // validation only
        recipes.push_back(rec);
      }
      Scenario s = stabilize_at(base, recipes);
      CriticalAnalysis a = analyze_scenario(s);
      for (const auto& rec : recipes) {
        RecipeOutcome out{rec, verify_index_shift(base, r.analysis, s, a, rec)};
        if (!out.index_shift.ok) r.warnings.push_back("index shift check failed at " + rec.target);
        r.recipes.push_back(std::move(out));
      }
      r.scenario = std::move(s);
      r.analysis = std::move(a);
      return 0;
    });
  }
  const Scenario& s = r.scenario;
  const CriticalAnalysis& a = r.analysis;
  for (const auto& w : a.warnings) r.warnings.push_back(w);

  bool assemble = true;
  bool components = false;
  for (const auto& o : a.orbits) {
    if (o.component_dim > o.orbit_dim) {
      components = true;
      assemble = false;
      r.warnings.push_back("critical set " + o.label + " is not a single orbit; complex skipped");
    }
  }
  for (const auto& o : a.orbits) {
    if (!o.stable && !config.allow_unstable) {
      assemble = false;
      r.warnings.push_back("unstable orbit " + o.label + "; complex skipped");
    }
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  if (!components) pairs = required_covers(s, a);
  r.transversality = stage(r, "transversality", log, [&] { return diagnose_transversality(s, a, config.flow, pairs); });
  for (const auto& t : r.transversality) {
    if (t.verdict == Verdict::failure_detected) {
      assemble = false;
      r.warnings.push_back("Morse-Bott-Smale condition fails for (" + orbit_by_id(a, t.source).label + ", " +
                           orbit_by_id(a, t.target).label + "); complex skipped");
    }
  }

  if (assemble) {
    r.covers = stage(r, "covers", log, [&] {
      std::vector<ModuliCover> covers;
      std::map<std::string, std::vector<FlowLine>> shots;
      for (const auto& [sid, tid] : pairs) {
        const CriticalOrbit& src = orbit_by_id(a, sid);
        const CriticalOrbit& tgt = orbit_by_id(a, tid);
        if (src.index == 1 && !shots.count(sid)) shots[sid] = shoot_descending_sphere(s, a, src, config.flow);
        static const std::vector<FlowLine> none;
        const auto it = shots.find(sid);
        covers.push_back(extract_moduli_cover(s, a, src, tgt, it == shots.end() ? none : it->second, config.flow));
        if (log) log("cover " + src.label + " -> " + tgt.label + " via " + covers.back().method);
      }
      return covers;
    });
    // Lines found by ascending shooting or fiber sampling settle pairs that
    // direct shooting missed.
    for (auto& t : r.transversality) {
      if (t.verdict != Verdict::inconclusive) continue;
      for (const auto& c : r.covers) {
        if (c.source_orbit != t.source || c.target_orbit != t.target || c.lines.empty()) continue;
        t.witness = c.lines.front();
        t.observed_family_dim = 0;
        t.verdict = t.expected_dim >= 0 ? Verdict::transverse : Verdict::failure_detected;
        t.note = "line from cover extraction (" + c.method + ")";
        if (t.verdict == Verdict::transverse) t.note += "; dimension matches";
        break;
      }
    }
    stage(r, "cochain", log, [&] {
      AssemblyOptions ao;
      ao.allow_unstable = config.allow_unstable;
      r.ordinary = assemble_ordinary(s, a, r.covers, ao);
      r.cartan = assemble_cartan(s, a, r.covers, config.truncation, ao);
      if (!squares_to_zero(*r.ordinary) || !squares_to_zero(*r.cartan)) {
        throw AssemblyError("differential does not square to zero");
      }
      if (r.cartan->truncation > 0) theta_module_action(*r.cartan);
      return 0;
    });
    stage(r, "cohomology", log, [&] {
      r.ordinary_cohomology = cohomology(*r.ordinary);
      r.cartan_cohomology = cohomology(*r.cartan);
      return 0;
    });
    if (r.cartan->truncation > 0) {
      r.warnings.push_back("Cartan complex truncated at theta^" + std::to_string(r.cartan->truncation) +
                           "; degrees above " + std::to_string(r.cartan->safe_max_degree) + " unreliable");
    }
  }

  for (const auto& t : r.transversality) {
    if (t.verdict == Verdict::inconclusive) {
      r.warnings.push_back("no connecting line found for (" + orbit_by_id(a, t.source).label + ", " +
                           orbit_by_id(a, t.target).label + "); empty moduli space assumed");
    }
  }

  int id = 0;
  for (const auto& t : r.transversality) {
    if (!t.witness) continue;
    r.flows.push_back(*t.witness);
    r.flows.back().id = ++id;
  }
  for (const auto& c : r.covers) {
    for (const auto& fl : c.lines) {
      r.flows.push_back(fl);
      r.flows.back().id = ++id;
    }
  }
  return r;
}

}  // namespace eqmorse
