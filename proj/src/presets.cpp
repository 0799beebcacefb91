#include "fairlens/presets.hpp"

#include <map>

namespace fairlens {

namespace {

struct Preset {
  std::string summary;
  std::string source;
};

// Linear admissions scenario: one fair mediated route (via department
// choice D) and one unfair direct route into the outcome.
const char* kCollege = R"(graph college {
  node A { kind: bernoulli, p: 0.5, role: sensitive }
  node Q { kind: linear, intercept: 1, sigma: 1 }
  node D { kind: linear, intercept: 0.5, coef: { A: 4 }, sigma: 1 }
  node Y { kind: linear, intercept: 0.2, coef: { A: -1, D: 1.5, Q: 2 }, sigma: 1, role: outcome }
  edge A -> D { label: fair }
  edge A -> Y { label: unfair }
  edge D -> Y { label: fair }
  edge Q -> Y { label: fair }
}
)";

// Same admissions story with a saturating outcome mechanism, for showing
// where linear-only identities break down.
const char* kCollegeNonlinear = R"(graph college_nonlinear {
  node A { kind: bernoulli, p: 0.5, role: sensitive }
  node Q { kind: linear, intercept: 0, sigma: 1 }
  node D { kind: linear, intercept: 0.3, coef: { A: 0.8 }, sigma: 1 }
  node Y { kind: expr, expr: "2*tanh(1.5*A + D) + 0.5*Q", sigma: 0.5, role: outcome }
  edge A -> D { label: fair }
  edge A -> Y { label: unfair }
  edge D -> Y { label: fair }
  edge Q -> Y { label: fair }
}
)";

// Two chained mediators plus a confounder; the classic decomposition
// playground (total = 12.5, direct = 1, path group {A->Y, A->M} = 13).
const char* kMediation = R"(graph mediation {
  node C { kind: bernoulli, p: 0.5 }
  node A { kind: logistic, intercept: -0.8, coef: { C: 1.6 }, role: sensitive }
  node M { kind: linear, intercept: 0.5, coef: { A: 3 }, sigma: 1 }
  node L { kind: linear, intercept: 1, coef: { A: -1, M: 4 }, sigma: 1 }
  node Y { kind: linear, intercept: 0.3, coef: { A: 1, C: 0.7, L: 0.5, M: 2 }, sigma: 1, role: outcome }
  edge A -> M { label: unfair }
  edge A -> Y { label: unfair }
  edge A -> L { label: fair }
  edge M -> L { label: fair }
  edge M -> Y { label: fair }
  edge L -> Y { label: fair }
}
)";

// Qualification scenario: the outcome listens only to the latent skill M,
// yet the recorded feature X mixes M with the sensitive attribute.  The
// sensitive node is independent of the outcome marginally, but not once X
// is held fixed.
const char* kMusic = R"(graph music {
  node A { kind: linear, intercept: 0, sigma: 1, role: sensitive }
  node M { kind: linear, intercept: 0, sigma: 1 }
  node X { kind: linear, intercept: 0, coef: { A: 1, M: 2 }, sigma: 0 }
  node Y { kind: linear, intercept: 0, coef: { M: 3 }, sigma: 0, role: outcome }
}
)";

// Binary treatment and confounder with known closed-form contrasts:
// adjusted effect 1, naive gap 2.2.
const char* kConfounded = R"(graph confounded {
  node C { kind: bernoulli, p: 0.5 }
  node A { kind: logistic, intercept: -1.3862943611198906, coef: { C: 2.772588722239781 }, role: sensitive }
  node Y { kind: linear, intercept: 0, coef: { A: 1, C: 2 }, sigma: 1, role: outcome }
  edge A -> Y { label: unfair }
}
)";

// Dense graph for adjustment-set search: two back-door routes, a collider
// that opens under naive conditioning, and descendants that must stay out
// of the adjustment set.
const char* kColliderWeb = R"(graph collider_web {
  node E { kind: linear, intercept: 0, sigma: 1 }
  node X { kind: linear, intercept: 0, sigma: 1 }
  node C { kind: linear, intercept: 0, coef: { E: 0.8, X: 1.3 }, sigma: 1 }
  node A { kind: linear, intercept: 0, coef: { C: 0.7, E: 1.1 }, sigma: 1, role: sensitive }
  node B { kind: linear, intercept: 0, coef: { A: 0.9 }, sigma: 1 }
  node Y { kind: linear, intercept: 0, coef: { A: 0.6, B: 1.2, C: 1.4, X: 0.75 }, sigma: 1, role: outcome }
  node Z { kind: linear, intercept: 0, coef: { B: 1.05, Y: 0.85 }, sigma: 1 }
}
)";

// Aggregate confusion counts with a 0.25 positive-rate gap and error-rate
// gaps of about 0.214 / 0.197; no structural model attached.
const char* kCompasRates = R"(graph compas_rates {
  node A { role: sensitive }
  node Y { role: outcome }
  edge A -> Y { label: unfair }
  counts {
    group0: { tp: 34804, fp: 23196, tn: 28465, fn: 13535 },
    group1: { tp: 17252, fp: 15748, tn: 51266, fn: 15734 }
  }
}
)";

const std::map<std::string, Preset>& registry() {
  static const std::map<std::string, Preset> presets = {
      {"college",
       {"linear admissions model with a fair mediated route and an unfair "
        "direct route",
        kCollege}},
      {"college_nonlinear",
       {"admissions variant with a saturating outcome mechanism", kCollegeNonlinear}},
      {"collider_web",
       {"dense graph exercising adjustment-set search around a collider",
        kColliderWeb}},
      {"compas_rates",
       {"aggregate confusion-count fixture for the rate metrics", kCompasRates}},
      {"confounded",
       {"binary treatment and outcome sharing a binary confounder", kConfounded}},
      {"mediation",
       {"two chained mediators and a confounder for effect decomposition",
        kMediation}},
      {"music",
       {"proxy-feature scenario whose outcome depends only on a latent skill",
        kMusic}},
  };
  return presets;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, preset] : registry()) {
      (void)preset;
      out.push_back(name);
    }
    return out;
  }();
  return names;
}

bool is_preset(const std::string& name) { return registry().count(name) > 0; }

const std::string& preset_source(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) {
    std::string known;
    for (const std::string& n : preset_names()) {
      known += (known.empty() ? "" : ", ") + n;
    }
    fail(Errc::BadParameter, "unknown preset '" + name + "' (available: " +
                                 known + ")");
  }
  return it->second.source;
}

const std::string& preset_summary(const std::string& name) {
  auto it = registry().find(name);
  if (it == registry().end()) return preset_source(name);  // throws
  return it->second.summary;
}

ScenarioSpec load_preset(const std::string& name) {
  return parse_scenario(preset_source(name));
}

}  // namespace fairlens
