#include "fairlens/report.hpp"

#include <cstring>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairlens/counterfactual.hpp"
#include "fairlens/digest.hpp"
#include "fairlens/effects.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/metrics.hpp"

namespace fairlens {

namespace {

using nlohmann::json;

// Sections degrade per entry: anything the scenario cannot support becomes a
// deterministic {"error": ...} object instead of aborting the whole report.
template <typename Fn>
json guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    return json{{"error", e.what()}};
  }
}

json to_json(const EffectEstimate& e) {
  json j;
  j["value"] = e.value;
  j["method"] = estimate_method_name(e.method);
  if (e.n_samples) j["n_samples"] = *e.n_samples;
  if (e.std_error) j["std_error"] = *e.std_error;
  if (e.seed) j["seed"] = *e.seed;
  if (!e.note.empty()) j["note"] = e.note;
  return j;
}

using EffectFn = std::function<EffectEstimate(EstimateMethod, const McOptions&)>;

// Closed form when the model admits it, Monte Carlo otherwise.
json effect_entry(const EffectFn& run, uint64_t seed) {
  return guarded([&]() -> json {
    try {
      return to_json(run(EstimateMethod::ClosedForm, {}));
    } catch (const Error&) {
      return to_json(run(EstimateMethod::MonteCarlo, McOptions{100000, seed}));
    }
  });
}

json audit_section(const CausalGraph& g) {
  return guarded([&]() -> json {
    const AuditReport ar = audit_paths(g);
    json paths = json::array();
    for (const ClassifiedPath& cp : ar.outcome_paths) {
      paths.push_back({{"path", cp.path.to_string(g)},
                       {"kind", path_kind_name(cp.kind)},
                       {"fairness", edge_label_name(cp.fairness)}});
    }
    json j;
    j["sensitive"] = g.name(ar.sensitive);
    j["outcome"] = g.name(ar.outcome);
    j["paths"] = paths;
    return j;
  });
}

json recommendation_section(const CausalGraph& g) {
  return guarded([&]() -> json {
    const Recommendation rec = recommend_criteria(audit_paths(g));
    return json{
        {"demographic_parity", appropriateness_name(rec.demographic_parity)},
        {"error_rate_parity", appropriateness_name(rec.error_rate_parity)},
        {"calibration", appropriateness_name(rec.calibration)},
        {"rationale", rec.rationale}};
  });
}

json effects_section(const StructuralModel& m, uint64_t seed) {
  const CausalGraph& g = m.graph();
  const int a = *g.sensitive();
  const int y = *g.outcome();
  json j;
  j["ate"] = effect_entry(
      [&](EstimateMethod method, const McOptions& mc) {
        return ate(m, 1.0, 0.0, method, mc);
      },
      seed);
  if (g.has_edge(a, y)) {
    j["ade"] = effect_entry(
        [&](EstimateMethod method, const McOptions& mc) {
          return ade(m, 1.0, 0.0, AdeVariant::Standard, method, mc);
        },
        seed);
    j["aie"] = effect_entry(
        [&](EstimateMethod method, const McOptions& mc) {
          return aie(m, 1.0, 0.0, AieVariant::BaselineDirect, method, mc);
        },
        seed);
    j["pse_direct"] = effect_entry(
        [&](EstimateMethod method, const McOptions& mc) {
          PathInterventionSpec direct{0.0, 1.0, {g.name(y)}};
          return pse(m, direct, method, mc);
        },
        seed);
  }
  if (m.is_bernoulli(a)) {
    j["ett"] = effect_entry(
        [&](EstimateMethod method, const McOptions& mc) {
          return ett(m, 1.0, 0.0, method, mc);
        },
        seed);
    j["nci"] = effect_entry(
        [&](EstimateMethod method, const McOptions& mc) {
          return nci(m, 1.0, 0.0, method, mc);
        },
        seed);
  }
  j["backdoor"] = guarded([&]() -> json {
    const auto sets = minimal_adjustment_sets(g, a, y);
    if (sets.empty()) {
      fail(Errc::BackdoorViolated, "no admissible adjustment set");
    }
    std::set<std::string> adjustment;
    for (int v : sets.front()) adjustment.insert(g.name(v));
    const auto arm = [&](double value) {
      return effect_entry(
          [&, value](EstimateMethod method, const McOptions& mc) {
            return backdoor_adjust(m, value, adjustment, method, mc);
          },
          seed);
    };
    json out;
    out["adjustment"] = json(adjustment);
    out["a1"] = arm(1.0);
    out["a0"] = arm(0.0);
    if (out["a1"].contains("value") && out["a0"].contains("value")) {
      out["difference"] = out["a1"]["value"].get<double>() -
                          out["a0"]["value"].get<double>();
    }
    if (m.is_bernoulli(a)) {
      try {
        const std::string a_name = g.name(a);
        const Moments m1 =
            population_moments(m, std::map<std::string, double>{{a_name, 1.0}});
        const Moments m0 =
            population_moments(m, std::map<std::string, double>{{a_name, 0.0}});
        out["naive_difference"] = m1.mean[y] - m0.mean[y];
      } catch (const Error&) {
        // non-linear mechanisms: skip the closed-form contrast
      }
    }
    return out;
  });
  return j;
}

json counterfactual_section(const StructuralModel& m, const Dataset& probe,
                            uint64_t seed) {
  return guarded([&]() -> json {
    const CausalGraph& g = m.graph();
    const std::string a_name = g.name(*g.sensitive());
    const std::string y_name = g.name(*g.outcome());
    Record rec;
    for (size_t c = 0; c < probe.columns.size(); ++c) {
      rec[probe.columns[c]] = probe.rows.front()[c];
    }
    const double a_val = rec.at(a_name);
    PathInterventionSpec flip{1.0 - a_val, a_val, {}};
    const CounterfactualSummary cf =
        counterfactual_outcome(m, rec, flip, y_name, 1000, seed);
    json out;
    out["record"] = json(rec);
    out["factual_outcome"] = rec.at(y_name);
    json flipped;
    flipped["value"] = cf.mean;
    flipped["exact"] = cf.exact;
    if (cf.std_error) flipped["std_error"] = *cf.std_error;
    out["flipped_outcome"] = flipped;
    out["fair_prediction"] = guarded([&]() -> json {
      FairPredictOptions opts;
      opts.n_samples = 1000;
      opts.seed = seed;
      return fair_predict(m, rec, opts);
    });
    return out;
  });
}

json counts_json(const GroupCounts& c) {
  return json{{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}};
}

json metrics_from_counts(const GroupedCounts& c) {
  json j;
  j["counts"] = {{"group0", counts_json(c.groups[0])},
                 {"group1", counts_json(c.groups[1])}};
  j["demographic_parity"] = guarded([&]() -> json {
    const DemographicParityResult r = demographic_parity(c);
    return json{{"rate0", r.rate0},
                {"rate1", r.rate1},
                {"difference", r.difference()},
                {"gap", r.gap()}};
  });
  j["error_rate_parity"] = guarded([&]() -> json {
    const ErrorRateParityResult r = error_rate_parity(c);
    return json{{"fpr0", r.fpr0},           {"fpr1", r.fpr1},
                {"fnr0", r.fnr0},           {"fnr1", r.fnr1},
                {"fpr_gap", r.fpr_gap()},   {"fnr_gap", r.fnr_gap()}};
  });
  j["predictive_parity"] = guarded([&]() -> json {
    const PredictiveParityResult r = predictive_parity(c);
    return json{
        {"ppv0", r.ppv0}, {"ppv1", r.ppv1}, {"gap", r.gap()}};
  });
  return j;
}

}  // namespace

std::string dataset_digest(const Dataset& data) {
  std::string buf;
  buf.reserve(16 + data.columns.size() * 8 +
              data.rows.size() * data.columns.size() * 8);
  for (const std::string& c : data.columns) {
    buf += c;
    buf += '\n';
  }
  char bytes[sizeof(double)];
  for (const auto& row : data.rows) {
    for (double v : row) {
      std::memcpy(bytes, &v, sizeof(double));
      buf.append(bytes, sizeof(double));
    }
  }
  return hex64(fnv1a(buf));
}

nlohmann::json build_report(const ScenarioSpec& scenario,
                            const std::optional<Dataset>& data, uint64_t seed,
                            int workers) {
  json report;
  report["schema"] = 1;
  report["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  report["seed"] = seed;

  json inputs;
  inputs["scenario"] = scenario.name;
  inputs["scenario_hash"] = hex64(fnv1a(serialize_scenario(scenario)));
  if (scenario.model) inputs["model_digest"] = scenario.model->digest();
  if (data) inputs["data_hash"] = dataset_digest(*data);
  report["inputs"] = inputs;

  const CausalGraph& g = scenario.graph;
  json sections;
  sections["audit"] = audit_section(g);
  sections["recommendation"] = recommendation_section(g);

  if (scenario.model) {
    const StructuralModel& m = *scenario.model;
    const Dataset probe = sample(m, 1000, seed, workers);
    sections["sampling"] = {{"n", probe.size()},
                            {"digest", dataset_digest(probe)}};
    if (g.sensitive() && g.outcome()) {
      sections["effects"] = effects_section(m, seed);
      if (m.is_bernoulli(*g.sensitive())) {
        sections["counterfactuals"] = counterfactual_section(m, probe, seed);
      }
    }
  }

  json metrics;
  if (scenario.counts) {
    metrics["from_counts"] = metrics_from_counts(*scenario.counts);
  }
  if (data && scenario.bindings) {
    metrics["from_data"] = guarded([&]() -> json {
      const ColumnBindings& b = *scenario.bindings;
      MetricBindings mb;
      mb.group = b.group;
      mb.label = b.label;
      mb.prediction = b.prediction;
      mb.score = b.score;
      mb.threshold = b.threshold.value_or(0.5);
      return metrics_from_counts(confusion(*data, mb));
    });
  }
  if (!metrics.empty()) sections["metrics"] = metrics;

  report["sections"] = sections;
  return report;
}

}  // namespace fairlens
