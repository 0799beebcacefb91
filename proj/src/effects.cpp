#include "fairlens/effects.hpp"

#include <algorithm>
#include <cmath>

#include "fairlens/rng.hpp"

namespace fairlens {

const char* estimate_method_name(EstimateMethod m) noexcept {
  return m == EstimateMethod::ClosedForm ? "closed_form" : "monte_carlo";
}

int PathInterventionSpec::validate(const StructuralModel& m) const {
  const CausalGraph& g = m.graph();
  if (!g.sensitive()) {
    fail(Errc::RolesUnset, "path interventions need a sensitive node");
  }
  const int a = *g.sensitive();
  for (const auto& child : active_children) {
    const int c = g.index_of(child);
    if (!g.has_edge(a, c)) {
      fail(Errc::UnknownNode,
           "no edge " + g.name(a) + " -> " + child + " to activate");
    }
  }
  if (!std::isfinite(baseline) || !std::isfinite(active)) {
    fail(Errc::BadParameter, "intervention values must be finite");
  }
  return a;
}

namespace {

struct Roles {
  int a;
  int y;
};

Roles require_roles(const StructuralModel& m) {
  const CausalGraph& g = m.graph();
  if (!g.sensitive() || !g.outcome()) {
    fail(Errc::RolesUnset, "effect estimation needs sensitive and outcome roles");
  }
  return {*g.sensitive(), *g.outcome()};
}

// Sensitive-input value seen by each child of the sensitive node.
std::map<int, double> per_child_inputs(const StructuralModel& m,
                                       const PathInterventionSpec& spec) {
  const CausalGraph& g = m.graph();
  const int a = spec.validate(m);
  std::map<int, double> inputs;
  for (int c : g.children(a)) {
    const bool active = spec.active_children.count(g.name(c)) > 0;
    inputs[c] = active ? spec.active : spec.baseline;
  }
  return inputs;
}

// Folds fixed sensitive-node inputs into child intercepts and removes the
// corresponding edges; the result has no open sensitive influence, so its
// moments are the regime's distribution.
StructuralModel absorb_sensitive_edges(const StructuralModel& m,
                                       const std::map<int, double>& inputs) {
  const CausalGraph& g = m.graph();
  const int a = *g.sensitive();
  const std::string a_name = g.name(a);
  GraphSpec spec = g.to_spec();
  spec.edges.erase(std::remove_if(spec.edges.begin(), spec.edges.end(),
                                  [&](const GraphSpec::EdgeDecl& e) {
                                    return e.parent == a_name;
                                  }),
                   spec.edges.end());
  std::map<std::string, Mechanism> mechanisms;
  for (int v = 0; v < g.size(); ++v) {
    Mechanism mech = m.mechanism(v);
    auto it = inputs.find(v);
    if (it != inputs.end()) {
      const double value = it->second;
      if (auto* lg = std::get_if<LinearGaussian>(&mech)) {
        lg->intercept += lg->coefficients.at(a_name) * value;
        lg->coefficients.erase(a_name);
      } else if (auto* logit = std::get_if<BernoulliLogistic>(&mech)) {
        logit->intercept += logit->coefficients.at(a_name) * value;
        logit->coefficients.erase(a_name);
      } else {
        fail(Errc::UnsupportedMechanism,
             "closed form requires linear or logistic children of '" +
                 a_name + "'; '" + g.name(v) + "' is not");
      }
    }
    mechanisms.emplace(g.name(v), std::move(mech));
  }
  return build_model(validate_graph(spec), mechanisms);
}

// One Monte-Carlo evaluation arm: optional pinned nodes plus optional
// per-child sensitive inputs.
struct Arm {
  const std::map<int, double>* forced = nullptr;
  const std::map<int, double>* sensitive_inputs = nullptr;  // child -> value
  int sensitive = -1;
};

void eval_arm(const StructuralModel& m, const std::vector<double>& noise,
              const Arm& arm, std::vector<double>& values) {
  const CausalGraph& g = m.graph();
  values.assign(static_cast<size_t>(g.size()), 0.0);
  std::vector<double> parent_values;
  for (int v : g.topo_order()) {
    if (arm.forced) {
      auto it = arm.forced->find(v);
      if (it != arm.forced->end()) {
        values[static_cast<size_t>(v)] = it->second;
        continue;
      }
    }
    parent_values.clear();
    for (int p : g.parents(v)) {
      double pv = values[static_cast<size_t>(p)];
      if (arm.sensitive_inputs && p == arm.sensitive) {
        auto it = arm.sensitive_inputs->find(v);
        if (it != arm.sensitive_inputs->end()) pv = it->second;
      }
      parent_values.push_back(pv);
    }
    values[static_cast<size_t>(v)] =
        m.mechanism_value(v, parent_values, noise[static_cast<size_t>(v)]);
  }
}

struct PairedMean {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean of target under arm1 minus arm2, sharing every noise draw (common
// random numbers), with the paired standard error.
PairedMean mc_paired_diff(const StructuralModel& m, const Arm& arm1,
                          const Arm& arm2, int target, const McOptions& mc) {
  if (mc.n < 2) fail(Errc::BadParameter, "need at least 2 samples");
  const CausalGraph& g = m.graph();
  const size_t k = static_cast<size_t>(g.size());
  std::vector<double> noise(k), v1, v2;
  double sum = 0.0, sumsq = 0.0;
  for (size_t r = 0; r < mc.n; ++r) {
    for (size_t v = 0; v < k; ++v) {
      noise[v] = draw_noise(m, static_cast<int>(v), mc.seed, r);
    }
    eval_arm(m, noise, arm1, v1);
    eval_arm(m, noise, arm2, v2);
    const double d = v1[static_cast<size_t>(target)] - v2[static_cast<size_t>(target)];
    sum += d;
    sumsq += d * d;
  }
  const double n = static_cast<double>(mc.n);
  PairedMean out;
  out.mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * out.mean * out.mean) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  return out;
}

EffectEstimate closed(double value) {
  EffectEstimate est;
  est.value = value;
  est.method = EstimateMethod::ClosedForm;
  return est;
}

EffectEstimate from_paired(const PairedMean& pm, const McOptions& mc) {
  EffectEstimate est;
  est.value = pm.mean;
  est.method = EstimateMethod::MonteCarlo;
  est.n_samples = mc.n;
  est.std_error = pm.std_error;
  est.seed = mc.seed;
  return est;
}

// Difference of two path-intervention regimes over the outcome.
EffectEstimate regime_difference(const StructuralModel& m,
                                 const PathInterventionSpec& spec1,
                                 const PathInterventionSpec& spec2,
                                 EstimateMethod method, const McOptions& mc) {
  const Roles roles = require_roles(m);
  if (method == EstimateMethod::ClosedForm) {
    return closed(regime_mean_closed(m, spec1, m.graph().name(roles.y)) -
                  regime_mean_closed(m, spec2, m.graph().name(roles.y)));
  }
  const std::map<int, double> in1 = per_child_inputs(m, spec1);
  const std::map<int, double> in2 = per_child_inputs(m, spec2);
  Arm arm1{nullptr, &in1, roles.a};
  Arm arm2{nullptr, &in2, roles.a};
  return from_paired(mc_paired_diff(m, arm1, arm2, roles.y, mc), mc);
}

PathInterventionSpec all_children_spec(const StructuralModel& m, double baseline,
                                       double active, bool all_active) {
  const CausalGraph& g = m.graph();
  PathInterventionSpec spec;
  spec.baseline = baseline;
  spec.active = active;
  if (all_active) {
    for (int c : g.children(*g.sensitive())) spec.active_children.insert(g.name(c));
  }
  return spec;
}

void require_direct_edge(const StructuralModel& m, const Roles& roles) {
  if (!m.graph().has_edge(roles.a, roles.y)) {
    fail(Errc::NoDirectEdge,
         "no direct edge " + m.graph().name(roles.a) + " -> " +
             m.graph().name(roles.y));
  }
}

PathInterventionSpec mediators_spec(const StructuralModel& m,
                                    const Roles& roles, double baseline,
                                    double active) {
  PathInterventionSpec spec = all_children_spec(m, baseline, active, true);
  spec.active_children.erase(m.graph().name(roles.y));
  return spec;
}

PathInterventionSpec direct_only_spec(const StructuralModel& m,
                                      const Roles& roles, double baseline,
                                      double active) {
  PathInterventionSpec spec;
  spec.baseline = baseline;
  spec.active = active;
  spec.active_children.insert(m.graph().name(roles.y));
  return spec;
}

}  // namespace

double regime_mean_closed(const StructuralModel& m,
                          const PathInterventionSpec& spec,
                          const std::string& target) {
  const std::map<int, double> inputs = per_child_inputs(m, spec);
  const StructuralModel absorbed = absorb_sensitive_edges(m, inputs);
  const Moments mom = population_moments(absorbed);
  return mom.mean[mom.index(target)];
}

EffectEstimate ate(const StructuralModel& m, double a, double abar,
                   EstimateMethod method, const McOptions& mc) {
  const Roles roles = require_roles(m);
  const std::string a_name = m.graph().name(roles.a);
  if (method == EstimateMethod::ClosedForm) {
    const StructuralModel m_a = intervene(m, {{a_name, a}});
    const StructuralModel m_abar = intervene(m, {{a_name, abar}});
    const Moments mom_a = population_moments(m_a);
    const Moments mom_abar = population_moments(m_abar);
    return closed(mom_a.mean[roles.y] - mom_abar.mean[roles.y]);
  }
  // do(A=a) and a regime sending `a` along every outgoing edge give the
  // same outcome distribution; the regime form shares noise across arms.
  PathInterventionSpec s1 = all_children_spec(m, abar, a, true);
  PathInterventionSpec s2 = all_children_spec(m, abar, a, false);
  return regime_difference(m, s1, s2, method, mc);
}

EffectEstimate pse(const StructuralModel& m, const PathInterventionSpec& spec,
                   EstimateMethod method, const McOptions& mc) {
  PathInterventionSpec baseline = spec;
  baseline.active_children.clear();
  return regime_difference(m, spec, baseline, method, mc);
}

EffectEstimate ade(const StructuralModel& m, double a, double abar,
                   AdeVariant variant, EstimateMethod method,
                   const McOptions& mc) {
  const Roles roles = require_roles(m);
  require_direct_edge(m, roles);
  if (variant == AdeVariant::Standard) {
    // <Y_a(M_abar)> - <Y_abar>
    return regime_difference(m, direct_only_spec(m, roles, abar, a),
                             all_children_spec(m, abar, a, false), method, mc);
  }
  // <Y_a> - <Y_abar(M_a)>
  return regime_difference(m, all_children_spec(m, abar, a, true),
                           mediators_spec(m, roles, abar, a), method, mc);
}

EffectEstimate aie(const StructuralModel& m, double a, double abar,
                   AieVariant variant, EstimateMethod method,
                   const McOptions& mc) {
  const Roles roles = require_roles(m);
  require_direct_edge(m, roles);
  if (variant == AieVariant::BaselineDirect) {
    // <Y_abar(M_a)> - <Y_abar>
    return regime_difference(m, mediators_spec(m, roles, abar, a),
                             all_children_spec(m, abar, a, false), method, mc);
  }
  // <Y_a> - <Y_a(M_abar)>: the second regime sends a along the direct edge
  // and abar to every mediator.
  return regime_difference(m, all_children_spec(m, abar, a, true),
                           direct_only_spec(m, roles, abar, a), method, mc);
}

namespace {

void require_binary_sensitive(const StructuralModel& m, const Roles& roles,
                              double a, double abar) {
  if (!m.is_bernoulli(roles.a)) {
    fail(Errc::BadParameter,
         "treated/control contrasts need a Bernoulli sensitive node");
  }
  for (double v : {a, abar}) {
    if (v != 0.0 && v != 1.0) {
      fail(Errc::BadParameter, "sensitive values must be 0 or 1");
    }
  }
}

// Conditional mean of the outcome given A == value, exactly.
double conditional_outcome_mean(const StructuralModel& m, const Roles& roles,
                                double value) {
  const Moments mom = population_moments(
      m, std::map<std::string, double>{{m.graph().name(roles.a), value}});
  return mom.mean[roles.y];
}

// <Y_x> averaged over p(noise | A = w): enumerate Bernoulli configurations,
// weight by the posterior given A = w, and evaluate the intervened model
// conditioned on the non-descendant part of each configuration.
double counterfactual_given_factual(const StructuralModel& m,
                                    const Roles& roles, double x, double w) {
  const CausalGraph& g = m.graph();
  const std::set<int> desc = g.descendants(roles.a);
  const StructuralModel m_x = intervene(m, {{g.name(roles.a), x}});

  std::vector<BernoulliConfig> configs = enumerate_bernoulli_configs(m);
  double total = 0.0;
  double acc = 0.0;
  for (const auto& cfg : configs) {
    auto it = cfg.values.find(roles.a);
    if (it == cfg.values.end() || it->second != w) continue;
    total += cfg.prob;
    std::map<std::string, double> condition;
    for (const auto& [v, value] : cfg.values) {
      if (v == roles.a || desc.count(v)) continue;
      condition.emplace(g.name(v), value);
    }
    const Moments mom = population_moments(m_x, condition);
    acc += cfg.prob * mom.mean[roles.y];
  }
  if (total < 1e-12) {
    fail(Errc::DegenerateConditioning,
         "P(A = " + std::to_string(w) + ") is below 1e-12");
  }
  return acc / total;
}

struct WeightedMean {
  double mean = 0.0;
  double std_error = 0.0;
  double total_weight = 0.0;
};

// Self-normalized importance estimate with its delta-method error.
WeightedMean finish_weighted(const std::vector<double>& weights,
                             const std::vector<double>& values) {
  WeightedMean out;
  double sw = 0.0, swv = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    sw += weights[i];
    swv += weights[i] * values[i];
  }
  out.total_weight = sw;
  if (sw <= 0.0) {
    fail(Errc::DegenerateConditioning, "all importance weights are zero");
  }
  out.mean = swv / sw;
  double acc = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    const double d = values[i] - out.mean;
    acc += weights[i] * weights[i] * d * d;
  }
  out.std_error = std::sqrt(acc) / sw;
  return out;
}

// Monte-Carlo machinery shared by ett and nci: for each noise draw,
// compute the factual parent values of A, the weight p(A=w | parents), and
// outcome values under pinned A.
struct TreatedSamples {
  std::vector<double> weight_a;     // p(A=a | parents)
  std::vector<double> weight_abar;  // p(A=abar | parents)
  std::vector<double> y_do_a;       // Y with A pinned to a
  std::vector<double> y_do_abar;    // Y with A pinned to abar
};

TreatedSamples draw_treated_samples(const StructuralModel& m,
                                    const Roles& roles, double a, double abar,
                                    const McOptions& mc) {
  const CausalGraph& g = m.graph();
  const size_t k = static_cast<size_t>(g.size());
  TreatedSamples out;
  out.weight_a.reserve(mc.n);
  out.weight_abar.reserve(mc.n);
  out.y_do_a.reserve(mc.n);
  out.y_do_abar.reserve(mc.n);
  std::vector<double> noise(k), values;
  const std::map<int, double> force_a{{roles.a, a}};
  const std::map<int, double> force_abar{{roles.a, abar}};
  std::vector<double> parent_values;
  for (size_t r = 0; r < mc.n; ++r) {
    for (size_t v = 0; v < k; ++v) {
      noise[v] = draw_noise(m, static_cast<int>(v), mc.seed, r);
    }
    // Factual pass just to get A's parents; A's own draw is irrelevant
    // because the weight integrates over it.
    Arm factual;
    eval_arm(m, noise, factual, values);
    parent_values.clear();
    for (int p : g.parents(roles.a)) {
      parent_values.push_back(values[static_cast<size_t>(p)]);
    }
    const double p1 = m.bernoulli_prob(roles.a, parent_values);
    out.weight_a.push_back(a > 0.5 ? p1 : 1.0 - p1);
    out.weight_abar.push_back(abar > 0.5 ? p1 : 1.0 - p1);
    Arm arm_a{&force_a, nullptr, -1};
    eval_arm(m, noise, arm_a, values);
    out.y_do_a.push_back(values[static_cast<size_t>(roles.y)]);
    Arm arm_abar{&force_abar, nullptr, -1};
    eval_arm(m, noise, arm_abar, values);
    out.y_do_abar.push_back(values[static_cast<size_t>(roles.y)]);
  }
  return out;
}

}  // namespace

EffectEstimate ett(const StructuralModel& m, double a, double abar,
                   EstimateMethod method, const McOptions& mc) {
  const Roles roles = require_roles(m);
  require_binary_sensitive(m, roles, a, abar);
  if (method == EstimateMethod::ClosedForm) {
    const double cf = counterfactual_given_factual(m, roles, a, abar);
    const double cond = conditional_outcome_mean(m, roles, abar);
    return closed(cf - cond);
  }
  const TreatedSamples s = draw_treated_samples(m, roles, a, abar, mc);
  // Paired: both terms condition on A=abar, so they share weights.
  std::vector<double> diffs(s.y_do_a.size());
  for (size_t i = 0; i < diffs.size(); ++i) {
    diffs[i] = s.y_do_a[i] - s.y_do_abar[i];
  }
  const WeightedMean wm = finish_weighted(s.weight_abar, diffs);
  EffectEstimate est;
  est.value = wm.mean;
  est.method = EstimateMethod::MonteCarlo;
  est.n_samples = mc.n;
  est.std_error = wm.std_error;
  est.seed = mc.seed;
  return est;
}

EffectEstimate nci(const StructuralModel& m, double a, double abar,
                   EstimateMethod method, const McOptions& mc) {
  const Roles roles = require_roles(m);
  require_binary_sensitive(m, roles, a, abar);
  if (method == EstimateMethod::ClosedForm) {
    const double cf = counterfactual_given_factual(m, roles, abar, a);
    const double cond = conditional_outcome_mean(m, roles, abar);
    return closed(cf - cond);
  }
  const TreatedSamples s = draw_treated_samples(m, roles, a, abar, mc);
  const WeightedMean term1 = finish_weighted(s.weight_a, s.y_do_abar);
  const WeightedMean term2 = finish_weighted(s.weight_abar, s.y_do_abar);
  EffectEstimate est;
  est.value = term1.mean - term2.mean;
  est.method = EstimateMethod::MonteCarlo;
  est.n_samples = mc.n;
  est.std_error = std::sqrt(term1.std_error * term1.std_error +
                            term2.std_error * term2.std_error);
  est.seed = mc.seed;
  return est;
}

namespace {

std::set<int> adjustment_indices(const CausalGraph& g,
                                 const std::set<std::string>& names) {
  std::set<int> out;
  for (const auto& name : names) out.insert(g.index_of(name));
  return out;
}

void check_backdoor(const StructuralModel& m, const Roles& roles,
                    const std::set<int>& adj, bool override_check,
                    EffectEstimate& est) {
  if (override_check) {
    est.note = "unverified: back-door criterion check overridden";
    return;
  }
  if (!satisfies_backdoor(m.graph(), adj, roles.a, roles.y)) {
    fail(Errc::BackdoorViolated,
         "adjustment set does not satisfy the back-door criterion");
  }
}

}  // namespace

EffectEstimate backdoor_adjust(const StructuralModel& m, double a_value,
                               const std::set<std::string>& adjustment,
                               EstimateMethod method, const McOptions& mc,
                               bool override_check) {
  const Roles roles = require_roles(m);
  const CausalGraph& g = m.graph();
  const std::set<int> adj = adjustment_indices(g, adjustment);
  EffectEstimate est;
  check_backdoor(m, roles, adj, override_check, est);

  if (method == EstimateMethod::MonteCarlo) {
    const Dataset ds = sample(m, mc.n, mc.seed);
    EffectEstimate plug = backdoor_adjust(ds, g.name(roles.a), a_value,
                                          g.name(roles.y), adjustment);
    plug.seed = mc.seed;
    plug.note = est.note;
    return plug;
  }

  require_binary_sensitive(m, roles, a_value, a_value);
  for (int v : adj) {
    if (!m.is_bernoulli(v)) {
      fail(Errc::UnsupportedMechanism,
           "closed-form adjustment needs Bernoulli adjustment variables; "
           "use the Monte-Carlo method for '" + g.name(v) + "'");
    }
  }

  // Marginal p(c) over the adjustment set.
  std::map<std::map<int, double>, double> strata;
  for (const auto& cfg : enumerate_bernoulli_configs(m)) {
    std::map<int, double> key;
    for (int v : adj) key[v] = cfg.values.at(v);
    strata[key] += cfg.prob;
  }
  double value = 0.0;
  const std::string a_name = g.name(roles.a);
  for (const auto& [key, prob] : strata) {
    if (prob <= 0.0) continue;
    std::map<std::string, double> condition;
    condition[a_name] = a_value;
    for (const auto& [v, val] : key) condition[g.name(v)] = val;
    try {
      const Moments mom = population_moments(m, condition);
      value += prob * mom.mean[roles.y];
    } catch (const Error& e) {
      if (e.code() == Errc::DegenerateConditioning) {
        std::string desc;
        for (const auto& [v, val] : key) {
          desc += (desc.empty() ? "" : ", ") + g.name(v) + "=" +
                  std::to_string(static_cast<int>(val));
        }
        fail(Errc::EmptyStratum,
             "stratum {" + desc + "} has no probability of A=" +
                 std::to_string(static_cast<int>(a_value)));
      }
      throw;
    }
  }
  est.value = value;
  est.method = EstimateMethod::ClosedForm;
  return est;
}

EffectEstimate backdoor_adjust(const Dataset& data, const std::string& a_col,
                               double a_value, const std::string& y_col,
                               const std::set<std::string>& adjustment) {
  const int ai = data.column(a_col);
  const int yi = data.column(y_col);
  std::vector<int> ci;
  for (const auto& name : adjustment) ci.push_back(data.column(name));
  if (data.rows.empty()) fail(Errc::EmptyStratum, "dataset is empty");

  struct Stratum {
    size_t n = 0;
    size_t n_a = 0;
    double sum = 0.0;
    double sumsq = 0.0;
  };
  std::map<std::vector<double>, Stratum> strata;
  for (const auto& row : data.rows) {
    std::vector<double> key;
    key.reserve(ci.size());
    for (int c : ci) key.push_back(row[static_cast<size_t>(c)]);
    Stratum& s = strata[key];
    ++s.n;
    if (row[static_cast<size_t>(ai)] == a_value) {
      ++s.n_a;
      s.sum += row[static_cast<size_t>(yi)];
      s.sumsq += row[static_cast<size_t>(yi)] * row[static_cast<size_t>(yi)];
    }
  }
  const double n_total = static_cast<double>(data.rows.size());
  double value = 0.0;
  double var = 0.0;
  for (const auto& [key, s] : strata) {
    if (s.n_a == 0) {
      std::string desc;
      for (size_t i = 0; i < key.size(); ++i) {
        if (i) desc += ", ";
        desc += std::to_string(key[i]);
      }
      fail(Errc::EmptyStratum,
           "stratum {" + desc + "} has no rows with treatment value");
    }
    const double p_c = static_cast<double>(s.n) / n_total;
    const double mean = s.sum / static_cast<double>(s.n_a);
    value += p_c * mean;
    if (s.n_a > 1) {
      const double s2 = std::max(
          0.0, (s.sumsq - static_cast<double>(s.n_a) * mean * mean) /
                   (static_cast<double>(s.n_a) - 1.0));
      var += p_c * p_c * s2 / static_cast<double>(s.n_a);
    }
  }
  EffectEstimate est;
  est.value = value;
  est.method = EstimateMethod::MonteCarlo;
  est.n_samples = data.rows.size();
  est.std_error = std::sqrt(var);
  return est;
}

}  // namespace fairlens
