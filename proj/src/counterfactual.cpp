#include "fairlens/counterfactual.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fairlens/graph.hpp"
#include "fairlens/rng.hpp"

namespace fairlens {

namespace {

constexpr double kZeroVarianceTol = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Sensitive-input value each child copy reads under the spec.
std::map<int, double> child_inputs(const StructuralModel& m,
                                   const PathInterventionSpec& spec, int a) {
  const CausalGraph& g = m.graph();
  std::map<int, double> inputs;
  for (int c : g.children(a)) {
    const bool active = spec.active_children.count(g.name(c)) > 0;
    inputs[c] = active ? spec.active : spec.baseline;
  }
  return inputs;
}

// Counterfactual-side evaluation; rb_node >= 0 replaces that node's own
// noise by its conditional mean (additive: 0; Bernoulli: the probability).
std::map<int, double> twin_values(const TwinModel& twin,
                                  const std::vector<double>& factual,
                                  const std::vector<double>& noise,
                                  int rb_node) {
  const StructuralModel& m = twin.base;
  const CausalGraph& g = m.graph();
  const int a = *g.sensitive();
  const std::map<int, double> inputs = child_inputs(m, twin.spec, a);
  std::map<int, double> copies;
  std::vector<double> parent_values;
  for (int v : g.topo_order()) {
    if (!twin.duplicated.count(g.name(v))) continue;
    parent_values.clear();
    for (int p : g.parents(v)) {
      double pv;
      if (p == a) {
        pv = inputs.at(v);
      } else if (auto it = copies.find(p); it != copies.end()) {
        pv = it->second;
      } else {
        pv = factual[static_cast<size_t>(p)];
      }
      parent_values.push_back(pv);
    }
    if (v == rb_node) {
      copies[v] = m.is_bernoulli(v) ? m.bernoulli_prob(v, parent_values)
                                    : m.mechanism_value(v, parent_values, 0.0);
    } else {
      copies[v] = m.mechanism_value(v, parent_values,
                                    noise[static_cast<size_t>(v)]);
    }
  }
  return copies;
}

double gaussian_log_density(double eps, double sigma) {
  static const double kLogSqrt2Pi = 0.5 * std::log(2.0 * 3.14159265358979323846);
  const double z = eps / sigma;
  return -0.5 * z * z - std::log(sigma) - kLogSqrt2Pi;
}

struct WeightedSummary {
  double mean = 0.0;
  double std_error = 0.0;
};

WeightedSummary weighted_mean(const std::vector<double>& weights,
                              const std::vector<double>& values) {
  WeightedSummary out;
  double sw = 0.0, swv = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    sw += weights[i];
    swv += weights[i] * values[i];
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

int require_sensitive(const StructuralModel& m) {
  if (!m.graph().sensitive()) {
    fail(Errc::RolesUnset, "counterfactual inference needs a sensitive node");
  }
  return *m.graph().sensitive();
}

// Representative uniform value inside the interval consistent with an
// observed Bernoulli outcome (mechanism: value = 1 iff noise < p).
double bernoulli_noise_for(double observed, double p, const std::string& name) {
  if (observed == 1.0) {
    if (p <= 0.0) {
      fail(Errc::InconsistentRecord,
           "'" + name + "' observed as 1 but has probability 0");
    }
    return 0.5 * p;
  }
  if (p >= 1.0) {
    fail(Errc::InconsistentRecord,
         "'" + name + "' observed as 0 but has probability 1");
  }
  return 0.5 * (1.0 + p);
}

void validate_record(const StructuralModel& m, const Record& record) {
  const CausalGraph& g = m.graph();
  for (const auto& [name, value] : record) {
    const int v = g.index_of(name);
    if (!std::isfinite(value)) {
      fail(Errc::BadParameter, "observed value for '" + name + "' is not finite");
    }
    if (m.is_bernoulli(v) && value != 0.0 && value != 1.0) {
      fail(Errc::BadParameter,
           "'" + name + "' is Bernoulli; observed value must be 0 or 1");
    }
  }
}

}  // namespace

TwinModel build_twin(const StructuralModel& m, const PathInterventionSpec& spec) {
  const int a = spec.validate(m);
  const CausalGraph& g = m.graph();
  TwinModel twin{m, spec, {}};
  for (int d : g.descendants(a)) {
    twin.duplicated.emplace(g.name(d), g.name(d) + "*");
  }
  return twin;
}

std::map<int, double> counterfactual_side(const TwinModel& twin,
                                          const std::vector<double>& factual,
                                          const std::vector<double>& noise) {
  return twin_values(twin, factual, noise, -1);
}

Dataset sample_twin(const TwinModel& twin, size_t n, uint64_t seed) {
  const StructuralModel& m = twin.base;
  const CausalGraph& g = m.graph();
  const size_t k = static_cast<size_t>(g.size());
  std::vector<int> dup_indices;
  for (int v = 0; v < g.size(); ++v) {
    if (twin.duplicated.count(g.name(v))) dup_indices.push_back(v);
  }
  Dataset out;
  out.columns = g.nodes();
  for (int v : dup_indices) out.columns.push_back(twin.duplicated.at(g.name(v)));
  out.seed = seed;
  out.model_digest = m.digest();
  out.rows.assign(n, std::vector<double>(out.columns.size(), 0.0));
  std::vector<double> noise(k), values(k), parent_values;
  for (size_t r = 0; r < n; ++r) {
    for (size_t v = 0; v < k; ++v) {
      noise[v] = draw_noise(m, static_cast<int>(v), seed, r);
    }
    for (int v : g.topo_order()) {
      parent_values.clear();
      for (int p : g.parents(v)) {
        parent_values.push_back(values[static_cast<size_t>(p)]);
      }
      values[static_cast<size_t>(v)] =
          m.mechanism_value(v, parent_values, noise[static_cast<size_t>(v)]);
    }
    const std::map<int, double> copies = twin_values(twin, values, noise, -1);
    std::vector<double>& row = out.rows[r];
    std::copy(values.begin(), values.end(), row.begin());
    size_t j = k;
    for (int v : dup_indices) row[j++] = copies.at(v);
  }
  return out;
}

NoisePosterior abduct(const StructuralModel& m, const Record& record,
                      size_t n_samples, uint64_t seed) {
  const CausalGraph& g = m.graph();
  const int a = require_sensitive(m);
  validate_record(m, record);
  if (!record.count(g.name(a))) {
    fail(Errc::BadParameter, "record must observe the sensitive node '" +
                                 g.name(a) + "'");
  }
  for (const auto& [name, value] : record) {
    (void)value;
    const int v = g.index_of(name);
    if (!m.is_bernoulli(v) && !m.is_additive_noise(v)) {
      fail(Errc::UnsupportedMechanism,
           "'" + name + "' transforms its noise non-additively; its noise "
           "cannot be recovered from an observation");
    }
  }

  bool all_observed = true;
  bool bernoulli_descendant = false;
  const std::set<int> desc = g.descendants(a);
  for (int v = 0; v < g.size(); ++v) {
    if (!record.count(g.name(v))) all_observed = false;
    if (m.is_bernoulli(v) && desc.count(v)) bernoulli_descendant = true;
  }

  NoisePosterior post;
  if (all_observed && !bernoulli_descendant) {
    post.exact = true;
    std::vector<double> parent_values;
    for (int v : g.topo_order()) {
      const std::string& name = g.name(v);
      const double x = record.at(name);
      parent_values.clear();
      for (int p : g.parents(v)) parent_values.push_back(record.at(g.name(p)));
      if (m.is_bernoulli(v)) {
        const double p1 = m.bernoulli_prob(v, parent_values);
        post.deltas[name] = bernoulli_noise_for(x, p1, name);
        continue;
      }
      const double eps = x - m.mechanism_value(v, parent_values, 0.0);
      if (m.noise_std(v) == 0.0 && std::abs(eps) > kZeroVarianceTol) {
        fail(Errc::InconsistentRecord,
             "'" + name + "' has zero noise but its observed value is off by " +
                 std::to_string(eps));
      }
      post.deltas[name] = eps;
    }
    return post;
  }

  if (n_samples == 0) fail(Errc::BadParameter, "need at least one sample");
  std::vector<double> logw(n_samples, 0.0);
  post.samples.resize(n_samples);
  std::vector<double> values(static_cast<size_t>(g.size()));
  std::vector<double> parent_values;
  for (size_t s = 0; s < n_samples; ++s) {
    Record& noise = post.samples[s];
    double lw = 0.0;
    for (int v : g.topo_order()) {
      const std::string& name = g.name(v);
      parent_values.clear();
      for (int p : g.parents(v)) {
        parent_values.push_back(values[static_cast<size_t>(p)]);
      }
      const double prior = draw_noise(m, v, seed, s);
      auto it = record.find(name);
      if (it == record.end()) {
        noise[name] = prior;
        values[static_cast<size_t>(v)] =
            m.mechanism_value(v, parent_values, prior);
        continue;
      }
      const double x = it->second;
      values[static_cast<size_t>(v)] = x;
      if (m.is_bernoulli(v)) {
        const double p1 = m.bernoulli_prob(v, parent_values);
        if (x == 1.0) {
          if (p1 <= 0.0) {
            lw = kNegInf;
            noise[name] = 0.5;
          } else {
            lw += std::log(p1);
            noise[name] = prior * p1;
          }
        } else {
          if (p1 >= 1.0) {
            lw = kNegInf;
            noise[name] = 0.5;
          } else {
            lw += std::log1p(-p1);
            noise[name] = p1 + prior * (1.0 - p1);
          }
        }
        continue;
      }
      const double sigma = m.noise_std(v);
      const double eps = x - m.mechanism_value(v, parent_values, 0.0);
      noise[name] = eps;
      if (sigma == 0.0) {
        if (std::abs(eps) > kZeroVarianceTol) lw = kNegInf;
      } else {
        lw += gaussian_log_density(eps, sigma);
      }
    }
    logw[s] = lw;
  }
  const double max_lw = *std::max_element(logw.begin(), logw.end());
  if (max_lw == kNegInf) {
    fail(Errc::InconsistentRecord, "record has zero likelihood under the model");
  }
  post.weights.resize(n_samples);
  double total = 0.0;
  for (size_t s = 0; s < n_samples; ++s) {
    post.weights[s] = std::exp(logw[s] - max_lw);
    total += post.weights[s];
  }
  for (double& w : post.weights) w /= total;
  return post;
}

CounterfactualSummary counterfactual_outcome(const StructuralModel& m,
                                             const Record& record,
                                             const PathInterventionSpec& spec,
                                             const std::string& target,
                                             size_t n_samples, uint64_t seed) {
  const CausalGraph& g = m.graph();
  const int t = g.index_of(target);
  const TwinModel twin = build_twin(m, spec);
  const bool duplicated = twin.duplicated.count(target) > 0;
  const NoisePosterior post = abduct(m, record, n_samples, seed);

  CounterfactualSummary out;
  if (post.exact) {
    std::vector<double> values(static_cast<size_t>(g.size()));
    std::vector<double> noise(static_cast<size_t>(g.size()));
    for (int v = 0; v < g.size(); ++v) {
      values[static_cast<size_t>(v)] = record.at(g.name(v));
      noise[static_cast<size_t>(v)] = post.deltas.at(g.name(v));
    }
    out.exact = true;
    out.mean = duplicated ? twin_values(twin, values, noise, -1).at(t)
                          : values[static_cast<size_t>(t)];
    return out;
  }

  // The target's own unobserved noise can be integrated out analytically
  // when no observation is downstream of it.
  bool rb = !record.count(target);
  if (rb) {
    for (int d : g.descendants(t)) {
      if (record.count(g.name(d))) rb = false;
    }
  }
  const int rb_node = rb ? t : -1;

  std::vector<double> values(static_cast<size_t>(g.size()));
  std::vector<double> noise(static_cast<size_t>(g.size()));
  std::vector<double> parent_values;
  out.samples.reserve(post.samples.size());
  for (const Record& sample : post.samples) {
    for (int v = 0; v < g.size(); ++v) {
      noise[static_cast<size_t>(v)] = sample.at(g.name(v));
    }
    for (int v : g.topo_order()) {
      parent_values.clear();
      for (int p : g.parents(v)) {
        parent_values.push_back(values[static_cast<size_t>(p)]);
      }
      if (v == rb_node && !duplicated) {
        values[static_cast<size_t>(v)] =
            m.is_bernoulli(v) ? m.bernoulli_prob(v, parent_values)
                              : m.mechanism_value(v, parent_values, 0.0);
      } else {
        values[static_cast<size_t>(v)] =
            m.mechanism_value(v, parent_values, noise[static_cast<size_t>(v)]);
      }
    }
    double cf;
    if (duplicated) {
      cf = twin_values(twin, values, noise, rb_node).at(t);
    } else {
      cf = values[static_cast<size_t>(t)];
    }
    out.samples.push_back(cf);
  }
  const WeightedSummary ws = weighted_mean(post.weights, out.samples);
  out.mean = ws.mean;
  out.std_error = ws.std_error;
  return out;
}

CounterfactualSummary corrected_descendant(const StructuralModel& m,
                                           const Record& record,
                                           const std::string& node,
                                           const PathInterventionSpec& spec,
                                           size_t n_samples, uint64_t seed) {
  const int a = require_sensitive(m);
  const CausalGraph& g = m.graph();
  const int v = g.index_of(node);
  if (!g.descendants(a).count(v)) {
    fail(Errc::NotDescendant, "'" + node + "' does not descend from '" +
                                  g.name(a) + "'; nothing to correct");
  }
  return counterfactual_outcome(m, record, spec, node, n_samples, seed);
}

double fair_predict(const StructuralModel& m, const Record& record,
                    const FairPredictOptions& opts) {
  const CausalGraph& g = m.graph();
  if (!g.sensitive() || !g.outcome()) {
    fail(Errc::RolesUnset, "fair prediction needs sensitive and outcome roles");
  }
  const int a = *g.sensitive();
  const int y = *g.outcome();
  const std::string a_name = g.name(a);
  const std::string y_name = g.name(y);
  auto a_it = record.find(a_name);
  if (a_it == record.end()) {
    fail(Errc::BadParameter,
         "record must observe the sensitive node '" + a_name + "'");
  }
  const double a_val = a_it->second;

  double baseline;
  if (opts.baseline) {
    baseline = *opts.baseline;
  } else if (m.is_bernoulli(a) && (a_val == 0.0 || a_val == 1.0)) {
    baseline = 1.0 - a_val;
  } else {
    fail(Errc::BadParameter,
         "no default substitute value for '" + a_name + "'; pass one");
  }

  std::set<std::string> unfair;
  if (opts.unfair_children) {
    for (const std::string& name : *opts.unfair_children) {
      const int c = g.index_of(name);
      if (!g.has_edge(a, c)) {
        fail(Errc::UnknownNode,
             "no edge " + a_name + " -> " + name + " to treat as unfair");
      }
      unfair.insert(name);
    }
  } else {
    for (const Path& path : enumerate_causal_paths(g, a, y)) {
      const EdgeLabel label = classify_path_fairness(g, path);
      if (label == EdgeLabel::Unknown) {
        fail(Errc::LabelUnknown,
             "causal path " + path.to_string(g) +
                 " has unlabeled edges; label them or pass the unfair edge "
                 "set explicitly");
      }
      if (label == EdgeLabel::Unfair) unfair.insert(g.name(path.nodes[1]));
    }
  }

  PathInterventionSpec spec;
  spec.baseline = baseline;
  spec.active = a_val;
  for (int c : g.children(a)) {
    if (!unfair.count(g.name(c))) spec.active_children.insert(g.name(c));
  }

  Record conditioned = record;
  if (!opts.include_outcome) conditioned.erase(y_name);
  return counterfactual_outcome(m, conditioned, spec, y_name, opts.n_samples,
                                opts.seed)
      .mean;
}

}  // namespace fairlens
