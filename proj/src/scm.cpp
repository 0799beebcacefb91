#include "fairlens/scm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <thread>

#include "fairlens/digest.hpp"
#include "fairlens/rng.hpp"

namespace fairlens {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, end);
}

void check_finite(double v, const std::string& node, const char* what) {
  if (!std::isfinite(v)) {
    fail(Errc::BadParameter, node + ": " + what + " must be finite");
  }
}

// Coefficient keys must match the graph parents exactly.
std::vector<double> align_coefficients(
    const CausalGraph& g, int v,
    const std::map<std::string, double>& coefficients) {
  const auto& parents = g.parents(v);
  if (coefficients.size() != parents.size()) {
    fail(Errc::ParentMismatch,
         "'" + g.name(v) + "' has " + std::to_string(parents.size()) +
             " parents but " + std::to_string(coefficients.size()) +
             " coefficients");
  }
  std::vector<double> out;
  out.reserve(parents.size());
  for (int p : parents) {
    auto it = coefficients.find(g.name(p));
    if (it == coefficients.end()) {
      fail(Errc::ParentMismatch, "'" + g.name(v) +
                                     "' is missing a coefficient for parent '" +
                                     g.name(p) + "'");
    }
    check_finite(it->second, g.name(v), "coefficient");
    out.push_back(it->second);
  }
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

int Dataset::column(const std::string& name) const {
  for (size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  fail(Errc::MissingColumn, "no column named '" + name + "'");
}

const Mechanism& StructuralModel::mechanism(const std::string& name) const {
  return mechanism(graph_.index_of(name));
}

bool StructuralModel::is_bernoulli(int v) const {
  const Mechanism& m = mechanism(v);
  return std::holds_alternative<BernoulliRoot>(m) ||
         std::holds_alternative<BernoulliLogistic>(m);
}

bool StructuralModel::is_additive_noise(int v) const {
  const Mechanism& m = mechanism(v);
  if (std::holds_alternative<LinearGaussian>(m)) return true;
  if (std::holds_alternative<ExpressionMechanism>(m)) {
    return compiled_[static_cast<size_t>(v)].additive;
  }
  return false;
}

double StructuralModel::noise_std(int v) const {
  const Mechanism& m = mechanism(v);
  if (const auto* lg = std::get_if<LinearGaussian>(&m)) return lg->noise_std;
  if (const auto* ex = std::get_if<ExpressionMechanism>(&m)) return ex->noise_std;
  return 0.0;
}

double StructuralModel::bernoulli_prob(
    int v, const std::vector<double>& parent_values) const {
  const Mechanism& m = mechanism(v);
  if (const auto* root = std::get_if<BernoulliRoot>(&m)) return root->p;
  if (const auto* logit = std::get_if<BernoulliLogistic>(&m)) {
    double z = logit->intercept;
    const auto& coefs = compiled_[static_cast<size_t>(v)].coefs;
    for (size_t i = 0; i < coefs.size(); ++i) z += coefs[i] * parent_values[i];
    return sigmoid(z);
  }
  fail(Errc::BadParameter, "'" + graph_.name(v) + "' is not a Bernoulli node");
}

double StructuralModel::mechanism_value(
    int v, const std::vector<double>& parent_values, double noise) const {
  const Mechanism& m = mechanism(v);
  const Compiled& comp = compiled_[static_cast<size_t>(v)];
  if (std::holds_alternative<BernoulliRoot>(m) ||
      std::holds_alternative<BernoulliLogistic>(m)) {
    return noise < bernoulli_prob(v, parent_values) ? 1.0 : 0.0;
  }
  if (const auto* lg = std::get_if<LinearGaussian>(&m)) {
    double out = lg->intercept + noise;
    for (size_t i = 0; i < comp.coefs.size(); ++i) {
      out += comp.coefs[i] * parent_values[i];
    }
    return out;
  }
  const auto& ast = comp.ast;
  if (comp.additive) {
    return expr::eval(ast, comp.slots, parent_values, 0.0) + noise;
  }
  return expr::eval(ast, comp.slots, parent_values, noise);
}

std::string StructuralModel::digest() const {
  std::string text;
  const GraphSpec spec = graph_.to_spec();
  for (int v = 0; v < graph_.size(); ++v) {
    text += graph_.name(v);
    text += '|';
    const Mechanism& m = mechanism(v);
    if (const auto* root = std::get_if<BernoulliRoot>(&m)) {
      text += "bernoulli:";
      append_double(text, root->p);
    } else if (const auto* logit = std::get_if<BernoulliLogistic>(&m)) {
      text += "logistic:";
      append_double(text, logit->intercept);
      for (const auto& [k, c] : logit->coefficients) {
        text += ',' + k + '=';
        append_double(text, c);
      }
    } else if (const auto* lg = std::get_if<LinearGaussian>(&m)) {
      text += "linear:";
      append_double(text, lg->intercept);
      for (const auto& [k, c] : lg->coefficients) {
        text += ',' + k + '=';
        append_double(text, c);
      }
      text += ";s=";
      append_double(text, lg->noise_std);
    } else if (const auto* ex = std::get_if<ExpressionMechanism>(&m)) {
      text += "expr:" + ex->formula + ";s=";
      append_double(text, ex->noise_std);
    }
    text += '\n';
  }
  for (const auto& e : spec.edges) {
    text += e.parent + ">" + e.child + ":" + edge_label_name(e.label) + "\n";
  }
  if (spec.sensitive) text += "sensitive=" + *spec.sensitive + "\n";
  if (spec.outcome) text += "outcome=" + *spec.outcome + "\n";
  return hex64(fnv1a(text));
}

StructuralModel build_model(const CausalGraph& graph,
                            const std::map<std::string, Mechanism>& mechanisms) {
  StructuralModel model;
  model.graph_ = graph;
  model.mechanisms_.resize(static_cast<size_t>(graph.size()));
  model.compiled_.resize(static_cast<size_t>(graph.size()));

  for (const auto& [name, mech] : mechanisms) {
    if (!graph.has_node(name)) {
      fail(Errc::UnknownNode, "mechanism given for unknown node '" + name + "'");
    }
    (void)mech;
  }
  for (int v = 0; v < graph.size(); ++v) {
    const std::string& name = graph.name(v);
    auto it = mechanisms.find(name);
    if (it == mechanisms.end()) {
      fail(Errc::MissingMechanism, "no mechanism for node '" + name + "'");
    }
    const Mechanism& mech = it->second;
    StructuralModel::Compiled comp;
    if (const auto* root = std::get_if<BernoulliRoot>(&mech)) {
      if (!graph.parents(v).empty()) {
        fail(Errc::ParentMismatch,
             "'" + name + "' is a Bernoulli root but has parents");
      }
      check_finite(root->p, name, "probability");
      if (root->p < 0.0 || root->p > 1.0) {
        fail(Errc::BadParameter, name + ": probability must lie in [0, 1]");
      }
    } else if (const auto* logit = std::get_if<BernoulliLogistic>(&mech)) {
      check_finite(logit->intercept, name, "intercept");
      comp.coefs = align_coefficients(graph, v, logit->coefficients);
    } else if (const auto* lg = std::get_if<LinearGaussian>(&mech)) {
      check_finite(lg->intercept, name, "intercept");
      check_finite(lg->noise_std, name, "noise_std");
      if (lg->noise_std < 0.0) {
        fail(Errc::BadParameter, name + ": noise_std must be >= 0");
      }
      comp.coefs = align_coefficients(graph, v, lg->coefficients);
    } else if (const auto* ex = std::get_if<ExpressionMechanism>(&mech)) {
      check_finite(ex->noise_std, name, "noise_std");
      if (ex->noise_std < 0.0) {
        fail(Errc::BadParameter, name + ": noise_std must be >= 0");
      }
      comp.ast = expr::parse_formula(ex->formula);
      std::vector<std::string> parent_names;
      for (int p : graph.parents(v)) parent_names.push_back(graph.name(p));
      comp.slots = expr::resolve_slots(comp.ast, parent_names, name);
      comp.additive = !comp.ast.uses_eps();
    }
    model.mechanisms_[static_cast<size_t>(v)] = mech;
    model.compiled_[static_cast<size_t>(v)] = std::move(comp);
  }
  return model;
}

double draw_noise(const StructuralModel& m, int v, uint64_t seed,
                  uint64_t record_index) {
  if (m.is_bernoulli(v)) {
    return rng::uniform01(seed, static_cast<uint64_t>(v), record_index);
  }
  return m.noise_std(v) *
         rng::normal(seed, static_cast<uint64_t>(v), record_index);
}

namespace {

void sample_range(const StructuralModel& m, uint64_t seed, size_t begin,
                  size_t end, std::vector<std::vector<double>>& rows) {
  const CausalGraph& g = m.graph();
  const size_t k = static_cast<size_t>(g.size());
  std::vector<double> parent_values;
  for (size_t r = begin; r < end; ++r) {
    std::vector<double>& row = rows[r];
    row.assign(k, 0.0);
    for (int v : g.topo_order()) {
      parent_values.clear();
      for (int p : g.parents(v)) {
        parent_values.push_back(row[static_cast<size_t>(p)]);
      }
      const double noise = draw_noise(m, v, seed, static_cast<uint64_t>(r));
      row[static_cast<size_t>(v)] = m.mechanism_value(v, parent_values, noise);
    }
  }
}

}  // namespace

Dataset sample(const StructuralModel& m, size_t n, uint64_t seed, int workers) {
  Dataset out;
  out.columns = m.graph().nodes();
  out.seed = seed;
  out.model_digest = m.digest();
  out.rows.resize(n);
  if (workers < 1) workers = 1;
  const size_t w = std::min<size_t>(static_cast<size_t>(workers), n ? n : 1);
  if (w <= 1) {
    sample_range(m, seed, 0, n, out.rows);
    return out;
  }
  std::vector<std::thread> threads;
  const size_t chunk = (n + w - 1) / w;
  for (size_t t = 0; t < w; ++t) {
    const size_t begin = t * chunk;
    const size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back(
        [&m, seed, begin, end, &out] { sample_range(m, seed, begin, end, out.rows); });
  }
  for (auto& th : threads) th.join();
  return out;
}

Record eval_record(const StructuralModel& m, const Record& noise,
                   const Record& forced) {
  const CausalGraph& g = m.graph();
  for (const auto& [name, value] : noise) {
    (void)value;
    g.index_of(name);
  }
  for (const auto& [name, value] : forced) {
    (void)value;
    g.index_of(name);
  }
  std::vector<double> values(static_cast<size_t>(g.size()), 0.0);
  std::vector<double> parent_values;
  for (int v : g.topo_order()) {
    const std::string& name = g.name(v);
    auto fit = forced.find(name);
    if (fit != forced.end()) {
      values[static_cast<size_t>(v)] = fit->second;
      continue;
    }
    parent_values.clear();
    for (int p : g.parents(v)) {
      parent_values.push_back(values[static_cast<size_t>(p)]);
    }
    auto nit = noise.find(name);
    if (nit == noise.end()) {
      fail(Errc::MissingNoise, "no noise value for node '" + name + "'");
    }
    values[static_cast<size_t>(v)] = m.mechanism_value(v, parent_values, nit->second);
  }
  Record out;
  for (int v = 0; v < g.size(); ++v) {
    out.emplace(g.name(v), values[static_cast<size_t>(v)]);
  }
  return out;
}

StructuralModel intervene(const StructuralModel& m,
                          const std::map<std::string, double>& assignments) {
  const CausalGraph& g = m.graph();
  for (const auto& [name, value] : assignments) {
    g.index_of(name);
    if (!std::isfinite(value)) {
      fail(Errc::BadParameter, "do(" + name + ") value must be finite");
    }
  }
  GraphSpec spec = g.to_spec();
  spec.edges.erase(std::remove_if(spec.edges.begin(), spec.edges.end(),
                                  [&](const GraphSpec::EdgeDecl& e) {
                                    return assignments.count(e.child) > 0;
                                  }),
                   spec.edges.end());
  std::map<std::string, Mechanism> mechanisms;
  for (int v = 0; v < g.size(); ++v) {
    const std::string& name = g.name(v);
    auto it = assignments.find(name);
    if (it != assignments.end()) {
      mechanisms.emplace(name, LinearGaussian{it->second, {}, 0.0});
    } else {
      mechanisms.emplace(name, m.mechanism(v));
    }
  }
  return build_model(validate_graph(spec), mechanisms);
}

std::vector<BernoulliConfig> enumerate_bernoulli_configs(
    const StructuralModel& m) {
  const CausalGraph& g = m.graph();
  int n_bernoulli = 0;
  for (int v = 0; v < g.size(); ++v) {
    if (m.is_bernoulli(v)) ++n_bernoulli;
  }
  if (n_bernoulli > 20) {
    fail(Errc::UnsupportedMechanism,
         "enumeration supports at most 20 Bernoulli nodes, model has " +
             std::to_string(n_bernoulli));
  }

  std::vector<BernoulliConfig> out;
  const auto& topo = g.topo_order();
  std::vector<double> exact(static_cast<size_t>(g.size()), 0.0);
  std::vector<char> has_exact(static_cast<size_t>(g.size()), 0);
  BernoulliConfig current;

  auto rec = [&](auto&& self, size_t pos, double prob) -> void {
    if (pos == topo.size()) {
      current.prob = prob;
      out.push_back(current);
      return;
    }
    const int v = topo[pos];
    std::vector<double> parent_values;
    bool parents_exact = true;
    for (int p : g.parents(v)) {
      if (!has_exact[static_cast<size_t>(p)]) {
        parents_exact = false;
        break;
      }
      parent_values.push_back(exact[static_cast<size_t>(p)]);
    }
    if (m.is_bernoulli(v)) {
      if (!parents_exact) {
        fail(Errc::UnsupportedMechanism,
             "Bernoulli node '" + g.name(v) +
                 "' has a stochastic continuous ancestor; enumeration "
                 "requires Bernoulli or deterministic ancestors");
      }
      const double p1 = m.bernoulli_prob(v, parent_values);
      for (double value : {0.0, 1.0}) {
        const double p = value > 0.5 ? p1 : 1.0 - p1;
        if (p == 0.0) continue;  // drop impossible branches
        exact[static_cast<size_t>(v)] = value;
        has_exact[static_cast<size_t>(v)] = 1;
        current.values[v] = value;
        self(self, pos + 1, prob * p);
        current.values.erase(v);
        has_exact[static_cast<size_t>(v)] = 0;
      }
      return;
    }
    // Deterministic continuous nodes stay exact so they can feed a
    // downstream Bernoulli's probability.
    const bool deterministic =
        parents_exact && m.noise_std(v) == 0.0 && m.is_additive_noise(v);
    if (deterministic) {
      exact[static_cast<size_t>(v)] = m.mechanism_value(v, parent_values, 0.0);
      has_exact[static_cast<size_t>(v)] = 1;
      self(self, pos + 1, prob);
      has_exact[static_cast<size_t>(v)] = 0;
    } else {
      self(self, pos + 1, prob);
    }
  };
  rec(rec, 0, 1.0);
  return out;
}

int Moments::index(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  fail(Errc::UnknownNode, "no node named '" + name + "' in moments");
}

Moments population_moments(
    const StructuralModel& m,
    const std::optional<std::map<std::string, double>>& condition) {
  const CausalGraph& g = m.graph();
  const int n = g.size();
  for (int v = 0; v < n; ++v) {
    if (std::holds_alternative<ExpressionMechanism>(m.mechanism(v))) {
      fail(Errc::UnsupportedMechanism,
           "closed-form moments require linear mechanisms; '" + g.name(v) +
               "' is an expression");
    }
  }

  std::map<int, double> cond;
  if (condition) {
    for (const auto& [name, value] : *condition) {
      const int v = g.index_of(name);
      if (!m.is_bernoulli(v)) {
        fail(Errc::BadParameter,
             "conditioning is supported on Bernoulli nodes only ('" + name +
                 "')");
      }
      if (value != 0.0 && value != 1.0) {
        fail(Errc::BadParameter,
             "conditioned value for '" + name + "' must be 0 or 1");
      }
      cond[v] = value;
    }
  }

  std::vector<BernoulliConfig> configs = enumerate_bernoulli_configs(m);
  double total = 0.0;
  std::vector<const BernoulliConfig*> kept;
  for (const auto& cfg : configs) {
    bool match = true;
    for (const auto& [v, value] : cond) {
      auto it = cfg.values.find(v);
      if (it == cfg.values.end() || it->second != value) {
        match = false;
        break;
      }
    }
    if (match) {
      kept.push_back(&cfg);
      total += cfg.prob;
    }
  }
  if (total < 1e-12) {
    fail(Errc::DegenerateConditioning,
         "conditioned event has probability below 1e-12");
  }

  Moments out;
  out.names = g.nodes();
  out.mean = Eigen::VectorXd::Zero(n);
  out.cov = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);

  Eigen::VectorXd mu(n);
  Eigen::MatrixXd S(n, n);
  for (const BernoulliConfig* cfg : kept) {
    const double w = cfg->prob / total;
    mu.setZero();
    S.setZero();
    std::vector<char> processed(static_cast<size_t>(n), 0);
    for (int v : g.topo_order()) {
      auto it = cfg->values.find(v);
      if (it != cfg->values.end()) {
        mu[v] = it->second;  // fixed within the configuration
        processed[static_cast<size_t>(v)] = 1;
        continue;
      }
      const auto* lg = std::get_if<LinearGaussian>(&m.mechanism(v));
      const auto& parents = g.parents(v);
      double mean_v = lg->intercept;
      std::vector<double> coefs;
      coefs.reserve(parents.size());
      for (int p : parents) {
        coefs.push_back(lg->coefficients.at(g.name(p)));
        mean_v += coefs.back() * mu[p];
      }
      mu[v] = mean_v;
      for (int j = 0; j < n; ++j) {
        if (!processed[static_cast<size_t>(j)]) continue;
        double cov = 0.0;
        size_t i = 0;
        for (int p : parents) {
          cov += coefs[i] * S(p, j);
          ++i;
        }
        S(v, j) = cov;
        S(j, v) = cov;
      }
      double var = lg->noise_std * lg->noise_std;
      {
        size_t i = 0;
        for (int p : parents) {
          size_t j = 0;
          for (int q : parents) {
            var += coefs[i] * coefs[j] * S(p, q);
            ++j;
          }
          ++i;
        }
      }
      S(v, v) = var;
      processed[static_cast<size_t>(v)] = 1;
    }
    out.mean += w * mu;
    second += w * (S + mu * mu.transpose());
  }
  out.cov = second - out.mean * out.mean.transpose();
  return out;
}

LinearPredictor least_squares_predictor(const StructuralModel& m,
                                        const std::string& target,
                                        const std::vector<std::string>& inputs) {
  const Moments mom = population_moments(m);
  const int t = mom.index(target);
  const int k = static_cast<int>(inputs.size());
  if (k == 0) {
    return {{}, mom.mean[t]};
  }
  Eigen::MatrixXd sxx(k, k);
  Eigen::VectorXd sxy(k);
  std::vector<int> idx;
  for (const auto& name : inputs) idx.push_back(mom.index(name));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) sxx(i, j) = mom.cov(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    sxy[i] = mom.cov(idx[static_cast<size_t>(i)], t);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sxx);
  if (!lu.isInvertible()) {
    fail(Errc::SingularSystem,
         "input covariance is singular; drop redundant inputs");
  }
  const Eigen::VectorXd theta = lu.solve(sxy);
  LinearPredictor out;
  double dot = 0.0;
  for (int i = 0; i < k; ++i) {
    out.coefficients[inputs[static_cast<size_t>(i)]] = theta[i];
    dot += theta[i] * mom.mean[idx[static_cast<size_t>(i)]];
  }
  out.intercept = mom.mean[t] - dot;
  return out;
}

}  // namespace fairlens
