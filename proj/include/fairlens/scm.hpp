#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairlens/expr.hpp"
#include "fairlens/graph.hpp"

namespace fairlens {

// Mechanism parameter blocks.  Coefficient keys must exactly match the
// node's parents in the graph; expression formulas may reference a subset
// of the parents plus the noise symbol `eps`.

struct BernoulliRoot {
  double p = 0.5;
};

struct BernoulliLogistic {
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
};

struct LinearGaussian {
  double intercept = 0.0;
  std::map<std::string, double> coefficients;
  double noise_std = 1.0;  // zero is allowed and means deterministic
};

struct ExpressionMechanism {
  std::string formula;
  double noise_std = 1.0;
  // When the formula does not mention eps the node is additive:
  //   value = f(parents) + eps,  eps ~ N(0, noise_std^2).
  // Otherwise eps ~ N(0, noise_std^2) enters wherever the formula says,
  // and the node cannot be inverted during abduction.
};

using Mechanism =
    std::variant<BernoulliRoot, BernoulliLogistic, LinearGaussian,
                 ExpressionMechanism>;

using Record = std::map<std::string, double>;

struct Dataset {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  uint64_t seed = 0;            // provenance: sampling seed
  std::string model_digest;     // provenance: digest of the generating model

  size_t size() const { return rows.size(); }
  int column(const std::string& name) const;  // MissingColumn
};

// A validated graph plus one mechanism per node.  Immutable; interventions
// produce new models.
class StructuralModel {
 public:
  const CausalGraph& graph() const { return graph_; }
  const Mechanism& mechanism(int v) const { return mechanisms_[static_cast<size_t>(v)]; }
  const Mechanism& mechanism(const std::string& name) const;

  bool is_bernoulli(int v) const;
  // True for LinearGaussian or an expression that is additive in eps.
  bool is_additive_noise(int v) const;
  double noise_std(int v) const;  // 0 for Bernoulli nodes

  // Stable FNV digest of graph + mechanisms; dataset provenance.
  std::string digest() const;

  // Mechanism value given parent values (aligned with graph().parents(v))
  // and the node's noise draw.  Bernoulli nodes interpret `noise` as a
  // uniform in (0,1); continuous nodes as the additive disturbance (or the
  // eps argument for non-additive expressions).
  double mechanism_value(int v, const std::vector<double>& parent_values,
                         double noise) const;

  // Success probability of a Bernoulli node given parent values.
  double bernoulli_prob(int v, const std::vector<double>& parent_values) const;

 private:
  friend StructuralModel build_model(const CausalGraph&,
                                     const std::map<std::string, Mechanism>&);

  CausalGraph graph_;
  std::vector<Mechanism> mechanisms_;
  // Compiled per-node state, aligned with node indices.
  struct Compiled {
    std::vector<double> coefs;    // aligned with graph parents order
    expr::Ast ast;
    std::vector<int> slots;
    bool additive = true;
  };
  std::vector<Compiled> compiled_;
};

// Validates mechanism coverage, parent/coefficient agreement and parameter
// ranges (probabilities in [0,1], noise_std >= 0).
StructuralModel build_model(const CausalGraph& graph,
                            const std::map<std::string, Mechanism>& mechanisms);

// Noise draw for (node, record) under the substream scheme: uniform in
// (0,1) for Bernoulli nodes, N(0, noise_std^2) for continuous ones.
double draw_noise(const StructuralModel& m, int v, uint64_t seed,
                  uint64_t record_index);

// Ancestral sampling.  Bit-reproducible for a given seed regardless of
// `workers`; records are split across threads by range.
Dataset sample(const StructuralModel& m, size_t n, uint64_t seed,
               int workers = 1);

// Evaluates one record in topological order: `forced` pins node values
// (interventions), `noise` supplies every other node's disturbance
// (MissingNoise when absent).
Record eval_record(const StructuralModel& m, const Record& noise,
                   const Record& forced);

// do(assignments): removes incoming edges of assigned nodes (their labels
// drop out of the graph) and replaces mechanisms with point masses.
StructuralModel intervene(const StructuralModel& m,
                          const std::map<std::string, double>& assignments);

// One configuration of all Bernoulli nodes with its joint probability.
struct BernoulliConfig {
  std::map<int, double> values;
  double prob = 1.0;
};

// Enumerates joint configurations of the Bernoulli nodes.  Requires every
// Bernoulli node's parents to be exactly determined within a configuration
// (Bernoulli or deterministic linear); at most 20 Bernoulli nodes.
std::vector<BernoulliConfig> enumerate_bernoulli_configs(
    const StructuralModel& m);

struct Moments {
  std::vector<std::string> names;  // node declaration order
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int index(const std::string& name) const;
};

// Exact first and second moments for models whose non-Bernoulli mechanisms
// are all LinearGaussian: enumerate Bernoulli configurations, propagate
// means/covariances through the linear part per configuration, then mix.
// `condition` fixes Bernoulli node values (DegenerateConditioning when the
// conditioned event has probability below 1e-12).
Moments population_moments(
    const StructuralModel& m,
    const std::optional<std::map<std::string, double>>& condition =
        std::nullopt);

struct LinearPredictor {
  std::map<std::string, double> coefficients;
  double intercept = 0.0;
};

// Population least-squares of target on inputs, from exact moments:
// centered normal equations Cov[X,X] theta = Cov[X, Y].  Singular input
// covariance raises SingularSystem.
LinearPredictor least_squares_predictor(const StructuralModel& m,
                                        const std::string& target,
                                        const std::vector<std::string>& inputs);

}  // namespace fairlens
