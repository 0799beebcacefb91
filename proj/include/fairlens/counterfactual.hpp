#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairlens/effects.hpp"
#include "fairlens/scm.hpp"

namespace fairlens {

// Factual model plus a counterfactual copy of every descendant of the
// sensitive node.  Non-descendants appear once and feed both sides; each
// copy consumes the same noise variable as its factual twin.  The copy of a
// child of the sensitive node reads its sensitive input from `spec`
// (active edges carry `active`, all others `baseline`).
struct TwinModel {
  StructuralModel base;
  PathInterventionSpec spec;
  std::map<std::string, std::string> duplicated;  // factual name -> copy name
};

// RolesUnset without a sensitive node; spec children must be children of it.
TwinModel build_twin(const StructuralModel& m, const PathInterventionSpec& spec);

// Counterfactual-side values given the factual values and the shared noise,
// both indexed by base-graph node index.  Keys of the result are factual
// node indices of the duplicated nodes.
std::map<int, double> counterfactual_side(const TwinModel& twin,
                                          const std::vector<double>& factual,
                                          const std::vector<double>& noise);

// Joint factual + counterfactual sample: base columns first, then one
// "<name>*" column per duplicated node.  Deterministic per seed.
Dataset sample_twin(const TwinModel& twin, size_t n, uint64_t seed);

// Posterior over the noise variables given an observed (possibly partial)
// record.  Exact when every node is observed, every non-Bernoulli mechanism
// is additive-noise, and no Bernoulli node descends from the sensitive node;
// otherwise importance samples from the prior with likelihood weights.
struct NoisePosterior {
  bool exact = false;
  Record deltas;                 // exact: one noise value per node
  std::vector<Record> samples;   // sampled: full noise maps
  std::vector<double> weights;   // sampled: normalized, parallel to samples
};

// InconsistentRecord when a zero-variance mechanism is contradicted beyond
// 1e-9 (or the record has zero likelihood); UnsupportedMechanism when an
// observed node transforms its noise non-additively.
NoisePosterior abduct(const StructuralModel& m, const Record& record,
                      size_t n_samples = 1000, uint64_t seed = 42);

struct CounterfactualSummary {
  double mean = 0.0;
  bool exact = false;                // point value from an exact posterior
  std::optional<double> std_error;   // sampled case only
  std::vector<double> samples;       // sampled case: per-draw target values
};

// Abduction, then evaluation of the target on the counterfactual side of
// build_twin(m, spec).  Targets that are not descendants of the sensitive
// node keep their factual value.
CounterfactualSummary counterfactual_outcome(const StructuralModel& m,
                                             const Record& record,
                                             const PathInterventionSpec& spec,
                                             const std::string& target,
                                             size_t n_samples = 1000,
                                             uint64_t seed = 42);

// Counterfactual value of one descendant of the sensitive node (its
// "corrected" version under the given edge regime).  NotDescendant otherwise.
CounterfactualSummary corrected_descendant(const StructuralModel& m,
                                           const Record& record,
                                           const std::string& node,
                                           const PathInterventionSpec& spec,
                                           size_t n_samples = 1000,
                                           uint64_t seed = 42);

struct FairPredictOptions {
  // Children of the sensitive node reached through unfair edges.  When
  // absent, derived from edge labels: a child is included iff some unfair
  // causal path to the outcome starts with its edge; any causal path of
  // unknown fairness raises LabelUnknown.
  std::optional<std::set<std::string>> unfair_children;
  // Substitute sensitive value for unfair edges; defaults to 1 - a for a
  // Bernoulli sensitive node (required otherwise).
  std::optional<double> baseline;
  bool include_outcome = false;  // condition on an observed outcome value
  size_t n_samples = 1000;
  uint64_t seed = 42;
};

// Prediction that keeps fair influence and removes unfair influence: the
// outcome's expectation given non-descendants of the sensitive node, the
// fairly influenced descendants as observed, and corrected versions of the
// unfairly influenced ones.
double fair_predict(const StructuralModel& m, const Record& record,
                    const FairPredictOptions& opts = {});

}  // namespace fairlens
