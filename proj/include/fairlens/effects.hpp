#pragma once

#include <optional>
#include <set>
#include <string>

#include "fairlens/scm.hpp"

namespace fairlens {

// Which of the sensitive node's outgoing edges transmit the active value.
// Children on active edges see `active`; all other children see `baseline`.
// Path groups are exactly the labelings of these first edges; finer
// splits along downstream edges are not expressible.
struct PathInterventionSpec {
  double baseline = 0.0;
  double active = 1.0;
  std::set<std::string> active_children;  // child names of active edges

  // Validates that every active child is an actual child of the sensitive
  // node; returns the sensitive node's index.
  int validate(const StructuralModel& m) const;
};

enum class EstimateMethod { ClosedForm, MonteCarlo };

const char* estimate_method_name(EstimateMethod m) noexcept;

struct EffectEstimate {
  double value = 0.0;
  EstimateMethod method = EstimateMethod::ClosedForm;
  std::optional<size_t> n_samples;
  std::optional<double> std_error;
  std::optional<uint64_t> seed;
  std::string note;
};

struct McOptions {
  size_t n = 100000;
  uint64_t seed = 0;
};

// Mean outcome when each child of the sensitive node receives its own
// sensitive-node input per `spec`.  Closed form folds the per-edge values
// into child intercepts and propagates moments; Monte Carlo runs nested
// ancestral sampling with shared noise across regimes.
double regime_mean_closed(const StructuralModel& m,
                          const PathInterventionSpec& spec,
                          const std::string& target);

// Average causal effect of sensitive a vs baseline, on the outcome:
// E[Y | do(A=a)] - E[Y | do(A=abar)].
EffectEstimate ate(const StructuralModel& m, double a, double abar,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Path-specific effect: mean outcome under `spec` minus mean outcome with
// every edge at baseline.  Empty active set gives exactly zero; all edges
// active gives the ATE.
EffectEstimate pse(const StructuralModel& m, const PathInterventionSpec& spec,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Direct effect variants.  Standard holds mediators at baseline
// (<Y_a(M_abar)> - <Y_abar>); ActiveMediators holds them at the active
// value (<Y_a> - <Y_abar(M_a)>).  Both need the direct edge (NoDirectEdge).
enum class AdeVariant { Standard, ActiveMediators };

EffectEstimate ade(const StructuralModel& m, double a, double abar,
                   AdeVariant variant = AdeVariant::Standard,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Indirect effect variants: BaselineDirect flips mediators with the direct
// edge held at baseline (<Y_abar(M_a)> - <Y_abar>); ActiveDirect holds it
// at the active value (<Y_a> - <Y_a(M_abar)>).  Equal for linear models.
enum class AieVariant { BaselineDirect, ActiveDirect };

EffectEstimate aie(const StructuralModel& m, double a, double abar,
                   AieVariant variant = AieVariant::BaselineDirect,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Effect of treatment on the treated:
//   <Y_a> given A=abar  minus  <Y> given A=abar.
// Requires a Bernoulli sensitive node.  Closed form enumerates Bernoulli
// configurations; Monte Carlo importance-weights noise draws by
// p(A=abar | ancestors).  Conditioning events below 1e-12 raise
// DegenerateConditioning.
EffectEstimate ett(const StructuralModel& m, double a, double abar,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Counterfactual-vs-conditional contrast:
//   <Y_abar> given A=a  minus  <Y> given A=abar.
// Zero when the sensitive node is a root.  Satisfies
//   E[Y|A=a] - E[Y|A=abar] = nci(a,abar) - ett(abar,a).
EffectEstimate nci(const StructuralModel& m, double a, double abar,
                   EstimateMethod method = EstimateMethod::ClosedForm,
                   const McOptions& mc = {});

// Back-door adjustment from the model:
//   sum_c  E[Y | A=a_value, C=c] p(c)
// over configurations c of `adjustment`.  The set must satisfy the
// back-door criterion unless `override_check` (the estimate is then marked
// unverified in its note).  Closed form enumerates Bernoulli adjustment
// variables; Monte Carlo samples a synthetic dataset and stratifies.
EffectEstimate backdoor_adjust(const StructuralModel& m, double a_value,
                               const std::set<std::string>& adjustment,
                               EstimateMethod method = EstimateMethod::ClosedForm,
                               const McOptions& mc = {},
                               bool override_check = false);

// Plug-in estimator of the same formula from data: strata are the distinct
// value combinations of the adjustment columns; EmptyStratum when some
// stratum has no rows with A=a_value.  `a_col` names the treatment column.
EffectEstimate backdoor_adjust(const Dataset& data, const std::string& a_col,
                               double a_value, const std::string& y_col,
                               const std::set<std::string>& adjustment);

}  // namespace fairlens
