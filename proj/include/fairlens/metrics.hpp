#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fairlens/errors.hpp"
#include "fairlens/scm.hpp"

namespace fairlens {

// Confusion counts for one group.  Rates are always recomputed from the
// integer counts so they can never drift out of sync.
struct GroupCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  long long total() const { return tp + fp + tn + fn; }
  double base_rate() const;      // p(Y=1)          EmptyGroup
  double positive_rate() const;  // p(Yhat=1)       EmptyGroup
  double fpr() const;            // p(Yhat=1|Y=0)   DegenerateLabels
  double fnr() const;            // p(Yhat=0|Y=1)   DegenerateLabels
  double ppv() const;            // p(Y=1|Yhat=1)   NoPositivePredictions
};

struct GroupedCounts {
  GroupCounts groups[2];
};

// Which dataset columns mean what.  Exactly one of `prediction` and `score`
// must be set; `threshold` applies to scores (prediction = score > threshold).
struct MetricBindings {
  std::string group;
  std::string label;
  std::optional<std::string> prediction;
  std::optional<std::string> score;
  double threshold = 0.5;
};

// Exact counts per group.  NonBinaryColumn for non-0/1 group/label/prediction
// values or scores outside [0,1]; EmptyGroup when a group has no rows.
GroupedCounts confusion(const Dataset& data, const MetricBindings& bindings);

// Every gap below is reported signed (group 0 minus group 1); callers take
// the absolute value for the symmetric reading.
struct DemographicParityResult {
  double rate0 = 0.0;
  double rate1 = 0.0;
  double difference() const { return rate0 - rate1; }
  double gap() const;
};

DemographicParityResult demographic_parity(const GroupedCounts& c);  // EmptyGroup

struct ErrorRateParityResult {
  double fpr0 = 0.0, fpr1 = 0.0;
  double fnr0 = 0.0, fnr1 = 0.0;
  double fpr_difference() const { return fpr0 - fpr1; }
  double fnr_difference() const { return fnr0 - fnr1; }
  double fpr_gap() const;
  double fnr_gap() const;
};

ErrorRateParityResult error_rate_parity(const GroupedCounts& c);  // DegenerateLabels

struct PredictiveParityResult {
  double ppv0 = 0.0;
  double ppv1 = 0.0;
  double difference() const { return ppv0 - ppv1; }
  double gap() const;
};

PredictiveParityResult predictive_parity(const GroupedCounts& c);  // NoPositivePredictions

// Demographic-parity gap of the thresholded score at each threshold
// (prediction = score > t, strictly).  Thresholds must be sorted ascending.
std::vector<double> dp_gap_curve(const std::vector<double>& scores0,
                                 const std::vector<double>& scores1,
                                 const std::vector<double>& thresholds);

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  long long n0 = 0;
  long long n1 = 0;
  double rate0 = 0.0;  // meaningful only when n0 > 0
  double rate1 = 0.0;  // meaningful only when n1 > 0
  bool comparable() const { return n0 > 0 && n1 > 0; }
};

struct CalibrationResult {
  std::vector<CalibrationBin> bins;
  double max_gap = 0.0;         // over comparable bins only
  int skipped_bins = 0;         // bins empty in at least one group
};

// Equal-width score bins on [0,1]; per-bin empirical positive rates per
// group.  Empty bins are reported, never fatal.  Scores must lie in [0,1]
// and labels in {0,1}.
CalibrationResult calibration_check(const std::vector<double>& scores0,
                                    const std::vector<double>& labels0,
                                    const std::vector<double>& scores1,
                                    const std::vector<double>& labels1,
                                    int bins = 10);

// PPV implied by a true-positive rate, false-positive rate and base rate:
// tpr*base / (tpr*base + fpr*(1-base)).  ZeroDenominator when that
// denominator vanishes.
double ppv_from_rates(double tpr, double fpr, double base);

struct IncompatibilityWitness {
  bool compatible = false;  // PPVs equal within 1e-12
  double ppv0 = 0.0;
  double ppv1 = 0.0;
};

// Under shared error rates, groups can satisfy predictive parity only with
// equal base rates; this evaluates both PPVs and compares them.
IncompatibilityWitness incompatibility_witness(double tpr, double fpr,
                                               double base0, double base1);

}  // namespace fairlens
