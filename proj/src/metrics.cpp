#include "fairlens/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fairlens {

namespace {

double ratio(long long num, long long den, Errc on_zero, const char* what) {
  if (den == 0) fail(on_zero, what);
  return static_cast<double>(num) / static_cast<double>(den);
}

void check_binary(double v, const std::string& column, size_t row) {
  if (v != 0.0 && v != 1.0) {
    fail(Errc::NonBinaryColumn, "column '" + column + "' has value " +
                                    std::to_string(v) + " at row " +
                                    std::to_string(row + 1) +
                                    "; expected 0 or 1");
  }
}

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    fail(Errc::BadParameter, std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

double GroupCounts::base_rate() const {
  return ratio(tp + fn, total(), Errc::EmptyGroup, "group has no records");
}

double GroupCounts::positive_rate() const {
  return ratio(tp + fp, total(), Errc::EmptyGroup, "group has no records");
}

double GroupCounts::fpr() const {
  return ratio(fp, fp + tn, Errc::DegenerateLabels,
               "group has no negative labels");
}

double GroupCounts::fnr() const {
  return ratio(fn, tp + fn, Errc::DegenerateLabels,
               "group has no positive labels");
}

double GroupCounts::ppv() const {
  return ratio(tp, tp + fp, Errc::NoPositivePredictions,
               "group has no positive predictions");
}

GroupedCounts confusion(const Dataset& data, const MetricBindings& bindings) {
  if (bindings.prediction.has_value() == bindings.score.has_value()) {
    fail(Errc::BadParameter,
         "bind exactly one of a prediction column or a score column");
  }
  const int gi = data.column(bindings.group);
  const int li = data.column(bindings.label);
  const int pi = data.column(bindings.prediction ? *bindings.prediction
                                                 : *bindings.score);
  if (bindings.score) check_probability(bindings.threshold, "threshold");

  GroupedCounts out;
  for (size_t r = 0; r < data.rows.size(); ++r) {
    const std::vector<double>& row = data.rows[r];
    const double gv = row[static_cast<size_t>(gi)];
    const double lv = row[static_cast<size_t>(li)];
    check_binary(gv, bindings.group, r);
    check_binary(lv, bindings.label, r);
    double pred;
    if (bindings.prediction) {
      pred = row[static_cast<size_t>(pi)];
      check_binary(pred, *bindings.prediction, r);
    } else {
      const double score = row[static_cast<size_t>(pi)];
      if (!(score >= 0.0 && score <= 1.0)) {
        fail(Errc::BadParameter, "score at row " + std::to_string(r + 1) +
                                     " is outside [0, 1]");
      }
      pred = score > bindings.threshold ? 1.0 : 0.0;
    }
    GroupCounts& g = out.groups[gv == 1.0 ? 1 : 0];
    if (lv == 1.0) {
      (pred == 1.0 ? g.tp : g.fn) += 1;
    } else {
      (pred == 1.0 ? g.fp : g.tn) += 1;
    }
  }
  for (int g = 0; g < 2; ++g) {
    if (out.groups[g].total() == 0) {
      fail(Errc::EmptyGroup, "group " + std::to_string(g) + " has no records");
    }
  }
  return out;
}

double DemographicParityResult::gap() const { return std::abs(difference()); }
double ErrorRateParityResult::fpr_gap() const { return std::abs(fpr_difference()); }
double ErrorRateParityResult::fnr_gap() const { return std::abs(fnr_difference()); }
double PredictiveParityResult::gap() const { return std::abs(difference()); }

DemographicParityResult demographic_parity(const GroupedCounts& c) {
  return {c.groups[0].positive_rate(), c.groups[1].positive_rate()};
}

ErrorRateParityResult error_rate_parity(const GroupedCounts& c) {
  return {c.groups[0].fpr(), c.groups[1].fpr(), c.groups[0].fnr(),
          c.groups[1].fnr()};
}

PredictiveParityResult predictive_parity(const GroupedCounts& c) {
  return {c.groups[0].ppv(), c.groups[1].ppv()};
}

std::vector<double> dp_gap_curve(const std::vector<double>& scores0,
                                 const std::vector<double>& scores1,
                                 const std::vector<double>& thresholds) {
  if (scores0.empty() || scores1.empty()) {
    fail(Errc::EmptyGroup, "both groups need at least one score");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    fail(Errc::BadParameter, "thresholds must be sorted ascending");
  }
  auto rate = [](const std::vector<double>& scores, double t) {
    size_t above = 0;
    for (double s : scores) above += s > t ? 1 : 0;
    return static_cast<double>(above) / static_cast<double>(scores.size());
  };
  std::vector<double> gaps;
  gaps.reserve(thresholds.size());
  for (double t : thresholds) {
    check_probability(t, "threshold");
    gaps.push_back(std::abs(rate(scores0, t) - rate(scores1, t)));
  }
  return gaps;
}

CalibrationResult calibration_check(const std::vector<double>& scores0,
                                    const std::vector<double>& labels0,
                                    const std::vector<double>& scores1,
                                    const std::vector<double>& labels1,
                                    int bins) {
  if (bins < 1) fail(Errc::BadParameter, "need at least one bin");
  if (scores0.size() != labels0.size() || scores1.size() != labels1.size()) {
    fail(Errc::BadParameter, "scores and labels must have equal length");
  }
  CalibrationResult out;
  out.bins.resize(static_cast<size_t>(bins));
  const double width = 1.0 / bins;
  for (int b = 0; b < bins; ++b) {
    out.bins[static_cast<size_t>(b)].lo = b * width;
    out.bins[static_cast<size_t>(b)].hi = b + 1 == bins ? 1.0 : (b + 1) * width;
  }
  std::vector<long long> pos0(static_cast<size_t>(bins), 0),
      pos1(static_cast<size_t>(bins), 0);
  auto tally = [&](const std::vector<double>& scores,
                   const std::vector<double>& labels, int group,
                   std::vector<long long>& pos) {
    for (size_t i = 0; i < scores.size(); ++i) {
      check_probability(scores[i], "score");
      check_binary(labels[i], group == 0 ? "labels0" : "labels1", i);
      const int b = std::min(bins - 1, static_cast<int>(scores[i] * bins));
      CalibrationBin& bin = out.bins[static_cast<size_t>(b)];
      (group == 0 ? bin.n0 : bin.n1) += 1;
      if (labels[i] == 1.0) pos[static_cast<size_t>(b)] += 1;
    }
  };
  tally(scores0, labels0, 0, pos0);
  tally(scores1, labels1, 1, pos1);
  for (int b = 0; b < bins; ++b) {
    CalibrationBin& bin = out.bins[static_cast<size_t>(b)];
    if (bin.n0 > 0) {
      bin.rate0 = static_cast<double>(pos0[static_cast<size_t>(b)]) /
                  static_cast<double>(bin.n0);
    }
    if (bin.n1 > 0) {
      bin.rate1 = static_cast<double>(pos1[static_cast<size_t>(b)]) /
                  static_cast<double>(bin.n1);
    }
    if (bin.comparable()) {
      out.max_gap = std::max(out.max_gap, std::abs(bin.rate0 - bin.rate1));
    } else {
      out.skipped_bins += 1;
    }
  }
  return out;
}

double ppv_from_rates(double tpr, double fpr, double base) {
  check_probability(tpr, "tpr");
  check_probability(fpr, "fpr");
  check_probability(base, "base rate");
  const double denom = tpr * base + fpr * (1.0 - base);
  if (denom == 0.0) {
    fail(Errc::ZeroDenominator,
         "no positive predictions at these rates: tpr*base + fpr*(1-base) = 0");
  }
  return tpr * base / denom;
}

IncompatibilityWitness incompatibility_witness(double tpr, double fpr,
                                               double base0, double base1) {
  IncompatibilityWitness out;
  out.ppv0 = ppv_from_rates(tpr, fpr, base0);
  out.ppv1 = ppv_from_rates(tpr, fpr, base1);
  out.compatible = std::abs(out.ppv0 - out.ppv1) <= 1e-12;
  return out;
}

}  // namespace fairlens
