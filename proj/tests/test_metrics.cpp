#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <string>
#include <vector>

#include "fairlens/metrics.hpp"
#include "fairlens/presets.hpp"
#include "helpers.hpp"

using namespace fairlens;
using namespace fairlens::testing;

namespace {

Dataset metrics_dataset() {
  Dataset d;
  d.columns = {"g", "y", "p", "s"};
  // group 0: tp, fn, fp, tn ; group 1: tp, tn
  d.rows = {
      {0, 1, 1, 0.9},  //
      {0, 1, 0, 0.5},  // score == threshold stays negative
      {0, 0, 1, 0.7},  //
      {0, 0, 0, 0.1},  //
      {1, 1, 1, 0.8},  //
      {1, 0, 0, 0.4},  //
  };
  return d;
}

}  // namespace

TEST_CASE("group counts expose exact rates and guard degenerate slices") {
  const GroupCounts c{6, 2, 8, 4};
  CHECK(c.total() == 20);
  CHECK(c.base_rate() == 0.5);
  CHECK(c.positive_rate() == 0.4);
  CHECK(c.fpr() == 0.2);
  CHECK(c.fnr() == 0.4);
  CHECK(c.ppv() == 0.75);

  const GroupCounts empty{};
  CHECK(code_of([&] { empty.base_rate(); }) == Errc::EmptyGroup);
  CHECK(code_of([&] { empty.positive_rate(); }) == Errc::EmptyGroup);

  const GroupCounts all_positive{5, 0, 0, 3};  // no negative labels
  CHECK(code_of([&] { all_positive.fpr(); }) == Errc::DegenerateLabels);
  const GroupCounts all_negative{0, 2, 6, 0};  // no positive labels
  CHECK(code_of([&] { all_negative.fnr(); }) == Errc::DegenerateLabels);
  const GroupCounts never_positive{0, 0, 6, 2};
  CHECK(code_of([&] { never_positive.ppv(); }) == Errc::NoPositivePredictions);
}

TEST_CASE("aggregate rate fixture reproduces the published gaps") {
  const ScenarioSpec spec = load_preset("compas_rates");
  REQUIRE(spec.counts.has_value());
  const GroupedCounts& c = *spec.counts;
  CHECK(c.groups[0].total() == 100000);
  CHECK(c.groups[1].total() == 100000);

  const DemographicParityResult dp = demographic_parity(c);
  CHECK(dp.rate0 == doctest::Approx(0.58).epsilon(1e-12));
  CHECK(dp.rate1 == doctest::Approx(0.33).epsilon(1e-12));
  CHECK(dp.difference() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(dp.gap() == doctest::Approx(0.25).epsilon(1e-12));

  const ErrorRateParityResult er = error_rate_parity(c);
  CHECK(er.fpr0 == doctest::Approx(23196.0 / 51661.0).epsilon(1e-15));
  CHECK(er.fpr1 == doctest::Approx(15748.0 / 67014.0).epsilon(1e-15));
  CHECK(er.fnr0 == doctest::Approx(13535.0 / 48339.0).epsilon(1e-15));
  CHECK(er.fnr1 == doctest::Approx(15734.0 / 32986.0).epsilon(1e-15));
  CHECK(er.fpr_gap() == doctest::Approx(0.21401).epsilon(1e-3));
  CHECK(er.fnr_gap() == doctest::Approx(0.19699).epsilon(1e-3));

  const PredictiveParityResult pp = predictive_parity(c);
  CHECK(pp.ppv0 == doctest::Approx(34804.0 / 58000.0).epsilon(1e-15));
  CHECK(pp.ppv1 == doctest::Approx(17252.0 / 33000.0).epsilon(1e-15));

  // one group carries almost half positives, the other a third
  CHECK(c.groups[0].base_rate() == doctest::Approx(0.48339).epsilon(1e-12));
  CHECK(c.groups[1].base_rate() == doctest::Approx(0.32986).epsilon(1e-12));
}

TEST_CASE("confusion tallies predictions and thresholded scores") {
  const Dataset d = metrics_dataset();

  MetricBindings byp{"g", "y", std::string("p"), std::nullopt, 0.5};
  const GroupedCounts cp = confusion(d, byp);
  CHECK(cp.groups[0].tp == 1);
  CHECK(cp.groups[0].fn == 1);
  CHECK(cp.groups[0].fp == 1);
  CHECK(cp.groups[0].tn == 1);
  CHECK(cp.groups[1].tp == 1);
  CHECK(cp.groups[1].tn == 1);
  CHECK(cp.groups[1].fp == 0);
  CHECK(cp.groups[1].fn == 0);

  // thresholding the score column reproduces the same table, and the
  // comparison is strict: 0.5 > 0.5 is false
  MetricBindings bys{"g", "y", std::nullopt, std::string("s"), 0.5};
  const GroupedCounts cs = confusion(d, bys);
  for (int g = 0; g < 2; ++g) {
    CHECK(cs.groups[g].tp == cp.groups[g].tp);
    CHECK(cs.groups[g].fp == cp.groups[g].fp);
    CHECK(cs.groups[g].tn == cp.groups[g].tn);
    CHECK(cs.groups[g].fn == cp.groups[g].fn);
  }
}

TEST_CASE("confusion validates its bindings and inputs") {
  const Dataset d = metrics_dataset();

  MetricBindings both{"g", "y", std::string("p"), std::string("s"), 0.5};
  CHECK(code_of([&] { confusion(d, both); }) == Errc::BadParameter);
  MetricBindings neither{"g", "y", std::nullopt, std::nullopt, 0.5};
  CHECK(code_of([&] { confusion(d, neither); }) == Errc::BadParameter);
  MetricBindings missing{"grp", "y", std::string("p"), std::nullopt, 0.5};
  CHECK(code_of([&] { confusion(d, missing); }) == Errc::MissingColumn);
  MetricBindings badt{"g", "y", std::nullopt, std::string("s"), 1.5};
  CHECK(code_of([&] { confusion(d, badt); }) == Errc::BadParameter);

  Dataset badg = d;
  badg.rows[2][0] = 2.0;
  MetricBindings byp{"g", "y", std::string("p"), std::nullopt, 0.5};
  try {
    confusion(badg, byp);
    FAIL("expected NonBinaryColumn");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonBinaryColumn);
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
    CHECK(std::string(e.what()).find("'g'") != std::string::npos);
  }

  Dataset bads = d;
  bads.rows[1][3] = 1.2;
  MetricBindings bys{"g", "y", std::nullopt, std::string("s"), 0.5};
  CHECK(code_of([&] { confusion(bads, bys); }) == Errc::BadParameter);

  Dataset lonely = d;
  lonely.rows = {{1, 1, 1, 0.9}, {1, 0, 0, 0.2}};
  CHECK(code_of([&] { confusion(lonely, byp); }) == Errc::EmptyGroup);
}

TEST_CASE("perfect predictions with equal base rates close every gap") {
  Dataset d;
  d.columns = {"g", "y", "p"};
  d.rows = {{0, 1, 1}, {0, 0, 0}, {0, 1, 1}, {0, 0, 0},
            {1, 1, 1}, {1, 0, 0}, {1, 1, 1}, {1, 0, 0}};
  MetricBindings b{"g", "y", std::string("p"), std::nullopt, 0.5};
  const GroupedCounts c = confusion(d, b);
  CHECK(demographic_parity(c).gap() == 0.0);
  const ErrorRateParityResult er = error_rate_parity(c);
  CHECK(er.fpr_gap() == 0.0);
  CHECK(er.fnr_gap() == 0.0);
  CHECK(er.fpr0 == 0.0);
  CHECK(er.fnr0 == 0.0);
  CHECK(predictive_parity(c).gap() == 0.0);
  CHECK(predictive_parity(c).ppv0 == 1.0);
}

TEST_CASE("demographic parity gap curves sweep thresholds strictly") {
  const std::vector<double> s0{0.3, 0.7};
  const std::vector<double> s1{0.4, 0.9};
  const std::vector<double> ts{0.0, 0.35, 0.5, 0.8, 1.0};
  const std::vector<double> gaps = dp_gap_curve(s0, s1, ts);
  REQUIRE(gaps.size() == 5);
  CHECK(gaps[0] == 0.0);
  CHECK(gaps[1] == 0.5);
  CHECK(gaps[2] == 0.0);
  CHECK(gaps[3] == 0.5);
  CHECK(gaps[4] == 0.0);

  // a score equal to the threshold is not a positive prediction
  CHECK(dp_gap_curve({0.5}, {0.6}, {0.5}) == std::vector<double>{1.0});

  CHECK(code_of([&] { dp_gap_curve({}, s1, ts); }) == Errc::EmptyGroup);
  CHECK(code_of([&] { dp_gap_curve(s0, {}, ts); }) == Errc::EmptyGroup);
  CHECK(code_of([&] { dp_gap_curve(s0, s1, {0.5, 0.2}); }) ==
        Errc::BadParameter);
  CHECK(code_of([&] { dp_gap_curve(s0, s1, {0.5, 1.5}); }) ==
        Errc::BadParameter);
}

TEST_CASE("calibration bins compare per-bin positive rates") {
  const std::vector<double> s0{0.1, 0.3, 0.8, 1.0};
  const std::vector<double> y0{0, 1, 1, 1};
  const std::vector<double> s1{0.2, 0.26, 0.9};
  const std::vector<double> y1{1, 0, 1};
  const CalibrationResult r = calibration_check(s0, y0, s1, y1, 4);
  REQUIRE(r.bins.size() == 4);

  CHECK(r.bins[0].lo == 0.0);
  CHECK(r.bins[0].hi == 0.25);
  CHECK(r.bins[3].lo == 0.75);
  CHECK(r.bins[3].hi == 1.0);  // the last bin is closed at 1.0

  CHECK(r.bins[0].n0 == 1);
  CHECK(r.bins[0].n1 == 1);
  CHECK(r.bins[0].rate0 == 0.0);
  CHECK(r.bins[0].rate1 == 1.0);
  CHECK(r.bins[1].n0 == 1);
  CHECK(r.bins[1].n1 == 1);
  CHECK(r.bins[1].rate0 == 1.0);
  CHECK(r.bins[1].rate1 == 0.0);
  CHECK(r.bins[2].n0 == 0);
  CHECK(r.bins[2].n1 == 0);
  CHECK_FALSE(r.bins[2].comparable());
  CHECK(r.bins[3].n0 == 2);  // the score of exactly 1.0 lands here
  CHECK(r.bins[3].n1 == 1);
  CHECK(r.bins[3].rate0 == 1.0);
  CHECK(r.bins[3].rate1 == 1.0);

  CHECK(r.max_gap == 1.0);
  CHECK(r.skipped_bins == 1);

  const CalibrationResult one = calibration_check(s0, y0, s1, y1, 1);
  REQUIRE(one.bins.size() == 1);
  CHECK(one.bins[0].n0 == 4);
  CHECK(one.bins[0].n1 == 3);
  CHECK(one.bins[0].rate0 == 0.75);
  CHECK(one.bins[0].rate1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK(code_of([&] { calibration_check(s0, y0, s1, y1, 0); }) ==
        Errc::BadParameter);
  CHECK(code_of([&] { calibration_check(s0, {0, 1}, s1, y1, 4); }) ==
        Errc::BadParameter);
  CHECK(code_of([&] { calibration_check({0.5}, {2.0}, s1, y1, 4); }) ==
        Errc::NonBinaryColumn);
  CHECK(code_of([&] { calibration_check({1.5}, {1.0}, s1, y1, 4); }) ==
        Errc::BadParameter);
}

TEST_CASE("implied ppv follows the rate algebra") {
  CHECK(ppv_from_rates(0.72, 0.449, 0.52) ==
        doctest::Approx(0.6347).epsilon(1e-4));
  CHECK(ppv_from_rates(0.523, 0.235, 0.39) ==
        doctest::Approx(0.5873).epsilon(1e-4));

  // exact formula
  CHECK(ppv_from_rates(0.6, 0.2, 0.25) ==
        doctest::Approx(0.15 / (0.15 + 0.15)).epsilon(1e-15));
  CHECK(ppv_from_rates(0.5, 0.3, 0.0) == 0.0);

  CHECK(code_of([&] { ppv_from_rates(1.2, 0.2, 0.5); }) == Errc::BadParameter);
  CHECK(code_of([&] { ppv_from_rates(0.5, -0.1, 0.5); }) ==
        Errc::BadParameter);
  CHECK(code_of([&] { ppv_from_rates(0.5, 0.5, 1.5); }) == Errc::BadParameter);
  CHECK(code_of([&] { ppv_from_rates(0.0, 0.0, 0.5); }) ==
        Errc::ZeroDenominator);
  CHECK(code_of([&] { ppv_from_rates(0.5, 0.0, 0.0); }) ==
        Errc::ZeroDenominator);
}

TEST_CASE("shared error rates force unequal ppv under unequal base rates") {
  const IncompatibilityWitness same =
      incompatibility_witness(0.72, 0.449, 0.4, 0.4);
  CHECK(same.compatible);
  CHECK(same.ppv0 == same.ppv1);

  const IncompatibilityWitness diff =
      incompatibility_witness(0.72, 0.449, 0.52, 0.39);
  CHECK_FALSE(diff.compatible);
  CHECK(diff.ppv0 == doctest::Approx(0.6347).epsilon(1e-3));
  CHECK(diff.ppv1 == doctest::Approx(0.5062).epsilon(1e-3));

  // degenerate corner cases where both ppvs collapse together
  CHECK(incompatibility_witness(0.0, 0.3, 0.2, 0.7).compatible);  // both 0
  CHECK(incompatibility_witness(0.5, 0.0, 0.2, 0.7).compatible);  // both 1

  // randomized grid away from those corners: compatibility is exactly
  // base-rate equality
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rate(0.05, 0.95);
  for (int i = 0; i < 2000; ++i) {
    const double tpr = rate(rng);
    const double fpr = rate(rng);
    const double b0 = rate(rng);
    const bool equal = i % 2 == 0;
    const double b1 = equal ? b0 : rate(rng);
    if (!equal && b0 == b1) continue;
    const IncompatibilityWitness w =
        incompatibility_witness(tpr, fpr, b0, b1);
    CAPTURE(tpr);
    CAPTURE(fpr);
    CAPTURE(b0);
    CAPTURE(b1);
    CHECK(w.compatible == equal);
  }
}
