#include "fairlens/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fairlens/counterfactual.hpp"
#include "fairlens/csv.hpp"
#include "fairlens/dsl.hpp"
#include "fairlens/effects.hpp"
#include "fairlens/errors.hpp"
#include "fairlens/metrics.hpp"
#include "fairlens/presets.hpp"
#include "fairlens/report.hpp"

namespace fairlens {
namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) {
    fail(Errc::BadParameter, what + ": not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::string preset_list() {
  std::string all;
  for (const std::string& n : preset_names()) {
    if (!all.empty()) all += ", ";
    all += n;
  }
  return all;
}

// A scenario argument is a file path when one exists, a preset name
// otherwise (dashes and underscores interchangeable).
ScenarioSpec load_scenario_arg(const std::string& arg) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    std::ifstream in(arg, std::ios::binary);
    if (!in) fail(Errc::BadParameter, "cannot read scenario file: " + arg);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
  }
  std::string name = arg;
  std::replace(name.begin(), name.end(), '-', '_');
  if (is_preset(name)) return load_preset(name);
  fail(Errc::BadParameter, "no scenario file or preset named '" + arg +
                               "' (presets: " + preset_list() + ")");
}

const StructuralModel& require_model(const ScenarioSpec& spec) {
  if (!spec.model) {
    fail(Errc::MissingMechanism,
         "scenario '" + spec.name + "' declares no mechanisms");
  }
  return *spec.model;
}

// "A->D,A->Y" -> {D, Y}; every edge must leave the sensitive node.
std::set<std::string> parse_edge_children(const CausalGraph& g,
                                          const std::string& text) {
  if (!g.sensitive()) fail(Errc::RolesUnset, "scenario has no sensitive node");
  const std::string& a = g.name(*g.sensitive());
  std::set<std::string> children;
  for (const std::string& part : split(text, ',')) {
    const std::string entry = trim(part);
    if (entry.empty()) continue;
    const size_t arrow = entry.find("->");
    if (arrow == std::string::npos) {
      fail(Errc::BadParameter, "edge '" + entry + "' must look like A->Y");
    }
    const std::string parent = trim(entry.substr(0, arrow));
    const std::string child = trim(entry.substr(arrow + 2));
    if (parent != a) {
      fail(Errc::BadParameter, "edge '" + entry +
                                   "' does not leave the sensitive node '" +
                                   a + "'");
    }
    g.index_of(child);
    children.insert(child);
  }
  return children;
}

Record parse_values(const std::string& text) {
  Record rec;
  for (const std::string& part : split(text, ',')) {
    const std::string entry = trim(part);
    if (entry.empty()) continue;
    const size_t eq = entry.find('=');
    if (eq == std::string::npos) {
      fail(Errc::BadParameter,
           "value '" + entry + "' must look like NAME=NUMBER");
    }
    const std::string name = trim(entry.substr(0, eq));
    rec[name] = parse_double(trim(entry.substr(eq + 1)), "value of " + name);
  }
  if (rec.empty()) fail(Errc::BadParameter, "--values is empty");
  return rec;
}

MetricBindings to_metric_bindings(const ColumnBindings& b) {
  MetricBindings mb;
  mb.group = b.group;
  mb.label = b.label;
  mb.prediction = b.prediction;
  mb.score = b.score;
  if (b.threshold) mb.threshold = *b.threshold;
  return mb;
}

// ---------------------------------------------------------------- audit

void run_audit(const std::string& scenario, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_arg(scenario);
  const CausalGraph& g = spec.graph;
  const AuditReport ar = audit_paths(g);
  out << "scenario: " << spec.name << "\n";
  out << "sensitive: " << g.name(ar.sensitive) << "\n";
  out << "outcome: " << g.name(ar.outcome) << "\n\n";

  out << "paths between " << g.name(ar.sensitive) << " and "
      << g.name(ar.outcome) << ":\n";
  std::vector<std::string> rendered;
  size_t width = 0;
  for (const ClassifiedPath& cp : ar.outcome_paths) {
    rendered.push_back(cp.path.to_string(g));
    width = std::max(width, rendered.back().size());
  }
  if (rendered.empty()) out << "  (none)\n";
  for (size_t i = 0; i < rendered.size(); ++i) {
    const ClassifiedPath& cp = ar.outcome_paths[i];
    out << "  " << rendered[i]
        << std::string(width - rendered[i].size() + 2, ' ')
        << path_kind_name(cp.kind) << "  " << edge_label_name(cp.fairness)
        << "\n";
  }

  out << "\nminimal adjustment sets:";
  try {
    const auto sets = minimal_adjustment_sets(g, ar.sensitive, ar.outcome);
    if (sets.empty()) out << " (none)";
    for (const auto& s : sets) {
      out << " {";
      bool first = true;
      for (int v : s) {
        if (!first) out << ",";
        out << g.name(v);
        first = false;
      }
      out << "}";
    }
    out << "\n";
  } catch (const Error& e) {
    out << " error: " << e.what() << "\n";
  }

  const Recommendation rec = recommend_criteria(ar);
  out << "\nrecommendation:\n";
  out << "  demographic_parity: "
      << appropriateness_name(rec.demographic_parity) << "\n";
  out << "  error_rate_parity: " << appropriateness_name(rec.error_rate_parity)
      << "\n";
  out << "  calibration: " << appropriateness_name(rec.calibration) << "\n";
  out << "  rationale: " << rec.rationale << "\n";
}

// ---------------------------------------------------------------- sample

struct SampleOpts {
  std::string scenario;
  size_t n = 1000;
  uint64_t seed = 42;
  int workers = 1;
  std::string out_path;
};

void run_sample(const SampleOpts& o, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_arg(o.scenario);
  const Dataset data = sample(require_model(spec), o.n, o.seed, o.workers);
  if (o.out_path.empty()) {
    out << csv_text(data);
    return;
  }
  write_csv(data, o.out_path);
  out << "wrote " << data.size() << " records to " << o.out_path << "\n";
}

// ---------------------------------------------------------------- effects

struct EffectsOpts {
  std::string scenario;
  std::string kind;
  double a = 1.0;
  double abar = 0.0;
  std::string method = "closed";
  size_t n = 100000;
  uint64_t seed = 42;
  std::string active_edges;
  std::string adjust;
  std::string variant;
  bool override_backdoor = false;
  std::string data;
};

void print_estimate(std::ostream& out, const std::string& kind,
                    const EffectEstimate& e) {
  out << "kind: " << kind << "\n";
  out << "value: " << num(e.value) << "\n";
  out << "method: " << estimate_method_name(e.method) << "\n";
  if (e.n_samples) out << "n_samples: " << *e.n_samples << "\n";
  if (e.std_error) out << "std_error: " << num(*e.std_error) << "\n";
  if (e.seed) out << "seed: " << *e.seed << "\n";
  if (!e.note.empty()) out << "note: " << e.note << "\n";
}

void run_effects(const EffectsOpts& o, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_arg(o.scenario);
  const EstimateMethod method = o.method == "mc" ? EstimateMethod::MonteCarlo
                                                 : EstimateMethod::ClosedForm;
  const McOptions mc{o.n, o.seed};

  if (o.kind == "backdoor") {
    std::set<std::string> adjustment;
    for (const std::string& part : split(o.adjust, ',')) {
      const std::string name = trim(part);
      if (!name.empty()) adjustment.insert(name);
    }
    if (!o.data.empty()) {
      const CausalGraph& g = spec.graph;
      if (!g.sensitive() || !g.outcome()) {
        fail(Errc::RolesUnset,
             "back-door adjustment needs sensitive and outcome roles");
      }
      const Dataset data = load_csv(o.data);
      print_estimate(out, o.kind,
                     backdoor_adjust(data, g.name(*g.sensitive()), o.a,
                                     g.name(*g.outcome()), adjustment));
      return;
    }
    print_estimate(out, o.kind,
                   backdoor_adjust(require_model(spec), o.a, adjustment,
                                   method, mc, o.override_backdoor));
    return;
  }

  const StructuralModel& m = require_model(spec);
  if (o.kind == "ate") {
    print_estimate(out, o.kind, ate(m, o.a, o.abar, method, mc));
  } else if (o.kind == "pse") {
    if (o.active_edges.empty()) {
      fail(Errc::BadParameter, "pse needs --active-edges");
    }
    PathInterventionSpec s{o.abar, o.a,
                           parse_edge_children(m.graph(), o.active_edges)};
    print_estimate(out, o.kind, pse(m, s, method, mc));
  } else if (o.kind == "ade") {
    AdeVariant v = AdeVariant::Standard;
    if (o.variant == "active-mediators") {
      v = AdeVariant::ActiveMediators;
    } else if (!o.variant.empty() && o.variant != "standard") {
      fail(Errc::BadParameter, "ade variants: standard, active-mediators");
    }
    print_estimate(out, o.kind, ade(m, o.a, o.abar, v, method, mc));
  } else if (o.kind == "aie") {
    AieVariant v = AieVariant::BaselineDirect;
    if (o.variant == "active-direct") {
      v = AieVariant::ActiveDirect;
    } else if (!o.variant.empty() && o.variant != "baseline-direct") {
      fail(Errc::BadParameter, "aie variants: baseline-direct, active-direct");
    }
    print_estimate(out, o.kind, aie(m, o.a, o.abar, v, method, mc));
  } else if (o.kind == "ett") {
    print_estimate(out, o.kind, ett(m, o.a, o.abar, method, mc));
  } else {
    print_estimate(out, o.kind, nci(m, o.a, o.abar, method, mc));
  }
}

// ---------------------------------------------------------- counterfactual

struct CfOpts {
  std::string scenario;
  std::string values;
  int record = -1;
  std::string data;
  std::string target;
  std::string active_edges;
  std::string flip;
  std::string abar;
  bool fair = false;
  std::string unfair_edges;
  bool include_outcome = false;
  size_t n = 1000;
  uint64_t seed = 42;
};

Record record_from_opts(const CfOpts& o) {
  const bool has_values = !o.values.empty();
  const bool has_record = o.record >= 0;
  if (has_values == has_record) {
    fail(Errc::BadParameter,
         "provide exactly one of --values or --record (with --data)");
  }
  if (has_values) return parse_values(o.values);
  if (o.data.empty()) fail(Errc::BadParameter, "--record needs --data");
  const Dataset data = load_csv(o.data);
  if (static_cast<size_t>(o.record) >= data.size()) {
    fail(Errc::BadParameter,
         "record " + std::to_string(o.record) + " out of range (dataset has " +
             std::to_string(data.size()) + " rows)");
  }
  Record rec;
  for (size_t c = 0; c < data.columns.size(); ++c) {
    rec[data.columns[c]] = data.rows[static_cast<size_t>(o.record)][c];
  }
  return rec;
}

void run_counterfactual(const CfOpts& o, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_arg(o.scenario);
  const StructuralModel& m = require_model(spec);
  const CausalGraph& g = m.graph();
  const Record rec = record_from_opts(o);

  out << "record:";
  for (const auto& [k, v] : rec) out << " " << k << "=" << num(v);
  out << "\n";

  if (o.fair) {
    FairPredictOptions opts;
    if (!o.unfair_edges.empty()) {
      opts.unfair_children = parse_edge_children(g, o.unfair_edges);
    }
    if (!o.abar.empty()) opts.baseline = parse_double(o.abar, "--abar");
    opts.include_outcome = o.include_outcome;
    opts.n_samples = o.n;
    opts.seed = o.seed;
    out << "fair_prediction: " << num(fair_predict(m, rec, opts)) << "\n";
    return;
  }

  if (!g.sensitive()) {
    fail(Errc::RolesUnset, "counterfactuals need a sensitive node");
  }
  const std::string a_name = g.name(*g.sensitive());
  const auto it = rec.find(a_name);
  if (it == rec.end()) {
    fail(Errc::BadParameter,
         "record does not include the sensitive node '" + a_name + "'");
  }
  const double a_val = it->second;
  double baseline = 0.0;
  if (!o.flip.empty()) {
    const size_t colon = o.flip.find(':');
    if (colon == std::string::npos) {
      fail(Errc::BadParameter, "--flip must look like A_VALUE:BASELINE");
    }
    const double from = parse_double(trim(o.flip.substr(0, colon)), "--flip");
    baseline = parse_double(trim(o.flip.substr(colon + 1)), "--flip");
    if (from != a_val) {
      fail(Errc::BadParameter, "--flip expects " + a_name + "=" + num(from) +
                                   " but the record has " + a_name + "=" +
                                   num(a_val));
    }
  } else if (!o.abar.empty()) {
    baseline = parse_double(o.abar, "--abar");
  } else if (m.is_bernoulli(*g.sensitive()) && (a_val == 0.0 || a_val == 1.0)) {
    baseline = 1.0 - a_val;
  } else {
    fail(Errc::BadParameter,
         "--abar is required for a non-Bernoulli sensitive node");
  }

  std::string target = o.target;
  if (target.empty()) {
    if (!g.outcome()) {
      fail(Errc::BadParameter,
           "--target is required when the scenario has no outcome role");
    }
    target = g.name(*g.outcome());
  } else {
    g.index_of(target);
  }

  PathInterventionSpec s;
  s.baseline = baseline;
  s.active = a_val;
  if (!o.active_edges.empty()) {
    s.active_children = parse_edge_children(g, o.active_edges);
  }
  const CounterfactualSummary cf =
      counterfactual_outcome(m, rec, s, target, o.n, o.seed);
  out << "target: " << target << "\n";
  const auto t_it = rec.find(target);
  if (t_it != rec.end()) out << "factual: " << num(t_it->second) << "\n";
  out << "counterfactual: " << num(cf.mean) << (cf.exact ? " (exact)" : "")
      << "\n";
  if (cf.std_error) out << "std_error: " << num(*cf.std_error) << "\n";
}

// ---------------------------------------------------------------- metrics

struct MetricsOpts {
  std::string scenario;
  std::string data;
  std::string group;
  std::string label;
  std::string pred;
  std::string score;
  double threshold = 0.5;
  bool threshold_set = false;
  std::string curve;
  int bins = 0;
};

void print_group_metrics(std::ostream& out, const GroupedCounts& c) {
  for (int gi = 0; gi < 2; ++gi) {
    const GroupCounts& gc = c.groups[gi];
    out << "group" << gi << ": tp=" << gc.tp << " fp=" << gc.fp
        << " tn=" << gc.tn << " fn=" << gc.fn << " n=" << gc.total() << "\n";
  }
  // one degenerate family must not hide the others
  try {
    const DemographicParityResult r = demographic_parity(c);
    out << "demographic_parity: rate0=" << num(r.rate0)
        << " rate1=" << num(r.rate1) << " gap=" << num(r.gap()) << "\n";
  } catch (const Error& e) {
    out << "demographic_parity: error: " << e.what() << "\n";
  }
  try {
    const ErrorRateParityResult r = error_rate_parity(c);
    out << "error_rate_parity: fpr0=" << num(r.fpr0) << " fpr1=" << num(r.fpr1)
        << " fpr_gap=" << num(r.fpr_gap()) << " fnr0=" << num(r.fnr0)
        << " fnr1=" << num(r.fnr1) << " fnr_gap=" << num(r.fnr_gap()) << "\n";
  } catch (const Error& e) {
    out << "error_rate_parity: error: " << e.what() << "\n";
  }
  try {
    const PredictiveParityResult r = predictive_parity(c);
    out << "predictive_parity: ppv0=" << num(r.ppv0) << " ppv1=" << num(r.ppv1)
        << " gap=" << num(r.gap()) << "\n";
  } catch (const Error& e) {
    out << "predictive_parity: error: " << e.what() << "\n";
  }
}

void run_metrics(const MetricsOpts& o, std::ostream& out) {
  std::optional<ScenarioSpec> spec;
  if (!o.scenario.empty()) spec = load_scenario_arg(o.scenario);

  if (o.data.empty()) {
    if (!o.curve.empty() || o.bins > 0) {
      fail(Errc::BadParameter, "--curve and --bins need --data");
    }
    if (spec && spec->counts) {
      print_group_metrics(out, *spec->counts);
      return;
    }
    fail(Errc::BadParameter,
         "provide --data or a scenario with a counts block");
  }

  MetricBindings mb;
  if (spec && spec->bindings) mb = to_metric_bindings(*spec->bindings);
  if (!o.group.empty()) mb.group = o.group;
  if (!o.label.empty()) mb.label = o.label;
  if (!o.pred.empty()) {
    mb.prediction = o.pred;
    mb.score.reset();
  }
  if (!o.score.empty()) {
    mb.score = o.score;
    mb.prediction.reset();
  }
  if (o.threshold_set) mb.threshold = o.threshold;
  if (mb.group.empty() || mb.label.empty()) {
    fail(Errc::BadParameter,
         "--group and --label are required (or a scenario bind block)");
  }

  const Dataset data = load_csv(o.data, mb);
  print_group_metrics(out, confusion(data, mb));

  if (o.curve.empty() && o.bins <= 0) return;
  if (!mb.score) {
    fail(Errc::BadParameter, "--curve and --bins need a score column");
  }
  const size_t gcol = static_cast<size_t>(data.column(mb.group));
  const size_t scol = static_cast<size_t>(data.column(*mb.score));
  const size_t lcol = static_cast<size_t>(data.column(mb.label));
  std::vector<double> s0, s1, l0, l1;
  for (const auto& row : data.rows) {
    if (row[gcol] == 0.0) {
      s0.push_back(row[scol]);
      l0.push_back(row[lcol]);
    } else {
      s1.push_back(row[scol]);
      l1.push_back(row[lcol]);
    }
  }
  if (!o.curve.empty()) {
    std::vector<double> ts;
    for (const std::string& part : split(o.curve, ',')) {
      const std::string entry = trim(part);
      if (!entry.empty()) ts.push_back(parse_double(entry, "--curve"));
    }
    const std::vector<double> gaps = dp_gap_curve(s0, s1, ts);
    out << "dp_gap_curve:\n";
    for (size_t i = 0; i < ts.size(); ++i) {
      out << "  t=" << num(ts[i]) << " gap=" << num(gaps[i]) << "\n";
    }
  }
  if (o.bins > 0) {
    const CalibrationResult cal = calibration_check(s0, l0, s1, l1, o.bins);
    out << "calibration (" << o.bins << " bins):\n";
    for (const CalibrationBin& b : cal.bins) {
      out << "  [" << num(b.lo) << "," << num(b.hi)
          << (b.hi == 1.0 ? "]" : ")") << " n0=" << b.n0 << " n1=" << b.n1;
      if (b.comparable()) {
        out << " rate0=" << num(b.rate0) << " rate1=" << num(b.rate1)
            << " gap=" << num(std::abs(b.rate0 - b.rate1));
      }
      out << "\n";
    }
    out << "  max_gap=" << num(cal.max_gap)
        << " skipped_bins=" << cal.skipped_bins << "\n";
  }
}

// ---------------------------------------------------------------- report

struct ReportOpts {
  std::string scenario;
  std::string data;
  std::string out_path;
  uint64_t seed = 42;
  int workers = 1;
};

void run_report(const ReportOpts& o, std::ostream& out) {
  const ScenarioSpec spec = load_scenario_arg(o.scenario);
  std::optional<Dataset> data;
  if (!o.data.empty()) {
    std::optional<MetricBindings> mb;
    if (spec.bindings) mb = to_metric_bindings(*spec.bindings);
    data = load_csv(o.data, mb);
  }
  const std::string text = build_report(spec, data, o.seed, o.workers).dump(2) + "\n";
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) fail(Errc::BadParameter, "cannot write " + o.out_path);
  f << text;
  out << "wrote report to " << o.out_path << "\n";
}

void run_presets(std::ostream& out) {
  size_t width = 0;
  for (const std::string& n : preset_names()) width = std::max(width, n.size());
  for (const std::string& n : preset_names()) {
    out << n << std::string(width - n.size() + 2, ' ') << preset_summary(n)
        << "\n";
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"causal fairness analysis over structural models", "fairlens"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string audit_scenario;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "classify paths between the sensitive node and the outcome");
  audit_cmd->add_option("scenario", audit_scenario, "scenario file or preset")
      ->required();
  audit_cmd->callback([&] { run_audit(audit_scenario, out); });

  SampleOpts so;
  CLI::App* sample_cmd =
      app.add_subcommand("sample", "draw records from the structural model");
  sample_cmd->add_option("scenario", so.scenario, "scenario file or preset")
      ->required();
  sample_cmd->add_option("--n", so.n, "number of records");
  sample_cmd->add_option("--seed", so.seed, "RNG seed")
      ->envname("FAIRLENS_SEED");
  sample_cmd->add_option("--workers", so.workers, "sampling threads")
      ->check(CLI::Range(1, 256));
  sample_cmd->add_option("--out", so.out_path, "output CSV path");
  sample_cmd->callback([&] { run_sample(so, out); });

  EffectsOpts eo;
  CLI::App* effects_cmd =
      app.add_subcommand("effects", "estimate causal effect measures");
  effects_cmd->add_option("scenario", eo.scenario, "scenario file or preset")
      ->required();
  effects_cmd->add_option("--kind", eo.kind, "effect to estimate")
      ->required()
      ->check(CLI::IsMember(
          {"ate", "ade", "aie", "pse", "ett", "nci", "backdoor"}));
  effects_cmd->add_option("--a", eo.a, "active sensitive value");
  effects_cmd->add_option("--abar", eo.abar, "baseline sensitive value");
  effects_cmd->add_option("--method", eo.method, "closed or mc")
      ->check(CLI::IsMember({"closed", "mc"}));
  effects_cmd->add_option("--n", eo.n, "Monte Carlo sample count");
  effects_cmd->add_option("--seed", eo.seed, "RNG seed")
      ->envname("FAIRLENS_SEED");
  effects_cmd->add_option("--active-edges", eo.active_edges,
                          "comma list of A->child edges carrying the active "
                          "value (pse)");
  effects_cmd->add_option("--adjust", eo.adjust,
                          "comma list of adjustment nodes (backdoor)");
  effects_cmd->add_option("--variant", eo.variant,
                          "ade: standard|active-mediators; aie: "
                          "baseline-direct|active-direct");
  effects_cmd->add_flag("--override-backdoor", eo.override_backdoor,
                        "skip the back-door criterion check");
  effects_cmd->add_option("--data", eo.data,
                          "CSV for the plug-in back-door estimator");
  effects_cmd->callback([&] { run_effects(eo, out); });

  CfOpts co;
  CLI::App* cf_cmd = app.add_subcommand(
      "counterfactual", "evaluate counterfactual outcomes for one record");
  cf_cmd->add_option("scenario", co.scenario, "scenario file or preset")
      ->required();
  cf_cmd->add_option("--values", co.values, "record as NAME=VALUE,...");
  cf_cmd->add_option("--record", co.record, "row index into --data");
  cf_cmd->add_option("--data", co.data, "CSV with observed records");
  cf_cmd->add_option("--target", co.target, "node to evaluate (default: outcome)");
  cf_cmd->add_option("--active-edges", co.active_edges,
                     "A->child edges kept at the factual value");
  cf_cmd->add_option("--flip", co.flip,
                     "FROM:TO sensitive flip; FROM must match the record");
  cf_cmd->add_option("--abar", co.abar,
                     "baseline sensitive value (default: flips a Bernoulli)");
  cf_cmd->add_flag("--fair", co.fair,
                   "predict with unfair edges held at the baseline");
  cf_cmd->add_option("--unfair-edges", co.unfair_edges,
                     "explicit unfair A->child edges (with --fair)");
  cf_cmd->add_flag("--include-outcome", co.include_outcome,
                   "condition on the observed outcome (with --fair)");
  cf_cmd->add_option("--n", co.n, "posterior sample count");
  cf_cmd->add_option("--seed", co.seed, "RNG seed")->envname("FAIRLENS_SEED");
  cf_cmd->callback([&] { run_counterfactual(co, out); });

  MetricsOpts mo;
  CLI::App* metrics_cmd =
      app.add_subcommand("metrics", "observational fairness metrics");
  metrics_cmd->add_option("scenario", mo.scenario,
                          "scenario file or preset (counts / bind blocks)");
  metrics_cmd->add_option("--data", mo.data, "CSV with predictions");
  metrics_cmd->add_option("--group", mo.group, "group column (0/1)");
  metrics_cmd->add_option("--label", mo.label, "label column (0/1)");
  metrics_cmd->add_option("--pred", mo.pred, "prediction column (0/1)");
  metrics_cmd->add_option("--score", mo.score, "score column in [0,1]");
  CLI::Option* threshold_opt =
      metrics_cmd->add_option("--threshold", mo.threshold,
                              "decision threshold for --score");
  metrics_cmd->add_option("--curve", mo.curve,
                          "ascending thresholds for the parity-gap curve");
  metrics_cmd->add_option("--bins", mo.bins, "calibration bin count")
      ->check(CLI::Range(1, 1000));
  metrics_cmd->callback([&] {
    mo.threshold_set = threshold_opt->count() > 0;
    run_metrics(mo, out);
  });

  ReportOpts ro;
  CLI::App* report_cmd =
      app.add_subcommand("report", "full JSON report for a scenario");
  report_cmd->add_option("scenario", ro.scenario, "scenario file or preset")
      ->required();
  report_cmd->add_option("--data", ro.data, "CSV evaluated by the bind block");
  report_cmd->add_option("--out", ro.out_path, "output path (default stdout)");
  report_cmd->add_option("--seed", ro.seed, "RNG seed")
      ->envname("FAIRLENS_SEED");
  report_cmd->add_option("--workers", ro.workers, "sampling threads")
      ->check(CLI::Range(1, 256));
  report_cmd->callback([&] { run_report(ro, out); });

  CLI::App* presets_cmd =
      app.add_subcommand("presets", "list built-in scenarios");
  presets_cmd->callback([&] { run_presets(out); });

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numeric_error(e.code()) ? 4 : 3;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace fairlens
