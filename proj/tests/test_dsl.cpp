#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "fairlens/csv.hpp"
#include "fairlens/dsl.hpp"
#include "fairlens/presets.hpp"
#include "helpers.hpp"

using namespace fairlens;
using namespace fairlens::testing;

namespace {

void check_syntax_error(const std::string& source, const std::string& where,
                        const std::string& fragment) {
  try {
    parse_scenario(source);
    FAIL("expected SyntaxError for: ", source);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SyntaxError);
    const std::string msg = e.what();
    CAPTURE(msg);
    CHECK(msg.find(where) != std::string::npos);
    CHECK(msg.find(fragment) != std::string::npos);
  }
}

void check_semantic_error(const std::string& source,
                          const std::string& fragment) {
  try {
    parse_scenario(source);
    FAIL("expected SemanticError for: ", source);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::SemanticError);
    CHECK(std::string(e.what()).find(fragment) != std::string::npos);
  }
}

void check_same_scenario(const ScenarioSpec& a, const ScenarioSpec& b) {
  CHECK(a.name == b.name);
  const GraphSpec ga = a.graph.to_spec();
  const GraphSpec gb = b.graph.to_spec();
  CHECK(ga.nodes == gb.nodes);
  CHECK(ga.sensitive == gb.sensitive);
  CHECK(ga.outcome == gb.outcome);
  REQUIRE(ga.edges.size() == gb.edges.size());
  for (size_t i = 0; i < ga.edges.size(); ++i) {
    CHECK(ga.edges[i].parent == gb.edges[i].parent);
    CHECK(ga.edges[i].child == gb.edges[i].child);
    CHECK(ga.edges[i].label == gb.edges[i].label);
  }
  REQUIRE(a.model.has_value() == b.model.has_value());
  if (a.model) CHECK(a.model->digest() == b.model->digest());
  REQUIRE(a.counts.has_value() == b.counts.has_value());
  if (a.counts) {
    for (int g = 0; g < 2; ++g) {
      CHECK(a.counts->groups[g].tp == b.counts->groups[g].tp);
      CHECK(a.counts->groups[g].fp == b.counts->groups[g].fp);
      CHECK(a.counts->groups[g].tn == b.counts->groups[g].tn);
      CHECK(a.counts->groups[g].fn == b.counts->groups[g].fn);
    }
  }
  REQUIRE(a.bindings.has_value() == b.bindings.has_value());
  if (a.bindings) {
    CHECK(a.bindings->group == b.bindings->group);
    CHECK(a.bindings->label == b.bindings->label);
    CHECK(a.bindings->prediction == b.bindings->prediction);
    CHECK(a.bindings->score == b.bindings->score);
    CHECK(a.bindings->threshold == b.bindings->threshold);
  }
}

std::filesystem::path temp_csv(const std::string& stem) {
  return std::filesystem::temp_directory_path() / (stem + ".csv");
}

}  // namespace

TEST_CASE("the admissions scenario parses into a full model") {
  const ScenarioSpec spec = parse_scenario(preset_source("college"));
  CHECK(spec.name == "college");
  const CausalGraph& g = spec.graph;
  CHECK(g.nodes() == std::vector<std::string>{"A", "Q", "D", "Y"});
  CHECK(g.name(*g.sensitive()) == "A");
  CHECK(g.name(*g.outcome()) == "Y");
  CHECK(g.edge_label(g.index_of("A"), g.index_of("Y")) == EdgeLabel::Unfair);
  CHECK(g.edge_label(g.index_of("A"), g.index_of("D")) == EdgeLabel::Fair);

  REQUIRE(spec.model.has_value());
  const StructuralModel& m = *spec.model;
  CHECK(m.is_bernoulli(g.index_of("A")));
  CHECK(m.bernoulli_prob(g.index_of("A"), {}) == 0.5);
  CHECK(m.mechanism_value(g.index_of("D"), {1.0}, 0.0) == 4.5);
  CHECK_FALSE(spec.counts.has_value());
  CHECK_FALSE(spec.bindings.has_value());
}

TEST_CASE("coefficients implicitly declare unlabeled edges") {
  const ScenarioSpec spec = parse_scenario(R"(graph g {
    node A { kind: bernoulli, p: 0.5 }
    node B { kind: linear }
    node Y { kind: linear, coef: { A: 2, B: -1 } }
    edge A -> Y { label: unfair }
  })");
  const CausalGraph& g = spec.graph;
  CHECK(g.has_edge(g.index_of("A"), g.index_of("Y")));
  CHECK(g.has_edge(g.index_of("B"), g.index_of("Y")));
  // the explicit declaration keeps its label; the implicit one is unknown
  CHECK(g.edge_label(g.index_of("A"), g.index_of("Y")) == EdgeLabel::Unfair);
  CHECK(g.edge_label(g.index_of("B"), g.index_of("Y")) == EdgeLabel::Unknown);
  // defaults: intercept 0, sigma 1
  CHECK(spec.model->mechanism_value(g.index_of("B"), {}, 0.25) == 0.25);
}

TEST_CASE("counts and bind blocks parse") {
  const ScenarioSpec compas = parse_scenario(preset_source("compas_rates"));
  CHECK_FALSE(compas.model.has_value());
  REQUIRE(compas.counts.has_value());
  CHECK(compas.counts->groups[0].tp == 34804);
  CHECK(compas.counts->groups[1].fn == 15734);

  const ScenarioSpec spec = parse_scenario(R"(graph g {
    node A {}
    node Y {}
    bind { group: grp, label: truth, score: risk, threshold: 0.25 }
  })");
  REQUIRE(spec.bindings.has_value());
  CHECK(spec.bindings->group == "grp");
  CHECK(spec.bindings->label == "truth");
  CHECK_FALSE(spec.bindings->prediction.has_value());
  CHECK(spec.bindings->score == std::optional<std::string>("risk"));
  CHECK(spec.bindings->threshold == std::optional<double>(0.25));
}

TEST_CASE("syntax errors point at line and column") {
  check_syntax_error("", "1:1", "expected 'graph'");
  check_syntax_error("graph g { node A {", "1:19", "expected an attribute");
  check_syntax_error("graph g { node A { kindd: linear } }", "1:20",
                     "unknown node attribute 'kindd'");
  check_syntax_error(
      "graph g { node A { kind: linear }\n"
      "node B { kind: linear, coef: { A: 1, A: 2 } } }",
      "2:38", "duplicate coefficient for 'A'");
  check_syntax_error("graph g { node A { kind: linear } } extra", "1:37",
                     "trailing input");
  check_syntax_error("graph g {\n  node A { kind: linear }\n  nodee B {}\n}",
                     "3:3", "expected 'node', 'edge', 'counts' or 'bind'");
  check_syntax_error("graph g { node A {} node B {} edge A -> B { label: x } }",
                     "1:52", "label must be 'fair', 'unfair' or 'unknown'");
  check_syntax_error("graph g { node A { p: } }", "1:23", "number");
}

TEST_CASE("semantic errors name the offending declaration") {
  check_semantic_error("graph g { node Y { kind: linear, coef: { Z: 1 } } }",
                       "UnknownNode");
  check_semantic_error(
      "graph g { node A { role: sensitive } node B { role: sensitive } }",
      "two nodes marked sensitive");
  check_semantic_error(
      "graph g { node A { role: outcome } node B { role: outcome } }",
      "two nodes marked outcome");
  check_semantic_error(
      "graph g { node A { kind: linear, coef: { B: 1 } }"
      " node B { kind: linear, coef: { A: 1 } } }",
      "CycleDetected");
  check_semantic_error("graph g { node A {} node A {} }", "DuplicateNode");
  check_semantic_error("graph g { node A { kind: bernoulli, sigma: 1 } }",
                       "does not apply to kind bernoulli");
  check_semantic_error("graph g { node A { kind: expr } }",
                       "needs an expr");
  check_semantic_error("graph g { node A { kind: bernoulli, p: 1.5 } }",
                       "probability must lie in [0, 1]");
  check_semantic_error("graph g { node A { kind: plonk } }", "unknown kind");
  // a partially specified model is missing mechanisms, not model-free
  check_semantic_error("graph g { node A { kind: linear } node B {} }",
                       "MissingMechanism");
  check_semantic_error(
      "graph g { counts { group0: { tp: 1, fp: 1, tn: 1, fn: 1 },"
      " group1: { tp: 1, fp: 1, tn: 1, fn: 1 } }"
      " counts { group0: { tp: 1, fp: 1, tn: 1, fn: 1 },"
      " group1: { tp: 1, fp: 1, tn: 1, fn: 1 } } }",
      "duplicate counts block");
}

TEST_CASE("every preset serializes canonically and round-trips") {
  for (const std::string& name : preset_names()) {
    CAPTURE(name);
    const ScenarioSpec first = parse_scenario(preset_source(name));
    const std::string canon = serialize_scenario(first);
    const ScenarioSpec second = parse_scenario(canon);
    check_same_scenario(first, second);
    // canonical form is a fixed point
    CHECK(serialize_scenario(second) == canon);
  }
}

TEST_CASE("randomized scenarios round-trip through the text form") {
  std::mt19937_64 rng(515);
  std::uniform_int_distribution<int> size(2, 7);
  std::uniform_int_distribution<int> label(0, 2);
  for (int trial = 0; trial < 25; ++trial) {
    GraphSpec gs = random_dag(rng, size(rng), 0.45);
    for (auto& e : gs.edges) e.label = static_cast<EdgeLabel>(label(rng));
    if (!gs.nodes.empty()) {
      gs.sensitive = gs.nodes.front();
      gs.outcome = gs.nodes.back();
    }
    if (gs.nodes.size() < 2) continue;
    const CausalGraph g = validate_graph(gs);

    ScenarioSpec spec;
    spec.name = "rnd" + std::to_string(trial);
    spec.graph = g;
    spec.model = random_linear_model(rng, g);
    if (trial % 3 == 0) {
      GroupedCounts counts;
      counts.groups[0] = {trial + 1, 2, 3, 4};
      counts.groups[1] = {5, 6, 7, trial + 8};
      spec.counts = counts;
    }
    if (trial % 4 == 0) {
      ColumnBindings b;
      b.group = "g";
      b.label = "y";
      b.score = "s";
      b.threshold = 0.125 * (trial % 8);
      spec.bindings = b;
    }

    CAPTURE(trial);
    const std::string text = serialize_scenario(spec);
    const ScenarioSpec back = parse_scenario(text);
    check_same_scenario(spec, back);
    CHECK(serialize_scenario(back) == text);
  }
}

TEST_CASE("comments and flexible whitespace are accepted") {
  const ScenarioSpec spec = parse_scenario(
      "# leading comment\n"
      "graph g {  # trailing comment\n"
      "  node A { kind: bernoulli }  # p defaults to 0.5\n"
      "\n"
      "  node Y { kind: linear, coef: { A: 1 } }\n"
      "}\n"
      "# closing remark\n");
  CHECK(spec.graph.size() == 2);
  CHECK(spec.model->bernoulli_prob(0, {}) == 0.5);
}

TEST_CASE("csv writing and loading reproduce every bit") {
  Dataset d;
  d.columns = {"a", "b", "c"};
  d.rows = {
      {1.0, 0.5, -0.0},
      {1.0 / 3.0, 1e-300, 5e-324},
      {1.7976931348623157e308, -12345.678901234567, 42.0},
  };
  const auto path = temp_csv("fairlens_roundtrip");
  write_csv(d, path.string());
  const Dataset back = load_csv(path.string());
  std::filesystem::remove(path);

  CHECK(back.columns == d.columns);
  REQUIRE(back.rows.size() == d.rows.size());
  for (size_t r = 0; r < d.rows.size(); ++r) {
    for (size_t c = 0; c < d.columns.size(); ++c) {
      CHECK(std::memcmp(&back.rows[r][c], &d.rows[r][c], sizeof(double)) == 0);
    }
  }

  CHECK(csv_text(Dataset{{"a", "b"}, {{1.0, 0.5}}, 0, ""}) == "a,b\n1,0.5\n");
}

TEST_CASE("csv loading is strict about shape and numbers") {
  const auto path = temp_csv("fairlens_bad");
  auto write_text = [&](const std::string& text) {
    std::ofstream out(path);
    out << text;
  };

  write_text("g,y,p\n1,0,1\n1,x,0\n");
  try {
    load_csv(path.string());
    FAIL("expected CsvParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CsvParseError);
    CHECK(std::string(e.what()).find("row 2, column 2") != std::string::npos);
  }

  write_text("g,y,p\n1,0\n");
  try {
    load_csv(path.string());
    FAIL("expected CsvParseError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::CsvParseError);
    CHECK(std::string(e.what()).find("expected 3 cells, got 2") !=
          std::string::npos);
  }

  write_text("");
  CHECK(code_of([&] { load_csv(path.string()); }) == Errc::CsvParseError);

  // header-only files are empty datasets, and a missing final newline is fine
  write_text("a,b\n");
  CHECK(load_csv(path.string()).rows.empty());
  write_text("a,b\n1,2");
  CHECK(load_csv(path.string()).rows == std::vector<std::vector<double>>{
                                            {1.0, 2.0}});

  // bound columns are validated on load
  MetricBindings bind{"g", "y", std::string("p"), std::nullopt, 0.5};
  write_text("g,y,p\n2,0,1\n");
  CHECK(code_of([&] { load_csv(path.string(), bind); }) ==
        Errc::NonBinaryColumn);
  write_text("h,y,p\n1,0,1\n");
  CHECK(code_of([&] { load_csv(path.string(), bind); }) ==
        Errc::MissingColumn);
  std::filesystem::remove(path);

  CHECK(code_of([&] { load_csv("/nonexistent/nope.csv"); }) ==
        Errc::CsvParseError);
}
