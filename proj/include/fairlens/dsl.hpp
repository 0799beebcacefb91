#pragma once

#include <optional>
#include <string>

#include "fairlens/graph.hpp"
#include "fairlens/metrics.hpp"
#include "fairlens/scm.hpp"

namespace fairlens {

// Dataset column roles declared inside a scenario's `bind` block.
struct ColumnBindings {
  std::string group;
  std::string label;
  std::optional<std::string> prediction;
  std::optional<std::string> score;
  std::optional<double> threshold;
};

// One parsed scenario: a validated graph, optionally a full structural
// model (when every node declares a mechanism kind), optionally aggregate
// confusion counts, optionally dataset column bindings.
struct ScenarioSpec {
  std::string name;
  CausalGraph graph;
  std::optional<StructuralModel> model;
  std::optional<GroupedCounts> counts;
  std::optional<ColumnBindings> bindings;
};

// Grammar:
//   graph <id> "{" (node_decl | edge_decl | counts_decl | bind_decl)* "}"
//   node <id> "{" [attr ("," attr)*] "}"
//     attrs: kind: bernoulli|logistic|linear|expr; p / intercept / sigma:
//     number; coef: "{" <id>: number, ... "}"; expr: "formula"; role:
//     sensitive|outcome.  Nodes may omit `kind` (graph-only scenarios).
//   edge <id> -> <id> ["{" label: fair|unfair|unknown "}"]
//   counts "{" group0: "{" tp/fp/tn/fn: int, ... "}", group1: ... "}"
//   bind "{" group/label/prediction/score: <id>, threshold: number "}"
// Coefficient entries implicitly declare the corresponding edge.  `#`
// starts a line comment.  SyntaxError messages carry line:column;
// validation failures surface as SemanticError.
ScenarioSpec parse_scenario(const std::string& text);

// Canonical form: declaration-ordered nodes with fixed attribute order,
// name-sorted edges, explicit parameters.  parse(serialize(s)) reproduces s.
std::string serialize_scenario(const ScenarioSpec& spec);

}  // namespace fairlens
