#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fairlens/graph.hpp"
#include "fairlens/presets.hpp"
#include "helpers.hpp"

using namespace fairlens;
using namespace fairlens::testing;

namespace {

// A -> B -> D, A -> C -> D
CausalGraph diamond() {
  return validate_graph(make_spec({"A", "B", "C", "D"},
                                  {{"A", "B"}, {"B", "D"}, {"A", "C"}, {"C", "D"}},
                                  "A", "D"));
}

std::set<int> ids(const CausalGraph& g, const std::vector<std::string>& names) {
  std::set<int> out;
  for (const auto& n : names) out.insert(g.index_of(n));
  return out;
}

}  // namespace

TEST_CASE("graph validation rejects malformed input") {
  CHECK(code_of([] { validate_graph(make_spec({"A", "A"}, {})); }) ==
        Errc::DuplicateNode);
  CHECK(code_of([] { validate_graph(make_spec({"A"}, {{"A", "B"}})); }) ==
        Errc::UnknownNode);
  CHECK(code_of([] {
          validate_graph(make_spec({"A", "B"}, {{"A", "B"}, {"A", "B"}}));
        }) == Errc::DuplicateEdge);
  CHECK(code_of([] {
          validate_graph(
              make_spec({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"C", "A"}}));
        }) == Errc::CycleDetected);
  CHECK(code_of([] { validate_graph(make_spec({"A"}, {{"A", "A"}})); }) ==
        Errc::CycleDetected);
  CHECK(code_of([] { validate_graph(make_spec({"A"}, {}, "Z")); }) ==
        Errc::UnknownNode);
  CHECK(code_of([] { validate_graph(make_spec({"A"}, {}, std::nullopt, "Z")); }) ==
        Errc::UnknownNode);
  CHECK(code_of([] { validate_graph(make_spec({""}, {})); }).has_value());
}

TEST_CASE("graph accessors and topological order") {
  const CausalGraph g = diamond();
  CHECK(g.size() == 4);
  CHECK(g.name(0) == "A");
  CHECK(g.index_of("D") == 3);
  CHECK(code_of([&] { g.index_of("nope"); }) == Errc::UnknownNode);
  CHECK(g.has_node("C"));
  CHECK_FALSE(g.has_node("c"));
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
  CHECK(g.parents(3) == std::vector<int>{1, 2});
  CHECK(g.children(0) == std::vector<int>{1, 2});
  CHECK(*g.sensitive() == 0);
  CHECK(*g.outcome() == 3);

  // every edge must go forward in topo order
  const auto& topo = g.topo_order();
  std::vector<int> pos(static_cast<size_t>(g.size()));
  for (size_t i = 0; i < topo.size(); ++i) pos[static_cast<size_t>(topo[i])] = static_cast<int>(i);
  for (int v = 0; v < g.size(); ++v) {
    for (int c : g.children(v)) CHECK(pos[static_cast<size_t>(v)] < pos[static_cast<size_t>(c)]);
  }
}

TEST_CASE("to_spec round trip preserves structure and labels") {
  GraphSpec spec = make_spec(
      {"A", "B", "C"},
      {{"B", "C", EdgeLabel::Unfair}, {"A", "B", EdgeLabel::Fair}}, "A", "C");
  const CausalGraph g = validate_graph(spec);
  CHECK(g.edge_label(g.index_of("A"), g.index_of("B")) == EdgeLabel::Fair);
  CHECK(g.edge_label(g.index_of("B"), g.index_of("C")) == EdgeLabel::Unfair);
  CHECK(code_of([&] { g.edge_label(0, 2); }) == Errc::UnknownNode);

  const GraphSpec round = g.to_spec();
  CHECK(round.nodes == spec.nodes);
  REQUIRE(round.edges.size() == 2);
  // serialized edges come back sorted by names
  CHECK(round.edges[0].parent == "A");
  CHECK(round.edges[0].label == EdgeLabel::Fair);
  CHECK(round.edges[1].parent == "B");
  CHECK(*round.sensitive == "A");
  CHECK(*round.outcome == "C");
  const CausalGraph again = validate_graph(round);
  CHECK(again.nodes() == g.nodes());
}

TEST_CASE("relatives computes strict ancestor and descendant sets") {
  const CausalGraph g = diamond();
  const Relatives ra = relatives(g, g.index_of("A"));
  CHECK(ra.parents.empty());
  CHECK(ra.children == ids(g, {"B", "C"}));
  CHECK(ra.ancestors.empty());
  CHECK(ra.descendants == ids(g, {"B", "C", "D"}));

  const Relatives rb = relatives(g, g.index_of("B"));
  CHECK(rb.parents == ids(g, {"A"}));
  CHECK(rb.ancestors == ids(g, {"A"}));
  CHECK(rb.descendants == ids(g, {"D"}));

  CHECK(g.ancestors(g.index_of("D")) == ids(g, {"A", "B", "C"}));
  CHECK(g.descendants(g.index_of("D")).empty());
}

TEST_CASE("path enumeration is lexicographic with direction flags") {
  const CausalGraph g = diamond();
  const auto paths = enumerate_paths(g, g.index_of("A"), g.index_of("D"));
  REQUIRE(paths.size() == 2);
  CHECK(paths[0].to_string(g) == "A -> B -> D");
  CHECK(paths[1].to_string(g) == "A -> C -> D");
  CHECK(paths[0].is_causal());
  CHECK_FALSE(paths[0].is_backdoor());

  // collider path renders direction flags
  const CausalGraph music = load_preset("music").graph;
  const auto mp =
      enumerate_paths(music, music.index_of("A"), music.index_of("Y"));
  REQUIRE(mp.size() == 1);
  CHECK(mp[0].to_string(music) == "A -> X <- M -> Y");
  CHECK(mp[0].forward == std::vector<bool>{true, false, true});
  CHECK_FALSE(mp[0].is_causal());
  CHECK_FALSE(mp[0].is_backdoor());

  const auto causal = enumerate_causal_paths(g, g.index_of("A"), g.index_of("D"));
  CHECK(causal.size() == 2);
  CHECK(enumerate_causal_paths(music, music.index_of("A"), music.index_of("Y"))
            .empty());

  CHECK(code_of([&] { enumerate_paths(g, 0, 3, 1); }) ==
        Errc::PathBudgetExceeded);
}

TEST_CASE("backdoor paths start with an edge into the source") {
  const CausalGraph g = load_preset("confounded").graph;
  const auto paths = enumerate_paths(g, g.index_of("A"), g.index_of("Y"));
  REQUIRE(paths.size() == 2);
  int backdoor = 0;
  for (const auto& p : paths) backdoor += p.is_backdoor() ? 1 : 0;
  CHECK(backdoor == 1);
}

TEST_CASE("collider detection and path blocking") {
  const CausalGraph chain =
      validate_graph(make_spec({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}));
  const auto cp = enumerate_paths(chain, 0, 2);
  REQUIRE(cp.size() == 1);
  CHECK_FALSE(is_collider(cp[0], 1));
  CHECK(code_of([&] { is_collider(cp[0], 0); }) == Errc::NotInterior);
  CHECK(code_of([&] { is_collider(cp[0], 2); }) == Errc::NotInterior);
  CHECK_FALSE(is_blocked(chain, cp[0], {}));
  CHECK(is_blocked(chain, cp[0], {1}));
  CHECK(code_of([&] { is_blocked(chain, cp[0], {0}); }) ==
        Errc::EndpointConditioned);

  const CausalGraph fork =
      validate_graph(make_spec({"A", "B", "C"}, {{"B", "A"}, {"B", "C"}}));
  const auto fp = enumerate_paths(fork, 0, 2);
  CHECK_FALSE(is_blocked(fork, fp[0], {}));
  CHECK(is_blocked(fork, fp[0], {1}));

  // collider with a descendant: conditioning either opens the path
  const CausalGraph coll = validate_graph(
      make_spec({"A", "B", "C", "D"}, {{"A", "B"}, {"C", "B"}, {"B", "D"}}));
  const auto kp = enumerate_paths(coll, 0, 2);
  REQUIRE(kp.size() == 1);
  CHECK(is_collider(kp[0], 1));
  CHECK(is_blocked(coll, kp[0], {}));
  CHECK_FALSE(is_blocked(coll, kp[0], {coll.index_of("B")}));
  CHECK_FALSE(is_blocked(coll, kp[0], {coll.index_of("D")}));
}

TEST_CASE("d-separation on the textbook motifs") {
  const CausalGraph music = load_preset("music").graph;
  const int a = music.index_of("A");
  const int y = music.index_of("Y");
  const int x = music.index_of("X");
  CHECK(d_separated(music, {a}, {y}, {}));
  CHECK_FALSE(d_separated(music, {a}, {y}, {x}));
  // symmetric in the two sets
  CHECK(d_separated(music, {y}, {a}, {}));
  CHECK(code_of([&] { d_separated(music, {a}, {a, y}, {}); }) ==
        Errc::OverlappingSets);
  CHECK(code_of([&] { d_separated(music, {a}, {y}, {a}); }) ==
        Errc::OverlappingSets);

  const CausalGraph conf = load_preset("confounded").graph;
  CHECK_FALSE(d_separated(conf, {conf.index_of("A")}, {conf.index_of("Y")},
                          {conf.index_of("C")}));  // direct edge stays open
  const CausalGraph chain =
      validate_graph(make_spec({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}}));
  CHECK(d_separated(chain, {0}, {2}, {1}));
  CHECK_FALSE(d_separated(chain, {0}, {2}, {}));
}

TEST_CASE("d-separation agrees with brute-force path blocking") {
  std::mt19937_64 rng(20240815);
  std::uniform_int_distribution<int> size(3, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const CausalGraph g = validate_graph(random_dag(rng, size(rng), 0.3));
    const int n = g.size();
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (int rep = 0; rep < 12; ++rep) {
      const int x = pick(rng);
      int y = pick(rng);
      if (x == y) continue;
      std::set<int> z;
      for (int v = 0; v < n; ++v) {
        if (v != x && v != y && std::bernoulli_distribution(0.3)(rng)) {
          z.insert(v);
        }
      }
      CAPTURE(trial);
      CAPTURE(x);
      CAPTURE(y);
      REQUIRE(d_separated(g, {x}, {y}, z) == brute_force_dsep(g, x, y, z));
    }
  }
}

TEST_CASE("set-valued d-separation matches pairwise conjunction") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const CausalGraph g = validate_graph(random_dag(rng, 7, 0.3));
    const std::set<int> x = {0, 1};
    const std::set<int> y = {5, 6};
    std::set<int> z;
    if (trial % 2) z = {3};
    bool all = true;
    for (int xv : x) {
      for (int yv : y) all = all && brute_force_dsep(g, xv, yv, z);
    }
    CHECK(d_separated(g, x, y, z) == all);
  }
}

TEST_CASE("back-door criterion and minimal adjustment sets") {
  const CausalGraph conf = load_preset("confounded").graph;
  const int a = conf.index_of("A");
  const int y = conf.index_of("Y");
  const int c = conf.index_of("C");
  CHECK(satisfies_backdoor(conf, {c}, a, y));
  CHECK_FALSE(satisfies_backdoor(conf, {}, a, y));
  const auto conf_sets = minimal_adjustment_sets(conf, a, y);
  REQUIRE(conf_sets.size() == 1);
  CHECK(conf_sets[0] == std::set<int>{c});
  CHECK(minimal_adjustment_sets(conf, a, y, 0).empty());

  // descendants of the treatment are never admissible
  const CausalGraph college = load_preset("college").graph;
  CHECK_FALSE(satisfies_backdoor(college, {college.index_of("D")},
                                 college.index_of("A"),
                                 college.index_of("Y")));
  const auto college_sets = minimal_adjustment_sets(
      college, college.index_of("A"), college.index_of("Y"));
  REQUIRE(college_sets.size() == 1);
  CHECK(college_sets[0].empty());

  const CausalGraph web = load_preset("collider_web").graph;
  const auto web_sets =
      minimal_adjustment_sets(web, web.index_of("A"), web.index_of("Y"));
  REQUIRE(web_sets.size() == 2);
  CHECK(web_sets[0] == ids(web, {"C", "E"}));
  CHECK(web_sets[1] == ids(web, {"C", "X"}));
  // conditioning on the collider C alone opens E -> C <- X
  CHECK_FALSE(satisfies_backdoor(web, ids(web, {"C"}), web.index_of("A"),
                                 web.index_of("Y")));
  for (const auto& s : web_sets) {
    CHECK(satisfies_backdoor(web, s, web.index_of("A"), web.index_of("Y")));
  }
}

TEST_CASE("path fairness classification") {
  const CausalGraph g = load_preset("college").graph;
  const auto paths = enumerate_causal_paths(g, g.index_of("A"), g.index_of("Y"));
  REQUIRE(paths.size() == 2);
  CHECK(classify_path_fairness(g, paths[0]) == EdgeLabel::Fair);    // A->D->Y
  CHECK(classify_path_fairness(g, paths[1]) == EdgeLabel::Unfair);  // A->Y

  // one unfair edge poisons a path; unknown without unfair stays unknown
  const CausalGraph mixed = validate_graph(
      make_spec({"A", "M", "Y"},
                {{"A", "M", EdgeLabel::Fair}, {"M", "Y", EdgeLabel::Unknown}},
                "A", "Y"));
  const auto mp = enumerate_causal_paths(mixed, 0, 2);
  CHECK(classify_path_fairness(mixed, mp[0]) == EdgeLabel::Unknown);
}

TEST_CASE("audit report classifies outcome and per-node paths") {
  const CausalGraph g = load_preset("college").graph;
  const AuditReport ar = audit_paths(g);
  CHECK(ar.sensitive == g.index_of("A"));
  CHECK(ar.outcome == g.index_of("Y"));
  REQUIRE(ar.outcome_paths.size() == 2);
  CHECK(ar.outcome_paths[0].kind == PathKind::Causal);
  CHECK(ar.outcome_paths[0].fairness == EdgeLabel::Fair);
  CHECK(ar.outcome_paths[1].fairness == EdgeLabel::Unfair);
  CHECK(ar.node_paths.count("D") == 1);
  CHECK(ar.node_paths.at("D").size() >= 1);

  const CausalGraph bare = validate_graph(make_spec({"A", "B"}, {{"A", "B"}}));
  CHECK(code_of([&] { audit_paths(bare); }) == Errc::RolesUnset);
}

TEST_CASE("criterion recommendations cover all label mixes") {
  // zero causal paths: parity-style criteria fine, demographic parity not
  const Recommendation none =
      recommend_criteria(audit_paths(load_preset("music").graph));
  CHECK(none.demographic_parity == Appropriateness::Inappropriate);
  CHECK(none.error_rate_parity == Appropriateness::Appropriate);
  CHECK(none.calibration == Appropriateness::Appropriate);
  CHECK_FALSE(none.rationale.empty());

  // every causal path unfair: demographic parity appropriate
  const Recommendation unfair =
      recommend_criteria(audit_paths(load_preset("confounded").graph));
  CHECK(unfair.demographic_parity == Appropriateness::Appropriate);
  CHECK(unfair.error_rate_parity == Appropriateness::Inappropriate);
  CHECK(unfair.calibration == Appropriateness::Inappropriate);

  // all causal influence fair: same verdicts as no causal influence
  const CausalGraph fair = validate_graph(make_spec(
      {"A", "D", "Y"},
      {{"A", "D", EdgeLabel::Fair}, {"D", "Y", EdgeLabel::Fair}}, "A", "Y"));
  const Recommendation rf = recommend_criteria(audit_paths(fair));
  CHECK(rf.demographic_parity == Appropriateness::Inappropriate);
  CHECK(rf.error_rate_parity == Appropriateness::Appropriate);
  CHECK(rf.calibration == Appropriateness::Appropriate);

  // mixed fair and unfair: nothing fits, rationale mentions paths
  const Recommendation mixed =
      recommend_criteria(audit_paths(load_preset("college").graph));
  CHECK(mixed.demographic_parity == Appropriateness::Inappropriate);
  CHECK(mixed.error_rate_parity == Appropriateness::Inappropriate);
  CHECK(mixed.calibration == Appropriateness::Inappropriate);

  // unknown labels on causal paths: undetermined
  const CausalGraph unknown = validate_graph(
      make_spec({"A", "Y"}, {{"A", "Y", EdgeLabel::Unknown}}, "A", "Y"));
  const Recommendation ru = recommend_criteria(audit_paths(unknown));
  CHECK(ru.demographic_parity == Appropriateness::Undetermined);
  CHECK(ru.error_rate_parity == Appropriateness::Undetermined);
  CHECK(ru.calibration == Appropriateness::Undetermined);
}

TEST_CASE("enum names are stable") {
  CHECK(std::string(edge_label_name(EdgeLabel::Fair)) == "fair");
  CHECK(std::string(path_kind_name(PathKind::BackDoor)) == "back_door");
  CHECK(std::string(appropriateness_name(Appropriateness::Appropriate)) ==
        "appropriate");
}
