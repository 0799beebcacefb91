#include "fairlens/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <sstream>

namespace fairlens {

const char* edge_label_name(EdgeLabel label) noexcept {
  switch (label) {
    case EdgeLabel::Fair: return "fair";
    case EdgeLabel::Unfair: return "unfair";
    case EdgeLabel::Unknown: return "unknown";
  }
  return "unknown";
}

const char* path_kind_name(PathKind kind) noexcept {
  switch (kind) {
    case PathKind::Causal: return "causal";
    case PathKind::BackDoor: return "back_door";
    case PathKind::Other: return "other";
  }
  return "other";
}

const char* appropriateness_name(Appropriateness a) noexcept {
  switch (a) {
    case Appropriateness::Appropriate: return "appropriate";
    case Appropriateness::Inappropriate: return "inappropriate";
    case Appropriateness::Undetermined: return "cannot_determine";
  }
  return "cannot_determine";
}

bool CausalGraph::has_node(const std::string& name) const {
  return index_.count(name) > 0;
}

int CausalGraph::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) fail(Errc::UnknownNode, "no node named '" + name + "'");
  return it->second;
}

bool CausalGraph::has_edge(int parent, int child) const {
  return labels_.count({parent, child}) > 0;
}

EdgeLabel CausalGraph::edge_label(int parent, int child) const {
  auto it = labels_.find({parent, child});
  if (it == labels_.end()) {
    fail(Errc::UnknownNode,
         "no edge " + name(parent) + " -> " + name(child));
  }
  return it->second;
}

namespace {

std::set<int> closure(const CausalGraph& g, int v,
                      const std::vector<int>& (CausalGraph::*step)(int) const) {
  std::set<int> out;
  std::deque<int> work{v};
  while (!work.empty()) {
    int u = work.front();
    work.pop_front();
    for (int w : (g.*step)(u)) {
      if (out.insert(w).second) work.push_back(w);
    }
  }
  out.erase(v);
  return out;
}

}  // namespace

std::set<int> CausalGraph::ancestors(int v) const {
  return closure(*this, v, &CausalGraph::parents);
}

std::set<int> CausalGraph::descendants(int v) const {
  return closure(*this, v, &CausalGraph::children);
}

GraphSpec CausalGraph::to_spec() const {
  GraphSpec spec;
  spec.nodes = nodes_;
  for (const auto& [edge, label] : labels_) {
    spec.edges.push_back({name(edge.first), name(edge.second), label});
  }
  std::sort(spec.edges.begin(), spec.edges.end(),
            [](const GraphSpec::EdgeDecl& a, const GraphSpec::EdgeDecl& b) {
              return std::tie(a.parent, a.child) < std::tie(b.parent, b.child);
            });
  if (sensitive_) spec.sensitive = name(*sensitive_);
  if (outcome_) spec.outcome = name(*outcome_);
  return spec;
}

CausalGraph validate_graph(const GraphSpec& spec) {
  CausalGraph g;
  g.nodes_ = spec.nodes;
  for (int i = 0; i < static_cast<int>(g.nodes_.size()); ++i) {
    if (g.nodes_[static_cast<size_t>(i)].empty()) {
      fail(Errc::BadParameter, "node names must be non-empty");
    }
    if (!g.index_.emplace(g.nodes_[static_cast<size_t>(i)], i).second) {
      fail(Errc::DuplicateNode,
           "node '" + g.nodes_[static_cast<size_t>(i)] + "' declared twice");
    }
  }
  const size_t n = g.nodes_.size();
  g.parents_.resize(n);
  g.children_.resize(n);
  for (const auto& e : spec.edges) {
    int p = g.index_of(e.parent);
    int c = g.index_of(e.child);
    if (p == c) fail(Errc::CycleDetected, "self-loop on '" + e.parent + "'");
    if (!g.labels_.emplace(std::pair{p, c}, e.label).second) {
      fail(Errc::DuplicateEdge, e.parent + " -> " + e.child + " declared twice");
    }
    g.parents_[static_cast<size_t>(c)].push_back(p);
    g.children_[static_cast<size_t>(p)].push_back(c);
  }
  for (auto& v : g.parents_) std::sort(v.begin(), v.end());
  for (auto& v : g.children_) std::sort(v.begin(), v.end());

  // Kahn's algorithm; min-index heap keeps the order deterministic.
  std::vector<int> indegree(n, 0);
  for (size_t v = 0; v < n; ++v)
    indegree[v] = static_cast<int>(g.parents_[v].size());
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(static_cast<int>(v));
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    g.topo_.push_back(v);
    for (int c : g.children_[static_cast<size_t>(v)]) {
      if (--indegree[static_cast<size_t>(c)] == 0) ready.push(c);
    }
  }
  if (g.topo_.size() != n) {
    std::string cycle;
    for (size_t v = 0; v < n; ++v) {
      if (indegree[v] > 0) {
        if (!cycle.empty()) cycle += ", ";
        cycle += g.nodes_[v];
      }
    }
    fail(Errc::CycleDetected, "cycle through {" + cycle + "}");
  }

  if (spec.sensitive) g.sensitive_ = g.index_of(*spec.sensitive);
  if (spec.outcome) g.outcome_ = g.index_of(*spec.outcome);
  if (g.sensitive_ && g.outcome_ && *g.sensitive_ == *g.outcome_) {
    fail(Errc::BadParameter, "sensitive and outcome must be distinct nodes");
  }
  return g;
}

Relatives relatives(const CausalGraph& g, int v) {
  Relatives r;
  r.parents.insert(g.parents(v).begin(), g.parents(v).end());
  r.children.insert(g.children(v).begin(), g.children(v).end());
  r.ancestors = g.ancestors(v);
  r.descendants = g.descendants(v);
  return r;
}

bool Path::is_causal() const {
  return std::all_of(forward.begin(), forward.end(), [](bool f) { return f; });
}

bool Path::is_backdoor() const { return !forward.empty() && !forward.front(); }

std::string Path::to_string(const CausalGraph& g) const {
  std::string out = g.name(nodes.front());
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    out += forward[i] ? " -> " : " <- ";
    out += g.name(nodes[i + 1]);
  }
  return out;
}

namespace {

struct Step {
  int node;
  bool forward;  // direction of the edge used to reach `node`
};

// Undirected neighbors with the direction flag, sorted by neighbor name so
// depth-first expansion emits paths in lexicographic name order.
std::vector<Step> skeleton_neighbors(const CausalGraph& g, int v) {
  std::vector<Step> out;
  for (int p : g.parents(v)) out.push_back({p, false});
  for (int c : g.children(v)) out.push_back({c, true});
  std::sort(out.begin(), out.end(), [&](const Step& a, const Step& b) {
    return g.name(a.node) < g.name(b.node);
  });
  return out;
}

void check_budget(size_t found, size_t budget) {
  if (found > budget) {
    fail(Errc::PathBudgetExceeded,
         "more than " + std::to_string(budget) + " paths");
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const CausalGraph& g, int src, int dst,
                                  size_t budget) {
  if (src == dst) fail(Errc::BadParameter, "path endpoints must differ");
  std::vector<Path> out;
  std::vector<char> on_path(static_cast<size_t>(g.size()), 0);
  Path current;
  current.nodes.push_back(src);
  on_path[static_cast<size_t>(src)] = 1;

  // Iterative DFS; the recursion depth equals the path length, which is
  // bounded by the node count, so plain recursion would also do.  Kept
  // iterative to make the budget check one place.
  struct Frame {
    std::vector<Step> steps;
    size_t next = 0;
  };
  std::vector<Frame> stack;
  stack.push_back({skeleton_neighbors(g, src), 0});
  while (!stack.empty()) {
    Frame& frame = stack.back();
    if (frame.next >= frame.steps.size()) {
      stack.pop_back();
      on_path[static_cast<size_t>(current.nodes.back())] = 0;
      current.nodes.pop_back();
      if (!current.forward.empty()) current.forward.pop_back();
      continue;
    }
    const Step step = frame.steps[frame.next++];
    if (on_path[static_cast<size_t>(step.node)]) continue;
    if (step.node == dst) {
      check_budget(out.size() + 1, budget);
      Path done = current;
      done.nodes.push_back(step.node);
      done.forward.push_back(step.forward);
      out.push_back(std::move(done));
      continue;
    }
    current.nodes.push_back(step.node);
    current.forward.push_back(step.forward);
    on_path[static_cast<size_t>(step.node)] = 1;
    stack.push_back({skeleton_neighbors(g, step.node), 0});
  }
  return out;
}

std::vector<Path> enumerate_causal_paths(const CausalGraph& g, int src,
                                         int dst, size_t budget) {
  std::vector<Path> all = enumerate_paths(g, src, dst, budget);
  std::vector<Path> out;
  for (auto& p : all) {
    if (p.is_causal()) out.push_back(std::move(p));
  }
  return out;
}

bool is_collider(const Path& path, size_t i) {
  if (i == 0 || i + 1 >= path.nodes.size()) {
    fail(Errc::NotInterior,
         "position " + std::to_string(i) + " is not interior");
  }
  return path.forward[i - 1] && !path.forward[i];
}

bool is_blocked(const CausalGraph& g, const Path& path,
                const std::set<int>& z) {
  if (z.count(path.nodes.front()) || z.count(path.nodes.back())) {
    fail(Errc::EndpointConditioned,
         "conditioning set contains a path endpoint");
  }
  for (size_t i = 1; i + 1 < path.nodes.size(); ++i) {
    const int v = path.nodes[i];
    if (is_collider(path, i)) {
      if (z.count(v)) continue;
      std::set<int> desc = g.descendants(v);
      bool opened = false;
      for (int d : desc) {
        if (z.count(d)) { opened = true; break; }
      }
      if (!opened) return true;  // collider with no conditioned descendant
    } else if (z.count(v)) {
      return true;  // conditioned non-collider
    }
  }
  return false;
}

namespace {

void check_disjoint(const std::set<int>& a, const std::set<int>& b,
                    const char* what) {
  for (int v : a) {
    if (b.count(v)) fail(Errc::OverlappingSets, what);
  }
}

}  // namespace

bool d_separated(const CausalGraph& g, const std::set<int>& x,
                 const std::set<int>& y, const std::set<int>& z) {
  check_disjoint(x, y, "x and y overlap");
  check_disjoint(x, z, "x and z overlap");
  check_disjoint(y, z, "y and z overlap");

  const size_t n = static_cast<size_t>(g.size());
  // anc_z[v]: v is in z or has a descendant in z (collider pass condition).
  std::vector<char> anc_z(n, 0);
  {
    std::deque<int> work(z.begin(), z.end());
    for (int v : z) anc_z[static_cast<size_t>(v)] = 1;
    while (!work.empty()) {
      int v = work.front();
      work.pop_front();
      for (int p : g.parents(v)) {
        if (!anc_z[static_cast<size_t>(p)]) {
          anc_z[static_cast<size_t>(p)] = 1;
          work.push_back(p);
        }
      }
    }
  }

  // Reachability over (node, how-we-arrived) states.  "down" means the edge
  // used to enter v points into v; "up" means it points out of v.
  std::vector<char> seen_down(n, 0), seen_up(n, 0);
  std::deque<Step> work;  // forward flag doubles as "arrived down"
  auto push = [&](int v, bool down) {
    auto& seen = down ? seen_down : seen_up;
    if (!seen[static_cast<size_t>(v)]) {
      seen[static_cast<size_t>(v)] = 1;
      work.push_back({v, down});
    }
  };
  for (int s : x) {
    for (int p : g.parents(s)) push(p, false);
    for (int c : g.children(s)) push(c, true);
  }
  while (!work.empty()) {
    auto [v, down] = work.front();
    work.pop_front();
    if (y.count(v)) return false;
    const bool in_z = z.count(v) > 0;
    if (down) {
      if (!in_z) {
        for (int c : g.children(v)) push(c, true);
      }
      if (anc_z[static_cast<size_t>(v)]) {
        for (int p : g.parents(v)) push(p, false);  // open collider
      }
    } else {
      if (!in_z) {
        for (int p : g.parents(v)) push(p, false);
        for (int c : g.children(v)) push(c, true);
      }
    }
  }
  return true;
}

bool satisfies_backdoor(const CausalGraph& g, const std::set<int>& c, int a,
                        int y) {
  if (c.count(a) || c.count(y)) {
    fail(Errc::EndpointConditioned,
         "adjustment set contains the treatment or the outcome");
  }
  const std::set<int> desc = g.descendants(a);
  for (int v : c) {
    if (desc.count(v)) return false;
  }
  for (const Path& p : enumerate_paths(g, a, y)) {
    if (!p.is_backdoor()) continue;
    if (!is_blocked(g, p, c)) return false;
  }
  return true;
}

std::vector<std::set<int>> minimal_adjustment_sets(const CausalGraph& g,
                                                   int a, int y,
                                                   int max_size) {
  std::vector<int> candidates;
  for (int v = 0; v < g.size(); ++v) {
    if (v != a && v != y) candidates.push_back(v);
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](int u, int v) { return g.name(u) < g.name(v); });
  const int limit = max_size < 0 ? static_cast<int>(candidates.size())
                                 : std::min<int>(max_size, candidates.size());

  std::vector<std::set<int>> found;
  auto has_subset_in_found = [&](const std::set<int>& s) {
    for (const auto& f : found) {
      if (std::includes(s.begin(), s.end(), f.begin(), f.end())) return true;
    }
    return false;
  };

  std::vector<int> pick;
  // Combinations of each size in lexicographic order over name-sorted
  // candidates; increasing size makes the minimality filter a subset check
  // against earlier results.
  auto combos = [&](auto&& self, size_t start, int remaining) -> void {
    if (remaining == 0) {
      std::set<int> s(pick.begin(), pick.end());
      if (!has_subset_in_found(s) && satisfies_backdoor(g, s, a, y)) {
        found.push_back(std::move(s));
      }
      return;
    }
    for (size_t i = start; i + static_cast<size_t>(remaining) <= candidates.size(); ++i) {
      pick.push_back(candidates[i]);
      self(self, i + 1, remaining - 1);
      pick.pop_back();
    }
  };
  for (int size = 0; size <= limit; ++size) combos(combos, 0, size);
  return found;
}

EdgeLabel classify_path_fairness(const CausalGraph& g, const Path& path) {
  bool any_unfair = false;
  bool all_fair = true;
  for (size_t i = 0; i + 1 < path.nodes.size(); ++i) {
    const int p = path.forward[i] ? path.nodes[i] : path.nodes[i + 1];
    const int c = path.forward[i] ? path.nodes[i + 1] : path.nodes[i];
    switch (g.edge_label(p, c)) {
      case EdgeLabel::Unfair: any_unfair = true; all_fair = false; break;
      case EdgeLabel::Unknown: all_fair = false; break;
      case EdgeLabel::Fair: break;
    }
  }
  if (any_unfair) return EdgeLabel::Unfair;
  return all_fair ? EdgeLabel::Fair : EdgeLabel::Unknown;
}

namespace {

ClassifiedPath classify(const CausalGraph& g, Path p) {
  ClassifiedPath out;
  out.kind = p.is_causal() ? PathKind::Causal
             : p.is_backdoor() ? PathKind::BackDoor
                               : PathKind::Other;
  out.fairness = classify_path_fairness(g, p);
  out.path = std::move(p);
  return out;
}

}  // namespace

AuditReport audit_paths(const CausalGraph& g, size_t budget) {
  if (!g.sensitive() || !g.outcome()) {
    fail(Errc::RolesUnset, "audit requires sensitive and outcome roles");
  }
  AuditReport report;
  report.sensitive = *g.sensitive();
  report.outcome = *g.outcome();
  for (Path& p : enumerate_paths(g, report.sensitive, report.outcome, budget)) {
    report.outcome_paths.push_back(classify(g, std::move(p)));
  }
  for (int v = 0; v < g.size(); ++v) {
    if (v == report.sensitive || v == report.outcome) continue;
    std::vector<ClassifiedPath> classified;
    for (Path& p : enumerate_paths(g, report.sensitive, v, budget)) {
      classified.push_back(classify(g, std::move(p)));
    }
    if (!classified.empty()) {
      report.node_paths.emplace(g.name(v), std::move(classified));
    }
  }
  return report;
}

Recommendation recommend_criteria(const AuditReport& audit) {
  int causal = 0, unfair = 0, fair = 0, unknown = 0;
  for (const auto& cp : audit.outcome_paths) {
    if (cp.kind != PathKind::Causal) continue;
    ++causal;
    switch (cp.fairness) {
      case EdgeLabel::Unfair: ++unfair; break;
      case EdgeLabel::Fair: ++fair; break;
      case EdgeLabel::Unknown: ++unknown; break;
    }
  }

  Recommendation rec;
  if (causal == 0) {
    rec.demographic_parity = Appropriateness::Inappropriate;
    rec.error_rate_parity = Appropriateness::Appropriate;
    rec.calibration = Appropriateness::Appropriate;
    rec.rationale =
        "no causal path from the sensitive attribute to the outcome; any "
        "association flows through back-door paths and is not itself "
        "problematic, so enforcing independence would be misplaced";
    return rec;
  }
  if (unfair == causal) {
    rec.demographic_parity = Appropriateness::Appropriate;
    rec.error_rate_parity = Appropriateness::Inappropriate;
    rec.calibration = Appropriateness::Inappropriate;
    rec.rationale =
        "every causal path from the sensitive attribute carries unfair "
        "influence; a prediction independent of the attribute discards "
        "exactly that influence, while conditioning on the outcome would "
        "let it back in";
    return rec;
  }
  if (fair == causal) {
    rec.demographic_parity = Appropriateness::Inappropriate;
    rec.error_rate_parity = Appropriateness::Appropriate;
    rec.calibration = Appropriateness::Appropriate;
    rec.rationale =
        "every causal path from the sensitive attribute is fair; "
        "outcome-conditioned criteria retain that legitimate influence, "
        "whereas demographic parity would erase it";
    return rec;
  }
  if (unfair > 0) {
    rec.error_rate_parity = Appropriateness::Inappropriate;
    rec.calibration = Appropriateness::Inappropriate;
    rec.demographic_parity = (fair > 0) ? Appropriateness::Inappropriate
                                        : Appropriateness::Undetermined;
    rec.rationale =
        (fair > 0)
            ? "causal influence is mixed: unfair paths rule out "
              "outcome-conditioned criteria, and fair paths make full "
              "independence too blunt; consider path-specific corrections"
            : "at least one causal path is unfair and the rest are "
              "unlabeled; outcome-conditioned criteria are ruled out, and "
              "full independence cannot be judged until every path is "
              "labeled";
    return rec;
  }
  // No unfair paths, but at least one unknown.
  rec.demographic_parity = (fair > 0) ? Appropriateness::Inappropriate
                                      : Appropriateness::Undetermined;
  rec.error_rate_parity = Appropriateness::Undetermined;
  rec.calibration = Appropriateness::Undetermined;
  rec.rationale =
      "some causal paths are unlabeled; label every path fair or unfair "
      "to decide which criteria apply";
  return rec;
}

}  // namespace fairlens
