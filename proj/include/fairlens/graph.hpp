#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairlens/errors.hpp"

namespace fairlens {

enum class EdgeLabel { Fair, Unfair, Unknown };

const char* edge_label_name(EdgeLabel label) noexcept;

// Raw, unvalidated description of a directed graph with fairness labels.
struct GraphSpec {
  struct EdgeDecl {
    std::string parent;
    std::string child;
    EdgeLabel label = EdgeLabel::Unknown;
  };

  std::vector<std::string> nodes;  // declaration order is preserved
  std::vector<EdgeDecl> edges;
  std::optional<std::string> sensitive;
  std::optional<std::string> outcome;
};

// Validated DAG.  Immutable once constructed; node indices are positions in
// the original declaration order and are the canonical column order for
// datasets sampled from models over this graph.
class CausalGraph {
 public:
  const std::vector<std::string>& nodes() const { return nodes_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::string& name(int v) const { return nodes_[static_cast<size_t>(v)]; }
  bool has_node(const std::string& name) const;
  int index_of(const std::string& name) const;  // throws UnknownNode

  const std::vector<int>& parents(int v) const { return parents_[static_cast<size_t>(v)]; }
  const std::vector<int>& children(int v) const { return children_[static_cast<size_t>(v)]; }
  bool has_edge(int parent, int child) const;
  EdgeLabel edge_label(int parent, int child) const;  // throws UnknownNode if absent

  std::optional<int> sensitive() const { return sensitive_; }
  std::optional<int> outcome() const { return outcome_; }

  // Indices in a fixed topological order (ties broken by declaration order).
  const std::vector<int>& topo_order() const { return topo_; }

  // Strict: the node itself is excluded.
  std::set<int> ancestors(int v) const;
  std::set<int> descendants(int v) const;

  // Round-trips back to a spec (edges sorted by endpoint names).
  GraphSpec to_spec() const;

 private:
  friend CausalGraph validate_graph(const GraphSpec& spec);

  std::vector<std::string> nodes_;
  std::map<std::string, int> index_;
  std::vector<std::vector<int>> parents_;   // sorted by index
  std::vector<std::vector<int>> children_;  // sorted by index
  std::map<std::pair<int, int>, EdgeLabel> labels_;
  std::optional<int> sensitive_;
  std::optional<int> outcome_;
  std::vector<int> topo_;
};

// Checks node uniqueness, edge endpoints, duplicate edges, acyclicity and
// role references.  The returned graph is the only entry point to the rest
// of the library.
CausalGraph validate_graph(const GraphSpec& spec);

struct Relatives {
  std::set<int> parents;
  std::set<int> children;
  std::set<int> ancestors;    // strict
  std::set<int> descendants;  // strict
};

Relatives relatives(const CausalGraph& g, int v);

// An undirected simple path with per-step direction flags.
// forward[i] == true means the edge nodes[i] -> nodes[i+1] exists in the
// graph; false means the edge runs nodes[i+1] -> nodes[i].
struct Path {
  std::vector<int> nodes;
  std::vector<bool> forward;

  bool is_causal() const;   // every step forward
  bool is_backdoor() const; // first step enters the source node
  std::string to_string(const CausalGraph& g) const;
};

inline constexpr size_t kDefaultPathBudget = 10000;

// All simple paths between src and dst in the undirected skeleton, in
// lexicographic order of their node-name sequences.  Throws
// PathBudgetExceeded if more than `budget` paths exist.
std::vector<Path> enumerate_paths(const CausalGraph& g, int src, int dst,
                                  size_t budget = kDefaultPathBudget);

// Directed paths src -> ... -> dst, same ordering and budget semantics.
std::vector<Path> enumerate_causal_paths(const CausalGraph& g, int src,
                                         int dst,
                                         size_t budget = kDefaultPathBudget);

// True when position i of the path is a collider (both edges point in).
// Throws NotInterior unless 0 < i < path.nodes.size() - 1.
bool is_collider(const Path& path, size_t i);

// Blocking test for one path given conditioning set z: the path is blocked
// iff it has (a) a non-collider that is in z, or (b) a collider such that
// neither the collider nor any of its descendants is in z.  Path endpoints
// must not be in z (EndpointConditioned).
bool is_blocked(const CausalGraph& g, const Path& path, const std::set<int>& z);

// d-separation of node sets x and y given z, computed by direction-tagged
// reachability rather than path enumeration.  Sets must be pairwise
// disjoint (OverlappingSets).  Symmetric in x and y.
bool d_separated(const CausalGraph& g, const std::set<int>& x,
                 const std::set<int>& y, const std::set<int>& z);

// Back-door criterion: c contains no descendant of a, and c blocks every
// path from a to y that starts with an edge into a.
bool satisfies_backdoor(const CausalGraph& g, const std::set<int>& c, int a,
                        int y);

// All inclusion-minimal sets satisfying the back-door criterion, up to
// max_size (negative: no limit).  Ordered by size, then lexicographically
// by sorted node names.
std::vector<std::set<int>> minimal_adjustment_sets(const CausalGraph& g,
                                                   int a, int y,
                                                   int max_size = -1);

enum class PathKind { Causal, BackDoor, Other };

const char* path_kind_name(PathKind kind) noexcept;

struct ClassifiedPath {
  Path path;
  PathKind kind = PathKind::Other;
  EdgeLabel fairness = EdgeLabel::Unknown;  // unfair if any edge unfair,
                                            // fair only if all edges fair
};

struct AuditReport {
  int sensitive = -1;
  int outcome = -1;
  std::vector<ClassifiedPath> outcome_paths;  // all paths sensitive <-> outcome
  std::map<std::string, std::vector<ClassifiedPath>> node_paths;  // per node
};

// Classifies every path from the sensitive node to the outcome and to each
// other node.  Requires both roles to be set (RolesUnset).
AuditReport audit_paths(const CausalGraph& g,
                        size_t budget = kDefaultPathBudget);

enum class Appropriateness { Appropriate, Inappropriate, Undetermined };

const char* appropriateness_name(Appropriateness a) noexcept;

struct Recommendation {
  Appropriateness demographic_parity = Appropriateness::Undetermined;
  Appropriateness error_rate_parity = Appropriateness::Undetermined;
  Appropriateness calibration = Appropriateness::Undetermined;
  std::string rationale;
};

// Maps the audit to criterion guidance: demographic parity when every causal
// path carries unfair influence; error-rate parity and calibration only when
// none does.  Unknown labels on causal paths yield Undetermined entries.
Recommendation recommend_criteria(const AuditReport& audit);

// Classification helper shared with reporting: label of a whole path.
EdgeLabel classify_path_fairness(const CausalGraph& g, const Path& path);

}  // namespace fairlens
