#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace causalkit {

enum class Relation { kParents, kChildren, kAncestors, kDescendants };

// True when name is usable as a node name: a letter or underscore followed by
// letters, digits, underscores, or the ()* used by split-graph labels.
bool valid_node_name(const std::string& name);

// One simple path between two nodes, not required to follow edge directions.
// nodes is the visited sequence; forward[i] is true when the i-th edge points
// nodes[i] -> nodes[i+1] and false when it points nodes[i+1] -> nodes[i].
struct Path {
  std::vector<std::string> nodes;
  std::vector<bool> forward;

  bool directed() const;          // every edge traversed tip-to-tail
  std::string to_string() const;  // e.g. "D <- X1 <- Z1 -> X2"
};

// Immutable directed acyclic graph over named nodes.  Construction validates
// name syntax, edge endpoints, duplicate edges and acyclicity; all queries
// afterwards are cheap and deterministic (neighbour lists are kept sorted by
// node name).
class Dag {
 public:
  Dag() = default;
  Dag(const std::vector<std::string>& nodes,
      const std::vector<std::pair<std::string, std::string>>& edges);

  // Text form: '#' comments, blank lines, "node NAME" declarations and
  // "A -> B" edges; endpoints are auto-declared on first use.  Parse errors
  // carry 1-based line numbers.
  static Dag parse(const std::string& text);
  // Canonical text: sorted declarations, then sorted edges.  parse(serialize)
  // reproduces the graph exactly (up to declaration order).
  std::string serialize() const;

  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& nodes() const { return names_; }
  std::vector<std::pair<std::string, std::string>> edges() const;  // sorted
  bool has_node(const std::string& name) const;
  bool has_edge(const std::string& from, const std::string& to) const;
  int index_of(const std::string& name) const;  // kName when absent

  // Index-level adjacency, sorted by neighbour name.
  const std::vector<int>& parents_of(int index) const;
  const std::vector<int>& children_of(int index) const;

  // Family queries by name, each returned sorted by name.  Ancestors include
  // the node itself; descendants exclude it.
  std::vector<std::string> relatives(const std::string& node,
                                     Relation relation) const;

  // Index-level ancestor/descendant membership masks (self handling as above).
  std::vector<bool> ancestor_mask(int index) const;
  std::vector<bool> descendant_mask(int index) const;

  // Kahn order with lexicographic tie-break; deterministic.
  std::vector<std::string> topological_order() const;

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<std::vector<int>> parents_, children_;
};

// All simple paths between two distinct nodes, ignoring edge direction,
// sorted lexicographically by node sequence.  Paths longer than max_nodes
// nodes are skipped (exponential-blowup guard for the enumeration route; the
// reachability route below has no such cap).
std::vector<Path> enumerate_paths(const Dag& dag, const std::string& from,
                                  const std::string& to, int max_nodes = 12);

// Blocking status of one path given a conditioning set: a chain or fork is
// blocked when its middle node is conditioned on; a collider is blocked when
// neither it nor any of its descendants is conditioned on.
bool path_blocked(const Dag& dag, const Path& path,
                  const std::vector<std::string>& conditioned);

// d-separation of x and y given a conditioning set, via reachability over
// (node, travel direction) states; agrees with exhaustively enumerating
// paths and testing path_blocked on each.
bool d_separated(const Dag& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& conditioned);

// Paths from treatment to outcome whose first edge points into the
// treatment.  max_nodes < 0 means unlimited (exhaustive).
std::vector<Path> backdoor_paths(const Dag& dag, const std::string& treatment,
                                 const std::string& outcome,
                                 int max_nodes = -1);

enum class BackdoorFailure { kNone, kDescendantInSet, kOpenBackdoorPath };

struct BackdoorCheck {
  bool valid = false;
  BackdoorFailure failure = BackdoorFailure::kNone;
  std::string offending_node;         // set for kDescendantInSet
  std::optional<Path> witness_path;   // set for kOpenBackdoorPath
};

// Adjustment-set validity: no member may descend from the treatment, and the
// set must block every backdoor path.  On failure the check reports which
// condition broke and a concrete witness.
BackdoorCheck check_backdoor_set(const Dag& dag, const std::string& treatment,
                                 const std::string& outcome,
                                 const std::vector<std::string>& set);

// All inclusion-minimal valid adjustment sets up to max_size members
// (max_size < 0 means no bound), ordered by size then lexicographically.
// Exhaustive subset search; intended for small graphs.
std::vector<std::vector<std::string>> minimal_backdoor_sets(
    const Dag& dag, const std::string& treatment, const std::string& outcome,
    int max_size = -1);

// Node-splitting transform for a point intervention on one node.  The split
// node becomes two: a natural half keeping exactly the incoming edges (named
// "<node>*") and an intervention half keeping exactly the outgoing edges
// (named by the label).  Nodes downstream of the intervention are renamed
// "<name>(<label>)"; everything else keeps its name.
struct Swig {
  Dag graph;
  std::string split_node;         // original name
  std::string natural_node;       // "<node>*"
  std::string intervention_node;  // the label
  std::string label;
  std::map<std::string, std::string> renamed;  // original -> graph name

  // Name of an original node inside the transformed graph.
  const std::string& name_of(const std::string& original) const;
};

Swig make_swig(const Dag& dag, const std::string& node,
               const std::string& label);

}  // namespace causalkit
