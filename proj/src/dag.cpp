#include "causalkit/dag.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

#include "causalkit/errors.hpp"

namespace causalkit {

namespace {

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  const auto head = static_cast<unsigned char>(name.front());
  if (!std::isalpha(head) && head != '_') return false;
  for (const char ch : name) {
    const auto c = static_cast<unsigned char>(ch);
    if (!std::isalnum(c) && c != '_' && c != '(' && c != ')' && c != '*') {
      return false;
    }
  }
  return true;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

bool valid_node_name(const std::string& name) { return valid_name(name); }

bool Path::directed() const {
  return std::all_of(forward.begin(), forward.end(),
                     [](bool f) { return f; });
}

std::string Path::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i > 0) out += forward[i - 1] ? " -> " : " <- ";
    out += nodes[i];
  }
  return out;
}

Dag::Dag(const std::vector<std::string>& nodes,
         const std::vector<std::pair<std::string, std::string>>& edges) {
  names_.reserve(nodes.size());
  for (const auto& name : nodes) {
    if (!valid_name(name)) {
      fail(ErrorCode::kArgument, "invalid node name: '" + name + "'");
    }
    if (!index_.emplace(name, static_cast<int>(names_.size())).second) {
      fail(ErrorCode::kArgument, "duplicate node name: '" + name + "'");
    }
    names_.push_back(name);
  }
  parents_.resize(names_.size());
  children_.resize(names_.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& [from, to] : edges) {
    const auto fi = index_.find(from);
    const auto ti = index_.find(to);
    if (fi == index_.end()) {
      fail(ErrorCode::kName, "edge endpoint not declared: '" + from + "'");
    }
    if (ti == index_.end()) {
      fail(ErrorCode::kName, "edge endpoint not declared: '" + to + "'");
    }
    if (fi->second == ti->second) {
      fail(ErrorCode::kArgument, "self edge on '" + from + "'");
    }
    if (!seen.emplace(fi->second, ti->second).second) {
      fail(ErrorCode::kArgument, "duplicate edge " + from + " -> " + to);
    }
    children_[fi->second].push_back(ti->second);
    parents_[ti->second].push_back(fi->second);
  }
  const auto by_name = [this](int a, int b) { return names_[a] < names_[b]; };
  for (auto& list : parents_) std::sort(list.begin(), list.end(), by_name);
  for (auto& list : children_) std::sort(list.begin(), list.end(), by_name);
  topological_order();  // throws kCycle when the edge set is cyclic
}

Dag Dag::parse(const std::string& text) {
  std::vector<std::string> nodes;
  std::set<std::string> declared;
  std::vector<std::pair<std::string, std::string>> edges;
  const auto declare = [&](const std::string& name, int line) {
    if (!valid_name(name)) {
      fail(ErrorCode::kParse, "line " + std::to_string(line) +
                                  ": invalid node name '" + name + "'");
    }
    if (declared.insert(name).second) nodes.push_back(name);
  };

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.rfind("node ", 0) == 0 || line == "node") {
      declare(trim(line.substr(4)), line_no);
      continue;
    }
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                  ": expected 'node NAME' or 'A -> B'");
    }
    const std::string from = trim(line.substr(0, arrow));
    const std::string to = trim(line.substr(arrow + 2));
    if (to.find("->") != std::string::npos) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                  ": chained edges are not supported");
    }
    declare(from, line_no);
    declare(to, line_no);
    for (const auto& e : edges) {
      if (e.first == from && e.second == to) {
        fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                    ": duplicate edge " + from + " -> " + to);
      }
    }
    if (from == to) {
      fail(ErrorCode::kParse,
           "line " + std::to_string(line_no) + ": self edge on '" + from + "'");
    }
    edges.emplace_back(from, to);
  }
  return Dag(nodes, edges);  // kCycle propagates from the constructor
}

std::string Dag::serialize() const {
  std::vector<std::string> sorted_names = names_;
  std::sort(sorted_names.begin(), sorted_names.end());
  std::string out;
  for (const auto& name : sorted_names) out += "node " + name + "\n";
  for (const auto& [from, to] : edges()) out += from + " -> " + to + "\n";
  return out;
}

std::vector<std::pair<std::string, std::string>> Dag::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (int i = 0; i < size(); ++i) {
    for (const int child : children_[i]) {
      out.emplace_back(names_[i], names_[child]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool Dag::has_node(const std::string& name) const {
  return index_.count(name) > 0;
}

bool Dag::has_edge(const std::string& from, const std::string& to) const {
  if (!has_node(from) || !has_node(to)) return false;
  const int ti = index_.at(to);
  const auto& kids = children_[index_.at(from)];
  return std::find(kids.begin(), kids.end(), ti) != kids.end();
}

int Dag::index_of(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) {
    fail(ErrorCode::kName, "unknown node: '" + name + "'");
  }
  return it->second;
}

const std::vector<int>& Dag::parents_of(int index) const {
  return parents_.at(index);
}

const std::vector<int>& Dag::children_of(int index) const {
  return children_.at(index);
}

std::vector<bool> Dag::ancestor_mask(int index) const {
  std::vector<bool> mask(size(), false);
  std::deque<int> queue = {index};
  mask[index] = true;  // a node is its own ancestor
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop_front();
    for (const int p : parents_[n]) {
      if (!mask[p]) {
        mask[p] = true;
        queue.push_back(p);
      }
    }
  }
  return mask;
}

std::vector<bool> Dag::descendant_mask(int index) const {
  std::vector<bool> mask(size(), false);
  std::deque<int> queue = {index};
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop_front();
    for (const int c : children_[n]) {
      if (!mask[c]) {
        mask[c] = true;
        queue.push_back(c);
      }
    }
  }
  mask[index] = false;  // a node is not its own descendant
  return mask;
}

std::vector<std::string> Dag::relatives(const std::string& node,
                                        Relation relation) const {
  const int idx = index_of(node);
  std::vector<std::string> out;
  switch (relation) {
    case Relation::kParents:
      for (const int p : parents_[idx]) out.push_back(names_[p]);
      break;
    case Relation::kChildren:
      for (const int c : children_[idx]) out.push_back(names_[c]);
      break;
    case Relation::kAncestors: {
      const auto mask = ancestor_mask(idx);
      for (int i = 0; i < size(); ++i) {
        if (mask[i]) out.push_back(names_[i]);
      }
      break;
    }
    case Relation::kDescendants: {
      const auto mask = descendant_mask(idx);
      for (int i = 0; i < size(); ++i) {
        if (mask[i]) out.push_back(names_[i]);
      }
      break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> Dag::topological_order() const {
  std::vector<int> in_degree(size(), 0);
  for (int i = 0; i < size(); ++i) {
    in_degree[i] = static_cast<int>(parents_[i].size());
  }
  // min-heap on node name for a deterministic order
  const auto cmp = [this](int a, int b) { return names_[a] > names_[b]; };
  std::vector<int> heap;
  for (int i = 0; i < size(); ++i) {
    if (in_degree[i] == 0) heap.push_back(i);
  }
  std::make_heap(heap.begin(), heap.end(), cmp);
  std::vector<std::string> order;
  while (!heap.empty()) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const int n = heap.back();
    heap.pop_back();
    order.push_back(names_[n]);
    for (const int c : children_[n]) {
      if (--in_degree[c] == 0) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end(), cmp);
      }
    }
  }
  if (order.size() != names_.size()) {
    fail(ErrorCode::kCycle, "edge set contains a directed cycle");
  }
  return order;
}

namespace {

void path_dfs(const Dag& dag, int current, int target, int max_nodes,
              std::vector<int>& stack, std::vector<bool>& dirs,
              std::vector<bool>& on_path, std::vector<Path>& out) {
  if (current == target) {
    Path p;
    for (const int idx : stack) p.nodes.push_back(dag.nodes()[idx]);
    p.forward.assign(dirs.begin(), dirs.end());
    out.push_back(std::move(p));
    return;
  }
  if (static_cast<int>(stack.size()) >= max_nodes) return;
  // neighbours in name order, parents and children merged
  const auto& parents = dag.parents_of(current);
  const auto& children = dag.children_of(current);
  std::vector<std::pair<int, bool>> moves;  // (node, edge points away from current)
  for (const int c : children) moves.emplace_back(c, true);
  for (const int p : parents) moves.emplace_back(p, false);
  std::sort(moves.begin(), moves.end(),
            [&dag](const auto& a, const auto& b) {
              return dag.nodes()[a.first] < dag.nodes()[b.first];
            });
  for (const auto& [next, fwd] : moves) {
    if (on_path[next]) continue;
    on_path[next] = true;
    stack.push_back(next);
    dirs.push_back(fwd);
    path_dfs(dag, next, target, max_nodes, stack, dirs, on_path, out);
    dirs.pop_back();
    stack.pop_back();
    on_path[next] = false;
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const Dag& dag, const std::string& from,
                                  const std::string& to, int max_nodes) {
  const int src = dag.index_of(from);
  const int dst = dag.index_of(to);
  if (src == dst) {
    fail(ErrorCode::kArgument, "path endpoints must differ");
  }
  if (max_nodes < 2) {
    fail(ErrorCode::kArgument, "max_nodes must be at least 2");
  }
  std::vector<Path> out;
  std::vector<int> stack = {src};
  std::vector<bool> dirs;
  std::vector<bool> on_path(dag.size(), false);
  on_path[src] = true;
  path_dfs(dag, src, dst, max_nodes, stack, dirs, on_path, out);
  std::sort(out.begin(), out.end(),
            [](const Path& a, const Path& b) { return a.nodes < b.nodes; });
  return out;
}

bool path_blocked(const Dag& dag, const Path& path,
                  const std::vector<std::string>& conditioned) {
  const int len = static_cast<int>(path.nodes.size());
  if (len < 2 || path.forward.size() != path.nodes.size() - 1) {
    fail(ErrorCode::kArgument, "malformed path");
  }
  std::vector<int> idx;
  idx.reserve(len);
  std::set<int> distinct;
  for (const auto& name : path.nodes) {
    idx.push_back(dag.index_of(name));
    if (!distinct.insert(idx.back()).second) {
      fail(ErrorCode::kArgument, "path revisits node '" + name + "'");
    }
  }
  for (int i = 0; i + 1 < len; ++i) {
    const bool ok = path.forward[i]
                        ? dag.has_edge(path.nodes[i], path.nodes[i + 1])
                        : dag.has_edge(path.nodes[i + 1], path.nodes[i]);
    if (!ok) {
      fail(ErrorCode::kArgument, "path uses a missing edge between '" +
                                     path.nodes[i] + "' and '" +
                                     path.nodes[i + 1] + "'");
    }
  }
  std::vector<bool> in_s(dag.size(), false);
  for (const auto& name : conditioned) {
    const int s = dag.index_of(name);
    if (s == idx.front() || s == idx.back()) {
      fail(ErrorCode::kArgument,
           "conditioning set may not contain a path endpoint");
    }
    in_s[s] = true;
  }
  for (int i = 1; i + 1 < len; ++i) {
    const bool into = path.forward[i - 1];   // edge arrives at nodes[i]
    const bool out_of = path.forward[i];     // edge leaves nodes[i]
    const int middle = idx[i];
    if (into && !out_of) {
      // collider: blocked unless it or one of its descendants is conditioned
      bool open = in_s[middle];
      if (!open) {
        const auto mask = dag.descendant_mask(middle);
        for (int k = 0; k < dag.size() && !open; ++k) {
          if (mask[k] && in_s[k]) open = true;
        }
      }
      if (!open) return true;
    } else {
      // chain or fork: blocked exactly when conditioned on
      if (in_s[middle]) return true;
    }
  }
  return false;
}

bool d_separated(const Dag& dag, const std::string& x, const std::string& y,
                 const std::vector<std::string>& conditioned) {
  const int src = dag.index_of(x);
  const int dst = dag.index_of(y);
  if (src == dst) {
    fail(ErrorCode::kArgument, "d-separation endpoints must differ");
  }
  std::vector<bool> in_s(dag.size(), false);
  for (const auto& name : conditioned) {
    const int s = dag.index_of(name);
    if (s == src || s == dst) {
      fail(ErrorCode::kArgument,
           "conditioning set may not contain an endpoint");
    }
    in_s[s] = true;
  }
  // ancestral closure of the conditioning set (members included)
  std::vector<bool> anc(dag.size(), false);
  std::deque<int> queue;
  for (int i = 0; i < dag.size(); ++i) {
    if (in_s[i]) {
      anc[i] = true;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const int n = queue.front();
    queue.pop_front();
    for (const int p : dag.parents_of(n)) {
      if (!anc[p]) {
        anc[p] = true;
        queue.push_back(p);
      }
    }
  }
  // Reachability over (node, arrival direction) states; arrival 0 means the
  // trail arrived from a child (moving up), 1 from a parent (moving down).
  // From an up-arrival the trail continues anywhere unless the node is
  // conditioned on; from a down-arrival it continues downward unless
  // conditioned on, and bounces upward exactly when the node is a collider
  // opener (in the ancestral closure of the conditioning set).
  std::vector<bool> visited_up(dag.size(), false);
  std::vector<bool> visited_down(dag.size(), false);
  std::deque<std::pair<int, int>> frontier;  // (node, arrival)
  frontier.emplace_back(src, 0);
  visited_up[src] = true;
  while (!frontier.empty()) {
    const auto [n, arrival] = frontier.front();
    frontier.pop_front();
    if (n == dst) return false;  // an active trail reaches y
    const auto push = [&](int next, int dir) {
      auto& seen = dir == 0 ? visited_up : visited_down;
      if (!seen[next]) {
        seen[next] = true;
        frontier.emplace_back(next, dir);
      }
    };
    if (arrival == 0) {
      if (!in_s[n]) {
        for (const int p : dag.parents_of(n)) push(p, 0);
        for (const int c : dag.children_of(n)) push(c, 1);
      }
    } else {
      if (!in_s[n]) {
        for (const int c : dag.children_of(n)) push(c, 1);
      }
      if (anc[n]) {
        for (const int p : dag.parents_of(n)) push(p, 0);
      }
    }
  }
  return true;
}

std::vector<Path> backdoor_paths(const Dag& dag, const std::string& treatment,
                                 const std::string& outcome, int max_nodes) {
  const int cap = max_nodes < 0 ? std::max(dag.size(), 2) : max_nodes;
  const auto paths = enumerate_paths(dag, treatment, outcome, cap);
  std::vector<Path> out;
  for (const auto& p : paths) {
    if (!p.forward.front()) out.push_back(p);
  }
  return out;
}

namespace {

// Graph with the treatment's outgoing edges removed: its treatment-outcome
// paths are exactly the backdoor paths, so d-separation there decides
// whether a (descendant-free) set blocks them all.
Dag without_outgoing(const Dag& dag, const std::string& treatment) {
  std::vector<std::pair<std::string, std::string>> kept;
  for (const auto& e : dag.edges()) {
    if (e.first != treatment) kept.push_back(e);
  }
  return Dag(dag.nodes(), kept);
}

}  // namespace

BackdoorCheck check_backdoor_set(const Dag& dag, const std::string& treatment,
                                 const std::string& outcome,
                                 const std::vector<std::string>& set) {
  const int d = dag.index_of(treatment);
  const int y = dag.index_of(outcome);
  if (d == y) {
    fail(ErrorCode::kArgument, "treatment and outcome must differ");
  }
  std::set<std::string> unique;
  for (const auto& name : set) {
    dag.index_of(name);
    if (name == treatment || name == outcome) {
      fail(ErrorCode::kArgument,
           "adjustment set may not contain the treatment or outcome");
    }
    if (!unique.insert(name).second) {
      fail(ErrorCode::kArgument, "duplicate adjustment node '" + name + "'");
    }
  }
  BackdoorCheck check;
  // first condition: no member may descend from the treatment
  const auto descendants = dag.descendant_mask(d);
  for (const auto& name : std::vector<std::string>(unique.begin(),
                                                   unique.end())) {
    if (descendants[dag.index_of(name)]) {
      check.valid = false;
      check.failure = BackdoorFailure::kDescendantInSet;
      check.offending_node = name;
      return check;
    }
  }
  // second condition: the set must block every backdoor path
  const Dag surgery = without_outgoing(dag, treatment);
  const std::vector<std::string> sorted_set(unique.begin(), unique.end());
  if (d_separated(surgery, treatment, outcome, sorted_set)) {
    check.valid = true;
    return check;
  }
  check.valid = false;
  check.failure = BackdoorFailure::kOpenBackdoorPath;
  for (const auto& p : backdoor_paths(dag, treatment, outcome)) {
    if (!path_blocked(dag, p, sorted_set)) {
      check.witness_path = p;
      break;
    }
  }
  return check;
}

std::vector<std::vector<std::string>> minimal_backdoor_sets(
    const Dag& dag, const std::string& treatment, const std::string& outcome,
    int max_size) {
  const int d = dag.index_of(treatment);
  const int y = dag.index_of(outcome);
  if (d == y) {
    fail(ErrorCode::kArgument, "treatment and outcome must differ");
  }
  const auto descendants = dag.descendant_mask(d);
  std::vector<std::string> candidates;
  for (const auto& name : dag.nodes()) {
    const int idx = dag.index_of(name);
    if (idx == d || idx == y || descendants[idx]) continue;
    candidates.push_back(name);
  }
  std::sort(candidates.begin(), candidates.end());
  const int n_cand = static_cast<int>(candidates.size());
  const int limit = max_size < 0 ? n_cand : std::min(max_size, n_cand);

  const Dag surgery = without_outgoing(dag, treatment);
  const auto is_valid = [&](const std::vector<std::string>& set) {
    return d_separated(surgery, treatment, outcome, set);
  };

  std::vector<std::vector<std::string>> minimal;
  const auto contains_known = [&](const std::vector<std::string>& set) {
    for (const auto& known : minimal) {
      if (std::includes(set.begin(), set.end(), known.begin(), known.end())) {
        return true;
      }
    }
    return false;
  };

  for (int k = 0; k <= limit; ++k) {
    // combinations of size k in lexicographic order over sorted candidates
    std::vector<int> pick(k);
    for (int i = 0; i < k; ++i) pick[i] = i;
    while (true) {
      std::vector<std::string> set;
      set.reserve(k);
      for (const int i : pick) set.push_back(candidates[i]);
      if (!contains_known(set) && is_valid(set)) {
        minimal.push_back(set);
      }
      if (k == 0) break;
      int pos = k - 1;
      while (pos >= 0 && pick[pos] == n_cand - k + pos) --pos;
      if (pos < 0) break;
      ++pick[pos];
      for (int i = pos + 1; i < k; ++i) pick[i] = pick[i - 1] + 1;
    }
  }
  return minimal;
}

const std::string& Swig::name_of(const std::string& original) const {
  const auto it = renamed.find(original);
  if (it == renamed.end()) {
    fail(ErrorCode::kName, "unknown node: '" + original + "'");
  }
  return it->second;
}

Swig make_swig(const Dag& dag, const std::string& node,
               const std::string& label) {
  const int split = dag.index_of(node);
  if (!valid_name(label)) {
    fail(ErrorCode::kArgument, "invalid intervention label: '" + label + "'");
  }
  if (dag.has_node(label)) {
    fail(ErrorCode::kArgument,
         "intervention label '" + label + "' collides with a node name");
  }
  Swig swig;
  swig.split_node = node;
  swig.natural_node = node + "*";
  swig.intervention_node = label;
  swig.label = label;

  const auto downstream = dag.descendant_mask(split);
  std::vector<std::string> new_nodes;
  for (const auto& name : dag.nodes()) {
    const int idx = dag.index_of(name);
    std::string mapped;
    if (idx == split) {
      mapped = swig.natural_node;
      swig.renamed[name] = mapped;
      new_nodes.push_back(mapped);
      new_nodes.push_back(label);  // intervention half right after
      continue;
    }
    mapped = downstream[idx] ? name + "(" + label + ")" : name;
    swig.renamed[name] = mapped;
    new_nodes.push_back(mapped);
  }
  std::set<std::string> distinct(new_nodes.begin(), new_nodes.end());
  if (distinct.size() != new_nodes.size()) {
    fail(ErrorCode::kArgument,
         "node splitting would collide with an existing node name");
  }

  std::vector<std::pair<std::string, std::string>> new_edges;
  for (const auto& [from, to] : dag.edges()) {
    const std::string mapped_from =
        from == node ? swig.intervention_node : swig.renamed.at(from);
    const std::string mapped_to =
        to == node ? swig.natural_node : swig.renamed.at(to);
    new_edges.emplace_back(mapped_from, mapped_to);
  }
  swig.graph = Dag(new_nodes, new_edges);
  return swig;
}

}  // namespace causalkit
