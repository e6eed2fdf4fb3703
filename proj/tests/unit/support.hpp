#pragma once

// Shared helpers for the C++ test suites: seeded random DAGs, the
// enumeration-based d-separation oracle, and subset utilities.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "causalkit/dag.hpp"
#include "causalkit/rng.hpp"

namespace testsupport {

// Random DAG over up to 6 nodes: draw a hidden topological order, then keep
// each forward pair as an edge with the given probability.  Node names are
// shuffled relative to the hidden order so lexicographic and topological
// order disagree.
inline causalkit::Dag random_dag(std::uint64_t seed, int n_nodes,
                                 double edge_prob = 0.45) {
  static const std::vector<std::string> kNames = {"A", "B", "C",
                                                  "D", "E", "F"};
  std::vector<int> order(n_nodes);
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates driven by keyed draws keeps this reproducible everywhere.
  for (int i = n_nodes - 1; i > 0; --i) {
    const auto u = causalkit::keyed_uniform(seed, 1000 + i, 0);
    std::swap(order[i], order[static_cast<int>(u * (i + 1))]);
  }
  std::vector<std::string> nodes(kNames.begin(), kNames.begin() + n_nodes);
  std::vector<std::pair<std::string, std::string>> edges;
  int pair_slot = 0;
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = i + 1; j < n_nodes; ++j) {
      ++pair_slot;
      if (causalkit::keyed_uniform(seed, 2000 + pair_slot, 1) < edge_prob) {
        edges.emplace_back(kNames[order[i]], kNames[order[j]]);
      }
    }
  }
  return causalkit::Dag(nodes, edges);
}

// Oracle route: d-separation holds exactly when every simple path is blocked.
inline bool d_separated_by_paths(const causalkit::Dag& dag,
                                 const std::string& x, const std::string& y,
                                 const std::vector<std::string>& conditioned) {
  const auto paths = causalkit::enumerate_paths(dag, x, y, dag.size());
  for (const auto& path : paths) {
    if (!causalkit::path_blocked(dag, path, conditioned)) return false;
  }
  return true;
}

// All subsets of the given items, in enumeration order.
inline std::vector<std::vector<std::string>> all_subsets(
    const std::vector<std::string>& items) {
  std::vector<std::vector<std::string>> out;
  const int n = static_cast<int>(items.size());
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<std::string> subset;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) subset.push_back(items[i]);
    }
    out.push_back(std::move(subset));
  }
  return out;
}

// The worked adjustment example used across the dag tests: two confounding
// routes into D and a mediated route to Y.
inline causalkit::Dag mediation_example() {
  return causalkit::Dag::parse(R"(# adjustment example
Z2 -> X3
X3 -> Y
Z2 -> X2
X2 -> Y
X2 -> D
D -> M
M -> Y
Z1 -> X2
Z1 -> X1
X1 -> D
)");
}

}  // namespace testsupport
