#pragma once
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace bnq {

// Directed graph over named nodes. Acyclicity is a checked property, not an
// invariant: decoded solver candidates may legitimately contain cycles.
struct Dag {
  int n = 0;
  std::vector<std::string> names;
  std::set<std::pair<int, int>> arcs;  // (from, to)

  Dag() = default;
  explicit Dag(int n_nodes);
  Dag(int n_nodes, std::vector<std::string> node_names);

  void add_arc(int from, int to);
  bool has_arc(int from, int to) const { return arcs.count({from, to}) > 0; }
  std::vector<int> parents_of(int node) const;  // ascending
  int indegree(int node) const;
};

bool operator==(const Dag& a, const Dag& b);

bool is_acyclic(const Dag& g);

// Kahn's algorithm taking the smallest ready node first, so the order is
// deterministic. nullopt when the graph has a cycle.
std::optional<std::vector<int>> topological_order(const Dag& g);

}  // namespace bnq
