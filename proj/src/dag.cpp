#include "bnq/dag.hpp"

#include <queue>
#include <stdexcept>

namespace bnq {

Dag::Dag(int n_nodes) : n(n_nodes) {
  names.reserve(n_nodes);
  for (int i = 0; i < n_nodes; ++i) names.push_back("X" + std::to_string(i));
}

Dag::Dag(int n_nodes, std::vector<std::string> node_names)
    : n(n_nodes), names(std::move(node_names)) {
  if (static_cast<int>(names.size()) != n)
    throw std::invalid_argument("Dag: name list does not match node count");
}

void Dag::add_arc(int from, int to) {
  if (from < 0 || from >= n || to < 0 || to >= n)
    throw std::invalid_argument("Dag::add_arc: node index out of range");
  if (from == to) throw std::invalid_argument("Dag::add_arc: self loop");
  arcs.insert({from, to});
}

std::vector<int> Dag::parents_of(int node) const {
  std::vector<int> out;
  for (const auto& [from, to] : arcs)
    if (to == node) out.push_back(from);
  return out;  // set iteration is ordered, so already ascending
}

int Dag::indegree(int node) const {
  int d = 0;
  for (const auto& arc : arcs) d += (arc.second == node);
  return d;
}

bool operator==(const Dag& a, const Dag& b) {
  return a.n == b.n && a.names == b.names && a.arcs == b.arcs;
}

std::optional<std::vector<int>> topological_order(const Dag& g) {
  std::vector<int> indeg(g.n, 0);
  for (const auto& [from, to] : g.arcs) {
    (void)from;
    ++indeg[to];
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> ready;
  for (int i = 0; i < g.n; ++i)
    if (indeg[i] == 0) ready.push(i);
  std::vector<int> order;
  order.reserve(g.n);
  while (!ready.empty()) {
    int v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const auto& [from, to] : g.arcs) {
      if (from != v) continue;
      if (--indeg[to] == 0) ready.push(to);
    }
  }
  if (static_cast<int>(order.size()) != g.n) return std::nullopt;
  return order;
}

bool is_acyclic(const Dag& g) { return topological_order(g).has_value(); }

}  // namespace bnq
