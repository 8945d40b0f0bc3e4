#include "loopseries/generators.hpp"

#include <algorithm>
#include <set>

namespace loopseries {

namespace {

Table2 random_table(Rng& rng, PotentialRange range) {
  std::uniform_real_distribution<double> u(range.lo, range.hi);
  Table2 t{};
  for (auto& row : t) {
    for (double& x : row) x = u(rng);
  }
  return t;
}

std::vector<Edge> random_tree_edges(Rng& rng, int nodes, NodeId offset = 0) {
  std::vector<Edge> edges;
  for (int v = 1; v < nodes; ++v) {
    std::uniform_int_distribution<int> pick(0, v - 1);
    const NodeId p = pick(rng);
    edges.push_back({p + offset, v + offset});
  }
  return edges;
}

}  // namespace

Mrf with_random_potentials(Rng& rng, int nodes, const std::vector<Edge>& edges, PotentialRange range) {
  std::vector<EdgeSpec> specs;
  specs.reserve(edges.size());
  for (const Edge& e : edges) specs.push_back({e.i, e.j, random_table(rng, range)});
  return Mrf(nodes, std::move(specs));
}

Mrf random_connected_graph(Rng& rng, int nodes, int max_edges, PotentialRange range) {
  if (nodes < 1) throw InputError("nodes: must be a positive integer");
  std::vector<Edge> edges = random_tree_edges(rng, nodes);
  std::set<std::pair<NodeId, NodeId>> present;
  for (const Edge& e : edges) present.insert({std::min(e.i, e.j), std::max(e.i, e.j)});
  std::vector<std::pair<NodeId, NodeId>> candidates;
  for (NodeId a = 0; a < nodes; ++a) {
    for (NodeId b = a + 1; b < nodes; ++b) {
      if (!present.count({a, b})) candidates.emplace_back(a, b);
    }
  }
  std::shuffle(candidates.begin(), candidates.end(), rng);
  const int room = std::max(0, max_edges - (nodes - 1));
  std::uniform_int_distribution<int> extra_count(0, std::min<int>(room, static_cast<int>(candidates.size())));
  const int extra = extra_count(rng);
  for (int k = 0; k < extra; ++k) edges.push_back({candidates[k].first, candidates[k].second});
  return with_random_potentials(rng, nodes, edges, range);
}

Mrf random_tree(Rng& rng, int nodes, PotentialRange range) {
  return with_random_potentials(rng, nodes, random_tree_edges(rng, nodes), range);
}

Mrf random_cycle(Rng& rng, int n, PotentialRange range, int extra_tree_nodes) {
  if (n < 3) throw InputError("nodes: a cycle needs at least 3 nodes");
  std::vector<Edge> edges;
  for (int v = 0; v < n; ++v) edges.push_back({v, (v + 1) % n});
  for (int k = 0; k < extra_tree_nodes; ++k) {
    std::uniform_int_distribution<int> pick(0, n + k - 1);
    edges.push_back({pick(rng), n + k});
  }
  return with_random_potentials(rng, n + extra_tree_nodes, edges, range);
}

Mrf cycle_shape(int n) {
  if (n < 3) throw InputError("nodes: a cycle needs at least 3 nodes");
  std::vector<EdgeSpec> specs;
  for (int v = 0; v < n; ++v) specs.push_back({v, (v + 1) % n, {{{1.0, 1.0}, {1.0, 1.0}}}});
  return Mrf(n, std::move(specs));
}

Mrf complete_shape(int n) {
  if (n < 2) throw InputError("nodes: a complete graph needs at least 2 nodes");
  std::vector<EdgeSpec> specs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) specs.push_back({a, b, {{{1.0, 1.0}, {1.0, 1.0}}}});
  }
  return Mrf(n, std::move(specs));
}

std::vector<Edge> diamond_edges() { return {{0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}; }

int regular_degree(const Mrf& m) {
  const int d = m.degree(0);
  for (NodeId v = 1; v < m.node_count(); ++v) {
    if (m.degree(v) != d) return -1;
  }
  return d;
}

}  // namespace loopseries
