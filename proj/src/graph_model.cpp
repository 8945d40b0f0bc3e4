#include "loopseries/graph_model.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>

namespace loopseries {

namespace {

std::string edge_name(NodeId i, NodeId j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void validate_table(const EdgeSpec& s) {
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double v = s.psi[a][b];
      if (!std::isfinite(v)) {
        throw InputError("edge " + edge_name(s.i, s.j) + ": psi entry is not finite");
      }
      if (s.kind == EdgeKind::Potential && !(v > 0.0)) {
        throw InputError("edge " + edge_name(s.i, s.j) + ": psi entries must be > 0");
      }
      if (s.kind == EdgeKind::Delta) {
        if (a == b && !(v > 0.0)) {
          throw InputError("edge " + edge_name(s.i, s.j) + ": delta diagonal must be > 0");
        }
        if (a != b && v != 0.0) {
          throw InputError("edge " + edge_name(s.i, s.j) + ": delta off-diagonal must be 0");
        }
      }
    }
  }
}

// Reachability from `start` ignoring edge `skip` (if any).
std::vector<char> reachable(const Mrf& m, NodeId start, std::optional<std::size_t> skip) {
  std::vector<char> seen(m.node_count(), 0);
  std::deque<NodeId> queue{start};
  seen[start] = 1;
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    for (const Incidence& inc : m.incident(v)) {
      if (skip && inc.edge == *skip) continue;
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        queue.push_back(inc.neighbor);
      }
    }
  }
  return seen;
}

// Recomputes edge provenance after a rebuild: `carried[k]` is the input edge
// whose potential the k-th spec carries.
std::vector<std::optional<std::size_t>> trace_edges(
    const Mrf& result, const std::vector<EdgeSpec>& specs,
    const std::vector<std::optional<std::size_t>>& carried) {
  std::vector<std::optional<std::size_t>> origin(result.edge_count());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto e = result.find_edge(specs[k].i, specs[k].j);
    origin[*e] = carried[k];
  }
  return origin;
}

}  // namespace

Mrf::Mrf(int node_count, std::vector<EdgeSpec> edges, std::optional<std::vector<Vec2>> phi)
    : node_count_(node_count), phi_(std::move(phi)) {
  if (node_count < 1) throw InputError("nodes: must be a positive integer");
  for (EdgeSpec& s : edges) {
    if (s.i < 0 || s.j < 0 || s.i >= node_count || s.j >= node_count) {
      throw InputError("edge " + edge_name(s.i, s.j) + ": endpoint out of range");
    }
    if (s.i == s.j) throw InputError("edge " + edge_name(s.i, s.j) + ": self-loop");
    if (s.i > s.j) {
      std::swap(s.i, s.j);
      s.psi = transpose(s.psi);
    }
    validate_table(s);
  }
  std::sort(edges.begin(), edges.end(),
            [](const EdgeSpec& a, const EdgeSpec& b) { return Edge{a.i, a.j} < Edge{b.i, b.j}; });
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (edges[k].i == edges[k - 1].i && edges[k].j == edges[k - 1].j) {
      throw InputError("edge " + edge_name(edges[k].i, edges[k].j) + ": duplicate edge");
    }
  }
  if (phi_) {
    if (static_cast<int>(phi_->size()) != node_count) {
      throw InputError("phi: expected one entry per node");
    }
    for (const Vec2& p : *phi_) {
      if (!(p[0] > 0.0) || !(p[1] > 0.0) || !std::isfinite(p[0]) || !std::isfinite(p[1])) {
        throw InputError("phi: entries must be finite and > 0");
      }
    }
  }

  edges_.reserve(edges.size());
  incidence_.resize(node_count);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    edges_.push_back({edges[e].i, edges[e].j});
    psi_.push_back(edges[e].psi);
    kinds_.push_back(edges[e].kind);
    incidence_[edges[e].i].push_back({e, edges[e].j, 2 * e, 2 * e + 1});
    incidence_[edges[e].j].push_back({e, edges[e].i, 2 * e + 1, 2 * e});
  }

  const auto seen = reachable(*this, 0, std::nullopt);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InputError("edges: graph is not connected");
  }
}

Table2 Mrf::psi_from(std::size_t e, NodeId from) const {
  return edges_[e].i == from ? psi_[e] : transpose(psi_[e]);
}

std::optional<std::size_t> Mrf::find_edge(NodeId a, NodeId b) const {
  if (a > b) std::swap(a, b);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{a, b});
  if (it == edges_.end() || *it != Edge{a, b}) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<EdgeSpec> Mrf::edge_specs() const {
  std::vector<EdgeSpec> specs;
  specs.reserve(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    specs.push_back({edges_[e].i, edges_[e].j, psi_[e], kinds_[e]});
  }
  return specs;
}

int cycle_rank(const Mrf& m) {
  return static_cast<int>(m.edge_count()) - m.node_count() + 1;
}

bool is_bridge(const Mrf& m, std::size_t e) {
  const auto seen = reachable(m, m.edge(e).i, e);
  return !seen[m.edge(e).j];
}

Mrf absorb_node_potentials(const Mrf& m) {
  std::vector<EdgeSpec> specs = m.edge_specs();
  if (!m.has_phi()) return Mrf(m.node_count(), std::move(specs));
  for (NodeId v = 0; v < m.node_count(); ++v) {
    if (m.incident(v).empty()) {
      throw InputError("phi: node " + std::to_string(v) + " has no incident edge to absorb into");
    }
    const std::size_t e = m.incident(v).front().edge;
    const Vec2& p = m.phi()[v];
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        specs[e].psi[a][b] *= (specs[e].i == v) ? p[a] : p[b];
      }
    }
  }
  return Mrf(m.node_count(), std::move(specs));
}

Traced subdivide_edge_traced(const Mrf& m, NodeId a, NodeId b) {
  const auto target = m.find_edge(a, b);
  if (!target) throw InputError("subdivide: edge " + edge_name(a, b) + " not present");
  const NodeId k = m.node_count();

  std::vector<EdgeSpec> specs;
  std::vector<std::optional<std::size_t>> carried;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (e == *target) continue;
    specs.push_back({m.edge(e).i, m.edge(e).j, m.psi(e), m.kind(e)});
    carried.emplace_back(e);
  }
  specs.push_back({a, k, m.psi_from(*target, a), m.kind(*target)});
  carried.emplace_back(*target);
  specs.push_back({k, b, kIdentityTable, EdgeKind::Delta});
  carried.emplace_back(std::nullopt);

  std::optional<std::vector<Vec2>> phi;
  if (m.has_phi()) {
    phi = m.phi();
    phi->push_back({1.0, 1.0});
  }
  Mrf out(k + 1, specs, std::move(phi));
  std::vector<NodeId> node_origin(k + 1);
  std::iota(node_origin.begin(), node_origin.end() - 1, 0);
  node_origin[k] = b;
  auto edge_origin = trace_edges(out, specs, carried);
  return {std::move(out), std::move(node_origin), std::move(edge_origin)};
}

Mrf subdivide_edge(const Mrf& m, NodeId a, NodeId b) {
  return subdivide_edge_traced(m, a, b).mrf;
}

Traced split_node_traced(const Mrf& m, NodeId v) {
  if (v < 0 || v >= m.node_count()) throw InputError("split: node out of range");
  const int d = m.degree(v);
  const int n = m.node_count();
  std::vector<NodeId> identity(n);
  std::iota(identity.begin(), identity.end(), 0);
  if (d <= 3) {
    std::vector<std::optional<std::size_t>> edges(m.edge_count());
    for (std::size_t e = 0; e < edges.size(); ++e) edges[e] = e;
    return {m, identity, edges};
  }

  // chain[t] for t = 0 .. d-3; chain[0] keeps id v.
  std::vector<NodeId> chain(d - 2);
  chain[0] = v;
  for (int t = 1; t < d - 2; ++t) chain[t] = n + t - 1;
  auto owner = [&](int k) {  // chain node receiving the k-th neighbor
    if (k < 2) return chain[0];
    if (k >= d - 2) return chain[d - 3];
    return chain[k - 1];
  };

  std::vector<EdgeSpec> specs;
  std::vector<std::optional<std::size_t>> carried;
  std::vector<char> rerouted(m.edge_count(), 0);
  const auto& inc = m.incident(v);
  for (int k = 0; k < d; ++k) {
    rerouted[inc[k].edge] = 1;
    specs.push_back({owner(k), inc[k].neighbor, m.psi_from(inc[k].edge, v), m.kind(inc[k].edge)});
    carried.emplace_back(inc[k].edge);
  }
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (rerouted[e]) continue;
    specs.push_back({m.edge(e).i, m.edge(e).j, m.psi(e), m.kind(e)});
    carried.emplace_back(e);
  }
  for (int t = 0; t + 1 < d - 2; ++t) {
    specs.push_back({chain[t], chain[t + 1], kIdentityTable, EdgeKind::Delta});
    carried.emplace_back(std::nullopt);
  }

  std::optional<std::vector<Vec2>> phi;
  if (m.has_phi()) {
    phi = m.phi();
    phi->resize(n + d - 3, Vec2{1.0, 1.0});
  }
  Mrf out(n + d - 3, specs, std::move(phi));
  std::vector<NodeId> node_origin = identity;
  node_origin.resize(n + d - 3, v);
  auto edge_origin = trace_edges(out, specs, carried);
  return {std::move(out), std::move(node_origin), std::move(edge_origin)};
}

Mrf split_node(const Mrf& m, NodeId v) { return split_node_traced(m, v).mrf; }

HatGraph cut_open(const Mrf& base, std::span<const NodeId> cut_nodes,
                  std::span<const NodeId> attach_v) {
  HatGraph h{base, {}, {}, {}, {}, 0, {}, true};
  const int n = base.node_count();
  const int pairs = static_cast<int>(cut_nodes.size());
  std::vector<int> pair_of(n, -1);
  for (int p = 0; p < pairs; ++p) {
    const NodeId s = cut_nodes[p];
    if (s < 0 || s >= n) throw InputError("cut: node out of range");
    if (base.degree(s) != 2) {
      throw InputError("cut: node " + std::to_string(s) + " does not have degree 2");
    }
    if (pair_of[s] >= 0) throw InputError("cut: node listed twice");
    pair_of[s] = p;
    const auto& inc = base.incident(s);
    NodeId v = inc[0].neighbor;
    NodeId u = inc[1].neighbor;
    if (!attach_v.empty()) {
      if (attach_v[p] == u) std::swap(u, v);
      if (attach_v[p] != v) throw InputError("cut: attachment is not a neighbor");
    }
    h.cut_nodes.push_back(s);
    h.bar_nodes.push_back(n + p);
    h.attach_v.push_back(v);
    h.attach_u.push_back(u);
  }
  for (int p = 0; p < pairs; ++p) {
    if (pair_of[h.attach_v[p]] >= 0 || pair_of[h.attach_u[p]] >= 0) {
      throw InputError("cut: adjacent cut nodes are not supported");
    }
  }

  h.tree_node_count = n + pairs;
  for (std::size_t e = 0; e < base.edge_count(); ++e) {
    EdgeSpec s{base.edge(e).i, base.edge(e).j, base.psi(e), base.kind(e)};
    if (pair_of[s.i] >= 0 && s.j == h.attach_u[pair_of[s.i]]) s.i = h.bar_nodes[pair_of[s.i]];
    if (pair_of[s.j] >= 0 && s.i == h.attach_u[pair_of[s.j]]) s.j = h.bar_nodes[pair_of[s.j]];
    h.tree_edges.push_back(s);
  }

  // Forest check via union-find.
  std::vector<int> parent(h.tree_node_count);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = h.tree_node_count;
  for (const EdgeSpec& s : h.tree_edges) {
    const int a = find(s.i);
    const int b = find(s.j);
    if (a == b) throw InputError("cut: cut nodes do not open every cycle");
    parent[a] = b;
    --components;
  }
  h.connected = components == 1;
  return h;
}

HatGraph with_base(const HatGraph& h, const Mrf& base) {
  if (base.node_count() != h.base.node_count() || base.edges() != h.base.edges()) {
    throw InputError("with_base: structure mismatch");
  }
  return cut_open(base, h.cut_nodes, h.attach_v);
}

HatGraph cut_to_tree(const Mrf& m, std::optional<NodeId> open_node) {
  std::optional<std::size_t> excluded;
  std::vector<NodeId> cuts;
  std::vector<NodeId> attach;
  if (open_node) {
    const NodeId t = *open_node;
    if (t < 0 || t >= m.node_count() || m.degree(t) != 2) {
      throw InputError("cut_to_tree: open node must have degree 2");
    }
    excluded = m.incident(t)[1].edge;
    cuts.push_back(t);
    attach.push_back(m.incident(t)[0].neighbor);
  }

  // Breadth-first spanning forest from node 0, then from any unreached node.
  std::vector<char> in_tree(m.edge_count(), 0);
  std::vector<char> seen(m.node_count(), 0);
  for (NodeId root = 0; root < m.node_count(); ++root) {
    if (seen[root]) continue;
    std::deque<NodeId> queue{root};
    seen[root] = 1;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      for (const Incidence& inc : m.incident(v)) {
        if (excluded && inc.edge == *excluded) continue;
        if (!seen[inc.neighbor]) {
          seen[inc.neighbor] = 1;
          in_tree[inc.edge] = 1;
          queue.push_back(inc.neighbor);
        }
      }
    }
  }

  Mrf base = m;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (in_tree[e] || (excluded && e == *excluded)) continue;
    const NodeId a = m.edge(e).i;
    const NodeId b = m.edge(e).j;
    cuts.push_back(base.node_count());
    attach.push_back(a);
    base = subdivide_edge(base, a, b);
  }
  return cut_open(base, cuts, attach);
}

}  // namespace loopseries
