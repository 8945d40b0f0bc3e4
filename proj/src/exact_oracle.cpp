#include "loopseries/exact_oracle.hpp"

#include <algorithm>
#include <deque>
#include <iterator>
#include <string>

namespace loopseries {

namespace {

void check_node_cap(const Mrf& m, int max_nodes) {
  if (m.node_count() > max_nodes) {
    throw CapExceeded("exact enumeration: " + std::to_string(m.node_count()) +
                      " nodes exceeds cap " + std::to_string(max_nodes));
  }
}

// Unnormalized weight of the configuration whose bit v is the state index of node v.
double configuration_weight(const Mrf& m, std::uint64_t config) {
  double w = 1.0;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    const Edge& ed = m.edge(e);
    w *= m.psi(e)[(config >> ed.i) & 1u][(config >> ed.j) & 1u];
  }
  if (m.has_phi()) {
    for (NodeId v = 0; v < m.node_count(); ++v) w *= m.phi()[v][(config >> v) & 1u];
  }
  return w;
}

}  // namespace

double exact_partition(const Mrf& m, int max_nodes) {
  check_node_cap(m, max_nodes);
  CompensatedSum z;
  const std::uint64_t count = std::uint64_t{1} << m.node_count();
  for (std::uint64_t c = 0; c < count; ++c) z += configuration_weight(m, c);
  return z.value();
}

std::vector<Vec2> exact_marginals(const Mrf& m, int max_nodes) {
  check_node_cap(m, max_nodes);
  const int n = m.node_count();
  std::vector<CompensatedSum> plus(n);
  CompensatedSum z;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t c = 0; c < count; ++c) {
    const double w = configuration_weight(m, c);
    z += w;
    for (NodeId v = 0; v < n; ++v) {
      if (((c >> v) & 1u) == 0) plus[v] += w;
    }
  }
  std::vector<Vec2> out(n);
  for (NodeId v = 0; v < n; ++v) {
    const double p = plus[v].value() / z.value();
    out[v] = {p, 1.0 - p};
  }
  return out;
}

Vec2 exact_marginal(const Mrf& m, NodeId i, int max_nodes) {
  if (i < 0 || i >= m.node_count()) throw InputError("node: out of range");
  return exact_marginals(m, max_nodes)[i];
}

double ising_partition(const Mrf& shape, double coupling, double field, int max_nodes) {
  check_node_cap(shape, max_nodes);
  CompensatedSum z;
  const std::uint64_t count = std::uint64_t{1} << shape.node_count();
  for (std::uint64_t c = 0; c < count; ++c) {
    double bonds = 0.0;
    for (const Edge& e : shape.edges()) {
      bonds += spin(static_cast<int>((c >> e.i) & 1u)) * spin(static_cast<int>((c >> e.j) & 1u));
    }
    double magnetization = 0.0;
    for (NodeId v = 0; v < shape.node_count(); ++v) {
      magnetization += spin(static_cast<int>((c >> v) & 1u));
    }
    z += std::exp(coupling * bonds + field * magnetization);
  }
  return z.value();
}

// ---------------------------------------------------------------------------
// Factor

Factor::Factor(std::vector<NodeId> vars, std::vector<double> table)
    : vars_(std::move(vars)), table_(std::move(table)) {
  if (!std::is_sorted(vars_.begin(), vars_.end()) ||
      std::adjacent_find(vars_.begin(), vars_.end()) != vars_.end()) {
    throw InputError("factor: variables must be sorted and distinct");
  }
  if (table_.size() != (std::size_t{1} << vars_.size())) {
    throw InputError("factor: table size mismatch");
  }
}

Factor Factor::pairwise(NodeId a, NodeId b, const Table2& psi) {
  if (a > b) return pairwise(b, a, transpose(psi));
  // bit 0 <-> a, bit 1 <-> b
  return Factor({a, b}, {psi[0][0], psi[1][0], psi[0][1], psi[1][1]});
}

Factor Factor::unary(NodeId a, const Vec2& values) { return Factor({a}, {values[0], values[1]}); }

bool Factor::contains(NodeId v) const {
  return std::binary_search(vars_.begin(), vars_.end(), v);
}

double Factor::at(std::span<const int> states) const {
  std::size_t index = 0;
  for (std::size_t k = 0; k < vars_.size(); ++k) index |= static_cast<std::size_t>(states[k]) << k;
  return table_[index];
}

Factor operator*(const Factor& a, const Factor& b) {
  std::vector<NodeId> vars;
  std::set_union(a.vars_.begin(), a.vars_.end(), b.vars_.begin(), b.vars_.end(),
                 std::back_inserter(vars));
  // Bit position of each operand variable inside the union.
  auto positions = [&](const std::vector<NodeId>& sub) {
    std::vector<int> pos;
    for (NodeId v : sub) {
      pos.push_back(static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin()));
    }
    return pos;
  };
  const auto pa = positions(a.vars_);
  const auto pb = positions(b.vars_);
  std::vector<double> table(std::size_t{1} << vars.size());
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    std::size_t ia = 0;
    std::size_t ib = 0;
    for (std::size_t k = 0; k < pa.size(); ++k) ia |= ((idx >> pa[k]) & 1u) << k;
    for (std::size_t k = 0; k < pb.size(); ++k) ib |= ((idx >> pb[k]) & 1u) << k;
    table[idx] = a.table_[ia] * b.table_[ib];
  }
  return Factor(std::move(vars), std::move(table));
}

Factor Factor::sum_out(NodeId v) const {
  const auto it = std::lower_bound(vars_.begin(), vars_.end(), v);
  if (it == vars_.end() || *it != v) return *this;
  const std::size_t bit = static_cast<std::size_t>(it - vars_.begin());
  std::vector<NodeId> vars = vars_;
  vars.erase(vars.begin() + static_cast<std::ptrdiff_t>(bit));
  std::vector<double> table(std::size_t{1} << vars.size());
  const std::size_t low_mask = (std::size_t{1} << bit) - 1;
  for (std::size_t idx = 0; idx < table.size(); ++idx) {
    const std::size_t low = idx & low_mask;
    const std::size_t high = (idx >> bit) << (bit + 1);
    table[idx] = table_[high | low] + table_[high | low | (std::size_t{1} << bit)];
  }
  return Factor(std::move(vars), std::move(table));
}

// ---------------------------------------------------------------------------
// Transfer tensors

TransferTensor transfer_tensor(const HatGraph& h, int max_leaf_pairs) {
  const int pairs = h.leaf_pair_count();
  if (pairs > max_leaf_pairs) {
    throw CapExceeded("transfer tensor: " + std::to_string(pairs) + " leaf pairs exceeds cap " +
                      std::to_string(max_leaf_pairs));
  }
  const int n = h.tree_node_count;
  std::vector<char> is_leaf(n, 0);
  for (int p = 0; p < pairs; ++p) {
    is_leaf[h.cut_nodes[p]] = 1;
    is_leaf[h.bar_nodes[p]] = 1;
  }

  std::vector<std::vector<std::size_t>> adjacent(n);
  std::vector<Factor> factors;
  for (std::size_t e = 0; e < h.tree_edges.size(); ++e) {
    const EdgeSpec& s = h.tree_edges[e];
    adjacent[s.i].push_back(e);
    adjacent[s.j].push_back(e);
    factors.push_back(Factor::pairwise(s.i, s.j, s.psi));
  }

  // Elimination order: reverse BFS order from a root in each component, so
  // every interior node is summed out after its subtree.
  std::vector<NodeId> order;
  std::vector<char> seen(n, 0);
  for (NodeId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    std::vector<NodeId> bfs{root};
    seen[root] = 1;
    for (std::size_t k = 0; k < bfs.size(); ++k) {
      for (std::size_t e : adjacent[bfs[k]]) {
        const NodeId w = h.tree_edges[e].i == bfs[k] ? h.tree_edges[e].j : h.tree_edges[e].i;
        if (!seen[w]) {
          seen[w] = 1;
          bfs.push_back(w);
        }
      }
    }
    order.insert(order.end(), bfs.rbegin(), bfs.rend());
  }

  std::vector<Factor> pool = std::move(factors);
  for (NodeId v : order) {
    if (is_leaf[v]) continue;
    Factor merged;
    std::vector<Factor> rest;
    for (Factor& f : pool) {
      if (f.contains(v)) {
        merged = merged * f;
      } else {
        rest.push_back(std::move(f));
      }
    }
    // An isolated interior node still contributes a factor 2 via sum over x_v.
    if (!merged.contains(v)) merged = merged * Factor::unary(v, {1.0, 1.0});
    rest.push_back(merged.sum_out(v));
    pool = std::move(rest);
  }
  Factor result;
  for (const Factor& f : pool) result = result * f;
  for (int p = 0; p < pairs; ++p) {
    if (!result.contains(h.cut_nodes[p])) result = result * Factor::unary(h.cut_nodes[p], {1, 1});
    if (!result.contains(h.bar_nodes[p])) result = result * Factor::unary(h.bar_nodes[p], {1, 1});
  }

  TransferTensor t;
  t.leaf_pairs = pairs;
  t.values.assign(t.dim() * t.dim(), 0.0);
  std::vector<int> pos_cut(pairs);
  std::vector<int> pos_bar(pairs);
  const auto& vars = result.vars();
  for (int p = 0; p < pairs; ++p) {
    pos_cut[p] = static_cast<int>(std::find(vars.begin(), vars.end(), h.cut_nodes[p]) - vars.begin());
    pos_bar[p] = static_cast<int>(std::find(vars.begin(), vars.end(), h.bar_nodes[p]) - vars.begin());
  }
  for (std::size_t row = 0; row < t.dim(); ++row) {
    for (std::size_t col = 0; col < t.dim(); ++col) {
      std::size_t idx = 0;
      for (int p = 0; p < pairs; ++p) {
        idx |= ((row >> p) & 1u) << pos_cut[p];
        idx |= ((col >> p) & 1u) << pos_bar[p];
      }
      t.values[row * t.dim() + col] = result.table()[idx];
    }
  }
  return t;
}

namespace {

// Weight of a full (row, col) assignment for the pairs in `mask`.
double pair_weight(std::size_t row, std::size_t col, int pairs, std::span<const LeafPair> vectors,
                   int skip, PairContraction mode) {
  double w = 1.0;
  for (int p = 0; p < pairs; ++p) {
    if (p == skip) continue;
    const int a = static_cast<int>((row >> p) & 1u);
    const int b = static_cast<int>((col >> p) & 1u);
    if (mode == PairContraction::Delta) {
      if (a != b) return 0.0;
    } else {
      w *= vectors[p].on_cut[a] * vectors[p].on_bar[b];
    }
  }
  return w;
}

void check_vectors(const TransferTensor& t, std::span<const LeafPair> vectors) {
  if (static_cast<int>(vectors.size()) != t.leaf_pairs) {
    throw InputError("transfer contraction: expected one vector pair per leaf pair");
  }
}

}  // namespace

double contract_delta(const TransferTensor& t) {
  CompensatedSum z;
  for (std::size_t r = 0; r < t.dim(); ++r) z += t.at(r, r);
  return z.value();
}

double contract(const TransferTensor& t, std::span<const LeafPair> vectors) {
  check_vectors(t, vectors);
  CompensatedSum z;
  for (std::size_t r = 0; r < t.dim(); ++r) {
    for (std::size_t c = 0; c < t.dim(); ++c) {
      z += t.at(r, c) * pair_weight(r, c, t.leaf_pairs, vectors, -1, PairContraction::Messages);
    }
  }
  return z.value();
}

Table2 reduced_transfer(const TransferTensor& t, int s, PairContraction mode,
                        std::span<const LeafPair> vectors) {
  if (s < 0 || s >= t.leaf_pairs) throw InputError("reduced transfer: invalid cut node");
  if (mode == PairContraction::Messages) check_vectors(t, vectors);
  std::array<std::array<CompensatedSum, 2>, 2> acc{};
  for (std::size_t r = 0; r < t.dim(); ++r) {
    for (std::size_t c = 0; c < t.dim(); ++c) {
      const double w = pair_weight(r, c, t.leaf_pairs, vectors, s, mode);
      if (w == 0.0) continue;
      acc[(r >> s) & 1u][(c >> s) & 1u] += t.at(r, c) * w;
    }
  }
  Table2 out{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) out[a][b] = acc[a][b].value();
  }
  return out;
}

}  // namespace loopseries
