#pragma once

// Binary pairwise Markov random fields and the structural transforms used by
// the expansion: potential absorption, edge subdivision, node splitting and
// cutting a loopy graph open into a tree with paired leaves.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "loopseries/core.hpp"

namespace loopseries {

struct Edge {
  NodeId i;
  NodeId j;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Delta edges carry a diagonal table (exact zeros off the diagonal). They are
/// produced by split_node and subdivide_edge and are exempt from positivity.
enum class EdgeKind { Potential, Delta };

struct EdgeSpec {
  NodeId i;
  NodeId j;
  Table2 psi;  // indexed [x_i][x_j]
  EdgeKind kind = EdgeKind::Potential;
};

/// One endpoint's view of an incident edge.
///
/// Directed message slots follow the convention "message into `to` from
/// `from`": slot 2e is into edge.i from edge.j, slot 2e+1 is into edge.j from
/// edge.i.
struct Incidence {
  std::size_t edge;
  NodeId neighbor;
  std::size_t in_slot;   // message into this node from neighbor
  std::size_t out_slot;  // message into neighbor from this node
};

class Mrf {
 public:
  /// Canonicalizes (i < j, lexicographic order, tables transposed as needed)
  /// and validates. Throws InputError on any violated invariant.
  Mrf(int node_count, std::vector<EdgeSpec> edges,
      std::optional<std::vector<Vec2>> phi = std::nullopt);

  int node_count() const { return node_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t slot_count() const { return 2 * edges_.size(); }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_[e]; }
  const Table2& psi(std::size_t e) const { return psi_[e]; }
  EdgeKind kind(std::size_t e) const { return kinds_[e]; }
  bool is_delta(std::size_t e) const { return kinds_[e] == EdgeKind::Delta; }

  /// psi of edge e as a table [x_from][x_other].
  Table2 psi_from(std::size_t e, NodeId from) const;

  bool has_phi() const { return phi_.has_value(); }
  const std::vector<Vec2>& phi() const { return *phi_; }

  int degree(NodeId v) const { return static_cast<int>(incidence_[v].size()); }
  const std::vector<Incidence>& incident(NodeId v) const { return incidence_[v]; }
  std::optional<std::size_t> find_edge(NodeId a, NodeId b) const;

  /// Target node of a directed slot.
  NodeId slot_target(std::size_t slot) const {
    const Edge& e = edges_[slot / 2];
    return slot % 2 == 0 ? e.i : e.j;
  }
  NodeId slot_source(std::size_t slot) const {
    const Edge& e = edges_[slot / 2];
    return slot % 2 == 0 ? e.j : e.i;
  }

  std::vector<EdgeSpec> edge_specs() const;

 private:
  int node_count_;
  std::vector<Edge> edges_;
  std::vector<Table2> psi_;
  std::vector<EdgeKind> kinds_;
  std::optional<std::vector<Vec2>> phi_;
  std::vector<std::vector<Incidence>> incidence_;
};

/// Cycle rank |E| - |V| + 1 of a connected graph.
int cycle_rank(const Mrf& m);

/// True if removing edge e disconnects the graph.
bool is_bridge(const Mrf& m, std::size_t e);

/// Folds every phi_i into the lexicographically smallest incident edge.
Mrf absorb_node_potentials(const Mrf& m);

/// Result of a transform together with provenance of nodes and edges, so that
/// messages and coefficients can be pulled back to the input graph.
struct Traced {
  Mrf mrf;
  std::vector<NodeId> node_origin;                       // new node -> input node
  std::vector<std::optional<std::size_t>> edge_origin;   // new edge -> input edge (nullopt: new delta)
};

/// Inserts a node k on edge {a, b}. The edge (a, k) copies psi_ab and (k, b) is
/// a delta edge, so k duplicates b. The new node gets id node_count().
Mrf subdivide_edge(const Mrf& m, NodeId a, NodeId b);
Traced subdivide_edge_traced(const Mrf& m, NodeId a, NodeId b);

/// Replaces a node of degree n >= 4 by a chain of n - 2 degree-3 nodes joined
/// by delta edges. Returns the input unchanged when degree(v) <= 3.
Mrf split_node(const Mrf& m, NodeId v);
Traced split_node_traced(const Mrf& m, NodeId v);

/// Tree (or, when an open node is a bridge, forest) obtained by cutting
/// degree-2 nodes of `base` into leaf pairs.
///
/// For cut node s with neighbors v and u, leaf s keeps id s and stays attached
/// to v; its partner s-bar gets a fresh id and is attached to u.
struct HatGraph {
  Mrf base;
  std::vector<NodeId> cut_nodes;
  std::vector<NodeId> bar_nodes;   // partner leaf of cut_nodes[m]
  std::vector<NodeId> attach_v;    // neighbor of leaf s
  std::vector<NodeId> attach_u;    // neighbor of leaf s-bar
  int tree_node_count = 0;
  std::vector<EdgeSpec> tree_edges;
  bool connected = true;

  int leaf_pair_count() const { return static_cast<int>(cut_nodes.size()); }
};

/// Cuts the given degree-2 nodes of `base` open. Attachments default to the
/// first incident edge (v) and the second (u) unless `attach_v` is given.
HatGraph cut_open(const Mrf& base, std::span<const NodeId> cut_nodes,
                  std::span<const NodeId> attach_v = {});

/// Same topology as `h` with potentials taken from `base` (which must share
/// h.base's node and edge structure, e.g. a reparametrization of it).
HatGraph with_base(const HatGraph& h, const Mrf& base);

/// Breadth-first spanning tree from node 0; every non-tree edge is subdivided
/// and the new degree-2 node is cut. When `open_node` (degree 2) is given it is
/// cut first, without subdivision, and becomes cut_nodes[0].
HatGraph cut_to_tree(const Mrf& m, std::optional<NodeId> open_node = std::nullopt);

}  // namespace loopseries
