#pragma once

// Brute-force ground truth: partition functions and marginals by enumerating
// every configuration, and transfer tensors of a cut-open graph by tree
// elimination with the leaf variables kept open.

#include <cstdint>
#include <span>
#include <vector>

#include "loopseries/graph_model.hpp"

namespace loopseries {

inline constexpr int kDefaultMaxNodes = 24;
inline constexpr int kDefaultMaxLeafPairs = 8;

/// Z = sum_x prod psi prod phi over all 2^N configurations.
double exact_partition(const Mrf& m, int max_nodes = kDefaultMaxNodes);

/// Normalized marginal of node i.
Vec2 exact_marginal(const Mrf& m, NodeId i, int max_nodes = kDefaultMaxNodes);

/// All node marginals from a single sweep.
std::vector<Vec2> exact_marginals(const Mrf& m, int max_nodes = kDefaultMaxNodes);

/// Z(K, h) = sum_x exp(K sum_{ij} x_i x_j + h sum_i x_i) on the shape of `shape`
/// (its potentials are ignored).
double ising_partition(const Mrf& shape, double coupling, double field,
                       int max_nodes = kDefaultMaxNodes);

/// Dense factor over binary variables. Bit k of a table index holds the state
/// index of vars()[k].
class Factor {
 public:
  Factor() : table_{1.0} {}
  Factor(std::vector<NodeId> vars, std::vector<double> table);

  static Factor pairwise(NodeId a, NodeId b, const Table2& psi);
  static Factor unary(NodeId a, const Vec2& values);

  const std::vector<NodeId>& vars() const { return vars_; }
  const std::vector<double>& table() const { return table_; }
  bool contains(NodeId v) const;

  /// Value for an assignment given as state indices aligned with vars().
  double at(std::span<const int> states) const;

  friend Factor operator*(const Factor& a, const Factor& b);
  Factor sum_out(NodeId v) const;

 private:
  std::vector<NodeId> vars_;  // sorted ascending
  std::vector<double> table_;
};

/// T^{x_1..x_L}_{x_1bar..x_Lbar}: the sum over all non-leaf nodes of the
/// product of tree potentials. Row bit m is the state index of leaf cut_nodes[m],
/// column bit m that of bar_nodes[m].
struct TransferTensor {
  int leaf_pairs = 0;
  std::vector<double> values;

  std::size_t dim() const { return std::size_t{1} << leaf_pairs; }
  double at(std::size_t row, std::size_t col) const { return values[row * dim() + col]; }
};

TransferTensor transfer_tensor(const HatGraph& h, int max_leaf_pairs = kDefaultMaxLeafPairs);

/// Vectors placed on the two leaves of a pair.
struct LeafPair {
  Vec2 on_cut;
  Vec2 on_bar;
};

/// Contraction with delta on every leaf pair; equals the partition function.
double contract_delta(const TransferTensor& t);

/// Contraction with rank-one leaf vectors on every pair.
double contract(const TransferTensor& t, std::span<const LeafPair> vectors);

enum class PairContraction { Messages, Delta };

/// 2x2 matrix [x_s][x_sbar] obtained by contracting all pairs other than `s`
/// with their leaf vectors (Messages) or with delta (Delta).
Table2 reduced_transfer(const TransferTensor& t, int s, PairContraction mode,
                        std::span<const LeafPair> vectors = {});

}  // namespace loopseries
