#pragma once

// Generalized loops, loop terms r(C), the expansion Z = Z_B (1 + sum r(C)),
// the alternative tau/rho parametrization, the uniform theta polynomial, the
// loop-count bound and the rank-2 form of the reduced transfer matrices.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "loopseries/exact_oracle.hpp"
#include "loopseries/graph_model.hpp"
#include "loopseries/lbp.hpp"
#include "loopseries/messages.hpp"

namespace loopseries {

inline constexpr int kMaxLoopEdges = 30;

using EdgeMask = std::uint64_t;

struct GeneralizedLoop {
  EdgeMask mask = 0;
  std::vector<std::size_t> edges;                  // ascending edge indices
  std::vector<std::pair<NodeId, int>> degrees;     // (node, d_i(C)), ascending node

  int max_degree() const;
};

GeneralizedLoop make_loop(const Mrf& m, EdgeMask mask);

/// Canonical order: fewer edges first, then lexicographic edge lists.
bool canonical_less(const GeneralizedLoop& a, const GeneralizedLoop& b);

/// All nonempty edge subsets whose induced subgraph has minimum degree >= 2.
/// Restricts to the 2-core, then a pruned depth-first search. Throws
/// CapExceeded when |E| > max_edges.
std::vector<GeneralizedLoop> enumerate_generalized_loops(const Mrf& m, int max_edges = kMaxLoopEdges);

/// Reference implementation filtering all 2^|E| subsets (|E| <= 24).
std::vector<GeneralizedLoop> enumerate_generalized_loops_naive(const Mrf& m);

struct LoopTerm {
  GeneralizedLoop loop;
  double r = 0.0;
};

/// r(C) = prod beta_ij prod f_{d_i(C)}(gamma_i).
double loop_weight(const GeneralizedLoop& c, const Coefficients& k);
LoopTerm loop_term(const GeneralizedLoop& c, const Coefficients& k);

struct LoopSeries {
  double log_z_bethe = 0.0;
  double z_bethe = 0.0;
  Coefficients coefficients;
  std::vector<LoopTerm> terms;  // canonical order
  double theta = 1.0;
  double z_estimate = 0.0;
  FixedPointReport fixed_point;
};

/// Runs LBP (throws NotConverged), then sums every loop term.
LoopSeries loop_series_partition(const Mrf& m, const LbpConfig& cfg = {}, int max_edges = kMaxLoopEdges);

/// 1 + sum r(C) with compensated summation over a given loop list.
double theta_value(const std::vector<GeneralizedLoop>& loops, const Coefficients& k);

/// prod tau_ij prod rho_i(C) with m_i = b_i(+) - b_i(-). Throws InputError when
/// some |m_i| = 1.
double cc_term(const Mrf& m, const GeneralizedLoop& c, const Beliefs& b);

/// theta(1, gamma) = sum_k C(L, k) f_{2k}(gamma): coefficients in gamma.
struct ThetaUniform {
  int L = 0;
  std::vector<std::int64_t> gamma_coefficients;  // lowest degree first

  double eval(double gamma) const;
};

ThetaUniform theta_uniform(int L);

/// (2s/(s+gamma))^{L-1} + (2s/(s-gamma))^{L-1}, s = sqrt(4 + gamma^2).
double theta_one_gamma_closed(int L, double gamma);

/// theta(beta, gamma) of a specific graph as an integer polynomial:
/// coefficient[p][q] multiplies beta^p gamma^q.
struct ThetaPolynomial {
  std::vector<std::vector<std::int64_t>> coefficient;

  double eval(double beta, double gamma) const;
  std::int64_t coefficient_sum() const;
};

ThetaPolynomial theta_polynomial(const Mrf& m, int max_edges = kMaxLoopEdges);

/// Same value by direct summation of uniform loop weights.
double theta_uniform_eval(const Mrf& m, double beta, double gamma, int max_edges = kMaxLoopEdges);

struct LoopCountBound {
  std::int64_t count = 0;  // generalized loops plus the empty set
  double bound = 0.0;
  bool tight = false;      // every generalized loop has maximum degree <= 3
  int cycle_rank = 0;
};

LoopCountBound loop_count_bound(const Mrf& m, int max_edges = kMaxLoopEdges);

/// Per cut node: oracle T_k against mu mu^T + (prod_path beta) nu nu^T in the
/// reparametrized gauge, and the eigen-relations of the reduced transfer
/// matrices in the original gauge.
struct CutNodeCheck {
  NodeId cut_node = 0;
  double path_beta = 0.0;
  double rank2_error = 0.0;      // max entry error, relative to max |T_k|
  double eigen_error = 0.0;      // original gauge: |T^T mu - Z_B mu|, |T mu_bar - Z_B mu_bar|
};

struct Rank2Report {
  int leaf_pairs = 0;
  double z_bethe = 0.0;
  std::vector<CutNodeCheck> cut_nodes;

  double max_rank2_error() const;
  double max_eigen_error() const;
};

Rank2Report rank2_transfer_check(const Mrf& m, const LbpConfig& cfg = {});

/// Eigenvalues of a real 2x2 matrix, larger first. Throws InputError when
/// complex.
std::pair<double, double> eigenvalues(const Table2& t);

}  // namespace loopseries
