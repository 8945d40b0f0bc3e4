#pragma once

// Exact marginals of a degree-2 node from the reduced transfer matrix of the
// cut-open graph, the equivalent sum over propagation diagrams, the one-loop
// sign property and the sign discriminant of the marginal difference.

#include <optional>
#include <vector>

#include "loopseries/graph_model.hpp"
#include "loopseries/lbp.hpp"
#include "loopseries/loop_series.hpp"
#include "loopseries/messages.hpp"

namespace loopseries {

/// The model the expansion runs on: the input (potentials absorbed) with, when
/// the target does not have degree 2, one incident edge subdivided so that a
/// new degree-2 node duplicates the target.
struct PreparedTarget {
  Mrf model;
  NodeId target = 0;            // in `model`
  NodeId original_target = 0;   // in the input
  bool subdivided = false;
};

/// Prefers the smallest non-bridge incident edge, otherwise the smallest.
PreparedTarget prepare_target(const Mrf& m, NodeId target);

struct FourTerms {
  double mu_mu = 0.0;
  double nu_nu = 0.0;
  double mu_nu = 0.0;
  double nu_mu = 0.0;
};

struct MarginalExpansion {
  NodeId node = 0;          // target in the input graph
  NodeId prepared_node = 0;
  Vec2 belief{};
  FourTerms four_terms;
  Vec2 scaled{};            // (Z/Z_B) p(+), (Z/Z_B) p(-)
  double z_ratio = 0.0;     // Z/Z_B = scaled[0] + scaled[1]
  Vec2 p{};                 // scaled / z_ratio
  double z_bethe = 0.0;
  int leaf_pairs = 0;
};

MarginalExpansion marginal_via_transfer(const Mrf& m, NodeId target, const LbpConfig& cfg = {},
                                        int max_leaf_pairs = kDefaultMaxLeafPairs);

/// Edge subset D with every node other than the target of induced degree != 1.
struct DiagramTerm {
  std::vector<std::size_t> edges;  // edge indices of the prepared model
  int target_degree = 0;
  double weight_plus = 0.0;        // contribution to (Z/Z_B) p(+)
  double weight_minus = 0.0;       // contribution to (Z/Z_B) p(-)
  double discriminant = 0.0;       // contribution to (Z/Z_B)(p(+)-p(-))/sqrt(b(+)b(-))
};

struct DiagramExpansion {
  PreparedTarget prepared;
  Beliefs beliefs;             // of the prepared model
  Coefficients coefficients;   // of the prepared model
  std::vector<DiagramTerm> terms;  // canonical order
  Vec2 scaled{};
  Vec2 p{};
  double discriminant = 0.0;
};

/// Target weights w(0) = b(+-), w(2) = b(-+), w(1) = -+ sqrt(b(+)b(-)).
DiagramExpansion marginal_diagram_expansion(const Mrf& m, NodeId target, const LbpConfig& cfg = {},
                                            int max_edges = kMaxLoopEdges);

/// Same, with coefficients and beliefs supplied for an already prepared model
/// whose target has degree 2.
DiagramExpansion marginal_diagram_expansion(const PreparedTarget& prepared, const Beliefs& b,
                                            const Coefficients& k, int max_edges = kMaxLoopEdges);

struct OneLoopReport {
  Vec2 exact{};
  Vec2 belief{};
  bool same_sign = false;
  FourTerms four_terms;
  double path_beta = 0.0;
  double max_term_error = 0.0;  // |mu_mu - 1|, |nu_nu - prod beta|, |mu_nu|, |nu_mu|
};

/// Requires cycle rank 1 and a target on the cycle.
OneLoopReport one_loop_sign_check(const Mrf& m, NodeId target, const LbpConfig& cfg = {});

/// (Z/Z_B)(p(+) - p(-)) / sqrt(b(+) b(-)) from the diagram expansion.
double map_discriminant(const Mrf& m, NodeId target, const LbpConfig& cfg = {});

/// Sign convention with zero matching either sign.
bool same_sign(double a, double b, double zero_tolerance = 0.0);

}  // namespace loopseries
