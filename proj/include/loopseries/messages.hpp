#pragma once

// Secondary messages, the loop-series coefficients beta and gamma, the f_n
// polynomials, and numeric verification of the propagation rules on the
// degree-<=3 transformed graph.

#include <cstdint>
#include <string>
#include <vector>

#include "loopseries/graph_model.hpp"
#include "loopseries/lbp.hpp"

namespace loopseries {

using SecondaryMessages = DirectedMessages;

struct Coefficients {
  std::vector<double> beta;   // per edge
  std::vector<double> gamma;  // per node
};

/// (b(+) - b(-)) / sqrt(b(+) b(-)).
double gamma_of(const Vec2& b);
std::vector<double> gamma(const Beliefs& b);

/// det(b_ij) / (sqrt(b_i(+) b_i(-)) sqrt(b_j(+) b_j(-))).
double beta_of(const Table2& bij, const Vec2& bi, const Vec2& bj);
std::vector<double> beta(const Mrf& m, const Beliefs& b);

Coefficients coefficients(const Mrf& m, const Beliefs& b);

/// nu_(j,i)(x) = -x b_j(-x)^{(d_j-1)/d_j} / (b_j(+) b_j(-))^{(d_j-2)/(2 d_j)}.
/// Throws InputError on a degenerate belief.
SecondaryMessages secondary_messages(const Mrf& reparametrized, const Beliefs& b);

/// nu from first messages alone, valid in any gauge where the incoming
/// products are normalized:
/// nu_(j,i)(x) = -x sqrt(mu_i(+)mu_i(-) / prod_{k!=i} mu_k(+)mu_k(-)) prod_{k!=i} mu_k(-x).
SecondaryMessages secondary_from_first(const Mrf& m, const DirectedMessages& mu);

/// f_0 = 1, f_1 = 0, f_{n+1} = x f_n + f_{n-1}.
double f_eval(int n, double x);
/// (l1^{n-1} - l2^{n-1}) / (l1 - l2) with l^2 - x l - 1 = 0.
double f_closed(int n, double x);
/// Coefficients of f_n, lowest degree first.
std::vector<std::int64_t> f_poly(int n);

/// Degree-<=3 version of a reparametrized model together with its first and
/// secondary messages. Nodes of degree >= 4 are split with delta chains and,
/// optionally, every original edge a-b becomes a -delta- k1 -psi- k2 -delta- b.
struct TransformedModel {
  Mrf original;   // reparametrized input
  Beliefs original_beliefs;
  Traced transformed;
  DirectedMessages mu;
  SecondaryMessages nu;
  Beliefs beliefs;  // of the transformed graph, from mu
  /// For original edge e and endpoint side (0: edge.i, 1: edge.j), the slot of
  /// the transformed graph carrying the message into that endpoint's copy.
  std::vector<std::array<std::size_t, 2>> injected_slot;
};

TransformedModel degree3_transform(const Mrf& reparametrized, const Beliefs& b,
                                   bool subdivide_edges = true);

struct RuleCheck {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::size_t evaluations = 0;
  bool passed() const { return max_error <= tolerance; }
};

struct PropagationReport {
  std::vector<RuleCheck> checks;
  Coefficients pulled_back;  // beta per original edge, gamma per original node

  bool passed() const;
  const RuleCheck& check(const std::string& name) const;
};

inline constexpr double kRuleTolerance = 1e-10;

/// Runs every collision and propagation rule on the transformed graph and
/// compares the extracted beta with the closed form. `expected` holds the
/// closed-form coefficients of the original graph.
PropagationReport verify_propagation_rules(const TransformedModel& t, const Coefficients& expected,
                                           double tolerance = kRuleTolerance);

/// Convenience pipeline: LBP, reparametrization, transform and verification.
PropagationReport verify_propagation_rules(const Mrf& m, const LbpConfig& cfg = {},
                                           bool subdivide_edges = true);

}  // namespace loopseries
