#pragma once

// Loopy belief propagation, beliefs, the Bethe free energy, and the
// reparametrization that makes Z_B = 1 with closed-form first messages.

#include <string>
#include <vector>

#include "loopseries/graph_model.hpp"

namespace loopseries {

/// One length-2 vector per directed slot (see Incidence for the slot layout).
struct DirectedMessages {
  std::vector<Vec2> values;

  const Vec2& into(const Mrf& m, NodeId to, NodeId from) const;
};

struct Beliefs {
  std::vector<Vec2> node;
  std::vector<Table2> edge;  // [x_i][x_j] for canonical edge (i, j)
};

enum class Schedule { Synchronous, Sequential };

struct LbpConfig {
  double tolerance = 1e-12;
  int max_iterations = 10000;
  double damping = 0.5;
  Schedule schedule = Schedule::Synchronous;
};

struct FixedPointReport {
  DirectedMessages messages;  // sup-normalized
  Beliefs beliefs;
  double bethe_log_z = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Runs LBP from uniform messages. Node potentials, if present, are absorbed
/// first. Non-convergence is reported through `converged`, never thrown.
FixedPointReport run_lbp(const Mrf& m, const LbpConfig& cfg = {});

/// Throws NotConverged when the report did not converge.
const FixedPointReport& require_converged(const FixedPointReport& report);

/// Beliefs and Bethe log-partition function from arbitrary positive messages.
Beliefs beliefs_from_messages(const Mrf& m, const DirectedMessages& messages);
double bethe_log_partition(const Mrf& m, const Beliefs& b);

/// Largest sup-norm gap between a normalized update of `messages` and `messages`.
double fixed_point_residual(const Mrf& m, const DirectedMessages& messages);

/// Max over edges and states of |sum_{x_j} b_ij(x_i, x_j) - b_i(x_i)|.
double marginal_inconsistency(const Mrf& m, const Beliefs& b);

/// psi'_ij = b_ij / (b_i^{(d_i-1)/d_i} b_j^{(d_j-1)/d_j}). Throws NotConverged
/// when the beliefs are not locally consistent (stale or unconverged).
Mrf reparametrize(const Mrf& m, const Beliefs& b);

/// mu_(j,i)(x_j) = b_j(x_j)^{1/d_j}. Throws IdentityViolation if the messages do
/// not satisfy the normalization-free update on `reparametrized` to 1e-10 or if
/// sum_x prod_j mu_(i,j)(x) differs from 1.
DirectedMessages first_messages(const Mrf& reparametrized, const Beliefs& b);

/// max over slots of |mu - sum psi prod mu| without any normalization.
double unnormalized_update_residual(const Mrf& m, const DirectedMessages& mu);

}  // namespace loopseries
