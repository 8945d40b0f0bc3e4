#pragma once

// Uniform-coefficient theta(beta, gamma) on regular graphs and its relation to
// the Ising partition function Z(K, h); zero-field susceptibility.

#include "loopseries/graph_model.hpp"

namespace loopseries {

/// Edge belief with node asymmetry gamma and edge coefficient beta:
/// 1/4 (1 + (x_i + x_j) g/sqrt(4+g^2) + x_i x_j g^2/(4+g^2)) + x_i x_j beta/(4+g^2).
/// Throws InputError outside the region where every entry lies in (0, 1).
Table2 bij_from_beta_gamma(double beta, double gamma);

/// Row sums of the table above.
Vec2 node_belief_from_gamma(double gamma);

/// sum_x prod b_ij prod b_i^{1-d} by enumeration of all configurations.
double theta_via_identity(const Mrf& regular_shape, double beta, double gamma,
                          int max_nodes = 24);

/// 1 + sum r(C) with every beta_ij = beta and gamma_i = gamma.
double theta_via_enumeration(const Mrf& regular_shape, double beta, double gamma);

struct IsingCorrespondence {
  double y = 0.0;
  double z = 0.0;
  int degree = 0;
  double beta = 0.0;
  double gamma = 0.0;
  double coupling = 0.0;  // K = atanh z
  double field = 0.0;     // h
  double edge_prefactor = 0.0;
  double node_prefactor = 0.0;
  double theta_enumeration = 0.0;
  double theta_identity = 0.0;
  double z_ising = 0.0;
  double rhs = 0.0;       // Z(K,h) times both prefactors
  double rel_error = 0.0; // |theta_enumeration - rhs| / rhs
};

/// Requires |y| < 1, |z| < 1 and a regular shape.
IsingCorrespondence corollary_change_of_variables(const Mrf& regular_shape, double y, double z);

/// (1+z-dz)^2 chi = |V|(1+z)(1+z-dz) + 2z(z^2-1) dlog_beta + 8(1+z)^2 dlog_gamma2,
/// the global zero-field susceptibility d^2 log Z / dh^2 at h = 0. Throws
/// InputError when 1 + z - dz = 0.
double susceptibility_formula(int nodes, int degree, double z, double dlog_beta, double dlog_gamma2);

/// (1+z)/(1+z-dz).
double bethe_susceptibility(int degree, double z);

struct SusceptibilityReport {
  double coupling = 0.0;
  double z = 0.0;
  int degree = 0;
  double dlog_theta_dbeta = 0.0;
  double dlog_theta_dgamma2 = 0.0;
  double chi_formula = 0.0;  // global
  double chi_fd = 0.0;       // global, from the exact partition function
  double rel_error = 0.0;
  double chi_per_spin = 0.0;
  double chi_bethe_per_spin = 0.0;
};

SusceptibilityReport susceptibility_check(const Mrf& regular_shape, double coupling);

}  // namespace loopseries
