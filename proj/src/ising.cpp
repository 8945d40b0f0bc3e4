#include "loopseries/ising.hpp"

#include <cmath>
#include <cstdint>

#include "loopseries/exact_oracle.hpp"
#include "loopseries/loop_series.hpp"

namespace loopseries {

namespace {

constexpr double kBetaStep = 1e-4;
constexpr double kGammaStep = 1e-3;
constexpr double kFieldStep = 1e-3;

int require_regular(const Mrf& m) {
  int d = m.degree(0);
  for (NodeId v = 1; v < m.node_count(); ++v) {
    if (m.degree(v) != d) throw InputError("graph: not regular");
  }
  return d;
}

}  // namespace

Table2 bij_from_beta_gamma(double beta, double gamma) {
  const double q = 4.0 + gamma * gamma;
  const double a = gamma / std::sqrt(q);
  Table2 t{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double xi = spin(i);
      const double xj = spin(j);
      t[i][j] = 0.25 * (1.0 + xi * a + xj * a + xi * xj * gamma * gamma / q) + xi * xj * beta / q;
      if (!(t[i][j] > 0.0 && t[i][j] < 1.0)) {
        throw InputError("beta/gamma: edge belief entry outside (0, 1)");
      }
    }
  }
  return t;
}

Vec2 node_belief_from_gamma(double gamma) {
  const double a = gamma / std::sqrt(4.0 + gamma * gamma);
  return {0.5 * (1.0 + a), 0.5 * (1.0 - a)};
}

double theta_via_identity(const Mrf& shape, double beta, double gamma, int max_nodes) {
  const int d = require_regular(shape);
  const int n = shape.node_count();
  if (n > max_nodes) throw CapExceeded("nodes: " + std::to_string(n) + " exceeds the oracle cap");
  const Table2 bij = bij_from_beta_gamma(beta, gamma);
  const Vec2 bi{bij[0][0] + bij[0][1], bij[1][0] + bij[1][1]};
  const Vec2 node_factor{std::pow(bi[0], 1 - d), std::pow(bi[1], 1 - d)};
  CompensatedSum sum;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    double w = 1.0;
    for (const Edge& e : shape.edges()) w *= bij[x >> e.i & 1u][x >> e.j & 1u];
    for (NodeId v = 0; v < n; ++v) w *= node_factor[x >> v & 1u];
    sum += w;
  }
  return sum.value();
}

double theta_via_enumeration(const Mrf& shape, double beta, double gamma) {
  require_regular(shape);
  return theta_uniform_eval(shape, beta, gamma);
}

IsingCorrespondence corollary_change_of_variables(const Mrf& shape, double y, double z) {
  if (!(std::abs(y) < 1.0)) throw InputError("y: must satisfy |y| < 1");
  if (!(std::abs(z) < 1.0)) throw InputError("z: must satisfy |z| < 1");
  IsingCorrespondence c;
  c.y = y;
  c.z = z;
  c.degree = require_regular(shape);
  const double y2 = y * y;
  c.beta = (1.0 - y2) * z / (1.0 - y2 * z * z);
  c.gamma = 2.0 * y * (1.0 + z) / std::sqrt((1.0 - y2) * (1.0 - y2 * z * z));
  c.coupling = std::atanh(z);
  c.field = 0.5 * (std::log((1.0 + y) / (1.0 - y)) + (1 - c.degree) * std::log((1.0 + y * z) / (1.0 - y * z)));
  c.edge_prefactor = std::sqrt(1.0 - z * z) * (1.0 + y2 * z) / (1.0 - y2 * z * z);
  c.node_prefactor = std::sqrt((1.0 - y2) * (1.0 - y2 * z * z)) / (2.0 * (1.0 + y2 * z));
  c.theta_enumeration = theta_via_enumeration(shape, c.beta, c.gamma);
  c.theta_identity = theta_via_identity(shape, c.beta, c.gamma);
  c.z_ising = ising_partition(shape, c.coupling, c.field);
  c.rhs = c.z_ising * std::pow(c.edge_prefactor, static_cast<double>(shape.edge_count())) *
          std::pow(c.node_prefactor, shape.node_count());
  c.rel_error = relative_error(c.theta_enumeration, c.rhs);
  return c;
}

double susceptibility_formula(int nodes, int degree, double z, double dlog_beta, double dlog_gamma2) {
  const double denom = 1.0 + z - degree * z;
  if (denom == 0.0) throw InputError("coupling: 1 + z - d z = 0, the susceptibility formula is singular");
  return (nodes * (1.0 + z) * denom + 2.0 * z * (z * z - 1.0) * dlog_beta +
          8.0 * (1.0 + z) * (1.0 + z) * dlog_gamma2) /
         (denom * denom);
}

double bethe_susceptibility(int degree, double z) {
  const double denom = 1.0 + z - degree * z;
  if (denom == 0.0) throw InputError("coupling: 1 + z - d z = 0, the susceptibility formula is singular");
  return (1.0 + z) / denom;
}

SusceptibilityReport susceptibility_check(const Mrf& shape, double coupling) {
  SusceptibilityReport r;
  r.coupling = coupling;
  r.z = std::tanh(coupling);
  r.degree = require_regular(shape);
  const int n = shape.node_count();
  auto log_theta = [&](double beta, double gamma) { return std::log(theta_via_enumeration(shape, beta, gamma)); };

  r.dlog_theta_dbeta = (log_theta(r.z + kBetaStep, 0.0) - log_theta(r.z - kBetaStep, 0.0)) / (2.0 * kBetaStep);
  r.dlog_theta_dgamma2 = (log_theta(r.z, kGammaStep) - log_theta(r.z, 0.0)) / (kGammaStep * kGammaStep);
  r.chi_formula = susceptibility_formula(n, r.degree, r.z, r.dlog_theta_dbeta, r.dlog_theta_dgamma2);

  const double lz_plus = std::log(ising_partition(shape, coupling, kFieldStep));
  const double lz_zero = std::log(ising_partition(shape, coupling, 0.0));
  const double lz_minus = std::log(ising_partition(shape, coupling, -kFieldStep));
  r.chi_fd = (lz_plus - 2.0 * lz_zero + lz_minus) / (kFieldStep * kFieldStep);
  r.rel_error = relative_error(r.chi_formula, r.chi_fd);
  r.chi_per_spin = r.chi_formula / n;
  r.chi_bethe_per_spin = bethe_susceptibility(r.degree, r.z);
  return r;
}

}  // namespace loopseries
