#include "doctest.h"

#include <cmath>

#include "loopseries/exact_oracle.hpp"
#include "loopseries/generators.hpp"
#include "loopseries/ising.hpp"
#include "loopseries/messages.hpp"
#include "support.hpp"

using namespace loopseries;
using testsupport::rel;

namespace {

// Brute-force Z(K, h) written independently of the library.
double brute_ising(const Mrf& shape, double k, double h) {
  long double z = 0.0L;
  const int n = shape.node_count();
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
    double energy = 0.0;
    for (const Edge& e : shape.edges()) energy += k * spin(x >> e.i & 1u) * spin(x >> e.j & 1u);
    for (int v = 0; v < n; ++v) energy += h * spin(x >> v & 1u);
    z += std::exp(static_cast<long double>(energy));
  }
  return static_cast<double>(z);
}

}  // namespace

TEST_SUITE("ising") {
  TEST_CASE("bij_from_beta_gamma examples") {
    const Table2 u = bij_from_beta_gamma(0.0, 0.0);
    for (const auto& row : u) {
      for (double x : row) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
    }
    const Table2 t = bij_from_beta_gamma(0.6, 0.0);
    CHECK(t[0][0] == doctest::Approx(0.25 + 0.15).epsilon(1e-15));
    CHECK(t[0][1] == doctest::Approx(0.25 - 0.15).epsilon(1e-15));
    CHECK_THROWS_AS(bij_from_beta_gamma(1.0, 0.0), InputError);
    CHECK_THROWS_AS(bij_from_beta_gamma(-0.9, 3.0), InputError);
  }

  TEST_CASE("bij_from_beta_gamma round trip") {
    Rng rng(1);
    std::uniform_real_distribution<double> ub(-0.95, 0.95);
    std::uniform_real_distribution<double> ug(-3.0, 3.0);
    int accepted = 0;
    for (int k = 0; k < 500; ++k) {
      const double beta = ub(rng);
      const double gamma = ug(rng);
      Table2 t;
      try {
        t = bij_from_beta_gamma(beta, gamma);
      } catch (const InputError&) {
        continue;
      }
      ++accepted;
      const Vec2 bi{t[0][0] + t[0][1], t[1][0] + t[1][1]};
      const Vec2 bj{t[0][0] + t[1][0], t[0][1] + t[1][1]};
      CHECK(std::abs(gamma_of(bi) - gamma) <= 1e-12);
      CHECK(std::abs(gamma_of(bj) - gamma) <= 1e-12);
      CHECK(std::abs(beta_of(t, bi, bj) - beta) <= 1e-12);
      const Vec2 nb = node_belief_from_gamma(gamma);
      CHECK(std::abs(nb[0] - bi[0]) <= 1e-15);
    }
    CHECK(accepted > 100);
  }

  TEST_CASE("theta by identity and by enumeration") {
    for (double beta : {-0.3, 0.0, 0.2, 0.5}) {
      CHECK(theta_via_enumeration(cycle_shape(4), beta, 0.8) == doctest::Approx(1.0 + std::pow(beta, 4)).epsilon(1e-14));
      CHECK(rel(theta_via_identity(cycle_shape(4), beta, 0.8), 1.0 + std::pow(beta, 4)) <= 1e-12);
    }
    CHECK(theta_via_enumeration(complete_shape(4), 0.0, 1.3) == 1.0);
    Rng rng(2);
    std::uniform_real_distribution<double> ub(-0.6, 0.6);
    std::uniform_real_distribution<double> ug(-1.5, 1.5);
    int done = 0;
    while (done < 30) {
      const double beta = ub(rng);
      const double gamma = ug(rng);
      try {
        bij_from_beta_gamma(beta, gamma);
      } catch (const InputError&) {
        continue;
      }
      for (const Mrf& g : {complete_shape(4), cycle_shape(6), complete_shape(5)}) {
        CHECK(rel(theta_via_identity(g, beta, gamma), theta_via_enumeration(g, beta, gamma)) <= 1e-8);
      }
      ++done;
    }
    CHECK_THROWS_AS(theta_via_identity(Mrf(3, {{0, 1, kIdentityTable}, {1, 2, kIdentityTable}}), 0.1, 0.1),
                    InputError);
  }

  TEST_CASE("corollary examples") {
    const IsingCorrespondence y0 = corollary_change_of_variables(cycle_shape(4), 0.0, 0.35);
    CHECK(y0.field == 0.0);
    CHECK(y0.gamma == 0.0);
    CHECK(std::abs(y0.beta - 0.35) <= 1e-15);

    const IsingCorrespondence z0 = corollary_change_of_variables(complete_shape(4), 0.3, 0.0);
    CHECK(z0.coupling == 0.0);
    CHECK(z0.beta == 0.0);
    CHECK(z0.theta_enumeration == 1.0);
    CHECK(z0.rel_error <= 1e-12);

    const IsingCorrespondence c = corollary_change_of_variables(cycle_shape(4), 0.2, 0.3);
    CHECK(c.rel_error <= 1e-8);
    CHECK(rel(c.z_ising, brute_ising(cycle_shape(4), c.coupling, c.field)) <= 1e-12);

    CHECK_THROWS_AS(corollary_change_of_variables(cycle_shape(4), 1.0, 0.3), InputError);
    CHECK_THROWS_AS(corollary_change_of_variables(cycle_shape(4), 0.1, -1.0), InputError);
  }

  TEST_CASE("corollary on a grid") {
    for (const Mrf& g : {cycle_shape(4), cycle_shape(6), complete_shape(4)}) {
      for (int a = 0; a < 5; ++a) {
        for (int b = 0; b < 5; ++b) {
          const IsingCorrespondence c = corollary_change_of_variables(g, -0.4 + 0.2 * a, -0.4 + 0.2 * b);
          CHECK(c.rel_error <= 1e-8);
          CHECK(rel(c.theta_identity, c.theta_enumeration) <= 1e-8);
        }
      }
    }
  }

  TEST_CASE("susceptibility") {
    // K = 0: independent spins, d^2 log Z / dh^2 = N.
    const SusceptibilityReport free = susceptibility_check(cycle_shape(4), 0.0);
    CHECK(rel(free.chi_formula, 4.0) <= 1e-6);
    CHECK(rel(free.chi_fd, 4.0) <= 1e-6);
    CHECK(free.chi_per_spin == doctest::Approx(1.0).epsilon(1e-6));

    const SusceptibilityReport c4 = susceptibility_check(cycle_shape(4), 0.2);
    CHECK(c4.rel_error <= 1e-5);
    for (double k : {0.1, 0.2, 0.3}) {
      CHECK(susceptibility_check(complete_shape(4), k).rel_error <= 1e-5);
    }

    // theta == 1 leaves the Bethe expression.
    for (int d : {2, 3, 4}) {
      for (double z : {0.05, 0.1, 0.2}) {
        const double n = 10.0;
        CHECK(rel(susceptibility_formula(10, d, z, 0.0, 0.0) / n, bethe_susceptibility(d, z)) <= 1e-15);
      }
    }
    CHECK_THROWS_AS(susceptibility_formula(4, 3, 0.5, 0.0, 0.0), InputError);
  }
}
