#include "doctest.h"

#include <cmath>

#include "loopseries/generators.hpp"
#include "loopseries/lbp.hpp"
#include "loopseries/messages.hpp"
#include "support.hpp"

using namespace loopseries;
using testsupport::rel;

namespace {

Table2 random_edge_belief(Rng& rng) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Table2 t{{{u(rng), u(rng)}, {u(rng), u(rng)}}};
  const double s = t[0][0] + t[0][1] + t[1][0] + t[1][1];
  for (auto& row : t) {
    for (double& x : row) x /= s;
  }
  return t;
}

struct Prepared {
  Mrf rep;
  FixedPointReport fp;
};

Prepared prepare(const Mrf& m) {
  FixedPointReport fp = run_lbp(m);
  require_converged(fp);
  Mrf rep = reparametrize(m, fp.beliefs);
  return {std::move(rep), std::move(fp)};
}

}  // namespace

TEST_SUITE("messages") {
  TEST_CASE("gamma examples") {
    CHECK(gamma_of({0.5, 0.5}) == 0.0);
    CHECK(gamma_of({0.8, 0.2}) == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(gamma_of({0.2, 0.8}) == doctest::Approx(-1.5).epsilon(1e-15));
    CHECK_THROWS_AS(gamma_of({1.0, 0.0}), InputError);
  }

  TEST_CASE("beta examples and bound") {
    const Vec2 bi{0.3, 0.7};
    const Vec2 bj{0.6, 0.4};
    Table2 factorized{};
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) factorized[a][c] = bi[a] * bj[c];
    }
    CHECK(std::abs(beta_of(factorized, bi, bj)) <= 1e-16);
    CHECK(beta_of({{{0.5, 0.0}, {0.0, 0.5}}}, {0.5, 0.5}, {0.5, 0.5}) == doctest::Approx(1.0));

    Rng rng(3);
    for (int k = 0; k < 1000; ++k) {
      const Table2 t = random_edge_belief(rng);
      const Vec2 ri{t[0][0] + t[0][1], t[1][0] + t[1][1]};
      const Vec2 rj{t[0][0] + t[1][0], t[0][1] + t[1][1]};
      CHECK(std::abs(beta_of(t, ri, rj)) <= 1.0);
    }
  }

  TEST_CASE("secondary messages: closed form examples") {
    const Mrf c = cycle_shape(4);
    const Prepared p = prepare(c);
    const SecondaryMessages nu = secondary_messages(p.rep, p.fp.beliefs);
    for (const Vec2& v : nu.values) {
      CHECK(v[0] == doctest::Approx(-1.0 / std::sqrt(2.0)).epsilon(1e-14));
      CHECK(v[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("secondary messages: sign, orthogonality and the degree-3 collision") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Mrf m = testsupport::random_instance(seed);
      const FixedPointReport fp = run_lbp(m);
      if (!fp.converged) continue;
      const Mrf rep = reparametrize(m, fp.beliefs);
      const DirectedMessages mu = first_messages(rep, fp.beliefs);
      const SecondaryMessages nu = secondary_messages(rep, fp.beliefs);
      const SecondaryMessages nu2 = secondary_from_first(rep, mu);
      const std::vector<double> g = gamma(fp.beliefs);
      for (std::size_t s = 0; s < nu.values.size(); ++s) {
        CHECK(nu.values[s][0] < 0.0);
        CHECK(std::abs(nu.values[s][0] - nu2.values[s][0]) <= 1e-12);
        CHECK(std::abs(nu.values[s][1] - nu2.values[s][1]) <= 1e-12);
      }
      for (NodeId j = 0; j < rep.node_count(); ++j) {
        const auto& inc = rep.incident(j);
        if (inc.size() == 2) {
          const Vec2& a = mu.values[inc[0].in_slot];
          const Vec2& b = nu.values[inc[1].in_slot];
          CHECK(std::abs(a[0] * b[0] + a[1] * b[1]) <= 1e-12);
          const Vec2& c = nu.values[inc[0].in_slot];
          CHECK(std::abs(c[0] * b[0] + c[1] * b[1] - 1.0) <= 1e-12);
        }
        if (inc.size() == 3) {
          double s = 0.0;
          for (int x = 0; x < 2; ++x) {
            s += nu.values[inc[0].in_slot][x] * nu.values[inc[1].in_slot][x] * nu.values[inc[2].in_slot][x];
          }
          CHECK(std::abs(s - g[j]) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("f_n examples") {
    CHECK(f_eval(0, 3.0) == 1.0);
    CHECK(f_eval(1, 3.0) == 0.0);
    CHECK(f_eval(2, 0.7) == 1.0);
    CHECK(f_eval(3, 0.7) == 0.7);
    CHECK(f_eval(4, 0.7) == doctest::Approx(0.7 * 0.7 + 1.0));
    for (int n = 0; n <= 20; ++n) CHECK(f_eval(n, 0.0) == (n % 2 == 0 ? 1.0 : 0.0));
    CHECK(f_eval(2, 1.0) == 1.0);
    CHECK(f_eval(3, 1.0) == 1.0);
    for (int n = 5; n <= 20; ++n) CHECK(f_eval(n, 1.0) > 1.0);
    CHECK(f_poly(6) == std::vector<std::int64_t>{1, 0, 3, 0, 1});
    CHECK(f_poly(7) == std::vector<std::int64_t>{0, 3, 0, 4, 0, 1});
    CHECK(f_poly(1) == std::vector<std::int64_t>{0});
    CHECK_THROWS_AS(f_eval(-1, 0.0), InputError);
  }

  TEST_CASE("f_n: recursion, closed form and polynomial agree") {
    for (int n = 0; n <= 20; ++n) {
      const auto poly = f_poly(n);
      for (std::int64_t c : poly) CHECK(c >= 0);
      for (int k = -40; k <= 40; ++k) {
        const double x = 0.1 * k;
        const double r = testsupport::f_rec(n, x);
        double horner = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) horner = horner * x + static_cast<double>(*it);
        CHECK(f_eval(n, x) == r);
        if (r == 0.0) {
          CHECK(std::abs(f_closed(n, x)) <= 1e-15);
        } else {
          CHECK(rel(f_closed(n, x), r) <= 1e-12);
        }
        CHECK(std::abs(horner - r) <= 1e-12 * std::max(1.0, std::abs(r)));
      }
    }
  }

  TEST_CASE("degree-3 transform shape") {
    const Prepared p = prepare(complete_shape(5));
    const TransformedModel t = degree3_transform(p.rep, p.fp.beliefs);
    for (NodeId v = 0; v < t.transformed.mrf.node_count(); ++v) CHECK(t.transformed.mrf.degree(v) <= 3);
    for (std::size_t e = 0; e < p.rep.edge_count(); ++e) {
      const auto [a, b] = t.injected_slot[e];
      CHECK(a / 2 == b / 2);
      CHECK_FALSE(t.transformed.mrf.is_delta(a / 2));
    }
  }

  TEST_CASE("propagation rules hold on random graphs, with and without subdivision") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const Mrf m = testsupport::random_instance(seed);
      if (!run_lbp(m).converged) continue;
      for (bool subdivide : {true, false}) {
        const PropagationReport r = verify_propagation_rules(m, {}, subdivide);
        for (const RuleCheck& c : r.checks) {
          INFO(c.name, " seed ", seed, " error ", c.max_error);
          CHECK(c.passed());
        }
      }
      ++checked;
    }
    CHECK(checked >= 30);
  }

  TEST_CASE("propagation rules on high-degree nodes") {
    Rng rng(12);
    std::vector<Edge> edges;
    for (int a = 0; a < 6; ++a) {
      for (int b = a + 1; b < 6; ++b) edges.push_back({a, b});
    }
    const Mrf k6 = with_random_potentials(rng, 6, edges);
    const PropagationReport r = verify_propagation_rules(k6);
    CHECK(r.passed());
    CHECK(r.check("lemma_beta").evaluations > 0);
    CHECK(r.check("theorem2").evaluations > 0);
    CHECK(r.check("deg3_normal").evaluations > 0);
  }

  TEST_CASE("beta by closed form equals beta extracted by propagation") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
      const Mrf m = testsupport::random_instance(seed);
      const FixedPointReport fp = run_lbp(m);
      if (!fp.converged) continue;
      const PropagationReport r = verify_propagation_rules(m);
      const Coefficients k = coefficients(m, fp.beliefs);
      for (std::size_t e = 0; e < m.edge_count(); ++e) CHECK(std::abs(r.pulled_back.beta[e] - k.beta[e]) <= 1e-10);
      for (NodeId v = 0; v < m.node_count(); ++v) CHECK(std::abs(r.pulled_back.gamma[v] - k.gamma[v]) <= 1e-10);
    }
  }

  TEST_CASE("gamma is invariant under node splitting") {
    Rng rng(4);
    std::vector<Edge> star;
    for (int k = 1; k <= 5; ++k) star.push_back({0, k});
    star.push_back({1, 2});
    const Mrf m = with_random_potentials(rng, 6, star);
    const FixedPointReport a = run_lbp(m);
    const FixedPointReport b = run_lbp(split_node(m, 0));
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (NodeId v = 0; v < 6; ++v) CHECK(std::abs(gamma_of(a.beliefs.node[v]) - gamma_of(b.beliefs.node[v])) <= 1e-10);
  }
}
