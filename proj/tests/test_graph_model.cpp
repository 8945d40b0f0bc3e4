#include "doctest.h"

#include "loopseries/exact_oracle.hpp"
#include "loopseries/graph_model.hpp"
#include "loopseries/lbp.hpp"
#include "support.hpp"

using namespace loopseries;
using testsupport::brute_marginal;
using testsupport::brute_z;
using testsupport::rel;

TEST_SUITE("graph_model") {
  TEST_CASE("canonical form sorts edges and transposes tables") {
    const Mrf m(3, {{2, 1, {{{1.0, 2.0}, {3.0, 4.0}}}}, {0, 2, {{{1.0, 1.0}, {1.0, 1.0}}}}});
    REQUIRE(m.edge_count() == 2);
    CHECK(m.edge(0) == Edge{0, 2});
    CHECK(m.edge(1) == Edge{1, 2});
    CHECK(m.psi(1)[0][1] == 3.0);
    CHECK(m.psi(1)[1][0] == 2.0);
    CHECK(m.psi_from(1, 2)[0][1] == 2.0);
  }

  TEST_CASE("invalid graphs are rejected") {
    const Table2 ones{{{1.0, 1.0}, {1.0, 1.0}}};
    CHECK_THROWS_AS(Mrf(2, {{0, 1, {{{1.0, 0.0}, {1.0, 1.0}}}}}), InputError);
    CHECK_THROWS_AS(Mrf(3, {{0, 1, ones}}), InputError);             // disconnected
    CHECK_THROWS_AS(Mrf(2, {{0, 1, ones}, {1, 0, ones}}), InputError);  // parallel edge
    CHECK_THROWS_AS(Mrf(2, {{0, 0, ones}}), InputError);
    CHECK_THROWS_AS(Mrf(2, {{0, 2, ones}}), InputError);
    CHECK_THROWS_AS(Mrf(2, {{0, 1, ones}}, std::vector<Vec2>{{1.0, -1.0}, {1.0, 1.0}}), InputError);
  }

  TEST_CASE("absorb_node_potentials: 2-node chain keeps Z = 6") {
    const Table2 ones{{{1.0, 1.0}, {1.0, 1.0}}};
    const Mrf m(2, {{0, 1, ones}}, std::vector<Vec2>{{2.0, 1.0}, {1.0, 1.0}});
    const Mrf a = absorb_node_potentials(m);
    CHECK_FALSE(a.has_phi());
    CHECK(a.psi(0)[0][0] == 2.0);
    CHECK(a.psi(0)[0][1] == 2.0);
    CHECK(a.psi(0)[1][0] == 1.0);
    CHECK(brute_z(a) == doctest::Approx(6.0).epsilon(1e-15));
  }

  TEST_CASE("absorb_node_potentials: all-ones phi leaves psi unchanged") {
    const Mrf base = testsupport::random_instance(11, 4, 6);
    std::vector<Vec2> phi(base.node_count(), Vec2{1.0, 1.0});
    const Mrf m(base.node_count(), base.edge_specs(), phi);
    const Mrf a = absorb_node_potentials(m);
    for (std::size_t e = 0; e < a.edge_count(); ++e) CHECK(a.psi(e) == base.psi(e));
  }

  TEST_CASE("absorb_node_potentials preserves Z on random 4-node graphs") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      const Mrf base = random_connected_graph(rng, 4, 6);
      std::uniform_real_distribution<double> u(0.5, 2.0);
      std::vector<Vec2> phi;
      for (int v = 0; v < 4; ++v) phi.push_back({u(rng), u(rng)});
      const Mrf m(4, base.edge_specs(), phi);
      CHECK(rel(brute_z(absorb_node_potentials(m)), brute_z(m)) <= 1e-12);
    }
  }

  TEST_CASE("subdivide_edge preserves Z and marginals") {
    const Mrf chain = testsupport::chain2({{{2.0, 1.0}, {1.0, 2.0}}});
    const Mrf s = subdivide_edge(chain, 0, 1);
    CHECK(s.node_count() == 3);
    CHECK(s.edge_count() == 2);
    CHECK(brute_z(s) == doctest::Approx(6.0).epsilon(1e-15));

    const Mrf ones = testsupport::chain2({{{1.0, 1.0}, {1.0, 1.0}}});
    CHECK(brute_z(subdivide_edge(ones, 0, 1)) == doctest::Approx(4.0).epsilon(1e-15));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Mrf m = testsupport::random_instance(seed, 7, 10);
      const Edge e = m.edge(seed % m.edge_count());
      const Mrf t = subdivide_edge(m, e.i, e.j);
      CHECK(rel(brute_z(t), brute_z(m)) <= 1e-12);
      for (NodeId v = 0; v < m.node_count(); ++v) {
        CHECK(rel(brute_marginal(t, v)[0], brute_marginal(m, v)[0]) <= 1e-12);
      }
      CHECK(brute_marginal(t, m.node_count())[0] == doctest::Approx(brute_marginal(m, e.j)[0]).epsilon(1e-12));
    }
  }

  TEST_CASE("subdivide_edge keeps LBP beliefs of a 3-cycle") {
    Rng rng(5);
    const Mrf m = random_cycle(rng, 3);
    const Mrf t = subdivide_edge(m, 0, 1);
    const FixedPointReport a = run_lbp(m);
    const FixedPointReport b = run_lbp(t);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (NodeId v = 0; v < 3; ++v) CHECK(rel(b.beliefs.node[v][0], a.beliefs.node[v][0]) <= 1e-10);
  }

  TEST_CASE("split_node") {
    const Table2 ones{{{1.0, 1.0}, {1.0, 1.0}}};
    std::vector<EdgeSpec> star4;
    for (int k = 1; k <= 4; ++k) star4.push_back({0, k, ones});
    const Mrf s4(5, star4);
    const Mrf t4 = split_node(s4, 0);
    CHECK(t4.node_count() == 6);
    CHECK(t4.edge_count() == 5);
    for (NodeId v = 0; v < t4.node_count(); ++v) CHECK(t4.degree(v) <= 3);

    const Mrf k4(4, {{0, 1, ones}, {0, 2, ones}, {0, 3, ones}, {1, 2, ones}, {1, 3, ones}, {2, 3, ones}});
    const Mrf same = split_node(k4, 0);
    CHECK(same.node_count() == 4);
    CHECK(same.edges() == k4.edges());

    Rng rng(9);
    std::vector<Edge> star5;
    for (int k = 1; k <= 5; ++k) star5.push_back({0, k});
    const Mrf s5 = with_random_potentials(rng, 6, star5);
    const Mrf t5 = split_node(s5, 0);
    CHECK(t5.node_count() == 6 + 2);
    CHECK(rel(brute_z(t5), brute_z(s5)) <= 1e-12);
    for (NodeId v = 1; v <= 5; ++v) CHECK(std::abs(brute_marginal(t5, v)[0] - brute_marginal(s5, v)[0]) <= 1e-12);
  }

  TEST_CASE("cycle_rank and bridges") {
    Rng rng(1);
    CHECK(cycle_rank(random_tree(rng, 7)) == 0);
    CHECK(cycle_rank(random_cycle(rng, 5)) == 1);
    const Mrf f = testsupport::diamond_bundled();
    CHECK(cycle_rank(f) == 2);
    for (std::size_t e = 0; e < f.edge_count(); ++e) CHECK_FALSE(is_bridge(f, e));
    const Mrf t = random_tree(rng, 5);
    for (std::size_t e = 0; e < t.edge_count(); ++e) CHECK(is_bridge(t, e));
  }

  TEST_CASE("cut_to_tree") {
    Rng rng(3);
    const Mrf tree = random_tree(rng, 6);
    const HatGraph ht = cut_to_tree(tree);
    CHECK(ht.leaf_pair_count() == 0);
    CHECK(ht.tree_node_count == 6);
    CHECK(ht.tree_edges.size() == tree.edge_count());

    const Mrf cyc = random_cycle(rng, 5);
    const HatGraph hc = cut_to_tree(cyc);
    CHECK(hc.leaf_pair_count() == 1);
    // A path: every tree node has degree at most 2 and there are |V_tree| - 1 edges.
    std::vector<int> deg(hc.tree_node_count, 0);
    for (const EdgeSpec& e : hc.tree_edges) {
      ++deg[e.i];
      ++deg[e.j];
    }
    CHECK(static_cast<int>(hc.tree_edges.size()) == hc.tree_node_count - 1);
    CHECK(*std::max_element(deg.begin(), deg.end()) <= 2);

    const HatGraph hf = cut_to_tree(testsupport::diamond_bundled());
    CHECK(hf.leaf_pair_count() == 2);
    CHECK(static_cast<int>(hf.tree_edges.size()) == hf.tree_node_count - 1);
    for (std::size_t k = 0; k < hf.cut_nodes.size(); ++k) CHECK(hf.base.degree(hf.cut_nodes[k]) == 2);
  }

  TEST_CASE("leaf pairs equal the cycle rank on random graphs") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const Mrf m = testsupport::random_instance(seed);
      const HatGraph h = cut_to_tree(m);
      CHECK(h.leaf_pair_count() == cycle_rank(m));
      CHECK(static_cast<int>(h.tree_edges.size()) == h.tree_node_count - 1);
      CHECK(rel(exact_partition(h.base), brute_z(m)) <= 1e-12);
    }
  }
}
