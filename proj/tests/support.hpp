#pragma once

// Independent brute-force oracles and fixtures shared by the test binaries.
// Nothing here calls the library's inference code; only the Mrf container and
// the random generators are reused.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loopseries/generators.hpp"
#include "loopseries/graph_model.hpp"

namespace testsupport {

using loopseries::Mrf;
using loopseries::NodeId;
using loopseries::Table2;
using loopseries::Vec2;

inline const std::string kDataDir = LOOPSERIES_DATA_DIR;

inline double weight(const Mrf& m, std::uint64_t x) {
  double w = 1.0;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    w *= m.psi(e)[x >> m.edge(e).i & 1u][x >> m.edge(e).j & 1u];
  }
  if (m.has_phi()) {
    for (NodeId v = 0; v < m.node_count(); ++v) w *= m.phi()[v][x >> v & 1u];
  }
  return w;
}

/// Sum over all 2^N states; bit v of the state index is node v (1 means x = -1).
inline double brute_z(const Mrf& m) {
  long double z = 0.0L;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << m.node_count()); ++x) z += weight(m, x);
  return static_cast<double>(z);
}

inline Vec2 brute_marginal(const Mrf& m, NodeId v) {
  long double p[2] = {0.0L, 0.0L};
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << m.node_count()); ++x) p[x >> v & 1u] += weight(m, x);
  const long double z = p[0] + p[1];
  return {static_cast<double>(p[0] / z), static_cast<double>(p[1] / z)};
}

/// Nonempty edge subsets in which no node has degree exactly 1, as sorted masks.
inline std::vector<std::uint64_t> naive_loop_masks(const Mrf& m) {
  std::vector<std::uint64_t> out;
  const std::size_t n_e = m.edge_count();
  for (std::uint64_t s = 1; s < (std::uint64_t{1} << n_e); ++s) {
    std::vector<int> deg(m.node_count(), 0);
    for (std::size_t e = 0; e < n_e; ++e) {
      if (s >> e & 1u) {
        ++deg[m.edge(e).i];
        ++deg[m.edge(e).j];
      }
    }
    if (std::none_of(deg.begin(), deg.end(), [](int d) { return d == 1; })) out.push_back(s);
  }
  return out;
}

inline double f_rec(int n, double x) {
  double a = 1.0;  // f_0
  double b = 0.0;  // f_1
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    const double c = x * b + a;
    a = b;
    b = c;
  }
  return b;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline Mrf chain2(const Table2& psi) { return Mrf(2, {{0, 1, psi}}); }

inline Mrf random_instance(std::uint64_t seed, int max_nodes = 8, int max_edges = 12) {
  loopseries::Rng rng(seed);
  std::uniform_int_distribution<int> nodes(2, max_nodes);
  return loopseries::random_connected_graph(rng, nodes(rng), max_edges);
}

inline Mrf diamond_graph(std::uint64_t seed) {
  loopseries::Rng rng(seed);
  return loopseries::with_random_potentials(rng, 4, loopseries::diamond_edges());
}

/// Bundled example: data/diamond.json (potentials frozen there).
inline Mrf diamond_bundled() {
  // Mirrors data/diamond.json; kept inline so unit tests do not depend on the io module.
  return Mrf(4, {{0, 2, {{{1.9341, 1.9217}, {0.5848, 0.6273}}}},
                 {0, 3, {{{1.7532, 1.604}, {1.5046, 0.9622}}}},
                 {1, 2, {{{1.4089, 1.4102}, {1.3718, 0.7376}}}},
                 {1, 3, {{{1.146, 1.0903}, {1.5845, 1.9922}}}},
                 {2, 3, {{{1.9241, 1.3163}, {1.1673, 0.9024}}}}});
}

}  // namespace testsupport
