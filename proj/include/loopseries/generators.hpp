#pragma once

// Seeded instance generators and a few fixed shapes.

#include <cstdint>
#include <random>

#include "loopseries/graph_model.hpp"

namespace loopseries {

using Rng = std::mt19937_64;

struct PotentialRange {
  double lo = 0.5;
  double hi = 2.0;
};

/// Connected graph on `nodes` nodes: a random spanning tree plus up to
/// `max_edges - (nodes - 1)` random extra edges.
Mrf random_connected_graph(Rng& rng, int nodes, int max_edges, PotentialRange range = {});

Mrf random_tree(Rng& rng, int nodes, PotentialRange range = {});

/// Cycle 0-1-...-(n-1)-0 with random potentials, optionally with random trees
/// of `extra_tree_nodes` nodes hanging off the cycle.
Mrf random_cycle(Rng& rng, int n, PotentialRange range = {}, int extra_tree_nodes = 0);

/// Random potentials on a fixed edge list.
Mrf with_random_potentials(Rng& rng, int nodes, const std::vector<Edge>& edges, PotentialRange range = {});

/// Unit potentials; only the shape matters.
Mrf cycle_shape(int n);
Mrf complete_shape(int n);

/// K4 minus one edge: nodes 0..3, edges (0,2) (0,3) (1,2) (1,3) (2,3). Node 0
/// has degree 2.
std::vector<Edge> diamond_edges();

/// Degree shared by all nodes, or -1 when the graph is not regular.
int regular_degree(const Mrf& m);

}  // namespace loopseries
