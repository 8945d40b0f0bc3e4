#include "loopseries/messages.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>

namespace loopseries {

namespace {

double geometric_spread(const Vec2& b) {
  if (!(b[0] > 0.0 && b[1] > 0.0)) throw InputError("beliefs: degenerate node belief");
  return std::sqrt(b[0] * b[1]);
}

Vec2 incoming_product(const Mrf& m, const DirectedMessages& mu, NodeId v, std::size_t skip_edge) {
  Vec2 p{1.0, 1.0};
  for (const Incidence& inc : m.incident(v)) {
    if (inc.edge == skip_edge) continue;
    p[0] *= mu.values[inc.in_slot][0];
    p[1] *= mu.values[inc.in_slot][1];
  }
  return p;
}

// Composes provenance of a further transform onto an existing trace.
Traced compose(const Traced& first, Traced second) {
  for (NodeId& o : second.node_origin) o = first.node_origin[o];
  for (auto& o : second.edge_origin) {
    if (o) o = first.edge_origin[*o];
  }
  return second;
}

}  // namespace

double gamma_of(const Vec2& b) { return (b[0] - b[1]) / geometric_spread(b); }

std::vector<double> gamma(const Beliefs& b) {
  std::vector<double> g;
  g.reserve(b.node.size());
  for (const Vec2& v : b.node) g.push_back(gamma_of(v));
  return g;
}

double beta_of(const Table2& bij, const Vec2& bi, const Vec2& bj) {
  const double det = bij[0][0] * bij[1][1] - bij[0][1] * bij[1][0];
  return det / (geometric_spread(bi) * geometric_spread(bj));
}

std::vector<double> beta(const Mrf& m, const Beliefs& b) {
  std::vector<double> out;
  out.reserve(m.edge_count());
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    out.push_back(beta_of(b.edge[e], b.node[m.edge(e).i], b.node[m.edge(e).j]));
  }
  return out;
}

Coefficients coefficients(const Mrf& m, const Beliefs& b) { return {beta(m, b), gamma(b)}; }

SecondaryMessages secondary_messages(const Mrf& m, const Beliefs& b) {
  SecondaryMessages nu;
  nu.values.resize(m.slot_count());
  for (std::size_t slot = 0; slot < nu.values.size(); ++slot) {
    const NodeId j = m.slot_target(slot);
    const Vec2& bj = b.node[j];
    geometric_spread(bj);  // rejects degenerate beliefs
    const double d = m.degree(j);
    const double scale = std::pow(bj[0] * bj[1], (d - 2.0) / (2.0 * d));
    nu.values[slot] = {-std::pow(bj[1], (d - 1.0) / d) / scale, std::pow(bj[0], (d - 1.0) / d) / scale};
  }
  return nu;
}

SecondaryMessages secondary_from_first(const Mrf& m, const DirectedMessages& mu) {
  SecondaryMessages nu;
  nu.values.resize(m.slot_count());
  for (NodeId j = 0; j < m.node_count(); ++j) {
    for (const Incidence& inc : m.incident(j)) {
      const Vec2& own = mu.values[inc.in_slot];
      const Vec2 others = incoming_product(m, mu, j, inc.edge);
      const double scale = std::sqrt(own[0] * own[1] / (others[0] * others[1]));
      nu.values[inc.in_slot] = {-scale * others[1], scale * others[0]};
    }
  }
  return nu;
}

double f_eval(int n, double x) {
  if (n < 0) throw InputError("f: n must be nonnegative");
  double prev = 1.0;  // f_0
  double cur = 0.0;   // f_1
  if (n == 0) return prev;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur + prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double f_closed(int n, double x) {
  if (n < 0) throw InputError("f: n must be nonnegative");
  const double s = std::sqrt(x * x + 4.0);
  const double l1 = x >= 0.0 ? (x + s) / 2.0 : -2.0 / (x - s);
  const double l2 = -1.0 / l1;
  return (std::pow(l1, n - 1) - std::pow(l2, n - 1)) / (l1 - l2);
}

std::vector<std::int64_t> f_poly(int n) {
  if (n < 0) throw InputError("f: n must be nonnegative");
  std::vector<std::int64_t> prev{1};
  std::vector<std::int64_t> cur{0};
  if (n == 0) return prev;
  for (int k = 1; k < n; ++k) {
    std::vector<std::int64_t> next(cur.size() + 1, 0);
    for (std::size_t p = 0; p < cur.size(); ++p) next[p + 1] += cur[p];
    for (std::size_t p = 0; p < prev.size(); ++p) next[p] += prev[p];
    prev = std::move(cur);
    cur = std::move(next);
  }
  while (cur.size() > 1 && cur.back() == 0) cur.pop_back();
  return cur;
}

TransformedModel degree3_transform(const Mrf& reparametrized, const Beliefs& b, bool subdivide_edges) {
  const Mrf& m = reparametrized;
  Traced t{m, {}, {}};
  for (NodeId v = 0; v < m.node_count(); ++v) t.node_origin.push_back(v);
  for (std::size_t e = 0; e < m.edge_count(); ++e) t.edge_origin.emplace_back(e);

  for (NodeId v = 0; v < m.node_count(); ++v) {
    if (t.mrf.degree(v) >= 4) t = compose(t, split_node_traced(t.mrf, v));
  }
  if (subdivide_edges) {
    std::vector<Edge> psi_edges;
    for (std::size_t e = 0; e < t.mrf.edge_count(); ++e) {
      if (t.edge_origin[e]) psi_edges.push_back(t.mrf.edge(e));
    }
    for (const Edge& ab : psi_edges) {
      t = compose(t, subdivide_edge_traced(t.mrf, ab.j, ab.i));
      const NodeId k1 = t.mrf.node_count() - 1;
      t = compose(t, subdivide_edge_traced(t.mrf, k1, ab.j));
    }
  }

  const Mrf& g = t.mrf;
  DirectedMessages mu;
  mu.values.assign(g.slot_count(), Vec2{0.0, 0.0});
  std::vector<bool> done(g.slot_count(), false);
  std::function<const Vec2&(std::size_t)> first = [&](std::size_t slot) -> const Vec2& {
    if (!done[slot]) {
      const std::size_t e = slot / 2;
      if (!g.is_delta(e)) {
        const NodeId o = t.node_origin[g.slot_target(slot)];
        const double d = m.degree(o);
        mu.values[slot] = {std::pow(b.node[o][0], 1.0 / d), std::pow(b.node[o][1], 1.0 / d)};
      } else {
        Vec2 p{1.0, 1.0};
        for (const Incidence& inc : g.incident(g.slot_source(slot))) {
          if (inc.edge == e) continue;
          const Vec2& in = first(inc.in_slot);
          p[0] *= in[0];
          p[1] *= in[1];
        }
        mu.values[slot] = p;
      }
      done[slot] = true;
    }
    return mu.values[slot];
  };
  for (std::size_t slot = 0; slot < g.slot_count(); ++slot) first(slot);

  TransformedModel out{m, b, t, mu, secondary_from_first(g, mu), beliefs_from_messages(g, mu), {}};
  out.injected_slot.assign(m.edge_count(), {0, 0});
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (!t.edge_origin[e]) continue;
    const std::size_t o = *t.edge_origin[e];
    const Edge& ge = g.edge(e);
    const int side_of_i = t.node_origin[ge.i] == m.edge(o).i ? 0 : 1;
    out.injected_slot[o][side_of_i] = 2 * e;
    out.injected_slot[o][1 - side_of_i] = 2 * e + 1;
  }
  return out;
}

bool PropagationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const RuleCheck& c) { return c.passed(); });
}

const RuleCheck& PropagationReport::check(const std::string& name) const {
  for (const RuleCheck& c : checks) {
    if (c.name == name) return c;
  }
  throw InputError("propagation report: no check named " + name);
}

PropagationReport verify_propagation_rules(const TransformedModel& t, const Coefficients& expected,
                                           double tolerance) {
  const Mrf& g = t.transformed.mrf;
  const auto& origin = t.transformed.node_origin;
  const DirectedMessages& mu = t.mu;
  const SecondaryMessages& nu = t.nu;

  std::vector<RuleCheck> checks;
  auto slot_of = [&](const std::string& name, double tol) -> RuleCheck& {
    for (RuleCheck& c : checks) {
      if (c.name == name) return c;
    }
    checks.push_back({name, 0.0, tol, 0});
    return checks.back();
  };
  auto record = [&](const std::string& name, double error, double tol) {
    RuleCheck& c = slot_of(name, tol);
    c.max_error = std::max(c.max_error, std::isnan(error) ? INFINITY : error);
    ++c.evaluations;
  };

  record("bp_update", unnormalized_update_residual(g, mu), tolerance);

  // Independent route: plain LBP on the transformed graph.
  {
    LbpConfig cfg;
    const FixedPointReport lbp = run_lbp(g, cfg);
    double worst = lbp.converged ? 0.0 : INFINITY;
    for (std::size_t s = 0; s < g.slot_count(); ++s) {
      const double scale = sup_norm(mu.values[s]);
      for (int a = 0; a < 2; ++a) {
        worst = std::max(worst, std::abs(mu.values[s][a] / scale - lbp.messages.values[s][a]));
      }
    }
    record("lbp_agreement", worst, 1e-8);
  }

  for (NodeId v = 0; v < g.node_count(); ++v) {
    const Vec2& bo = t.original_beliefs.node[origin[v]];
    record("belief_pullback",
           std::max(std::abs(t.beliefs.node[v][0] - bo[0]), std::abs(t.beliefs.node[v][1] - bo[1])),
           tolerance);
    record("gamma_invariance", std::abs(gamma_of(t.beliefs.node[v]) - expected.gamma[origin[v]]),
           tolerance);
  }

  for (std::size_t s = 0; s < g.slot_count(); ++s) {
    record("nu_sign", nu.values[s][0] < 0.0 ? 0.0 : 1.0, 0.0);
  }

  // Collision rules: every subset of incoming slots carrying nu.
  for (NodeId j = 0; j < g.node_count(); ++j) {
    const auto& inc = g.incident(j);
    const int d = static_cast<int>(inc.size());
    const double gj = gamma_of(t.beliefs.node[j]);
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      double sum = 0.0;
      for (int a = 0; a < 2; ++a) {
        double prod = 1.0;
        for (int k = 0; k < d; ++k) {
          prod *= (mask >> k & 1u) ? nu.values[inc[k].in_slot][a] : mu.values[inc[k].in_slot][a];
        }
        sum += prod;
      }
      const int n = std::popcount(mask);
      std::string name;
      if (n == 0) {
        name = "equal1";
      } else if (d == 2) {
        name = n == 1 ? "deg2_orth" : "deg2_normal";
      } else if (d == 3) {
        name = n == 1 ? "deg3_orth" : n == 2 ? "deg3_normal" : "gamma_collision";
      } else {
        name = "collision_other";
      }
      record(name, std::abs(sum - f_eval(n, gj)), tolerance);
    }
    if (d == 2) {
      const Vec2& m0 = mu.values[inc[0].in_slot];
      const Vec2& m1 = mu.values[inc[1].in_slot];
      const Vec2& n0 = nu.values[inc[0].in_slot];
      const Vec2& n1 = nu.values[inc[1].in_slot];
      double worst = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          worst = std::max(worst, std::abs(m0[a] * m1[c] + n0[a] * n1[c] - (a == c ? 1.0 : 0.0)));
        }
      }
      record("delta_identity", worst, tolerance);
    }
  }

  // Propagation of nu across every edge, in both directions and for every
  // choice of the nu carrier at the source node.
  std::vector<double> extracted(g.edge_count(), 0.0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    const Edge& ed = g.edge(e);
    const double closed = beta_of(t.beliefs.edge[e], t.beliefs.node[ed.i], t.beliefs.node[ed.j]);
    for (const NodeId k : {ed.i, ed.j}) {
      const NodeId j = k == ed.i ? ed.j : ed.i;
      const int dk = g.degree(k);
      const int dj = g.degree(j);
      if (dk < 2) continue;
      const Table2 psi = g.psi_from(e, j);  // [x_j][x_k]
      const std::size_t into_j = 2 * e + (ed.i == j ? 0 : 1);
      const Vec2& target = nu.values[into_j];
      std::string name = dj == 2 && dk == 2   ? "lemma1"
                         : dj + dk == 5       ? "lemma2"
                         : dj == 3 && dk == 3 ? "deg3_deg3"
                                              : "leaf_propagation";
      for (const Incidence& carrier : g.incident(k)) {
        if (carrier.edge == e) continue;
        Vec2 weight{1.0, 1.0};
        for (const Incidence& other : g.incident(k)) {
          if (other.edge == e) continue;
          const Vec2& v = other.edge == carrier.edge ? nu.values[other.in_slot] : mu.values[other.in_slot];
          weight[0] *= v[0];
          weight[1] *= v[1];
        }
        const Vec2 r{psi[0][0] * weight[0] + psi[0][1] * weight[1],
                     psi[1][0] * weight[0] + psi[1][1] * weight[1]};
        const double b_hat = (r[0] * target[0] + r[1] * target[1]) /
                             (target[0] * target[0] + target[1] * target[1]);
        record(name, std::max(std::abs(r[0] - b_hat * target[0]), std::abs(r[1] - b_hat * target[1])),
               tolerance);
        record("beta_closed_form", std::abs(b_hat - closed), tolerance);
        if (g.is_delta(e)) {
          record("lemma_beta", std::abs(b_hat - 1.0), tolerance);
        } else {
          record("beta_pullback", std::abs(b_hat - expected.beta[*t.transformed.edge_origin[e]]), tolerance);
        }
        extracted[e] = b_hat;
      }
    }
  }

  // Theorem 2 at every original node through the injected slots.
  const Mrf& m = t.original;
  std::vector<std::vector<std::size_t>> injected(m.node_count());
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    injected[m.edge(e).i].push_back(t.injected_slot[e][0]);
    injected[m.edge(e).j].push_back(t.injected_slot[e][1]);
  }
  for (NodeId v = 0; v < m.node_count(); ++v) {
    const auto& slots = injected[v];
    const int d = static_cast<int>(slots.size());
    if (d > 20) continue;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      double sum = 0.0;
      for (int a = 0; a < 2; ++a) {
        double prod = 1.0;
        for (int k = 0; k < d; ++k) {
          prod *= (mask >> k & 1u) ? nu.values[slots[k]][a] : mu.values[slots[k]][a];
        }
        sum += prod;
      }
      record("theorem2", std::abs(sum - f_eval(std::popcount(mask), expected.gamma[v])), tolerance);
    }
  }

  PropagationReport report;
  report.checks = std::move(checks);
  report.pulled_back.beta.assign(m.edge_count(), 0.0);
  report.pulled_back.gamma.assign(m.node_count(), 0.0);
  for (std::size_t e = 0; e < g.edge_count(); ++e) {
    if (t.transformed.edge_origin[e]) report.pulled_back.beta[*t.transformed.edge_origin[e]] = extracted[e];
  }
  for (NodeId v = 0; v < g.node_count(); ++v) {
    report.pulled_back.gamma[origin[v]] = gamma_of(t.beliefs.node[v]);
  }
  return report;
}

PropagationReport verify_propagation_rules(const Mrf& input, const LbpConfig& cfg, bool subdivide_edges) {
  const Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;
  const FixedPointReport fp = run_lbp(m, cfg);
  require_converged(fp);
  const Mrf rep = reparametrize(m, fp.beliefs);
  const TransformedModel t = degree3_transform(rep, fp.beliefs, subdivide_edges);
  return verify_propagation_rules(t, coefficients(m, fp.beliefs));
}

}  // namespace loopseries
