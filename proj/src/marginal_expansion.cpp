#include "loopseries/marginal_expansion.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "loopseries/exact_oracle.hpp"

namespace loopseries {

bool same_sign(double a, double b, double zero_tolerance) {
  if (std::abs(a) <= zero_tolerance || std::abs(b) <= zero_tolerance) return true;
  return (a > 0.0) == (b > 0.0);
}

PreparedTarget prepare_target(const Mrf& input, NodeId target) {
  if (target < 0 || target >= input.node_count()) {
    throw InputError("node: " + std::to_string(target) + " out of range");
  }
  Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;
  const int d = m.degree(target);
  if (d == 2) return {std::move(m), target, target, false};
  if (d == 0) throw InputError("node: target has no incident edge");

  std::vector<std::size_t> incident;
  for (const Incidence& inc : m.incident(target)) incident.push_back(inc.edge);
  std::sort(incident.begin(), incident.end());
  std::size_t chosen = incident.front();
  for (std::size_t e : incident) {
    if (!is_bridge(m, e)) {
      chosen = e;
      break;
    }
  }
  const Edge& ed = m.edge(chosen);
  const NodeId other = ed.i == target ? ed.j : ed.i;
  Mrf sub = subdivide_edge(m, other, target);
  const NodeId k = sub.node_count() - 1;
  return {std::move(sub), k, target, true};
}

MarginalExpansion marginal_via_transfer(const Mrf& m, NodeId target, const LbpConfig& cfg, int max_leaf_pairs) {
  const PreparedTarget prep = prepare_target(m, target);
  const HatGraph h = cut_to_tree(prep.model, prep.target);
  if (h.leaf_pair_count() > max_leaf_pairs) {
    throw CapExceeded("leaf pairs: " + std::to_string(h.leaf_pair_count()) + " exceeds the cap of " +
                      std::to_string(max_leaf_pairs));
  }
  const FixedPointReport fp = run_lbp(h.base, cfg);
  require_converged(fp);
  const HatGraph rep = with_base(h, reparametrize(h.base, fp.beliefs));
  const TransferTensor t = transfer_tensor(rep, max_leaf_pairs);
  const Table2 reduced = reduced_transfer(t, 0, PairContraction::Delta);

  MarginalExpansion out;
  out.node = target;
  out.prepared_node = prep.target;
  out.leaf_pairs = h.leaf_pair_count();
  out.z_bethe = std::exp(fp.bethe_log_z);
  const Vec2& b = fp.beliefs.node[prep.target];
  out.belief = b;
  const Vec2 mu{std::sqrt(b[0]), std::sqrt(b[1])};
  const Vec2 nu{-std::sqrt(b[1]), std::sqrt(b[0])};
  auto contract2 = [&](const Vec2& row, const Vec2& col) {
    double s = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) s += reduced[a][c] * row[a] * col[c];
    }
    return s;
  };
  out.four_terms = {contract2(mu, mu), contract2(nu, nu), contract2(mu, nu), contract2(nu, mu)};
  const FourTerms& f = out.four_terms;
  const double spread = std::sqrt(b[0] * b[1]);
  out.scaled = {b[0] * f.mu_mu + b[1] * f.nu_nu - spread * (f.mu_nu + f.nu_mu),
                b[1] * f.mu_mu + b[0] * f.nu_nu + spread * (f.mu_nu + f.nu_mu)};
  out.z_ratio = out.scaled[0] + out.scaled[1];
  out.p = {out.scaled[0] / out.z_ratio, out.scaled[1] / out.z_ratio};
  return out;
}

DiagramExpansion marginal_diagram_expansion(const PreparedTarget& prep, const Beliefs& b, const Coefficients& k,
                                            int max_edges) {
  const Mrf& m = prep.model;
  if (static_cast<int>(m.edge_count()) > max_edges || m.edge_count() > 63) {
    throw CapExceeded("edges: " + std::to_string(m.edge_count()) + " exceeds the enumeration cap");
  }
  if (m.degree(prep.target) != 2) throw InputError("node: target must have degree 2");
  const NodeId t = prep.target;

  std::vector<int> deg(m.node_count(), 0);
  std::vector<int> rem(m.node_count(), 0);
  for (NodeId v = 0; v < m.node_count(); ++v) rem[v] = m.degree(v);
  auto dead = [&](NodeId v) { return v != t && deg[v] == 1 && rem[v] == 0; };
  std::vector<EdgeMask> found;
  std::function<void(std::size_t, EdgeMask)> dfs = [&](std::size_t e, EdgeMask mask) {
    if (e == m.edge_count()) {
      found.push_back(mask);
      return;
    }
    const Edge& ed = m.edge(e);
    --rem[ed.i];
    --rem[ed.j];
    if (!dead(ed.i) && !dead(ed.j)) dfs(e + 1, mask);
    ++deg[ed.i];
    ++deg[ed.j];
    if (!dead(ed.i) && !dead(ed.j)) dfs(e + 1, mask | (EdgeMask{1} << e));
    --deg[ed.i];
    --deg[ed.j];
    ++rem[ed.i];
    ++rem[ed.j];
  };
  dfs(0, 0);

  const Vec2& bt = b.node[t];
  const double spread = std::sqrt(bt[0] * bt[1]);
  const double gt = gamma_of(bt);

  std::vector<GeneralizedLoop> sets;
  sets.reserve(found.size());
  for (EdgeMask mask : found) sets.push_back(make_loop(m, mask));
  std::sort(sets.begin(), sets.end(), canonical_less);

  DiagramExpansion out{prep, b, k, {}, {}, {}, 0.0};
  CompensatedSum plus, minus, disc;
  for (const GeneralizedLoop& d : sets) {
    double w = 1.0;
    int dt = 0;
    for (std::size_t e : d.edges) w *= k.beta[e];
    for (const auto& [v, dv] : d.degrees) {
      if (v == t) {
        dt = dv;
      } else {
        w *= f_eval(dv, k.gamma[v]);
      }
    }
    DiagramTerm term;
    term.edges = d.edges;
    term.target_degree = dt;
    switch (dt) {
      case 0:
        term.weight_plus = w * bt[0];
        term.weight_minus = w * bt[1];
        term.discriminant = w * gt;
        break;
      case 1:
        term.weight_plus = -w * spread;
        term.weight_minus = w * spread;
        term.discriminant = -2.0 * w;
        break;
      default:
        term.weight_plus = w * bt[1];
        term.weight_minus = w * bt[0];
        term.discriminant = -w * gt;
        break;
    }
    plus += term.weight_plus;
    minus += term.weight_minus;
    disc += term.discriminant;
    out.terms.push_back(std::move(term));
  }
  out.scaled = {plus.value(), minus.value()};
  const double z = out.scaled[0] + out.scaled[1];
  out.p = {out.scaled[0] / z, out.scaled[1] / z};
  out.discriminant = disc.value();
  return out;
}

DiagramExpansion marginal_diagram_expansion(const Mrf& m, NodeId target, const LbpConfig& cfg, int max_edges) {
  PreparedTarget prep = prepare_target(m, target);
  const FixedPointReport fp = run_lbp(prep.model, cfg);
  require_converged(fp);
  const Coefficients k = coefficients(prep.model, fp.beliefs);
  return marginal_diagram_expansion(prep, fp.beliefs, k, max_edges);
}

OneLoopReport one_loop_sign_check(const Mrf& input, NodeId target, const LbpConfig& cfg) {
  const Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;
  if (cycle_rank(m) != 1) throw InputError("graph: one-loop check needs cycle rank 1");
  if (target < 0 || target >= m.node_count()) throw InputError("node: out of range");
  bool on_cycle = false;
  for (const Incidence& inc : m.incident(target)) on_cycle = on_cycle || !is_bridge(m, inc.edge);
  if (!on_cycle) throw InputError("node: target is not on the cycle");

  const MarginalExpansion mx = marginal_via_transfer(m, target, cfg);
  const PreparedTarget prep = prepare_target(m, target);
  const FixedPointReport fp = run_lbp(prep.model, cfg);
  require_converged(fp);
  const std::vector<double> beta_prep = beta(prep.model, fp.beliefs);
  const auto loops = enumerate_generalized_loops(prep.model);

  OneLoopReport r;
  r.exact = exact_marginal(m, target);
  r.belief = mx.belief;
  r.same_sign = same_sign(r.exact[0] - r.exact[1], r.belief[0] - r.belief[1]);
  r.four_terms = mx.four_terms;
  r.path_beta = 1.0;
  for (std::size_t e : loops.at(0).edges) r.path_beta *= beta_prep[e];
  const FourTerms& f = r.four_terms;
  r.max_term_error = std::max({std::abs(f.mu_mu - 1.0), std::abs(f.nu_nu - r.path_beta), std::abs(f.mu_nu),
                               std::abs(f.nu_mu)});
  return r;
}

double map_discriminant(const Mrf& m, NodeId target, const LbpConfig& cfg) {
  return marginal_diagram_expansion(m, target, cfg).discriminant;
}

}  // namespace loopseries
