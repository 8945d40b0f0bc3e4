#include "loopseries/loop_series.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <functional>

namespace loopseries {

namespace {

void require_edge_cap(const Mrf& m, int max_edges) {
  if (static_cast<int>(m.edge_count()) > max_edges || m.edge_count() > 63) {
    throw CapExceeded("edges: " + std::to_string(m.edge_count()) + " exceeds the enumeration cap of " +
                      std::to_string(std::min(max_edges, 63)));
  }
}

// Edges of the 2-core (iteratively strip nodes of degree <= 1).
std::vector<std::size_t> two_core_edges(const Mrf& m) {
  std::vector<int> deg(m.node_count());
  std::vector<bool> alive(m.node_count(), true);
  std::deque<NodeId> queue;
  for (NodeId v = 0; v < m.node_count(); ++v) {
    deg[v] = m.degree(v);
    if (deg[v] <= 1) queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeId v = queue.front();
    queue.pop_front();
    if (!alive[v]) continue;
    alive[v] = false;
    for (const Incidence& inc : m.incident(v)) {
      if (alive[inc.neighbor] && --deg[inc.neighbor] == 1) queue.push_back(inc.neighbor);
    }
  }
  std::vector<std::size_t> core;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (alive[m.edge(e).i] && alive[m.edge(e).j]) core.push_back(e);
  }
  return core;
}

std::int64_t binomial(int n, int k) {
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::int64_t> poly_mul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  std::vector<std::int64_t> out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

}  // namespace

int GeneralizedLoop::max_degree() const {
  int d = 0;
  for (const auto& [v, dv] : degrees) d = std::max(d, dv);
  return d;
}

GeneralizedLoop make_loop(const Mrf& m, EdgeMask mask) {
  GeneralizedLoop c;
  c.mask = mask;
  std::vector<int> deg(m.node_count(), 0);
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (!(mask >> e & 1u)) continue;
    c.edges.push_back(e);
    ++deg[m.edge(e).i];
    ++deg[m.edge(e).j];
  }
  for (NodeId v = 0; v < m.node_count(); ++v) {
    if (deg[v] > 0) c.degrees.emplace_back(v, deg[v]);
  }
  return c;
}

bool canonical_less(const GeneralizedLoop& a, const GeneralizedLoop& b) {
  if (a.edges.size() != b.edges.size()) return a.edges.size() < b.edges.size();
  return a.edges < b.edges;
}

std::vector<GeneralizedLoop> enumerate_generalized_loops(const Mrf& m, int max_edges) {
  require_edge_cap(m, max_edges);
  const std::vector<std::size_t> core = two_core_edges(m);
  std::vector<int> deg(m.node_count(), 0);
  std::vector<int> rem(m.node_count(), 0);
  for (std::size_t e : core) {
    ++rem[m.edge(e).i];
    ++rem[m.edge(e).j];
  }
  auto dead = [&](NodeId v) { return deg[v] == 1 && rem[v] == 0; };

  std::vector<EdgeMask> found;
  std::function<void(std::size_t, EdgeMask)> dfs = [&](std::size_t pos, EdgeMask mask) {
    if (pos == core.size()) {
      if (mask != 0) found.push_back(mask);
      return;
    }
    const Edge& ed = m.edge(core[pos]);
    --rem[ed.i];
    --rem[ed.j];
    if (!dead(ed.i) && !dead(ed.j)) dfs(pos + 1, mask);
    ++deg[ed.i];
    ++deg[ed.j];
    if (!dead(ed.i) && !dead(ed.j)) dfs(pos + 1, mask | (EdgeMask{1} << core[pos]));
    --deg[ed.i];
    --deg[ed.j];
    ++rem[ed.i];
    ++rem[ed.j];
  };
  dfs(0, 0);

  std::vector<GeneralizedLoop> loops;
  loops.reserve(found.size());
  for (EdgeMask mask : found) loops.push_back(make_loop(m, mask));
  std::sort(loops.begin(), loops.end(), canonical_less);
  return loops;
}

std::vector<GeneralizedLoop> enumerate_generalized_loops_naive(const Mrf& m) {
  if (m.edge_count() > 24) throw CapExceeded("edges: naive enumeration limited to 24 edges");
  std::vector<GeneralizedLoop> loops;
  const EdgeMask total = EdgeMask{1} << m.edge_count();
  for (EdgeMask mask = 1; mask < total; ++mask) {
    GeneralizedLoop c = make_loop(m, mask);
    const bool ok = std::all_of(c.degrees.begin(), c.degrees.end(), [](const auto& p) { return p.second >= 2; });
    if (ok) loops.push_back(std::move(c));
  }
  std::sort(loops.begin(), loops.end(), canonical_less);
  return loops;
}

double loop_weight(const GeneralizedLoop& c, const Coefficients& k) {
  double r = 1.0;
  for (std::size_t e : c.edges) r *= k.beta[e];
  for (const auto& [v, d] : c.degrees) r *= f_eval(d, k.gamma[v]);
  return r;
}

LoopTerm loop_term(const GeneralizedLoop& c, const Coefficients& k) { return {c, loop_weight(c, k)}; }

double theta_value(const std::vector<GeneralizedLoop>& loops, const Coefficients& k) {
  CompensatedSum sum;
  sum += 1.0;
  for (const GeneralizedLoop& c : loops) sum += loop_weight(c, k);
  return sum.value();
}

LoopSeries loop_series_partition(const Mrf& input, const LbpConfig& cfg, int max_edges) {
  const Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;
  require_edge_cap(m, max_edges);
  LoopSeries out;
  out.fixed_point = run_lbp(m, cfg);
  require_converged(out.fixed_point);
  out.log_z_bethe = out.fixed_point.bethe_log_z;
  out.z_bethe = std::exp(out.log_z_bethe);
  out.coefficients = coefficients(m, out.fixed_point.beliefs);
  CompensatedSum sum;
  sum += 1.0;
  for (GeneralizedLoop& c : enumerate_generalized_loops(m, max_edges)) {
    LoopTerm t = loop_term(c, out.coefficients);
    sum += t.r;
    out.terms.push_back(std::move(t));
  }
  out.theta = sum.value();
  out.z_estimate = out.z_bethe * out.theta;
  return out;
}

double cc_term(const Mrf& m, const GeneralizedLoop& c, const Beliefs& b) {
  auto magnetization = [&](NodeId v) {
    const double mv = b.node[v][0] - b.node[v][1];
    if (!(std::abs(mv) < 1.0)) throw InputError("beliefs: node " + std::to_string(v) + " is deterministic");
    return mv;
  };
  double r = 1.0;
  for (std::size_t e : c.edges) {
    const Edge& ed = m.edge(e);
    const double mi = magnetization(ed.i);
    const double mj = magnetization(ed.j);
    double tau = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int d = 0; d < 2; ++d) tau += b.edge[e][a][d] * (spin(a) - mi) * (spin(d) - mj);
    }
    r *= tau;
  }
  for (const auto& [v, d] : c.degrees) {
    const double mv = magnetization(v);
    const double sign = d % 2 == 0 ? 1.0 : -1.0;
    r *= (std::pow(1.0 - mv, d - 1) + sign * std::pow(1.0 + mv, d - 1)) / (2.0 * std::pow(1.0 - mv * mv, d - 1));
  }
  return r;
}

double ThetaUniform::eval(double gamma) const {
  double r = 0.0;
  for (auto it = gamma_coefficients.rbegin(); it != gamma_coefficients.rend(); ++it) {
    r = r * gamma + static_cast<double>(*it);
  }
  return r;
}

ThetaUniform theta_uniform(int L) {
  if (L < 0 || L > 30) throw InputError("L: must lie in [0, 30]");
  ThetaUniform t{L, {0}};
  for (int k = 0; k <= L; ++k) {
    const auto f = f_poly(2 * k);
    if (t.gamma_coefficients.size() < f.size()) t.gamma_coefficients.resize(f.size(), 0);
    const std::int64_t c = binomial(L, k);
    for (std::size_t p = 0; p < f.size(); ++p) t.gamma_coefficients[p] += c * f[p];
  }
  return t;
}

double theta_one_gamma_closed(int L, double gamma) {
  const double s = std::sqrt(4.0 + gamma * gamma);
  return std::pow(2.0 * s / (s + gamma), L - 1) + std::pow(2.0 * s / (s - gamma), L - 1);
}

double ThetaPolynomial::eval(double beta, double gamma) const {
  double r = 0.0;
  for (std::size_t p = coefficient.size(); p-- > 0;) {
    double inner = 0.0;
    const auto& row = coefficient[p];
    for (std::size_t q = row.size(); q-- > 0;) inner = inner * gamma + static_cast<double>(row[q]);
    r = r * beta + inner;
  }
  return r;
}

std::int64_t ThetaPolynomial::coefficient_sum() const {
  std::int64_t s = 0;
  for (const auto& row : coefficient) {
    for (std::int64_t c : row) s += c;
  }
  return s;
}

ThetaPolynomial theta_polynomial(const Mrf& m, int max_edges) {
  ThetaPolynomial t;
  t.coefficient.assign(1, {1});
  for (const GeneralizedLoop& c : enumerate_generalized_loops(m, max_edges)) {
    std::vector<std::int64_t> g{1};
    for (const auto& [v, d] : c.degrees) g = poly_mul(g, f_poly(d));
    const std::size_t p = c.edges.size();
    if (t.coefficient.size() <= p) t.coefficient.resize(p + 1);
    auto& row = t.coefficient[p];
    if (row.size() < g.size()) row.resize(g.size(), 0);
    for (std::size_t q = 0; q < g.size(); ++q) row[q] += g[q];
  }
  return t;
}

double theta_uniform_eval(const Mrf& m, double beta, double gamma, int max_edges) {
  const Coefficients k{std::vector<double>(m.edge_count(), beta), std::vector<double>(m.node_count(), gamma)};
  return theta_value(enumerate_generalized_loops(m, max_edges), k);
}

LoopCountBound loop_count_bound(const Mrf& m, int max_edges) {
  const auto loops = enumerate_generalized_loops(m, max_edges);
  LoopCountBound out;
  out.count = static_cast<std::int64_t>(loops.size()) + 1;
  out.cycle_rank = cycle_rank(m);
  out.bound = theta_one_gamma_closed(out.cycle_rank, 1.0);
  out.tight = std::all_of(loops.begin(), loops.end(), [](const GeneralizedLoop& c) { return c.max_degree() <= 3; });
  if (static_cast<double>(out.count) > out.bound * (1.0 + 1e-12)) {
    throw IdentityViolation("loop count exceeds the theta(1,1) bound");
  }
  return out;
}

double Rank2Report::max_rank2_error() const {
  double e = 0.0;
  for (const CutNodeCheck& c : cut_nodes) e = std::max(e, c.rank2_error);
  return e;
}

double Rank2Report::max_eigen_error() const {
  double e = 0.0;
  for (const CutNodeCheck& c : cut_nodes) e = std::max(e, c.eigen_error);
  return e;
}

std::pair<double, double> eigenvalues(const Table2& t) {
  const double half_trace = 0.5 * (t[0][0] + t[1][1]);
  const double det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
  double disc = half_trace * half_trace - det;
  if (disc < 0.0) {
    if (disc < -1e-12 * half_trace * half_trace) throw InputError("eigenvalues: complex pair");
    disc = 0.0;
  }
  const double r = std::sqrt(disc);
  return {half_trace + r, half_trace - r};
}

Rank2Report rank2_transfer_check(const Mrf& input, const LbpConfig& cfg) {
  const Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;
  Rank2Report report;
  const HatGraph h = cut_to_tree(m);
  report.leaf_pairs = h.leaf_pair_count();
  const Mrf& base = h.base;
  const FixedPointReport fp = run_lbp(base, cfg);
  require_converged(fp);
  report.z_bethe = std::exp(fp.bethe_log_z);
  const Beliefs& b = fp.beliefs;
  const std::vector<double> beta_base = beta(base, b);

  const HatGraph rep = with_base(h, reparametrize(base, b));
  const TransferTensor t_rep = transfer_tensor(rep);
  const TransferTensor t_orig = transfer_tensor(h);
  const int L = h.leaf_pair_count();

  std::vector<LeafPair> rep_vectors(L);
  std::vector<LeafPair> orig_vectors(L);
  for (int p = 0; p < L; ++p) {
    const NodeId s = h.cut_nodes[p];
    const Vec2 root{std::sqrt(b.node[s][0]), std::sqrt(b.node[s][1])};
    rep_vectors[p] = {root, root};
    Vec2 on_cut = fp.messages.into(base, s, h.attach_u[p]);
    Vec2 on_bar = fp.messages.into(base, s, h.attach_v[p]);
    const double norm = std::sqrt(on_cut[0] * on_bar[0] + on_cut[1] * on_bar[1]);
    for (int a = 0; a < 2; ++a) {
      on_cut[a] /= norm;
      on_bar[a] /= norm;
    }
    orig_vectors[p] = {on_cut, on_bar};
  }

  // Tree adjacency for the leaf-to-leaf paths.
  std::vector<std::vector<NodeId>> adj(h.tree_node_count);
  for (const EdgeSpec& e : h.tree_edges) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  auto base_id = [&](NodeId v) {
    for (int p = 0; p < L; ++p) {
      if (h.bar_nodes[p] == v) return h.cut_nodes[p];
    }
    return v;
  };

  for (int p = 0; p < L; ++p) {
    CutNodeCheck c;
    const NodeId s = h.cut_nodes[p];
    c.cut_node = s;

    std::vector<NodeId> parent(h.tree_node_count, -1);
    std::deque<NodeId> queue{s};
    parent[s] = s;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      for (NodeId w : adj[v]) {
        if (parent[w] == -1) {
          parent[w] = v;
          queue.push_back(w);
        }
      }
    }
    c.path_beta = 1.0;
    if (parent[h.bar_nodes[p]] == -1) {
      c.path_beta = 0.0;  // forest: no path, the nu nu^T term is absent
    } else {
      for (NodeId v = h.bar_nodes[p]; v != s; v = parent[v]) {
        const auto e = base.find_edge(base_id(v), base_id(parent[v]));
        c.path_beta *= beta_base[*e];
      }
    }

    const Table2 tk = reduced_transfer(t_rep, p, PairContraction::Messages, rep_vectors);
    const Vec2& mu = rep_vectors[p].on_cut;
    const Vec2 nu{-mu[1], mu[0]};
    double scale = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int d = 0; d < 2; ++d) scale = std::max(scale, std::abs(tk[a][d]));
    }
    for (int a = 0; a < 2; ++a) {
      for (int d = 0; d < 2; ++d) {
        const double model = mu[a] * mu[d] + c.path_beta * nu[a] * nu[d];
        c.rank2_error = std::max(c.rank2_error, std::abs(tk[a][d] - model) / scale);
      }
    }

    const Table2 to = reduced_transfer(t_orig, p, PairContraction::Messages, orig_vectors);
    const Vec2& mc = orig_vectors[p].on_cut;
    const Vec2& mb = orig_vectors[p].on_bar;
    for (int a = 0; a < 2; ++a) {
      const double left = to[0][a] * mc[0] + to[1][a] * mc[1];
      const double right = to[a][0] * mb[0] + to[a][1] * mb[1];
      c.eigen_error = std::max({c.eigen_error, std::abs(left - report.z_bethe * mc[a]) / (report.z_bethe * sup_norm(mc)),
                                std::abs(right - report.z_bethe * mb[a]) / (report.z_bethe * sup_norm(mb))});
    }
    report.cut_nodes.push_back(c);
  }
  return report;
}

}  // namespace loopseries
