#include "loopseries/lbp.hpp"

#include <algorithm>
#include <cmath>

namespace loopseries {

namespace {

constexpr double kFirstMessageTolerance = 1e-10;
constexpr double kConsistencyTolerance = 1e-9;

Vec2 sup_normalized(Vec2 v) {
  const double s = sup_norm(v);
  return {v[0] / s, v[1] / s};
}

// Unnormalized update of the message into `to` across incidence `inc_at_from`
// (an incidence of the source node): sum_{x_from} psi(x_to, x_from) prod of all
// other messages into the source.
Vec2 update(const Mrf& m, const std::vector<Vec2>& values, NodeId from, const Incidence& out) {
  Vec2 cavity{1.0, 1.0};
  for (const Incidence& inc : m.incident(from)) {
    if (inc.edge == out.edge) continue;
    cavity[0] *= values[inc.in_slot][0];
    cavity[1] *= values[inc.in_slot][1];
  }
  const Table2 psi = m.psi_from(out.edge, out.neighbor);  // [x_to][x_from]
  return {psi[0][0] * cavity[0] + psi[0][1] * cavity[1],
          psi[1][0] * cavity[0] + psi[1][1] * cavity[1]};
}

double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

const Vec2& DirectedMessages::into(const Mrf& m, NodeId to, NodeId from) const {
  const auto e = m.find_edge(to, from);
  if (!e) throw InputError("messages: no edge between the given nodes");
  return values[2 * *e + (m.edge(*e).i == to ? 0 : 1)];
}

double fixed_point_residual(const Mrf& m, const DirectedMessages& messages) {
  double residual = 0.0;
  for (NodeId from = 0; from < m.node_count(); ++from) {
    for (const Incidence& out : m.incident(from)) {
      const Vec2 next = sup_normalized(update(m, messages.values, from, out));
      const Vec2 cur = sup_normalized(messages.values[out.out_slot]);
      residual = std::max({residual, std::abs(next[0] - cur[0]), std::abs(next[1] - cur[1])});
    }
  }
  return residual;
}

Beliefs beliefs_from_messages(const Mrf& m, const DirectedMessages& messages) {
  Beliefs b;
  b.node.resize(m.node_count());
  for (NodeId v = 0; v < m.node_count(); ++v) {
    Vec2 p{1.0, 1.0};
    for (const Incidence& inc : m.incident(v)) {
      p[0] *= messages.values[inc.in_slot][0];
      p[1] *= messages.values[inc.in_slot][1];
    }
    const double z = p[0] + p[1];
    b.node[v] = {p[0] / z, p[1] / z};
  }
  b.edge.resize(m.edge_count());
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    const Edge& ed = m.edge(e);
    auto cavity = [&](NodeId v, NodeId other) {
      Vec2 c{1.0, 1.0};
      for (const Incidence& inc : m.incident(v)) {
        if (inc.neighbor == other) continue;
        c[0] *= messages.values[inc.in_slot][0];
        c[1] *= messages.values[inc.in_slot][1];
      }
      return c;
    };
    const Vec2 ci = cavity(ed.i, ed.j);
    const Vec2 cj = cavity(ed.j, ed.i);
    Table2 t{};
    double z = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        t[a][c] = m.psi(e)[a][c] * ci[a] * cj[c];
        z += t[a][c];
      }
    }
    for (auto& row : t) {
      for (double& x : row) x /= z;
    }
    b.edge[e] = t;
  }
  return b;
}

double bethe_log_partition(const Mrf& m, const Beliefs& b) {
  CompensatedSum acc;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        const double p = b.edge[e][a][c];
        if (p <= 0.0) continue;
        acc += p * std::log(m.psi(e)[a][c]);
        acc += -plogp(p);
      }
    }
  }
  for (NodeId v = 0; v < m.node_count(); ++v) {
    const int d = m.degree(v);
    acc += (d - 1) * (plogp(b.node[v][0]) + plogp(b.node[v][1]));
  }
  return acc.value();
}

FixedPointReport run_lbp(const Mrf& input, const LbpConfig& cfg) {
  if (!(cfg.tolerance > 0.0)) throw InputError("lbp: tolerance must be > 0");
  if (cfg.max_iterations < 0) throw InputError("lbp: max_iterations must be >= 0");
  if (!(cfg.damping >= 0.0 && cfg.damping < 1.0)) throw InputError("lbp: damping must lie in [0, 1)");
  const Mrf m = input.has_phi() ? absorb_node_potentials(input) : input;

  std::vector<Vec2> values(m.slot_count(), Vec2{1.0, 1.0});
  FixedPointReport report;
  auto damp = [&](const Vec2& old, const Vec2& fresh) {
    return sup_normalized({cfg.damping * old[0] + (1.0 - cfg.damping) * fresh[0],
                           cfg.damping * old[1] + (1.0 - cfg.damping) * fresh[1]});
  };

  report.residual = fixed_point_residual(m, {values});
  while (report.residual > cfg.tolerance && report.iterations < cfg.max_iterations) {
    if (cfg.schedule == Schedule::Synchronous) {
      std::vector<Vec2> next(values.size());
      for (NodeId from = 0; from < m.node_count(); ++from) {
        for (const Incidence& out : m.incident(from)) {
          next[out.out_slot] = damp(values[out.out_slot], sup_normalized(update(m, values, from, out)));
        }
      }
      values = std::move(next);
    } else {
      for (std::size_t slot = 0; slot < values.size(); ++slot) {
        const NodeId from = m.slot_source(slot);
        const NodeId to = m.slot_target(slot);
        for (const Incidence& out : m.incident(from)) {
          if (out.neighbor != to) continue;
          values[slot] = damp(values[slot], sup_normalized(update(m, values, from, out)));
        }
      }
    }
    ++report.iterations;
    report.residual = fixed_point_residual(m, {values});
  }

  report.converged = report.residual <= cfg.tolerance;
  report.messages.values = std::move(values);
  report.beliefs = beliefs_from_messages(m, report.messages);
  report.bethe_log_z = bethe_log_partition(m, report.beliefs);
  return report;
}

const FixedPointReport& require_converged(const FixedPointReport& report) {
  if (!report.converged) {
    throw NotConverged("lbp did not converge: residual " + std::to_string(report.residual) +
                       " after " + std::to_string(report.iterations) + " iterations");
  }
  return report;
}

double marginal_inconsistency(const Mrf& m, const Beliefs& b) {
  double worst = 0.0;
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    const Edge& ed = m.edge(e);
    const Table2& t = b.edge[e];
    for (int a = 0; a < 2; ++a) {
      worst = std::max(worst, std::abs(t[a][0] + t[a][1] - b.node[ed.i][a]));
      worst = std::max(worst, std::abs(t[0][a] + t[1][a] - b.node[ed.j][a]));
    }
  }
  return worst;
}

Mrf reparametrize(const Mrf& m, const Beliefs& b) {
  if (b.node.size() != static_cast<std::size_t>(m.node_count()) || b.edge.size() != m.edge_count()) {
    throw InputError("reparametrize: beliefs do not match the model");
  }
  if (marginal_inconsistency(m, b) > kConsistencyTolerance) {
    throw NotConverged("reparametrize: beliefs are not locally consistent");
  }
  std::vector<EdgeSpec> specs = m.edge_specs();
  for (std::size_t e = 0; e < specs.size(); ++e) {
    const Edge& ed = m.edge(e);
    const double di = m.degree(ed.i);
    const double dj = m.degree(ed.j);
    for (int a = 0; a < 2; ++a) {
      for (int c = 0; c < 2; ++c) {
        const double p = b.edge[e][a][c];
        specs[e].psi[a][c] = p == 0.0 ? 0.0
                                      : p / (std::pow(b.node[ed.i][a], (di - 1.0) / di) *
                                             std::pow(b.node[ed.j][c], (dj - 1.0) / dj));
      }
    }
  }
  return Mrf(m.node_count(), std::move(specs));
}

double unnormalized_update_residual(const Mrf& m, const DirectedMessages& mu) {
  double worst = 0.0;
  for (NodeId from = 0; from < m.node_count(); ++from) {
    for (const Incidence& out : m.incident(from)) {
      const Vec2 next = update(m, mu.values, from, out);
      const Vec2& cur = mu.values[out.out_slot];
      worst = std::max({worst, std::abs(next[0] - cur[0]), std::abs(next[1] - cur[1])});
    }
  }
  return worst;
}

DirectedMessages first_messages(const Mrf& reparametrized, const Beliefs& b) {
  const Mrf& m = reparametrized;
  DirectedMessages mu;
  mu.values.resize(m.slot_count());
  for (std::size_t slot = 0; slot < mu.values.size(); ++slot) {
    const NodeId to = m.slot_target(slot);
    const double d = m.degree(to);
    mu.values[slot] = {std::pow(b.node[to][0], 1.0 / d), std::pow(b.node[to][1], 1.0 / d)};
  }
  const double residual = unnormalized_update_residual(m, mu);
  if (residual > kFirstMessageTolerance) {
    throw IdentityViolation("first messages: update residual " + std::to_string(residual) +
                            " (stale beliefs?)");
  }
  for (NodeId v = 0; v < m.node_count(); ++v) {
    if (m.incident(v).empty()) continue;
    Vec2 p{1.0, 1.0};
    for (const Incidence& inc : m.incident(v)) {
      p[0] *= mu.values[inc.in_slot][0];
      p[1] *= mu.values[inc.in_slot][1];
    }
    if (std::abs(p[0] + p[1] - 1.0) > kFirstMessageTolerance) {
      throw IdentityViolation("first messages: product at node " + std::to_string(v) +
                              " does not sum to 1");
    }
  }
  return mu;
}

}  // namespace loopseries
