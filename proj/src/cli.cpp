#include "loopseries/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "loopseries/exact_oracle.hpp"
#include "loopseries/generators.hpp"
#include "loopseries/io.hpp"
#include "loopseries/ising.hpp"
#include "loopseries/lbp.hpp"
#include "loopseries/loop_series.hpp"
#include "loopseries/marginal_expansion.hpp"
#include "loopseries/messages.hpp"

namespace loopseries {

namespace {

constexpr double kIdentityTolerance = 1e-8;
constexpr double kTermTolerance = 1e-10;
constexpr double kSusceptibilityTolerance = 1e-5;

struct RunConfig {
  std::string graph;
  std::string output;
  double tolerance = 1e-12;
  int max_iterations = 10000;
  double damping = 0.5;
  std::string schedule = "sync";
  int max_nodes = kDefaultMaxNodes;
  int max_edges = kMaxLoopEdges;
  int max_leaf_pairs = kDefaultMaxLeafPairs;

  LbpConfig lbp() const {
    return {tolerance, max_iterations, damping, schedule == "seq" ? Schedule::Sequential : Schedule::Synchronous};
  }
};

struct ExpandOptions {
  std::optional<int> max_terms;
  std::string sort = "canonical";
};

struct CoeffsOptions {
  bool verify_rules = false;
};

struct MarginalOptions {
  int node = -1;
  std::string mode = "both";
};

struct IsingOptions {
  std::optional<double> y;
  std::optional<double> z;
  std::optional<double> coupling;
  std::optional<double> field;
  std::string check = "corollary";
};

struct VerifyOptions {
  std::string expected;
};

struct RandomOptions {
  std::uint64_t seed = 1;
  int nodes = 6;
  int max_edges = 9;
  std::string kind = "connected";
};

void emit(const RunConfig& rc, const Json& report, std::ostream& out) {
  if (rc.output.empty()) {
    out << report.dump(2) << '\n';
    return;
  }
  std::ofstream file(rc.output);
  if (!file) throw InputError("output: cannot open " + rc.output);
  file << report.dump(2) << '\n';
}

Mrf load(const RunConfig& rc) {
  if (rc.graph.empty()) throw InputError("graph: --graph is required");
  return load_graph(rc.graph);
}

FixedPointReport converged_lbp(const Mrf& m, const RunConfig& rc) {
  FixedPointReport r = run_lbp(m, rc.lbp());
  require_converged(r);
  return r;
}

Json terms_json(const Mrf& m, const std::vector<LoopTerm>& terms) {
  Json out = Json::array();
  for (const LoopTerm& t : terms) {
    Json j = to_json(t.loop, m);
    j["r"] = t.r;
    out.push_back(j);
  }
  return out;
}

Json run_lbp_cmd(const RunConfig& rc) {
  const Mrf m = load(rc);
  const FixedPointReport r = run_lbp(m, rc.lbp());
  require_converged(r);
  return to_json(r, m);
}

Json run_exact(const RunConfig& rc) {
  const Mrf m = load(rc);
  Json marginals = Json::array();
  for (const Vec2& p : exact_marginals(m, rc.max_nodes)) marginals.push_back(Json::array({p[0], p[1]}));
  return {{"Z", exact_partition(m, rc.max_nodes)}, {"marginals", marginals}};
}

Json run_expand(const RunConfig& rc, const ExpandOptions& o) {
  const Mrf m = load(rc);
  LoopSeries s = loop_series_partition(m, rc.lbp(), rc.max_edges);
  std::vector<LoopTerm> terms = s.terms;
  if (o.sort == "abs-r") {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const LoopTerm& a, const LoopTerm& b) { return std::abs(a.r) > std::abs(b.r); });
  }
  const std::size_t total = terms.size();
  if (o.max_terms && static_cast<std::size_t>(*o.max_terms) < total) terms.resize(*o.max_terms);
  return {{"Z_B", s.z_bethe},
          {"log_Z_B", s.log_z_bethe},
          {"theta", s.theta},
          {"z_estimate", s.z_estimate},
          {"term_count", total},
          {"truncated", terms.size() < total},
          {"terms", terms_json(m, terms)}};
}

Json run_coeffs(const RunConfig& rc, const CoeffsOptions& o) {
  const Mrf m = load(rc);
  const FixedPointReport r = converged_lbp(m, rc);
  Json report = to_json(coefficients(m, r.beliefs), m);
  if (o.verify_rules) report["propagation"] = to_json(verify_propagation_rules(m, rc.lbp()));
  return report;
}

Json run_marginal(const RunConfig& rc, const MarginalOptions& o) {
  const Mrf m = load(rc);
  if (o.node < 0 || o.node >= m.node_count()) throw InputError("node: out of range");
  Json report{{"node", o.node}};
  std::optional<Vec2> p;
  if (o.mode == "transfer" || o.mode == "both") {
    const MarginalExpansion x = marginal_via_transfer(m, o.node, rc.lbp(), rc.max_leaf_pairs);
    const Json t = to_json(x);
    report["belief"] = t["belief"];
    report["four_terms"] = t["four_terms"];
    report["z_over_z_bethe"] = x.z_ratio;
    report["p_transfer"] = t["p"];
    p = x.p;
  }
  if (o.mode == "diagram" || o.mode == "both") {
    const DiagramExpansion x = marginal_diagram_expansion(m, o.node, rc.lbp(), rc.max_edges);
    const Json d = to_json(x);
    report["belief"] = Json::array({x.beliefs.node[x.prepared.target][0], x.beliefs.node[x.prepared.target][1]});
    report["diagram_terms"] = d["diagram_terms"];
    report["discriminant"] = d["discriminant"];
    report["p_diagram"] = d["p"];
    if (!p) p = x.p;
  }
  report["p_exactish"] = Json::array({(*p)[0], (*p)[1]});
  return report;
}

Json run_bound(const RunConfig& rc) { return to_json(loop_count_bound(load(rc), rc.max_edges)); }

Mrf ising_shape(const std::string& spec) {
  auto size_after = [&](std::size_t prefix) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(spec.substr(prefix), &used);
      if (used != spec.size() - prefix) throw InputError("graph: bad size in " + spec);
      return n;
    } catch (const std::logic_error&) {
      throw InputError("graph: bad size in " + spec);
    }
  };
  if (spec.rfind("cycle:", 0) == 0) return cycle_shape(size_after(6));
  if (spec.rfind("complete:", 0) == 0) return complete_shape(size_after(9));
  return load_graph(spec);
}

double field_of(double y, double z, int d) { return std::atanh(y) + (1 - d) * std::atanh(y * z); }

// y in (-1, 1) with field_of(y) = h; field_of tends to -inf/+inf at the ends.
double solve_y(double h, double z, int d) {
  double lo = -1.0;
  double hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (field_of(mid, z, d) < h ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Json run_ising(const RunConfig& rc, const IsingOptions& o) {
  if (rc.graph.empty()) throw InputError("graph: --graph is required");
  const Mrf shape = ising_shape(rc.graph);
  const int d = regular_degree(shape);
  if (d < 0) throw InputError("graph: not regular");
  if (o.z && o.coupling) throw InputError("z: give either --z or --K");
  if (o.y && o.field) throw InputError("y: give either --y or --h");
  const double z = o.z ? *o.z : std::tanh(o.coupling.value_or(0.0));
  if (!(std::abs(z) < 1.0)) throw InputError("z: must satisfy |z| < 1");

  if (o.check == "susceptibility") {
    if (o.y.value_or(0.0) != 0.0 || o.field.value_or(0.0) != 0.0) {
      throw InputError("h: the susceptibility check is taken at zero field");
    }
    const SusceptibilityReport s = susceptibility_check(shape, std::atanh(z));
    const Json report{{"check", "susceptibility"},
                      {"K", s.coupling},
                      {"z", s.z},
                      {"degree", s.degree},
                      {"dlog_theta_dbeta", s.dlog_theta_dbeta},
                      {"dlog_theta_dgamma2", s.dlog_theta_dgamma2},
                      {"chi_formula", s.chi_formula},
                      {"chi_fd", s.chi_fd},
                      {"rel_error", s.rel_error},
                      {"chi_per_spin", s.chi_per_spin},
                      {"chi_bethe_per_spin", s.chi_bethe_per_spin},
                      {"tolerance", kSusceptibilityTolerance},
                      {"passed", s.rel_error <= kSusceptibilityTolerance}};
    return report;
  }

  const double y = o.y ? *o.y : (o.field ? solve_y(*o.field, z, d) : 0.0);
  const IsingCorrespondence c = corollary_change_of_variables(shape, y, z);
  return {{"check", "corollary"},
          {"y", c.y},
          {"z", c.z},
          {"degree", c.degree},
          {"beta", c.beta},
          {"gamma", c.gamma},
          {"K", c.coupling},
          {"h", c.field},
          {"edge_prefactor", c.edge_prefactor},
          {"node_prefactor", c.node_prefactor},
          {"theta_enumeration", c.theta_enumeration},
          {"theta_identity", c.theta_identity},
          {"Z_ising", c.z_ising},
          {"rhs", c.rhs},
          {"rel_error", c.rel_error},
          {"tolerance", kIdentityTolerance},
          {"passed", c.rel_error <= kIdentityTolerance && relative_error(c.theta_identity, c.theta_enumeration) <= kIdentityTolerance}};
}

struct Check {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool skipped = false;
  std::string note = {};
};

Json check_json(const Check& c) {
  Json j{{"name", c.name}, {"passed", c.skipped || c.error <= c.tolerance}};
  if (c.skipped) {
    j["skipped"] = true;
    j["note"] = c.note;
  } else {
    j["max_error"] = c.error;
    j["tolerance"] = c.tolerance;
  }
  return j;
}

double max_rel(const Vec2& a, const Vec2& b) { return std::max(relative_error(a[0], b[0]), relative_error(a[1], b[1])); }

std::vector<Check> fixture_checks(const Mrf& m, const LoopSeries& s, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("expected: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  const Json fx = parse_json(text.str(), "expected");
  const Json actual = to_json(s.coefficients, m);
  auto compare_map = [&](const char* key) {
    if (!fx.contains(key) || !fx.at(key).is_object()) throw InputError(std::string("expected.") + key + ": missing");
    double err = 0.0;
    for (const auto& [k, v] : actual.at(key).items()) {
      if (!fx.at(key).contains(k)) throw InputError(std::string("expected.") + key + "." + k + ": missing");
      err = std::max(err, std::abs(v.get<double>() - fx.at(key).at(k).get<double>()));
    }
    if (fx.at(key).size() != actual.at(key).size()) err = INFINITY;
    return err;
  };
  Check beta{"fixture_beta", compare_map("beta"), kTermTolerance};
  Check gamma{"fixture_gamma", compare_map("gamma"), kTermTolerance};
  if (!fx.contains("terms") || !fx.at("terms").is_array()) throw InputError("expected.terms: missing");
  const Json& want = fx.at("terms");
  const Json have = terms_json(m, s.terms);
  double err = want.size() == have.size() ? 0.0 : INFINITY;
  for (std::size_t k = 0; k < std::min(want.size(), have.size()); ++k) {
    if (want[k].at("edges") != have[k].at("edges")) err = INFINITY;
    err = std::max(err, std::abs(want[k].at("r").get<double>() - have[k].at("r").get<double>()));
  }
  return {beta, gamma, {"fixture_terms", err, kTermTolerance}};
}

Json run_verify(const RunConfig& rc, const VerifyOptions& o) {
  const Mrf m = load(rc);
  const LoopSeries s = loop_series_partition(m, rc.lbp(), rc.max_edges);
  const FixedPointReport& fp = s.fixed_point;
  const Mrf& absorbed = m.has_phi() ? absorb_node_potentials(m) : m;
  const int L = cycle_rank(m);
  std::vector<Check> checks;

  checks.push_back({"lbp_fixed_point", fp.residual, rc.tolerance});
  const double z_exact = exact_partition(m, rc.max_nodes);
  checks.push_back({"loop_series_identity", relative_error(s.z_estimate, z_exact), kIdentityTolerance});
  if (L == 0) checks.push_back({"tree_exactness", relative_error(s.z_bethe, z_exact), kTermTolerance});

  if (m.edge_count() <= 24) {
    const auto naive = enumerate_generalized_loops_naive(m);
    bool same = naive.size() == s.terms.size();
    for (std::size_t k = 0; same && k < naive.size(); ++k) same = naive[k].mask == s.terms[k].loop.mask;
    checks.push_back({"loop_enumeration_naive", same ? 0.0 : 1.0, 0.0});
  }

  double cc = 0.0;
  for (const LoopTerm& t : s.terms) cc = std::max(cc, relative_error(cc_term(absorbed, t.loop, fp.beliefs), t.r));
  checks.push_back({"cc_equivalence", cc, kTermTolerance});

  const PropagationReport rules = verify_propagation_rules(m, rc.lbp());
  for (const RuleCheck& c : rules.checks) checks.push_back({"rule:" + c.name, c.max_error, c.tolerance});

  const LoopCountBound bound = loop_count_bound(m, rc.max_edges);
  checks.push_back({"loop_count_bound", bound.count <= bound.bound ? 0.0 : 1.0, 0.0});

  if (L <= rc.max_leaf_pairs) {
    const std::vector<Vec2> exact = exact_marginals(m, rc.max_nodes);
    double transfer = 0.0;
    double diagram = 0.0;
    for (NodeId v = 0; v < m.node_count(); ++v) {
      transfer = std::max(transfer, max_rel(marginal_via_transfer(m, v, rc.lbp(), rc.max_leaf_pairs).p, exact[v]));
      diagram = std::max(diagram, max_rel(marginal_diagram_expansion(m, v, rc.lbp(), rc.max_edges).p, exact[v]));
    }
    checks.push_back({"marginal_transfer", transfer, kIdentityTolerance});
    checks.push_back({"marginal_diagram", diagram, kIdentityTolerance});
  } else {
    checks.push_back({"marginal_transfer", 0.0, 0.0, true, "cycle rank exceeds --max-leaf-pairs"});
    checks.push_back({"marginal_diagram", 0.0, 0.0, true, "cycle rank exceeds --max-leaf-pairs"});
  }

  if (L >= 1 && L <= rc.max_leaf_pairs) {
    const Rank2Report r2 = rank2_transfer_check(m, rc.lbp());
    checks.push_back({"transfer_rank2", r2.max_rank2_error(), kIdentityTolerance});
    checks.push_back({"transfer_eigen", r2.max_eigen_error(), kIdentityTolerance});
  }

  if (!o.expected.empty()) {
    for (Check& c : fixture_checks(m, s, o.expected)) checks.push_back(std::move(c));
  }

  Json list = Json::array();
  bool passed = true;
  for (const Check& c : checks) {
    const Json j = check_json(c);
    passed = passed && j["passed"].get<bool>();
    list.push_back(j);
  }
  Json expansion = Json::array();
  expansion.push_back({{"edges", Json::array()}, {"degrees", Json::object()}, {"r", 1.0}});
  for (const Json& t : terms_json(m, s.terms)) expansion.push_back(t);
  return {{"passed", passed},
          {"Z", z_exact},
          {"Z_B", s.z_bethe},
          {"theta", s.theta},
          {"cycle_rank", L},
          {"expansion_term_count", expansion.size()},
          {"expansion", expansion},
          {"coefficients", to_json(s.coefficients, m)},
          {"checks", list}};
}

Json run_random(const RandomOptions& o) {
  Rng rng(o.seed);
  if (o.kind == "tree") return graph_to_json(random_tree(rng, o.nodes));
  if (o.kind == "cycle") return graph_to_json(random_cycle(rng, o.nodes));
  return graph_to_json(random_connected_graph(rng, o.nodes, o.max_edges));
}

void error_line(std::ostream& err, const char* kind, const std::string& message, int code) {
  err << Json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
}

void add_common(CLI::App* sub, RunConfig& rc) {
  sub->add_option("--graph", rc.graph, "Graph JSON file")->required();
  sub->add_option("--output", rc.output, "Write the report to this file instead of stdout");
  sub->add_option("--tol", rc.tolerance, "LBP convergence tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--max-iters", rc.max_iterations, "LBP iteration limit")->check(CLI::PositiveNumber);
  sub->add_option("--damping", rc.damping, "LBP damping in [0, 1)")->check(CLI::Range(0.0, 0.999999));
  sub->add_option("--schedule", rc.schedule, "sync or seq")->check(CLI::IsMember({"sync", "seq"}));
  sub->add_option("--max-nodes", rc.max_nodes, "Node cap of the exact oracle")->check(CLI::PositiveNumber);
  sub->add_option("--max-edges", rc.max_edges, "Edge cap of loop enumeration")->check(CLI::PositiveNumber);
  sub->add_option("--max-leaf-pairs", rc.max_leaf_pairs, "Leaf-pair cap of transfer tensors")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loop-series expansion of binary pairwise Markov random fields", "loopseries"};
  app.require_subcommand(1);
  RunConfig rc;
  ExpandOptions expand;
  CoeffsOptions coeffs;
  MarginalOptions marginal;
  IsingOptions ising;
  VerifyOptions verify;
  RandomOptions random;
  std::function<Json()> action;

  auto* lbp = app.add_subcommand("lbp", "Run loopy belief propagation");
  add_common(lbp, rc);
  lbp->callback([&] { action = [&] { return run_lbp_cmd(rc); }; });

  auto* exact = app.add_subcommand("exact", "Exact partition function and marginals");
  add_common(exact, rc);
  exact->callback([&] { action = [&] { return run_exact(rc); }; });

  auto* exp = app.add_subcommand("expand", "Loop-series expansion of Z");
  add_common(exp, rc);
  exp->add_option("--max-terms", expand.max_terms, "Print at most this many terms")->check(CLI::NonNegativeNumber);
  exp->add_option("--sort", expand.sort, "canonical or abs-r")->check(CLI::IsMember({"canonical", "abs-r"}));
  exp->callback([&] { action = [&] { return run_expand(rc, expand); }; });

  auto* co = app.add_subcommand("coeffs", "Edge and node coefficients beta, gamma");
  add_common(co, rc);
  co->add_flag("--verify-rules", coeffs.verify_rules, "Also check the message propagation rules");
  co->callback([&] {
    action = [&] {
      Json r = run_coeffs(rc, coeffs);
      if (r.contains("propagation") && !r["propagation"]["passed"].get<bool>()) {
        r["passed"] = false;
      }
      return r;
    };
  });

  auto* mg = app.add_subcommand("marginal", "Marginal of one node by the expansion");
  add_common(mg, rc);
  mg->add_option("--node", marginal.node, "Target node")->required();
  mg->add_option("--mode", marginal.mode, "transfer, diagram or both")
      ->check(CLI::IsMember({"transfer", "diagram", "both"}));
  mg->callback([&] { action = [&] { return run_marginal(rc, marginal); }; });

  auto* bd = app.add_subcommand("bound", "Generalized-loop count against its bound");
  add_common(bd, rc);
  bd->callback([&] { action = [&] { return run_bound(rc); }; });

  auto* is = app.add_subcommand("ising", "Uniform-coefficient theta and the Ising partition function");
  is->set_help_flag("--help", "Print this help message and exit");
  add_common(is, rc);
  is->add_option("--y", ising.y, "Node variable y, |y| < 1");
  is->add_option("--z", ising.z, "Edge variable z = tanh K, |z| < 1");
  is->add_option("--K", ising.coupling, "Coupling K");
  is->add_option("--h", ising.field, "Field h");
  is->add_option("--check", ising.check, "corollary or susceptibility")
      ->check(CLI::IsMember({"corollary", "susceptibility"}));
  is->callback([&] { action = [&] { return run_ising(rc, ising); }; });

  auto* vf = app.add_subcommand("verify", "Run every identity check on one graph");
  add_common(vf, rc);
  vf->add_option("--expected", verify.expected, "Regression fixture with beta, gamma and loop terms");
  vf->callback([&] { action = [&] { return run_verify(rc, verify); }; });

  auto* rd = app.add_subcommand("random", "Emit a seeded random graph file");
  rd->add_option("--output", rc.output, "Write the graph to this file instead of stdout");
  rd->add_option("--max-edges", random.max_edges, "Edge limit")->check(CLI::PositiveNumber);
  rd->add_option("--seed", random.seed, "Random seed");
  rd->add_option("--nodes", random.nodes, "Number of nodes")->check(CLI::PositiveNumber);
  rd->add_option("--kind", random.kind, "connected, tree or cycle")
      ->check(CLI::IsMember({"connected", "tree", "cycle"}));
  rd->callback([&] { action = [&] { return run_random(random); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    error_line(err, "input", e.what(), kExitInput);
    return kExitInput;
  }

  try {
    const Json report = action();
    emit(rc, report, out);
    if (report.contains("passed") && !report["passed"].get<bool>()) {
      error_line(err, "identity", "one or more checks failed", kExitIdentity);
      return kExitIdentity;
    }
    return kExitOk;
  } catch (const InputError& e) {
    error_line(err, "input", e.what(), kExitInput);
    return kExitInput;
  } catch (const NotConverged& e) {
    error_line(err, "not_converged", e.what(), kExitNotConverged);
    return kExitNotConverged;
  } catch (const IdentityViolation& e) {
    error_line(err, "identity", e.what(), kExitIdentity);
    return kExitIdentity;
  } catch (const Json::exception& e) {
    error_line(err, "input", e.what(), kExitInput);
    return kExitInput;
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what(), kExitInput);
    return kExitInput;
  }
}

}  // namespace loopseries
