#include "loopseries/io.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace loopseries {

namespace {

double positive_number(const Json& v, const std::string& field) {
  if (!v.is_number()) throw InputError(field + ": expected a number");
  const double x = v.get<double>();
  if (!(x > 0.0) || !std::isfinite(x)) throw InputError(field + ": expected a positive finite number");
  return x;
}

int integer_field(const Json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key)) throw InputError(field + ": missing");
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw InputError(field + ": expected an integer");
  return v.get<int>();
}

Json vec2(const Vec2& v) { return Json::array({v[0], v[1]}); }
Json table(const Table2& t) { return Json::array({vec2(t[0]), vec2(t[1])}); }

Json edge_list(const std::vector<std::size_t>& edges, const Mrf& m) {
  Json out = Json::array();
  for (std::size_t e : edges) out.push_back(Json::array({m.edge(e).i, m.edge(e).j}));
  return out;
}

}  // namespace

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(what + ": malformed JSON at byte " + std::to_string(e.byte));
  }
}

Mrf graph_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("graph: expected a JSON object");
  const int n = integer_field(j, "nodes", "nodes");
  if (n < 1) throw InputError("nodes: must be a positive integer");
  if (!j.contains("edges") || !j.at("edges").is_array()) throw InputError("edges: expected an array");
  std::vector<EdgeSpec> specs;
  const Json& edges = j.at("edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string field = "edges[" + std::to_string(k) + "]";
    const Json& e = edges[k];
    if (!e.is_object()) throw InputError(field + ": expected an object");
    EdgeSpec s{integer_field(e, "i", field + ".i"), integer_field(e, "j", field + ".j"), {}};
    if (!e.contains("psi")) throw InputError(field + ".psi: missing");
    const Json& psi = e.at("psi");
    if (!psi.is_array() || psi.size() != 2) throw InputError(field + ".psi: expected a 2x2 array");
    for (int a = 0; a < 2; ++a) {
      if (!psi[a].is_array() || psi[a].size() != 2) throw InputError(field + ".psi: expected a 2x2 array");
      for (int c = 0; c < 2; ++c) {
        s.psi[a][c] = positive_number(psi[a][c], field + ".psi[" + std::to_string(a) + "][" + std::to_string(c) + "]");
      }
    }
    specs.push_back(s);
  }
  std::optional<std::vector<Vec2>> phi;
  if (j.contains("phi") && !j.at("phi").is_null()) {
    const Json& p = j.at("phi");
    if (!p.is_array() || static_cast<int>(p.size()) != n) throw InputError("phi: expected one pair per node");
    phi.emplace();
    for (int v = 0; v < n; ++v) {
      const std::string field = "phi[" + std::to_string(v) + "]";
      if (!p[v].is_array() || p[v].size() != 2) throw InputError(field + ": expected a pair");
      phi->push_back({positive_number(p[v][0], field + "[0]"), positive_number(p[v][1], field + "[1]")});
    }
  }
  return Mrf(n, std::move(specs), std::move(phi));
}

Json graph_to_json(const Mrf& m) {
  Json edges = Json::array();
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    if (m.is_delta(e)) throw InputError("graph: delta edges cannot be written to a graph file");
    edges.push_back({{"i", m.edge(e).i}, {"j", m.edge(e).j}, {"psi", table(m.psi(e))}});
  }
  Json out{{"nodes", m.node_count()}, {"edges", edges}};
  if (m.has_phi()) {
    Json phi = Json::array();
    for (const Vec2& v : m.phi()) phi.push_back(vec2(v));
    out["phi"] = phi;
  }
  return out;
}

Mrf load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("graph: cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return graph_from_json(parse_json(text.str(), "graph"));
}

void save_graph(const Mrf& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("output: cannot open " + path.string());
  out << graph_to_json(m).dump(2) << '\n';
}

std::string edge_key(const Edge& e) { return std::to_string(e.i) + "-" + std::to_string(e.j); }

Json to_json(const FixedPointReport& r, const Mrf& m) {
  Json nodes = Json::array();
  for (const Vec2& b : r.beliefs.node) nodes.push_back(vec2(b));
  Json edges = Json::array();
  Json messages = Json::array();
  for (std::size_t e = 0; e < m.edge_count(); ++e) {
    edges.push_back({{"i", m.edge(e).i}, {"j", m.edge(e).j}, {"b", table(r.beliefs.edge[e])}});
    for (std::size_t slot : {2 * e, 2 * e + 1}) {
      messages.push_back({{"to", m.slot_target(slot)}, {"from", m.slot_source(slot)}, {"value", vec2(r.messages.values[slot])}});
    }
  }
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"residual", r.residual},
          {"bethe_log_z", r.bethe_log_z},
          {"z_bethe", std::exp(r.bethe_log_z)},
          {"beliefs", {{"node", nodes}, {"edge", edges}}},
          {"messages", messages}};
}

Json to_json(const Coefficients& k, const Mrf& m) {
  Json beta = Json::object();
  for (std::size_t e = 0; e < m.edge_count(); ++e) beta[edge_key(m.edge(e))] = k.beta[e];
  Json gamma = Json::object();
  for (NodeId v = 0; v < m.node_count(); ++v) gamma[std::to_string(v)] = k.gamma[v];
  return {{"beta", beta}, {"gamma", gamma}};
}

Json to_json(const GeneralizedLoop& c, const Mrf& m) {
  Json degrees = Json::object();
  for (const auto& [v, d] : c.degrees) degrees[std::to_string(v)] = d;
  return {{"edges", edge_list(c.edges, m)}, {"degrees", degrees}};
}

Json to_json(const PropagationReport& r) {
  Json checks = Json::array();
  for (const RuleCheck& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"max_error", c.max_error},
                      {"tolerance", c.tolerance},
                      {"evaluations", c.evaluations},
                      {"passed", c.passed()}});
  }
  return {{"passed", r.passed()}, {"checks", checks}};
}

Json to_json(const LoopCountBound& b) {
  return {{"count", b.count}, {"bound", b.bound}, {"tight", b.tight}, {"cycle_rank", b.cycle_rank}};
}

Json to_json(const MarginalExpansion& x) {
  return {{"node", x.node},
          {"belief", vec2(x.belief)},
          {"p", vec2(x.p)},
          {"z_over_z_bethe", x.z_ratio},
          {"leaf_pairs", x.leaf_pairs},
          {"four_terms",
           {{"mu_mu", x.four_terms.mu_mu},
            {"nu_nu", x.four_terms.nu_nu},
            {"mu_nu", x.four_terms.mu_nu},
            {"nu_mu", x.four_terms.nu_mu}}}};
}

Json to_json(const DiagramExpansion& x) {
  const Mrf& m = x.prepared.model;
  Json terms = Json::array();
  for (const DiagramTerm& t : x.terms) {
    terms.push_back({{"edges", edge_list(t.edges, m)},
                     {"target_degree", t.target_degree},
                     {"weight_plus", t.weight_plus},
                     {"weight_minus", t.weight_minus}});
  }
  return {{"node", x.prepared.original_target},
          {"prepared_node", x.prepared.target},
          {"subdivided", x.prepared.subdivided},
          {"p", vec2(x.p)},
          {"discriminant", x.discriminant},
          {"diagram_terms", terms}};
}

}  // namespace loopseries
