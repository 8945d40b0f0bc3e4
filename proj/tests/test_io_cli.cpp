#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "loopseries/cli.hpp"
#include "loopseries/generators.hpp"
#include "loopseries/io.hpp"
#include "support.hpp"

using namespace loopseries;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  Json out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  Json parsed = out.str().empty() ? Json() : Json::parse(out.str(), nullptr, false);
  return {code, parsed, err.str()};
}

fs::path temp_file(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("loopseries_test_" + name);
  std::ofstream(p) << text;
  return p;
}

const std::string kTwoNode = R"({"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[2, 1], [1, 2]]}]})";

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("graph round trip") {
    const Mrf f = testsupport::diamond_bundled();
    const Mrf g = graph_from_json(graph_to_json(f));
    CHECK(g.edges() == f.edges());
    for (std::size_t e = 0; e < f.edge_count(); ++e) CHECK(g.psi(e) == f.psi(e));

    Rng rng(4);
    const Mrf r = random_connected_graph(rng, 7, 11);
    const Json once = graph_to_json(r);
    const Json twice = graph_to_json(graph_from_json(parse_json(once.dump(), "graph")));
    CHECK(once.dump() == twice.dump());
  }

  TEST_CASE("bundled file matches the inline copy") {
    const Mrf g = load_graph(testsupport::kDataDir + "/diamond.json");
    const Mrf f = testsupport::diamond_bundled();
    CHECK(g.edges() == f.edges());
    for (std::size_t e = 0; e < f.edge_count(); ++e) CHECK(g.psi(e) == f.psi(e));
  }

  TEST_CASE("errors name the offending field") {
    auto message = [](const std::string& text) -> std::string {
      try {
        graph_from_json(parse_json(text, "graph"));
      } catch (const InputError& e) {
        return e.what();
      }
      return "";
    };
    CHECK(message("[1, 2]").find("graph") != std::string::npos);
    CHECK(message(R"({"edges": []})").find("nodes") == 0);
    CHECK(message(R"({"nodes": 2})").find("edges") == 0);
    CHECK(message(R"({"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[1, 1], [1]]}]})").find("edges[0].psi") == 0);
    CHECK(message(R"({"nodes": 2, "edges": [{"i": 0, "psi": [[1, 1], [1, 1]]}]})").find("edges[0].j") == 0);
    CHECK(message(R"({"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[1, 1], [1, "x"]]}]})")
              .find("edges[0].psi[1][1]") == 0);
    CHECK(message(R"({"nodes": 2, "edges": [{"i": 0, "j": 1, "psi": [[1, 1], [1, 1]]}], "phi": [[1, 1]]})")
              .find("phi") == 0);
    CHECK(message(R"({"nodes": 2, "edges": [)").find("graph: malformed JSON") == 0);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("exact on the 2-node example") {
    const Run r = run({"exact", "--graph", temp_file("two.json", kTwoNode).string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out["Z"].get<double>() == 6.0);
  }

  TEST_CASE("malformed input exits 1 with a one-line JSON error") {
    const Run bad = run({"exact", "--graph", temp_file("bad.json", R"({"nodes": 2, "edges": [{"i": 0, "j": 1}]})").string()});
    CHECK(bad.code == kExitInput);
    const Json err = Json::parse(bad.err);
    CHECK(err["error"] == "input");
    CHECK(err["message"].get<std::string>().find("edges[0].psi") != std::string::npos);
    CHECK(std::count(bad.err.begin(), bad.err.end(), '\n') == 1);

    CHECK(run({"exact"}).code == kExitInput);
    CHECK(run({"nonsense"}).code == kExitInput);
    CHECK(run({"lbp", "--graph", "/nonexistent/file.json"}).code == kExitInput);
    CHECK(run({"lbp", "--graph", temp_file("two2.json", kTwoNode).string(), "--damping", "1.5"}).code == kExitInput);
  }

  TEST_CASE("non-convergence exits 2") {
    const Run r = run({"lbp", "--graph", (testsupport::kDataDir + "/diamond.json"), "--max-iters", "2"});
    CHECK(r.code == kExitNotConverged);
    CHECK(Json::parse(r.err)["error"] == "not_converged");
  }

  TEST_CASE("verify on the bundled diamond graph") {
    const Run r = run({"verify", "--graph", testsupport::kDataDir + "/diamond.json", "--expected",
                       testsupport::kDataDir + "/diamond_expected.json"});
    CHECK(r.code == kExitOk);
    CHECK(r.out["passed"].get<bool>());
    CHECK(r.out["expansion_term_count"] == 5);
    int cycles = 0;
    int unions = 0;
    for (const Json& t : r.out["expansion"]) {
      if (t["edges"].empty()) continue;
      bool all_two = true;
      for (const auto& [node, d] : t["degrees"].items()) all_two = all_two && d == 2;
      (all_two ? cycles : unions) += 1;
    }
    CHECK(cycles == 3);
    CHECK(unions == 1);
  }

  TEST_CASE("verify reports a failed regression fixture with exit 3") {
    std::ifstream in(testsupport::kDataDir + "/diamond_expected.json");
    Json fx = Json::parse(in);
    fx["terms"][0]["r"] = fx["terms"][0]["r"].get<double>() + 1e-3;
    const fs::path p = temp_file("fixture.json", fx.dump());
    const Run r = run({"verify", "--graph", testsupport::kDataDir + "/diamond.json", "--expected", p.string()});
    CHECK(r.code == kExitIdentity);
    CHECK_FALSE(r.out["passed"].get<bool>());
  }

  TEST_CASE("expand, coeffs, bound, marginal") {
    const std::string g = testsupport::kDataDir + "/diamond.json";
    const Run e = run({"expand", "--graph", g, "--sort", "abs-r", "--max-terms", "2"});
    CHECK(e.code == 0);
    CHECK(e.out["term_count"] == 4);
    CHECK(e.out["terms"].size() == 2);
    CHECK(e.out["truncated"].get<bool>());
    CHECK(std::abs(e.out["terms"][0]["r"].get<double>()) >= std::abs(e.out["terms"][1]["r"].get<double>()));

    const Run c = run({"coeffs", "--graph", g, "--verify-rules"});
    CHECK(c.code == 0);
    CHECK(c.out["beta"].size() == 5);
    CHECK(c.out["gamma"].size() == 4);
    CHECK(c.out["propagation"]["passed"].get<bool>());

    const Run b = run({"bound", "--graph", g});
    CHECK(b.code == 0);
    CHECK(b.out["count"] == 5);
    CHECK(b.out["bound"].get<double>() == doctest::Approx(5.0));

    const Run m = run({"marginal", "--graph", g, "--node", "0", "--mode", "both"});
    CHECK(m.code == 0);
    CHECK(m.out["p_exactish"][0].get<double>() == doctest::Approx(0.81145714028679277346).epsilon(1e-10));
    CHECK(m.out["diagram_terms"].size() == 7);
    CHECK(m.out.contains("four_terms"));
    CHECK(run({"marginal", "--graph", g, "--node", "9"}).code == kExitInput);
  }

  TEST_CASE("ising subcommand") {
    const Run c = run({"ising", "--graph", "cycle:4", "--y", "0.2", "--z", "0.3"});
    CHECK(c.code == 0);
    CHECK(c.out["passed"].get<bool>());
    const Run k = run({"ising", "--graph", "complete:4", "--K", "0.2", "--h", "0.1"});
    CHECK(k.code == 0);
    CHECK(k.out["h"].get<double>() == doctest::Approx(0.1).epsilon(1e-12));
    const Run s = run({"ising", "--graph", "complete:4", "--K", "0.3", "--check", "susceptibility"});
    CHECK(s.code == 0);
    CHECK(s.out["rel_error"].get<double>() <= 1e-5);
    CHECK(run({"ising", "--graph", "cycle:x"}).code == kExitInput);
    CHECK(run({"ising", "--graph", "cycle:4", "--y", "1.5"}).code == kExitInput);
  }

  TEST_CASE("random is deterministic and round-trips") {
    const Run a = run({"random", "--seed", "17", "--nodes", "6", "--max-edges", "9"});
    const Run b = run({"random", "--seed", "17", "--nodes", "6", "--max-edges", "9"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const fs::path p = temp_file("random.json", a.out.dump());
    const Run x1 = run({"expand", "--graph", p.string()});
    const fs::path q = fs::temp_directory_path() / "loopseries_test_random_copy.json";
    save_graph(load_graph(p), q);
    const Run x2 = run({"expand", "--graph", q.string()});
    CHECK(x1.out.dump() == x2.out.dump());
  }

  TEST_CASE("output file") {
    const fs::path q = fs::temp_directory_path() / "loopseries_test_out.json";
    fs::remove(q);
    const Run r = run({"exact", "--graph", temp_file("two3.json", kTwoNode).string(), "--output", q.string()});
    CHECK(r.code == 0);
    std::ifstream in(q);
    CHECK(Json::parse(in)["Z"] == 6.0);
  }

  TEST_CASE("help exits 0") {
    std::ostringstream out, err;
    CHECK(run_cli({"--help"}, out, err) == 0);
    CHECK(out.str().find("verify") != std::string::npos);
  }
}
