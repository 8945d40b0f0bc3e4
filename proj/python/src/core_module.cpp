#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "loopseries/cli.hpp"
#include "loopseries/exact_oracle.hpp"
#include "loopseries/generators.hpp"
#include "loopseries/io.hpp"
#include "loopseries/ising.hpp"
#include "loopseries/loop_series.hpp"
#include "loopseries/marginal_expansion.hpp"
#include "loopseries/messages.hpp"

namespace py = pybind11;
using namespace loopseries;

namespace {

py::object to_python(const Json& j) {
  switch (j.type()) {
    case Json::value_t::null:
      return py::none();
    case Json::value_t::boolean:
      return py::bool_(j.get<bool>());
    case Json::value_t::number_integer:
      return py::int_(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return py::int_(j.get<std::uint64_t>());
    case Json::value_t::number_float:
      return py::float_(j.get<double>());
    case Json::value_t::string:
      return py::str(j.get<std::string>());
    case Json::value_t::array: {
      py::list out;
      for (const Json& x : j) out.append(to_python(x));
      return std::move(out);
    }
    case Json::value_t::object: {
      py::dict out;
      for (const auto& [k, v] : j.items()) out[py::str(k)] = to_python(v);
      return std::move(out);
    }
    default:
      throw std::runtime_error("unsupported JSON value");
  }
}

LbpConfig make_config(double tol, int max_iters, double damping) {
  LbpConfig c;
  c.tolerance = tol;
  c.max_iterations = max_iters;
  c.damping = damping;
  return c;
}

py::dict loop_series_dict(const Mrf& m, const LbpConfig& cfg) {
  const LoopSeries s = loop_series_partition(m, cfg);
  py::list terms;
  for (const LoopTerm& t : s.terms) {
    py::list edges;
    for (std::size_t e : t.loop.edges) edges.append(py::make_tuple(m.edge(e).i, m.edge(e).j));
    py::dict d;
    d["edges"] = edges;
    d["r"] = t.r;
    terms.append(d);
  }
  py::dict out;
  out["z_bethe"] = s.z_bethe;
  out["log_z_bethe"] = s.log_z_bethe;
  out["theta"] = s.theta;
  out["z_estimate"] = s.z_estimate;
  out["beta"] = s.coefficients.beta;
  out["gamma"] = s.coefficients.gamma;
  out["terms"] = terms;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Loop series for binary pairwise Markov random fields";

  static py::exception<InputError> input_error(mod, "InputError", PyExc_ValueError);
  static py::exception<NotConverged> not_converged(mod, "NotConverged", PyExc_RuntimeError);
  static py::exception<IdentityViolation> identity_violation(mod, "IdentityViolation", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const InputError& e) {
      py::set_error(input_error, e.what());
    } catch (const NotConverged& e) {
      py::set_error(not_converged, e.what());
    } catch (const IdentityViolation& e) {
      py::set_error(identity_violation, e.what());
    } catch (const Json::exception& e) {
      py::set_error(input_error, e.what());
    }
  });

  py::class_<Mrf>(mod, "Graph")
      .def_static(
          "from_json", [](const std::string& text) { return graph_from_json(parse_json(text, "graph")); },
          py::arg("text"))
      .def_static("load", [](const std::string& path) { return load_graph(path); }, py::arg("path"))
      .def_static("cycle", &cycle_shape, py::arg("n"), "Cycle with Ising-ready identity potentials.")
      .def_static("complete", &complete_shape, py::arg("n"))
      .def_static(
          "random",
          [](std::uint64_t seed, int nodes, int max_edges) {
            Rng rng(seed);
            return random_connected_graph(rng, nodes, max_edges);
          },
          py::arg("seed"), py::arg("nodes"), py::arg("max_edges"))
      .def("to_json", [](const Mrf& m) { return graph_to_json(m).dump(); })
      .def_property_readonly("node_count", &Mrf::node_count)
      .def_property_readonly("edge_count", &Mrf::edge_count)
      .def_property_readonly("edges",
                             [](const Mrf& m) {
                               std::vector<std::pair<int, int>> out;
                               for (const Edge& e : m.edges()) out.emplace_back(e.i, e.j);
                               return out;
                             })
      .def("psi", [](const Mrf& m, std::size_t e) {
        if (e >= m.edge_count()) throw InputError("edge index out of range");
        return m.psi(e);
      })
      .def_property_readonly("cycle_rank", &cycle_rank)
      .def("__repr__", [](const Mrf& m) {
        std::ostringstream s;
        s << "<Graph nodes=" << m.node_count() << " edges=" << m.edge_count() << ">";
        return s.str();
      });

  mod.def("exact_partition", [](const Mrf& m) { return exact_partition(m); }, py::arg("graph"));
  mod.def("exact_marginals", [](const Mrf& m) { return exact_marginals(m); }, py::arg("graph"));

  mod.def(
      "lbp",
      [](const Mrf& m, double tol, int max_iters, double damping) {
        return to_python(to_json(run_lbp(m, make_config(tol, max_iters, damping)), m));
      },
      py::arg("graph"), py::arg("tol") = 1e-12, py::arg("max_iters") = 10000, py::arg("damping") = 0.5);

  mod.def(
      "loop_series",
      [](const Mrf& m, double tol, int max_iters, double damping) {
        return loop_series_dict(m, make_config(tol, max_iters, damping));
      },
      py::arg("graph"), py::arg("tol") = 1e-12, py::arg("max_iters") = 10000, py::arg("damping") = 0.5);

  mod.def(
      "coefficients",
      [](const Mrf& m) {
        const FixedPointReport& r = require_converged(run_lbp(m));
        return to_python(to_json(coefficients(m, r.beliefs), m));
      },
      py::arg("graph"));

  mod.def("loop_count_bound", [](const Mrf& m) { return to_python(to_json(loop_count_bound(m))); },
          py::arg("graph"));

  mod.def(
      "marginal",
      [](const Mrf& m, int node, const std::string& mode) {
        if (mode == "transfer") return to_python(to_json(marginal_via_transfer(m, node)));
        if (mode == "diagram") return to_python(to_json(marginal_diagram_expansion(m, node)));
        throw InputError("mode: expected 'transfer' or 'diagram'");
      },
      py::arg("graph"), py::arg("node"), py::arg("mode") = "transfer");

  mod.def("f_eval", &f_eval, py::arg("n"), py::arg("x"));
  mod.def("f_poly", &f_poly, py::arg("n"));

  mod.def(
      "ising_corollary",
      [](const Mrf& shape, double y, double z) {
        const IsingCorrespondence c = corollary_change_of_variables(shape, y, z);
        py::dict out;
        out["beta"] = c.beta;
        out["gamma"] = c.gamma;
        out["coupling"] = c.coupling;
        out["field"] = c.field;
        out["theta_enumeration"] = c.theta_enumeration;
        out["theta_identity"] = c.theta_identity;
        out["z_ising"] = c.z_ising;
        out["rel_error"] = c.rel_error;
        return out;
      },
      py::arg("shape"), py::arg("y"), py::arg("z"));

  mod.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
