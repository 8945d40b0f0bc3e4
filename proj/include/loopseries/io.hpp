#pragma once

// JSON graph files and report serialization.
//
// Graph file: {"nodes": N, "edges": [{"i": a, "j": b, "psi": [[p, q], [r, s]]}, ...],
//              "phi": [[u, v], ...]}   (phi optional)
// with state index 0 meaning x = +1.

#include <filesystem>
#include <string>

#include "json.hpp"

#include "loopseries/graph_model.hpp"
#include "loopseries/lbp.hpp"
#include "loopseries/loop_series.hpp"
#include "loopseries/marginal_expansion.hpp"
#include "loopseries/messages.hpp"

namespace loopseries {

using Json = nlohmann::json;

/// Throws InputError naming the offending field.
Mrf graph_from_json(const Json& j);
Json graph_to_json(const Mrf& m);

Mrf load_graph(const std::filesystem::path& path);
void save_graph(const Mrf& m, const std::filesystem::path& path);

/// Parses text, mapping parse failures to InputError.
Json parse_json(const std::string& text, const std::string& what);

std::string edge_key(const Edge& e);

Json to_json(const FixedPointReport& r, const Mrf& m);
Json to_json(const Coefficients& k, const Mrf& m);
Json to_json(const GeneralizedLoop& c, const Mrf& m);
Json to_json(const PropagationReport& r);
Json to_json(const LoopCountBound& b);
Json to_json(const MarginalExpansion& x);
Json to_json(const DiagramExpansion& x);

}  // namespace loopseries
