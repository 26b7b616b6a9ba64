#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "spg/ensemble.hpp"
#include "spg/model.hpp"
#include "spg/oracle.hpp"

namespace spg::io {

using Json = nlohmann::ordered_json;

/// {"n_users", "n_units", "edges": [{"u","a","w","v"}], "capacities", "p"}
Json to_json(const GameInstance& inst);
/// Accepts the format above; "p" and a "params" provenance block are optional.
GameInstance instance_from_json(const Json& j);

/// Integer array, -1 for Disconnected.
Json to_json(const Assignment& x);
/// Array form, or {"choice": [...], "active": [...]}.
Assignment assignment_from_json(const GameInstance& inst, const Json& j);

Json to_json(const oracle::EquilibriumCensus& census);

Json to_json(const EnsembleParams& p);
/// Unknown keys are rejected.
EnsembleParams params_from_json(const Json& j, EnsembleParams base = {});

Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const Json& j);

/// Shortest round-trip decimal form; keeps CSV output byte-stable.
std::string fmt(double x);

}  // namespace spg::io
