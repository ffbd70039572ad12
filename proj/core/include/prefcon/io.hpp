#pragma once

#include "prefcon/contract_finite.hpp"
#include "prefcon/formula.hpp"
#include "prefcon/relation.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>

namespace prefcon {

using Warn = std::function<void(const std::string&)>;

// `from<TAB>to` per line, `#` starts a comment line. Duplicate edges are
// merged and reported once through `warn`.
FiniteRelation parse_edge_list(std::string_view text, const Warn& warn = {});
std::string format_edge_list(const FiniteRelation& r);

nlohmann::json to_json(const FiniteRelation& r);  // {"edges": [[a, b], ...]}
FiniteRelation relation_from_json(const nlohmann::json& j, const Warn& warn = {});
nlohmann::json edges_json(const FiniteRelation& r);  // [[a, b], ...]
FiniteRelation relation_from_edges_json(const nlohmann::json& edges, const Warn& warn = {});

// Reads either format, chosen by the first non-blank character.
FiniteRelation load_relation(const std::filesystem::path& path, const Warn& warn = {});

SchemaPtr schema_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Schema& s);
SchemaPtr load_schema(const std::filesystem::path& path);

DnfFormula load_formula(const std::filesystem::path& path, SchemaPtr schema);

// "prefix", "meet", "protecting" or "protecting-meet".
ContractionMode parse_mode(std::string_view text);
nlohmann::json to_json(const ContractionResult& r);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace prefcon
