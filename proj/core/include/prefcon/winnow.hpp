#pragma once

#include "prefcon/formula.hpp"
#include "prefcon/relation.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prefcon {

struct Row {
  NodeId key;
  TupleValue values;

  bool operator==(const Row&) const = default;
};

struct Dataset {
  SchemaPtr schema;
  std::vector<Row> rows;

  std::vector<NodeId> keys() const;
  // Rows of this dataset whose key is in `keys`, in dataset order.
  Dataset select(const std::vector<NodeId>& keys) const;
};

// Throws DUPLICATE_KEY or precondition (a row not total over the schema).
void validate_dataset(const Dataset& d);

// CSV with a header row: the key column `id` followed by the schema
// attributes in any order. Q values parse as exact rationals.
Dataset parse_dataset(std::string_view csv, SchemaPtr schema);
Dataset load_dataset(const std::filesystem::path& path, SchemaPtr schema);
// `id` plus the schema attributes; with ranks, an extra `winnow_rank` column.
std::string format_dataset(const Dataset& d, const std::vector<int>* ranks = nullptr);

nlohmann::json to_json(const Dataset& d);

// Either an explicit relation over row keys or a formula over the schema.
using PreferenceSource = std::variant<FiniteRelation, DnfFormula>;

bool dominates(const PreferenceSource& s, const Row& better, const Row& worse);

// Undominated rows, in input order. Throws NOT_SPO for a finite source that
// is not a strict partial order.
Dataset winnow(const PreferenceSource& source, const Dataset& data);

// 1 for the winnow, 2 for the winnow of what remains, and so on.
std::vector<int> winnow_ranks(const PreferenceSource& source, const Dataset& data);

PreferenceSource contracted_source(const PreferenceSource& pref, const PreferenceSource& contractor);

enum class WinnowStrategy { unchanged, rewinnow_candidates };

std::string_view to_string(WinnowStrategy s);

struct StrategyReport {
  WinnowStrategy strategy = WinnowStrategy::unchanged;
  bool used_con_starts = false;   // S(CON) stood in for S(P⁻)
  std::size_t start_hits = 0;     // winnow rows that start a contractor edge
  std::size_t candidates = 0;     // rows re-winnowed
};

nlohmann::json to_json(const StrategyReport& r);

struct ContractedWinnow {
  Dataset result;
  StrategyReport report;
};

// Winnow under pref − contractor, reusing the winnow under pref. When no
// winnow row starts a contractor edge the old result stands; otherwise only
// the old winnow and the ends of contractor edges are re-winnowed. With
// `prefix` set, the starts of con are used in place of the contractor's.
ContractedWinnow winnow_after_contraction(const PreferenceSource& pref, const PreferenceSource& contractor,
                                          const PreferenceSource& con, const Dataset& data,
                                          const std::optional<Dataset>& cached = std::nullopt, bool prefix = false);

enum class SkylineDirection { min, max, ignore };

struct SkylineSpec {
  std::vector<std::pair<std::string, SkylineDirection>> directions;
};

// "price=min,year=max"; unnamed attributes are ignored.
SkylineSpec parse_skyline_spec(std::string_view text);

// Pareto dominance over the directed attributes. Throws SPEC_ON_C_ATTRIBUTE
// when a direction names a C attribute, precondition for an unknown name.
FiniteRelation skyline_relation(const Dataset& data, const SkylineSpec& spec);

}  // namespace prefcon
