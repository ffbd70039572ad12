#include "prefcon/winnow.hpp"

#include "prefcon/error.hpp"
#include "prefcon/io.hpp"

#include <boost/tokenizer.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace prefcon {
namespace {

std::vector<std::string> csv_fields(const std::string& line, std::size_t line_no) {
  try {
    boost::tokenizer<boost::escaped_list_separator<char>> tok(line);
    return {tok.begin(), tok.end()};
  } catch (const boost::escaped_list_error& e) {
    throw Error(Errc::parse_error, "row " + std::to_string(line_no) + ": " + e.what(), {{"row", line_no}});
  }
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\\\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string plain(const Literal& v) { return v.is_rational() ? to_string(v) : v.text(); }

bool is_formula(const PreferenceSource& s) { return std::holds_alternative<DnfFormula>(s); }

// Keys of rows in the unary selection: starts or ends of a relation.
std::unordered_set<NodeId> selected(const PreferenceSource& r, const Dataset& data, bool starts) {
  std::unordered_set<NodeId> out;
  if (const auto* f = std::get_if<FiniteRelation>(&r)) {
    for (const auto& e : *f) out.insert(starts ? e.from : e.to);
    return out;
  }
  const DnfFormula side = project_side(std::get<DnfFormula>(r), starts ? Side::left : Side::right);
  for (const auto& row : data.rows)
    if (eval_unary(side, row.values)) out.insert(row.key);
  return out;
}

}  // namespace

std::vector<NodeId> Dataset::keys() const {
  std::vector<NodeId> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.key);
  return out;
}

Dataset Dataset::select(const std::vector<NodeId>& ks) const {
  const std::set<NodeId> wanted(ks.begin(), ks.end());
  Dataset out{schema, {}};
  for (const auto& r : rows)
    if (wanted.count(r.key)) out.rows.push_back(r);
  return out;
}

void validate_dataset(const Dataset& d) {
  if (!d.schema) throw Error(Errc::precondition, "dataset has no schema");
  std::set<NodeId> seen;
  for (const auto& r : d.rows) {
    if (!seen.insert(r.key).second) throw Error(Errc::duplicate_key, "duplicate row key " + r.key, {{"key", r.key}});
    if (r.values.size() != d.schema->size())
      throw Error(Errc::precondition, "row " + r.key + " is not total over the schema");
    for (std::size_t i = 0; i < r.values.size(); ++i)
      if (r.values[i].is_rational() != (d.schema->at(i).domain == Domain::Q))
        throw Error(Errc::precondition, "row " + r.key + " has a value of the wrong kind for " + d.schema->at(i).name);
  }
}

Dataset parse_dataset(std::string_view csv, SchemaPtr schema) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t line_no = 0;
  Dataset out{schema, {}};
  std::vector<std::optional<std::size_t>> column_attr;  // nullopt marks the key column
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = csv_fields(line, line_no);
    if (!header) {
      header = true;
      std::set<std::size_t> seen;
      bool key = false;
      for (const auto& name : fields) {
        if (name == "id") {
          key = true;
          column_attr.push_back(std::nullopt);
          continue;
        }
        auto a = schema->find(name);
        if (!a || !seen.insert(*a).second)
          throw Error(Errc::parse_error, "header column '" + name + "' is not a schema attribute", {{"row", 1}});
        column_attr.push_back(*a);
      }
      if (!key || seen.size() != schema->size())
        throw Error(Errc::parse_error, "header must name `id` and every schema attribute", {{"row", line_no}});
      continue;
    }
    if (fields.size() != column_attr.size())
      throw Error(Errc::parse_error, "row " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                         " fields, expected " + std::to_string(column_attr.size()),
                  {{"row", line_no}});
    Row row;
    row.values.resize(schema->size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (!column_attr[c]) {
        row.key = fields[c];
        continue;
      }
      const std::size_t a = *column_attr[c];
      if (schema->at(a).domain == Domain::C) {
        row.values[a] = Literal(fields[c]);
        continue;
      }
      auto q = parse_rational(fields[c]);
      if (!q)
        throw Error(Errc::parse_error,
                    "row " + std::to_string(line_no) + ", column " + schema->at(a).name + ": '" + fields[c] +
                        "' is not a number",
                    {{"row", line_no}, {"column", schema->at(a).name}});
      row.values[a] = Literal(*q);
    }
    out.rows.push_back(std::move(row));
  }
  if (!header) throw Error(Errc::parse_error, "missing header row", {{"row", 1}});
  validate_dataset(out);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, SchemaPtr schema) {
  return parse_dataset(read_file(path), std::move(schema));
}

std::string format_dataset(const Dataset& d, const std::vector<int>* ranks) {
  std::string out = "id";
  for (const auto& a : d.schema->attributes()) out += "," + csv_quote(a.name);
  if (ranks) out += ",winnow_rank";
  out += "\n";
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    out += csv_quote(d.rows[i].key);
    for (const auto& v : d.rows[i].values) out += "," + csv_quote(plain(v));
    if (ranks) out += "," + std::to_string(ranks->at(i));
    out += "\n";
  }
  return out;
}

nlohmann::json to_json(const Dataset& d) {
  auto rows = nlohmann::json::array();
  for (const auto& r : d.rows) {
    auto values = nlohmann::json::object();
    for (std::size_t i = 0; i < r.values.size(); ++i) values[d.schema->at(i).name] = plain(r.values[i]);
    rows.push_back({{"id", r.key}, {"values", values}});
  }
  return {{"schema", d.schema ? to_json(*d.schema) : nlohmann::json(nullptr)}, {"rows", rows}};
}

bool dominates(const PreferenceSource& s, const Row& better, const Row& worse) {
  if (const auto* f = std::get_if<FiniteRelation>(&s)) return f->contains(better.key, worse.key);
  return eval_pair(std::get<DnfFormula>(s), better.values, worse.values);
}

Dataset winnow(const PreferenceSource& source, const Dataset& data) {
  if (const auto* f = std::get_if<FiniteRelation>(&source)) {
    auto rep = spo_check(*f);
    if (!rep.is_spo())
      throw Error(Errc::not_spo, "preference relation is not a strict partial order",
                  {{"witness", rep.witness ? nlohmann::json(*rep.witness) : nlohmann::json(nullptr)}});
  }
  Dataset out{data.schema, {}};
  for (const auto& t : data.rows) {
    const bool beaten =
        std::any_of(data.rows.begin(), data.rows.end(), [&](const Row& u) { return dominates(source, u, t); });
    if (!beaten) out.rows.push_back(t);
  }
  return out;
}

std::vector<int> winnow_ranks(const PreferenceSource& source, const Dataset& data) {
  std::map<NodeId, int> rank;
  Dataset rest = data;
  for (int level = 1; !rest.rows.empty(); ++level) {
    const Dataset top = winnow(source, rest);
    std::set<NodeId> taken;
    for (const auto& r : top.rows) {
      rank[r.key] = level;
      taken.insert(r.key);
    }
    std::erase_if(rest.rows, [&](const Row& r) { return taken.count(r.key) > 0; });
  }
  std::vector<int> out;
  for (const auto& r : data.rows) out.push_back(rank.at(r.key));
  return out;
}

PreferenceSource contracted_source(const PreferenceSource& pref, const PreferenceSource& contractor) {
  if (pref.index() != contractor.index())
    throw Error(Errc::precondition, "preference and contractor use different representations");
  if (is_formula(pref)) return compact(and_not(std::get<DnfFormula>(pref), std::get<DnfFormula>(contractor)));
  return std::get<FiniteRelation>(pref) - std::get<FiniteRelation>(contractor);
}

std::string_view to_string(WinnowStrategy s) {
  return s == WinnowStrategy::unchanged ? "UNCHANGED" : "REWINNOW_CANDIDATES";
}

nlohmann::json to_json(const StrategyReport& r) {
  return {{"strategy", std::string(to_string(r.strategy))},
          {"used_con_starts", r.used_con_starts},
          {"start_hits", r.start_hits},
          {"candidates", r.candidates}};
}

ContractedWinnow winnow_after_contraction(const PreferenceSource& pref, const PreferenceSource& contractor,
                                          const PreferenceSource& con, const Dataset& data,
                                          const std::optional<Dataset>& cached, bool prefix) {
  if (pref.index() != con.index()) throw Error(Errc::precondition, "base contractor uses a different representation");
  const PreferenceSource after = contracted_source(pref, contractor);
  const Dataset base = cached ? *cached : winnow(pref, data);
  ContractedWinnow out{base, {}};
  out.report.used_con_starts = prefix;
  const auto starts = selected(prefix ? con : contractor, base, true);
  out.report.start_hits =
      static_cast<std::size_t>(std::count_if(base.rows.begin(), base.rows.end(), [&](const Row& r) {
        return starts.count(r.key) > 0;
      }));
  if (out.report.start_hits == 0) {
    out.report.strategy = WinnowStrategy::unchanged;
    return out;
  }
  const auto ends = selected(contractor, data, false);
  std::vector<NodeId> keep = base.keys();
  keep.insert(keep.end(), ends.begin(), ends.end());
  const Dataset candidates = data.select(keep);
  out.report.strategy = WinnowStrategy::rewinnow_candidates;
  out.report.candidates = candidates.rows.size();
  out.result = winnow(after, candidates);
  return out;
}

SkylineSpec parse_skyline_spec(std::string_view text) {
  SkylineSpec out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Errc::parse_error, "skyline spec item '" + item + "' lacks '='");
    std::string dir = item.substr(eq + 1);
    std::transform(dir.begin(), dir.end(), dir.begin(), [](unsigned char c) { return std::tolower(c); });
    SkylineDirection d;
    if (dir == "min") d = SkylineDirection::min;
    else if (dir == "max") d = SkylineDirection::max;
    else if (dir == "ignore") d = SkylineDirection::ignore;
    else throw Error(Errc::parse_error, "unknown skyline direction '" + dir + "'");
    out.directions.emplace_back(item.substr(0, eq), d);
  }
  return out;
}

FiniteRelation skyline_relation(const Dataset& data, const SkylineSpec& spec) {
  std::vector<std::pair<std::size_t, SkylineDirection>> dirs;
  for (const auto& [name, d] : spec.directions) {
    auto a = data.schema->find(name);
    if (!a) throw Error(Errc::precondition, "unknown attribute " + name);
    if (d == SkylineDirection::ignore) continue;
    if (data.schema->at(*a).domain != Domain::Q)
      throw Error(Errc::spec_on_c_attribute, "skyline direction on C attribute " + name, {{"attribute", name}});
    dirs.emplace_back(*a, d);
  }
  FiniteRelation out;
  if (dirs.empty()) return out;
  for (const auto& t : data.rows)
    for (const auto& u : data.rows) {
      bool strict = false, weak = true;
      for (const auto& [a, d] : dirs) {
        const auto& x = t.values[a].rational();
        const auto& y = u.values[a].rational();
        const bool better = d == SkylineDirection::min ? x < y : x > y;
        const bool worse = d == SkylineDirection::min ? x > y : x < y;
        if (worse) {
          weak = false;
          break;
        }
        strict = strict || better;
      }
      if (weak && strict) out.insert(t.key, u.key);
    }
  return out;
}

}  // namespace prefcon
