#include "prefcon/io.hpp"

#include "prefcon/error.hpp"

#include <fstream>
#include <sstream>

namespace prefcon {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \r\n\t");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \r\n\t");
  return std::string(s.substr(b, e - b + 1));
}

void add_edge(FiniteRelation& r, Edge e, std::size_t& dups) {
  if (!r.insert(std::move(e))) ++dups;
}

void report_dups(std::size_t dups, const Warn& warn) {
  if (dups && warn) warn("merged " + std::to_string(dups) + " duplicate edge(s)");
}

}  // namespace

FiniteRelation parse_edge_list(std::string_view text, const Warn& warn) {
  FiniteRelation r;
  std::size_t dups = 0, line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": expected from<TAB>to",
                  {{"line", line_no}});
    std::string from = trim(std::string_view(line).substr(0, tab));
    std::string to = trim(std::string_view(line).substr(tab + 1));
    if (from.empty() || to.empty() || to.find('\t') != std::string::npos)
      throw Error(Errc::parse_error, "line " + std::to_string(line_no) + ": malformed edge",
                  {{"line", line_no}});
    add_edge(r, Edge{std::move(from), std::move(to)}, dups);
  }
  report_dups(dups, warn);
  return r;
}

std::string format_edge_list(const FiniteRelation& r) {
  std::string out;
  for (const auto& e : r) out += e.from + "\t" + e.to + "\n";
  return out;
}

nlohmann::json edges_json(const FiniteRelation& r) {
  auto arr = nlohmann::json::array();
  for (const auto& e : r) arr.push_back({e.from, e.to});
  return arr;
}

nlohmann::json to_json(const FiniteRelation& r) { return {{"edges", edges_json(r)}}; }

FiniteRelation relation_from_edges_json(const nlohmann::json& edges, const Warn& warn) {
  if (!edges.is_array()) throw Error(Errc::parse_error, "edges must be an array of [from, to] pairs");
  FiniteRelation r;
  std::size_t dups = 0;
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string())
      throw Error(Errc::parse_error, "edge must be a [from, to] pair of strings");
    add_edge(r, Edge{e[0].get<std::string>(), e[1].get<std::string>()}, dups);
  }
  report_dups(dups, warn);
  return r;
}

FiniteRelation relation_from_json(const nlohmann::json& j, const Warn& warn) {
  if (!j.is_object() || !j.contains("edges"))
    throw Error(Errc::parse_error, "expected an object with an \"edges\" array");
  return relation_from_edges_json(j.at("edges"), warn);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
  out << content;
}

FiniteRelation load_relation(const std::filesystem::path& path, const Warn& warn) {
  const std::string text = read_file(path);
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::parse_error, path.string() + ": " + e.what());
    }
    return relation_from_json(j, warn);
  }
  return parse_edge_list(text, warn);
}

SchemaPtr schema_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("attributes") || !j.at("attributes").is_array())
    throw Error(Errc::parse_error, "schema must be {\"attributes\": [...]}");
  std::vector<Attribute> attrs;
  for (const auto& a : j.at("attributes")) {
    if (!a.is_object() || !a.contains("name") || !a.contains("domain"))
      throw Error(Errc::parse_error, "attribute needs \"name\" and \"domain\"");
    const auto d = a.at("domain").get<std::string>();
    if (d != "C" && d != "Q") throw Error(Errc::parse_error, "domain must be \"C\" or \"Q\"");
    attrs.push_back({a.at("name").get<std::string>(), d == "C" ? Domain::C : Domain::Q});
  }
  return make_schema(std::move(attrs));
}

nlohmann::json to_json(const Schema& s) {
  auto arr = nlohmann::json::array();
  for (const auto& a : s.attributes())
    arr.push_back({{"name", a.name}, {"domain", a.domain == Domain::C ? "C" : "Q"}});
  return {{"attributes", arr}};
}

SchemaPtr load_schema(const std::filesystem::path& path) {
  try {
    return schema_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse_error, path.string() + ": " + e.what());
  }
}

DnfFormula load_formula(const std::filesystem::path& path, SchemaPtr schema) {
  return parse_formula(read_file(path), std::move(schema));
}

ContractionMode parse_mode(std::string_view text) {
  if (text == "prefix") return ContractionMode::prefix;
  if (text == "meet") return ContractionMode::meet;
  if (text == "protecting") return ContractionMode::protecting;
  if (text == "protecting-meet") return ContractionMode::protecting_meet;
  throw Error(Errc::parse_error, "unknown contraction mode '" + std::string(text) + "'");
}

nlohmann::json to_json(const ContractionResult& r) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(r.mode));
  j["contractor"] = edges_json(r.contractor);
  j["contracted"] = edges_json(r.contracted);
  auto trace = nlohmann::json::array();
  for (const auto& st : r.strata_trace)
    trace.push_back({{"layer", st.layer}, {"con_edges", edges_json(st.con_edges)}, {"added", edges_json(st.added)}});
  j["strata_trace"] = std::move(trace);
  if (r.protected_edges) j["protected_closure"] = edges_json(*r.protected_edges);
  if (r.forced) j["forced"] = edges_json(*r.forced);
  return j;
}

}  // namespace prefcon
