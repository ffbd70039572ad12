#include "prefcon/session.hpp"

#include "prefcon/contract_finite.hpp"
#include "prefcon/contract_symbolic.hpp"
#include "prefcon/error.hpp"
#include "prefcon/io.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <random>

namespace prefcon {
namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// FNV-1a over the canonical dump: stable across runs and builds.
std::string digest(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json keys_json(const Dataset& d) { return d.keys(); }

bool valid_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 && std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_';
  });
}

std::string fresh_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[20];
  std::snprintf(buf, sizeof buf, "s%012llx", static_cast<unsigned long long>(rng() & 0xffffffffffffull));
  return buf;
}

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  if (!j.is_object() || !j.contains(field)) throw Error(Errc::parse_error, std::string("missing field \"") + field + "\"");
  return j.at(field);
}

std::optional<nlohmann::json> optional_field(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  return std::optional<nlohmann::json>(std::in_place, j.at(field));
}

PreferenceSource parse_like(const PreferenceSource& current, const nlohmann::json& j, const SchemaPtr& schema) {
  if (std::holds_alternative<FiniteRelation>(current)) {
    if (!j.is_array()) throw Error(Errc::parse_error, "finite sessions take edge lists [[from, to], ...]");
    return relation_from_edges_json(j);
  }
  if (!j.is_string()) throw Error(Errc::parse_error, "formula sessions take formula strings");
  return parse_formula(j.get<std::string>(), schema);
}

SessionState apply_create(const nlohmann::json& record) {
  SessionState s;
  s.id = require(record, "id").get<std::string>();
  const auto schema_j = optional_field(record, "schema");
  s.schema = schema_j ? schema_from_json(*schema_j) : nullptr;
  const auto& source_j = require(record, "source");
  if (!s.schema && source_j.is_object() && source_j.contains("formula"))
    throw Error(Errc::precondition, "a formula source needs a schema");
  PreferenceSource source = source_from_json(source_j, s.schema);
  if (const auto* f = std::get_if<FiniteRelation>(&source)) {
    const auto rep = spo_check(*f);
    if (!rep.is_spo())
      throw Error(Errc::not_spo, "preference relation is not a strict partial order",
                  {{"witness", rep.witness ? nlohmann::json(*rep.witness) : nlohmann::json(nullptr)}});
  } else {
    const auto& pref = std::get<DnfFormula>(source);
    validate_symbolic(pref, DnfFormula::falsum(s.schema));
  }
  if (const auto csv = optional_field(record, "dataset")) {
    if (!csv->is_string()) throw Error(Errc::parse_error, "dataset must be CSV text");
    if (!s.schema) throw Error(Errc::precondition, "a dataset needs a schema");
    s.dataset = parse_dataset(csv->get<std::string>(), s.schema);
    s.dataset_given = true;
  } else if (const auto* f = std::get_if<FiniteRelation>(&source)) {
    s.dataset = Dataset{nullptr, {}};
    for (const auto& n : f->nodes()) s.dataset.rows.push_back({n, {}});
  } else {
    s.dataset = Dataset{s.schema, {}};
  }
  s.winnows.push_back(winnow(source, s.dataset));
  s.sources.push_back(std::move(source));
  s.created = s.updated = record.value("at", "");
  s.log.push_back(record);
  return s;
}

struct Applied {
  SessionState state;
  nlohmann::json response;
};

Applied apply_contract(const SessionState& s, nlohmann::json record) {
  const ContractionMode mode = parse_mode(record.value("mode", "prefix"));
  const PreferenceSource con = parse_like(s.current(), require(record, "con"), s.schema);
  const auto protect_j = optional_field(record, "protect");
  const bool protecting = mode == ContractionMode::protecting || mode == ContractionMode::protecting_meet;
  if (protect_j && !protecting) throw Error(Errc::precondition, "protect needs mode protecting or protecting-meet");

  PreferenceSource contractor, contracted;
  nlohmann::json result;
  if (const auto* fpref = std::get_if<FiniteRelation>(&s.current())) {
    const auto& pref = *fpref;
    const auto& c = std::get<FiniteRelation>(con);
    const FiniteRelation protect = protect_j ? relation_from_edges_json(*protect_j) : FiniteRelation{};
    ContractionResult r;
    switch (mode) {
      case ContractionMode::prefix: r = min_contr_finite(pref, c); break;
      case ContractionMode::meet: r = meet_contr(pref, c); break;
      case ContractionMode::protecting: r = min_contr_protecting(pref, c, protect); break;
      case ContractionMode::protecting_meet: r = meet_contr_protecting(pref, c, protect); break;
    }
    result = to_json(r);
    contractor = r.contractor;
    contracted = r.contracted;
  } else {
    const auto& pref = std::get<DnfFormula>(s.current());
    const auto& c = std::get<DnfFormula>(con);
    std::optional<DnfFormula> protect;
    if (protect_j) {
      if (!protect_j->is_string()) throw Error(Errc::parse_error, "formula sessions take formula strings");
      protect = parse_formula(protect_j->get<std::string>(), s.schema);
    }
    const auto none = DnfFormula::falsum(s.schema);
    const SymbolicContraction r = [&] {
      switch (mode) {
        case ContractionMode::prefix: return min_contr_symbolic(pref, c);
        case ContractionMode::meet: return meet_contr_symbolic(pref, c);
        case ContractionMode::protecting: return min_contr_protecting_symbolic(pref, c, protect.value_or(none));
        case ContractionMode::protecting_meet: break;
      }
      return meet_contr_symbolic(pref, c, protect.value_or(none));
    }();
    result = to_json(r);
    contractor = r.contractor;
    contracted = r.contracted;
  }

  auto after = winnow_after_contraction(s.current(), contractor, con, s.dataset, s.winnow(),
                                        mode == ContractionMode::prefix);
  const std::string contractor_digest = digest(source_json(contractor));
  const std::string winnow_digest = digest(keys_json(after.result));
  if (record.contains("contractor_digest") &&
      (record.at("contractor_digest") != contractor_digest || record.at("winnow_digest") != winnow_digest))
    throw Error(Errc::io_error, "replaying session " + s.id + " diverged from its log");
  record["contractor_digest"] = contractor_digest;
  record["winnow_digest"] = winnow_digest;

  Applied out{s, {}};
  out.response = {{"step", s.log.size()},
                  {"result", std::move(result)},
                  {"winnow_before", keys_json(s.winnow())},
                  {"winnow_after", keys_json(after.result)},
                  {"strategy_report", to_json(after.report)},
                  {"source", source_json(contracted)}};
  out.state.sources.push_back(std::move(contracted));
  out.state.winnows.push_back(std::move(after.result));
  out.state.updated = record.value("at", "");
  out.state.log.push_back(std::move(record));
  return out;
}

SessionState apply_undo(const SessionState& s, const nlohmann::json& record) {
  if (s.sources.size() <= 1) throw Error(Errc::nothing_to_undo, "session " + s.id + " has no contraction to undo");
  SessionState out = s;
  out.sources.pop_back();
  out.winnows.pop_back();
  out.updated = record.value("at", "");
  out.log.push_back(record);
  return out;
}

SessionState replay_record(const SessionState* s, const nlohmann::json& record) {
  const auto type = require(record, "type").get<std::string>();
  if (type == "create") return apply_create(record);
  if (!s) throw Error(Errc::io_error, "session log does not start with a create record");
  if (type == "contract") return apply_contract(*s, record).state;
  if (type == "undo") return apply_undo(*s, record);
  throw Error(Errc::io_error, "unknown log record type " + type);
}

}  // namespace

nlohmann::json source_json(const PreferenceSource& s) {
  if (const auto* f = std::get_if<FiniteRelation>(&s)) return {{"edges", edges_json(*f)}};
  return {{"formula", to_string(std::get<DnfFormula>(s))}};
}

PreferenceSource source_from_json(const nlohmann::json& j, const SchemaPtr& schema) {
  if (j.is_object() && j.contains("edges")) return relation_from_edges_json(j.at("edges"));
  if (j.is_object() && j.contains("formula") && j.at("formula").is_string())
    return parse_formula(j.at("formula").get<std::string>(), schema);
  throw Error(Errc::parse_error, "source must be {\"edges\": [...]} or {\"formula\": \"...\"}");
}

namespace {

nlohmann::json schema_json(const SchemaPtr& schema) { return schema ? to_json(*schema) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json summary_json(const SessionState& s) {
  return {{"id", s.id},
          {"created", s.created},
          {"updated", s.updated},
          {"kind", std::holds_alternative<FiniteRelation>(s.current()) ? "finite" : "formula"},
          {"schema", schema_json(s.schema)},
          {"source", source_json(s.current())},
          {"winnow", keys_json(s.winnow())},
          {"depth", s.sources.size() - 1},
          {"steps", s.log.size() - 1}};
}

nlohmann::json export_json(const SessionState& s) {
  auto snapshots = nlohmann::json::array();
  for (const auto& w : s.winnows) snapshots.push_back(keys_json(w));
  return {{"id", s.id},
          {"created", s.created},
          {"updated", s.updated},
          {"schema", schema_json(s.schema)},
          {"dataset", s.dataset_given ? nlohmann::json(format_dataset(s.dataset)) : nlohmann::json(nullptr)},
          {"initial_source", source_json(s.sources.front())},
          {"current_source", source_json(s.current())},
          {"log", s.log},
          {"winnow", keys_json(s.winnow())},
          {"winnow_snapshots", std::move(snapshots)}};
}

nlohmann::json canonical_state_json(const SessionState& s) {
  return {{"id", s.id},
          {"schema", schema_json(s.schema)},
          {"source", source_json(s.current())},
          {"winnow", keys_json(s.winnow())},
          {"depth", s.sources.size() - 1}};
}

SessionSnapshot SessionStore::Entry::load() const {
  std::lock_guard lock(publish);
  return state;
}

void SessionStore::Entry::store(SessionSnapshot s) {
  std::lock_guard lock(publish);
  state = std::move(s);
}

SessionStore::SessionStore(std::optional<std::filesystem::path> data_dir) : dir_(std::move(data_dir)) {
  if (!dir_) return;
  std::error_code ec;
  std::filesystem::create_directories(*dir_, ec);
  if (ec) throw Error(Errc::io_error, "cannot create data directory " + dir_->string() + ": " + ec.message());
  std::vector<std::filesystem::path> logs;
  for (const auto& f : std::filesystem::directory_iterator(*dir_))
    if (f.is_regular_file() && f.path().extension() == ".jsonl") logs.push_back(f.path());
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    std::ifstream in(path);
    std::string line;
    std::optional<SessionState> state;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
      if (line.empty()) continue;
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
        state = replay_record(state ? &*state : nullptr, record);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::io_error, path.string() + ":" + std::to_string(n) + ": " + e.what());
      } catch (const Error& e) {
        throw Error(Errc::io_error, path.string() + ":" + std::to_string(n) + ": " + e.what(), e.detail());
      }
    }
    if (!state) continue;
    if (state->id != path.stem().string())
      throw Error(Errc::io_error, path.string() + " holds session " + state->id);
    auto e = std::make_shared<Entry>();
    e->state = std::make_shared<const SessionState>(std::move(*state));
    sessions_.emplace(path.stem().string(), std::move(e));
  }
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(Errc::not_found, "no session " + id, {{"id", id}});
  return it->second;
}

void SessionStore::append(const std::string& id, const nlohmann::json& record) const {
  if (!dir_) return;
  std::ofstream out(*dir_ / (id + ".jsonl"), std::ios::app);
  out << record.dump() << '\n';
  out.flush();
  if (!out) throw Error(Errc::io_error, "cannot append to the log of session " + id);
}

SessionSnapshot SessionStore::create(const nlohmann::json& request) {
  if (!request.is_object()) throw Error(Errc::parse_error, "request must be a JSON object");
  nlohmann::json record = {{"type", "create"},
                           {"id", request.contains("id") ? request.at("id") : nlohmann::json(fresh_id())},
                           {"schema", request.value("schema", nlohmann::json(nullptr))},
                           {"dataset", request.value("dataset", nlohmann::json(nullptr))},
                           {"source", require(request, "source")},
                           {"at", now_utc()}};
  if (!record.at("id").is_string() || !valid_id(record.at("id").get<std::string>()))
    throw Error(Errc::precondition, "session ids are 1 to 128 characters from [A-Za-z0-9_-]");
  auto state = std::make_shared<const SessionState>(apply_create(record));
  std::unique_lock lock(map_mutex_);
  if (sessions_.count(state->id) || (dir_ && std::filesystem::exists(*dir_ / (state->id + ".jsonl"))))
    throw Error(Errc::duplicate_session, "session " + state->id + " already exists", {{"id", state->id}});
  append(state->id, record);
  auto e = std::make_shared<Entry>();
  e->state = state;
  sessions_.emplace(state->id, std::move(e));
  return state;
}

SessionSnapshot SessionStore::get(const std::string& id) const { return entry(id)->load(); }

nlohmann::json SessionStore::contract(const std::string& id, const nlohmann::json& request) {
  if (!request.is_object()) throw Error(Errc::parse_error, "request must be a JSON object");
  auto e = entry(id);
  std::lock_guard lock(e->write);
  const auto current = e->load();
  nlohmann::json record = {{"type", "contract"},
                           {"mode", request.value("mode", "prefix")},
                           {"con", require(request, "con")},
                           {"protect", request.value("protect", nlohmann::json(nullptr))},
                           {"at", now_utc()}};
  auto applied = apply_contract(*current, std::move(record));
  append(id, applied.state.log.back());
  e->store(std::make_shared<const SessionState>(std::move(applied.state)));
  return applied.response;
}

SessionSnapshot SessionStore::undo(const std::string& id) {
  auto e = entry(id);
  std::lock_guard lock(e->write);
  const nlohmann::json record = {{"type", "undo"}, {"at", now_utc()}};
  auto next = std::make_shared<const SessionState>(apply_undo(*e->load(), record));
  append(id, record);
  e->store(next);
  return next;
}

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(map_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

std::filesystem::path resolve_data_dir(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("PREFCON_DATA"); env && *env) return env;
  return "prefcon-data";
}

}  // namespace prefcon
