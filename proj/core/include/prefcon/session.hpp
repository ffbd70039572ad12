#pragma once

#include "prefcon/error.hpp"
#include "prefcon/winnow.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

namespace prefcon {

// {"edges": [[a, b], ...]} or {"formula": "..."}.
nlohmann::json source_json(const PreferenceSource& s);
PreferenceSource source_from_json(const nlohmann::json& j, const SchemaPtr& schema);

// One session at one point of its history. Never mutated once published.
struct SessionState {
  std::string id;
  SchemaPtr schema;
  Dataset dataset;
  bool dataset_given = false;             // false: rows are the nodes of a finite source
  std::vector<PreferenceSource> sources;  // initial first, current last
  std::vector<Dataset> winnows;           // winnow under each entry of `sources`
  nlohmann::json log = nlohmann::json::array();  // persisted records, in order
  std::string created;
  std::string updated;

  const PreferenceSource& current() const { return sources.back(); }
  const Dataset& winnow() const { return winnows.back(); }
};

nlohmann::json summary_json(const SessionState& s);
// Current relation, full step log and the winnow at every live step.
nlohmann::json export_json(const SessionState& s);
// The part of a session that undo restores exactly: everything but the log.
nlohmann::json canonical_state_json(const SessionState& s);

using SessionSnapshot = std::shared_ptr<const SessionState>;

// Sessions keyed by id. With a data directory, every session is an
// append-only JSONL log `<dir>/<id>.jsonl`, replayed on construction; each
// record is written before the call that produced it returns. Calls on one
// session are serialized, reads return the latest published snapshot.
class SessionStore {
public:
  explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt);

  // {"id"?, "schema"?, "dataset"? (CSV text), "source"}.
  SessionSnapshot create(const nlohmann::json& request);
  SessionSnapshot get(const std::string& id) const;
  // {"con", "mode"?, "protect"?}; returns the contraction summary with
  // winnow_before, winnow_after and strategy_report.
  nlohmann::json contract(const std::string& id, const nlohmann::json& request);
  SessionSnapshot undo(const std::string& id);
  std::vector<std::string> ids() const;

private:
  struct Entry {
    std::mutex write;
    mutable std::mutex publish;
    SessionSnapshot state;

    SessionSnapshot load() const;
    void store(SessionSnapshot s);
  };

  std::shared_ptr<Entry> entry(const std::string& id) const;
  void append(const std::string& id, const nlohmann::json& record) const;

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

int http_status(Errc code);

struct HttpResponse {
  int status = 200;
  nlohmann::json body;
};

// Routes one request of the JSON API; never throws.
HttpResponse handle_request(SessionStore& store, std::string_view method, std::string_view path,
                            std::string_view body);

class HttpService {
public:
  explicit HttpService(SessionStore& store);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Port 0 picks a free port; returns the bound port.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// The --data flag, else $PREFCON_DATA, else ./prefcon-data.
std::filesystem::path resolve_data_dir(const std::optional<std::string>& flag);

}  // namespace prefcon
