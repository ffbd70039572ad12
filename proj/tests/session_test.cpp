#include "finite_suite.hpp"
#include "prefcon/contract_finite.hpp"
#include "prefcon/io.hpp"
#include "prefcon/session.hpp"

#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

using namespace prefcon;
using namespace prefcon::test;
using nlohmann::json;

namespace {

const char* kCarsCsv =
    "id,make,year,price\n"
    "t1,VW,2007,15000\n"
    "t2,VW,2007,20000\n"
    "t3,Kia,2006,15000\n"
    "t4,Kia,2007,12000\n";
const char* kPref = "L.year > R.year or (L.year = R.year and L.price < R.price)";
const char* kCon = "L.year = 2007 and R.year = 2007 and L.price = 12000 and R.price = 15000";
const char* kPref2 =
    "(L.year > R.year or (L.year = R.year and L.price < R.price)) and "
    "not (L.year = 2007 and R.year = 2007 and L.price = 12000 and R.price > 12000 and R.price <= 15000)";

json cars_schema() {
  return {{"attributes",
           {{{"name", "make"}, {"domain", "C"}}, {{"name", "year"}, {"domain", "Q"}}, {{"name", "price"}, {"domain", "Q"}}}}};
}

json car_request(const std::string& id) {
  return {{"id", id}, {"schema", cars_schema()}, {"dataset", kCarsCsv}, {"source", {{"formula", kPref}}}};
}

json finite_request(const std::string& id, const FiniteRelation& r) {
  return {{"id", id}, {"source", {{"edges", edges_json(r)}}}};
}

json edges(std::initializer_list<Edge> es) { return edges_json(FiniteRelation(es)); }

std::vector<std::string> strings(const json& j) { return j.get<std::vector<std::string>>(); }

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("prefcon_session_" + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

HttpResponse call(SessionStore& store, std::string_view method, std::string_view path, const json& body = nullptr) {
  return handle_request(store, method, path, body.is_null() ? "" : body.dump());
}

}  // namespace

TEST(Session, CarFlowContractAndUndo) {
  SessionStore store;
  auto s = store.create(car_request("cars"));
  EXPECT_EQ(s->winnow().keys(), (std::vector<std::string>{"t4"}));
  const auto before = canonical_state_json(*s);

  auto r = store.contract("cars", {{"con", kCon}});
  EXPECT_EQ(strings(r.at("winnow_before")), (std::vector<std::string>{"t4"}));
  EXPECT_EQ(strings(r.at("winnow_after")), (std::vector<std::string>{"t1", "t4"}));
  EXPECT_EQ(r.at("strategy_report").at("strategy"), "REWINNOW_CANDIDATES");
  EXPECT_EQ(r.at("result").at("mode"), "PREFIX");

  auto now = store.get("cars");
  const auto& stored = std::get<DnfFormula>(now->current());
  EXPECT_TRUE(equivalent(stored, parse_formula(kPref2, stored.schema_ptr())));
  EXPECT_EQ(winnow(stored, now->dataset).keys(), strings(r.at("winnow_after")));

  auto undone = store.undo("cars");
  EXPECT_EQ(undone->winnow().keys(), (std::vector<std::string>{"t4"}));
  EXPECT_EQ(canonical_state_json(*undone), before);
  EXPECT_EQ(undone->log.size(), 3u);
  try {
    store.undo("cars");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::nothing_to_undo);
  }
}

TEST(Session, ExportAfterCarFlowHoldsContractedFormula) {
  SessionStore store;
  store.create(car_request("cars"));
  auto fresh = export_json(*store.get("cars"));
  EXPECT_EQ(fresh.at("log").size(), 1u);
  EXPECT_EQ(fresh.at("initial_source"), fresh.at("current_source"));
  EXPECT_EQ(fresh.at("winnow_snapshots"), json::array({json::array({"t4"})}));

  store.contract("cars", {{"con", kCon}});
  auto ex = export_json(*store.get("cars"));
  auto schema = schema_from_json(ex.at("schema"));
  auto f = parse_formula(ex.at("current_source").at("formula").get<std::string>(), schema);
  EXPECT_TRUE(equivalent(f, parse_formula(kPref2, schema)));
  EXPECT_EQ(ex.at("winnow_snapshots").size(), 2u);
  EXPECT_EQ(parse_dataset(ex.at("dataset").get<std::string>(), schema).rows,
            parse_dataset(kCarsCsv, schema).rows);
}

TEST(Session, TwoContractsOneUndoReplaysFirst) {
  SessionStore store;
  store.create(finite_request("f", total_order(5)));
  store.contract("f", {{"con", edges({{"x1", "x4"}})}});
  const auto after_first = canonical_state_json(*store.get("f"));
  store.contract("f", {{"con", edges({{"x2", "x3"}})}, {"mode", "meet"}});
  EXPECT_NE(canonical_state_json(*store.get("f")), after_first);
  EXPECT_EQ(canonical_state_json(*store.undo("f")), after_first);
}

TEST(Session, FiniteModesMatchEngine) {
  const auto pref = total_order(5);
  const FiniteRelation con{{"x1", "x4"}, {"x2", "x5"}};
  const FiniteRelation protect{{"x1", "x3"}, {"x2", "x3"}, {"x4", "x5"}};
  SessionStore store;
  for (const auto& [mode, expected] :
       {std::pair{"prefix", min_contr_finite(pref, con)}, std::pair{"meet", meet_contr(pref, con)},
        std::pair{"protecting", min_contr_protecting(pref, con, protect)},
        std::pair{"protecting-meet", meet_contr_protecting(pref, con, protect)}}) {
    const std::string id = std::string("m-") + mode;
    store.create(finite_request(id, pref));
    json req = {{"con", edges_json(con)}, {"mode", mode}};
    if (std::string(mode).starts_with("protecting")) req["protect"] = edges_json(protect);
    auto r = store.contract(id, req);
    EXPECT_EQ(relation_from_edges_json(r.at("result").at("contractor")), expected.contractor) << mode;
    EXPECT_EQ(std::get<FiniteRelation>(store.get(id)->current()), expected.contracted) << mode;
  }
}

TEST(Session, EmptyConIsANoOpStep) {
  SessionStore store;
  auto s = store.create(finite_request("f", total_order(4)));
  auto r = store.contract("f", {{"con", json::array()}});
  EXPECT_EQ(r.at("winnow_after"), r.at("winnow_before"));
  EXPECT_EQ(r.at("strategy_report").at("strategy"), "UNCHANGED");
  auto now = store.get("f");
  EXPECT_EQ(std::get<FiniteRelation>(now->current()), std::get<FiniteRelation>(s->current()));
  EXPECT_EQ(now->log.size(), 2u);
}

TEST(Session, ProtectCarriesOnlyWithProtectingModes) {
  SessionStore store;
  store.create(finite_request("f", total_order(3)));
  auto r = call(store, "POST", "/sessions/f/contract",
                {{"con", edges({{"x1", "x3"}})}, {"protect", edges({{"x1", "x2"}})}, {"mode", "prefix"}});
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(r.body.at("error").at("code"), "PRECONDITION");
}

TEST(SessionHttp, ErrorStatuses) {
  SessionStore store;
  auto bad = call(store, "POST", "/sessions", finite_request("bad", FiniteRelation{{"a", "b"}, {"b", "c"}}));
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(bad.body.at("error").at("code"), "NOT_SPO");

  EXPECT_EQ(call(store, "POST", "/sessions", finite_request("f", total_order(3))).status, 201);
  auto dup = call(store, "POST", "/sessions", finite_request("f", total_order(3)));
  EXPECT_EQ(dup.status, 409);
  EXPECT_EQ(dup.body.at("error").at("code"), "DUPLICATE_SESSION");

  auto conflict = call(store, "POST", "/sessions/f/contract",
                       {{"con", edges({{"x1", "x3"}})}, {"protect", edges({{"x1", "x2"}, {"x2", "x3"}})}, {"mode", "protecting"}});
  EXPECT_EQ(conflict.status, 409);
  EXPECT_EQ(conflict.body.at("error").at("code"), "PROTECTION_CONFLICT");
  EXPECT_EQ(conflict.body.at("error").at("detail").at("edges"), json::array({json::array({"x1", "x3"})}));

  auto not_subset = call(store, "POST", "/sessions/f/contract", {{"con", edges({{"x3", "x1"}})}});
  EXPECT_EQ(not_subset.status, 400);
  EXPECT_EQ(not_subset.body.at("error").at("code"), "CON_NOT_SUBSET");

  auto undo = call(store, "POST", "/sessions/f/undo");
  EXPECT_EQ(undo.status, 409);
  EXPECT_EQ(undo.body.at("error").at("code"), "NOTHING_TO_UNDO");

  for (const char* path : {"/sessions/nope", "/sessions/nope/winnow", "/sessions/nope/export"})
    EXPECT_EQ(call(store, "GET", path).status, 404) << path;
  EXPECT_EQ(call(store, "POST", "/sessions/nope/contract", {{"con", json::array()}}).status, 404);
  EXPECT_EQ(call(store, "POST", "/sessions/nope/undo").status, 404);
  EXPECT_EQ(call(store, "GET", "/elsewhere").status, 404);
  EXPECT_EQ(call(store, "GET", "/sessions/f/contract").status, 405);
  EXPECT_EQ(handle_request(store, "POST", "/sessions", "{not json").status, 400);
  EXPECT_EQ(call(store, "POST", "/sessions", {{"id", "../etc"}, {"source", {{"edges", json::array()}}}}).status, 400);
  EXPECT_EQ(call(store, "POST", "/sessions/f/contract", {{"mode", "prefix"}}).status, 400);
}

TEST(SessionHttp, SymbolicErrorStatuses) {
  SessionStore store;
  json req = {{"id", "line"},
              {"schema", {{"attributes", {{{"name", "p"}, {"domain", "Q"}}}}}},
              {"source", {{"formula", "L.p < R.p"}}}};
  EXPECT_EQ(call(store, "POST", "/sessions", req).status, 201);
  auto r = call(store, "POST", "/sessions/line/contract", {{"con", "L.p < 1 and R.p >= 2"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body.at("error").at("code"), "NOT_FINITELY_STRATIFIABLE");
  EXPECT_EQ(r.body.at("error").at("detail").at("stratifiable"), false);
  EXPECT_EQ(call(store, "POST", "/sessions/line/contract", {{"con", "L.p = 1 and R.p = 0"}}).status, 400);
  auto conflict = call(store, "POST", "/sessions/line/contract",
                       {{"con", "L.p = 0 and R.p = 2"},
                        {"protect", "(L.p = 0 and R.p = 1) or (L.p = 1 and R.p = 2)"},
                        {"mode", "protecting-meet"}});
  EXPECT_EQ(conflict.status, 409);
  EXPECT_TRUE(conflict.body.at("error").at("detail").contains("witness"));
  EXPECT_EQ(call(store, "POST", "/sessions/line/contract", {{"con", edges({{"a", "b"}})}}).status, 400);
  EXPECT_EQ(call(store, "POST", "/sessions", {{"source", {{"formula", "L.p < R.p"}}}}).status, 400);
  auto w = call(store, "GET", "/sessions/line/winnow");
  EXPECT_EQ(w.status, 200);
  EXPECT_TRUE(w.body.at("winnow").empty());
}

TEST(SessionPersistence, RestartReproducesExportExactly) {
  TempDir dir;
  std::string before;
  {
    SessionStore store(dir.path);
    store.create(car_request("cars"));
    store.contract("cars", {{"con", kCon}});
    store.create(finite_request("f", total_order(5)));
    store.contract("f", {{"con", edges({{"x1", "x4"}, {"x2", "x5"}})}});
    store.contract("f", {{"con", edges({{"x3", "x4"}})}, {"mode", "meet"}});
    store.undo("f");
    before = export_json(*store.get("cars")).dump() + export_json(*store.get("f")).dump();
  }
  SessionStore again(dir.path);
  EXPECT_EQ(again.ids(), (std::vector<std::string>{"cars", "f"}));
  EXPECT_EQ(export_json(*again.get("cars")).dump() + export_json(*again.get("f")).dump(), before);
  auto dup = call(again, "POST", "/sessions", car_request("cars"));
  EXPECT_EQ(dup.status, 409);
  // The restored store keeps appending to the same logs.
  again.contract("f", {{"con", edges({{"x1", "x2"}})}});
  SessionStore third(dir.path);
  EXPECT_EQ(export_json(*third.get("f")), export_json(*again.get("f")));
}

TEST(SessionPersistence, DivergentLogIsRejected) {
  TempDir dir;
  {
    SessionStore store(dir.path);
    store.create(finite_request("f", total_order(4)));
    store.contract("f", {{"con", edges({{"x1", "x3"}})}});
  }
  const auto path = dir.path / "f.jsonl";
  std::ifstream in(path);
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  in.close();
  auto record = json::parse(second);
  record["winnow_digest"] = "0000000000000000";
  std::ofstream(path) << first << '\n' << record.dump() << '\n';
  try {
    SessionStore broken(dir.path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::io_error);
  }
}

TEST(SessionPersistence, DataDirResolution) {
  ::unsetenv("PREFCON_DATA");
  EXPECT_EQ(resolve_data_dir(std::nullopt), std::filesystem::path("prefcon-data"));
  ::setenv("PREFCON_DATA", "/tmp/from-env", 1);
  EXPECT_EQ(resolve_data_dir(std::nullopt), std::filesystem::path("/tmp/from-env"));
  EXPECT_EQ(resolve_data_dir(std::string("/tmp/flag")), std::filesystem::path("/tmp/flag"));
  ::unsetenv("PREFCON_DATA");
}

TEST(SessionConcurrency, WritesOnOneSessionAreSerialized) {
  SessionStore store;
  store.create(finite_request("f", total_order(6)));
  store.create(finite_request("g", total_order(6)));
  constexpr int kThreads = 8, kCalls = 10;
  std::vector<std::thread> threads;
  std::vector<std::vector<int>> steps(kThreads);
  for (int t = 0; t < kThreads; ++t)
    threads.emplace_back([&, t] {
      for (int i = 0; i < kCalls; ++i) {
        steps[t].push_back(store.contract("f", {{"con", json::array()}}).at("step").get<int>());
        store.get("g");
      }
    });
  for (auto& t : threads) t.join();
  std::set<int> seen;
  for (const auto& v : steps) seen.insert(v.begin(), v.end());
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(kThreads * kCalls));
  EXPECT_EQ(*seen.begin(), 1);
  EXPECT_EQ(store.get("f")->log.size(), static_cast<std::size_t>(kThreads * kCalls + 1));
}

TEST(SessionProperty, WinnowAfterMatchesPlainWinnow) {
  std::mt19937 rng(424242);
  SessionStore store;
  const char* modes[] = {"prefix", "meet", "protecting", "protecting-meet"};
  for (int trial = 0; trial < 200; ++trial) {
    auto c = random_case(rng, 7, 12);
    const std::string id = "p" + std::to_string(trial);
    store.create(finite_request(id, c.pref));
    const std::string mode = modes[trial % 4];
    json req = {{"con", edges_json(c.con)}, {"mode", mode}};
    if (mode.starts_with("protecting")) req["protect"] = edges_json(c.protect);
    auto r = call(store, "POST", "/sessions/" + id + "/contract", req);
    if (r.status == 409) continue;
    ASSERT_EQ(r.status, 200) << r.body.dump();
    auto s = store.get(id);
    EXPECT_EQ(winnow(s->current(), s->dataset).keys(), strings(r.body.at("winnow_after")));
    EXPECT_EQ(call(store, "POST", "/sessions/" + id + "/undo").body.at("winnow"), r.body.at("winnow_before"));
  }
}

TEST(SessionHttp, ServesOverTcp) {
  SessionStore store;
  HttpService service(store);
  const int port = service.bind("127.0.0.1", 0);
  std::thread server([&] { service.run(); });
  httplib::Client client("127.0.0.1", port);
  auto created = client.Post("/sessions", car_request("cars").dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto contracted = client.Post("/sessions/cars/contract", json{{"con", kCon}}.dump(), "application/json");
  ASSERT_TRUE(contracted);
  EXPECT_EQ(contracted->status, 200);
  auto w = client.Get("/sessions/cars/winnow");
  ASSERT_TRUE(w);
  EXPECT_EQ(strings(json::parse(w->body).at("winnow")), (std::vector<std::string>{"t1", "t4"}));
  auto missing = client.Get("/sessions/none/export");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  service.stop();
  server.join();
}
