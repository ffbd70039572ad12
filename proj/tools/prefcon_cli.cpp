#include "prefcon/contract_finite.hpp"
#include "prefcon/contract_symbolic.hpp"
#include "prefcon/error.hpp"
#include "prefcon/io.hpp"
#include "prefcon/session.hpp"
#include "prefcon/winnow.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <optional>
#include <string>

using namespace prefcon;

namespace {

constexpr int kExitError = 1;
constexpr int kExitConflict = 2;

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-")
    std::cout << text;
  else
    write_file(out, text);
}

struct ContractArgs {
  std::string pref, con, protect, mode = "prefix", out, schema;
  bool trace = false, check_only = false;
};

int run_contract(const ContractArgs& a) {
  const auto pref = load_relation(a.pref, warn);
  const auto con = load_relation(a.con, warn);
  const auto protect = a.protect.empty() ? FiniteRelation{} : load_relation(a.protect, warn);
  ContractionResult r;
  switch (parse_mode(a.mode)) {
    case ContractionMode::prefix: r = min_contr_finite(pref, con); break;
    case ContractionMode::meet: r = meet_contr(pref, con); break;
    case ContractionMode::protecting: r = min_contr_protecting(pref, con, protect); break;
    case ContractionMode::protecting_meet: r = meet_contr_protecting(pref, con, protect); break;
  }
  auto j = to_json(r);
  if (!a.trace) j.erase("strata_trace");
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

int run_contract_sym(const ContractArgs& a) {
  const auto schema = load_schema(a.schema);
  const auto pref = load_formula(a.pref, schema);
  const auto con = load_formula(a.con, schema);
  if (a.check_only) {
    emit(to_json(check_finitely_stratifiable(pref, con)).dump(2) + "\n", a.out);
    return 0;
  }
  const auto protect = a.protect.empty() ? DnfFormula::falsum(schema) : load_formula(a.protect, schema);
  const SymbolicContraction r = [&] {
    switch (parse_mode(a.mode)) {
      case ContractionMode::prefix: return min_contr_symbolic(pref, con);
      case ContractionMode::meet: return meet_contr_symbolic(pref, con);
      case ContractionMode::protecting: return min_contr_protecting_symbolic(pref, con, protect);
      case ContractionMode::protecting_meet: break;
    }
    return meet_contr_symbolic(pref, con, protect);
  }();
  auto j = to_json(r);
  if (!a.trace) j.erase("strata_trace");
  emit(j.dump(2) + "\n", a.out);
  return 0;
}

struct WinnowArgs {
  std::string schema, data, pref, out, spec;
  bool edges = false, ranks = false;
};

std::string winnow_output(const PreferenceSource& source, const Dataset& data, bool ranks) {
  if (!ranks) return format_dataset(winnow(source, data));
  const auto r = winnow_ranks(source, data);
  return format_dataset(data, &r);
}

int run_winnow(const WinnowArgs& a) {
  const auto schema = load_schema(a.schema);
  const auto data = load_dataset(a.data, schema);
  const PreferenceSource source =
      a.edges ? PreferenceSource(load_relation(a.pref, warn)) : PreferenceSource(load_formula(a.pref, schema));
  emit(winnow_output(source, data, a.ranks), a.out);
  return 0;
}

int run_skyline(const WinnowArgs& a) {
  const auto schema = load_schema(a.schema);
  const auto data = load_dataset(a.data, schema);
  const auto relation = skyline_relation(data, parse_skyline_spec(a.spec));
  emit(winnow_output(relation, data, a.ranks), a.out);
  return 0;
}

HttpService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int run_serve(int port, const std::string& host, const std::optional<std::string>& data) {
  const auto dir = resolve_data_dir(data);
  SessionStore store(dir);
  HttpService service(store);
  const int bound = service.bind(host, port);
  std::cerr << "serving on http://" << host << ":" << bound << " with data in " << dir.string() << '\n';
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.run();
  g_service = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contraction of strict partial order preference relations"};
  app.require_subcommand(1);

  ContractArgs contract;
  auto* c = app.add_subcommand("contract", "Contract a finite preference relation");
  c->add_option("--pref", contract.pref, "Preference relation (edge list or JSON)")->required()->check(CLI::ExistingFile);
  c->add_option("--con", contract.con, "Base contractor")->required()->check(CLI::ExistingFile);
  c->add_option("--protect", contract.protect, "Edges to keep")->check(CLI::ExistingFile);
  c->add_option("--mode", contract.mode, "prefix|meet|protecting|protecting-meet")
      ->check(CLI::IsMember({"prefix", "meet", "protecting", "protecting-meet"}));
  c->add_flag("--trace", contract.trace, "Include the per-stratum trace");
  c->add_option("--out", contract.out, "Output file (default stdout)");

  ContractArgs sym;
  auto* cs = app.add_subcommand("contract-sym", "Contract a formula-defined preference relation");
  cs->add_option("--schema", sym.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  cs->add_option("--pref", sym.pref, "Preference formula")->required()->check(CLI::ExistingFile);
  cs->add_option("--con", sym.con, "Base contractor formula")->required()->check(CLI::ExistingFile);
  cs->add_option("--protect", sym.protect, "Formula of pairs to keep")->check(CLI::ExistingFile);
  cs->add_option("--mode", sym.mode, "prefix|meet|protecting|protecting-meet")
      ->check(CLI::IsMember({"prefix", "meet", "protecting", "protecting-meet"}));
  cs->add_flag("--trace", sym.trace, "Include the per-stratum trace");
  cs->add_flag("--check-only", sym.check_only, "Only report finite stratifiability");
  cs->add_option("--out", sym.out, "Output file (default stdout)");

  WinnowArgs win;
  auto* w = app.add_subcommand("winnow", "Rows of a dataset not dominated under a preference");
  w->add_option("--schema", win.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  w->add_option("--data", win.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  w->add_option("--pref", win.pref, "Preference formula, or edge list with --edges")->required()->check(CLI::ExistingFile);
  w->add_flag("--edges", win.edges, "Read --pref as an edge list over row ids");
  w->add_flag("--ranks", win.ranks, "Print every row with its winnow_rank");
  w->add_option("--out", win.out, "Output file (default stdout)");

  WinnowArgs sky;
  auto* s = app.add_subcommand("skyline", "Winnow under Pareto dominance");
  s->add_option("--schema", sky.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  s->add_option("--data", sky.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  s->add_option("--spec", sky.spec, "Directions, e.g. price=min,year=max")->required();
  s->add_flag("--annotate", sky.ranks, "Print every row with its winnow_rank");
  s->add_option("--out", sky.out, "Output file (default stdout)");

  int port = 8080;
  std::string host = "127.0.0.1";
  std::optional<std::string> data_dir;
  auto* sv = app.add_subcommand("serve", "Run the session HTTP service");
  sv->add_option("--port", port, "Port, 0 for any free port")->check(CLI::Range(0, 65535));
  sv->add_option("--host", host, "Listen address");
  sv->add_option("--data", data_dir, "Session log directory (default $PREFCON_DATA, else ./prefcon-data)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c) return run_contract(contract);
    if (*cs) return run_contract_sym(sym);
    if (*w) return run_winnow(win);
    if (*s) return run_skyline(sky);
    if (*sv) return run_serve(port, host, data_dir);
  } catch (const Error& e) {
    const nlohmann::json err = {{"error", {{"code", to_string(e.code())}, {"message", e.what()}, {"detail", e.detail()}}}};
    std::cerr << err.dump() << '\n';
    return e.code() == Errc::protection_conflict ? kExitConflict : kExitError;
  }
  return kExitError;
}
