// Prints one PASS/FAIL line per acceptance criterion. Exits non-zero only on
// an unexpected failure; the two documented deviations print as FAIL (known).

#include "finite_suite.hpp"
#include "formula_gen.hpp"
#include "prefcon/contract_finite.hpp"
#include "prefcon/contract_symbolic.hpp"
#include "prefcon/error.hpp"
#include "prefcon/winnow.hpp"
#include "symbolic_suite.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace prefcon;
using namespace prefcon::test;

namespace {

constexpr double kExampleSeconds = 1.0;      // single worked examples
constexpr double kPrefixSeconds = 1.0;       // prefix contraction on the skyline relation
constexpr double kSuiteSeconds = 300.0;      // random oracle suite
constexpr int kOracleCases = 500;            // random SPOs with at most 8 nodes
constexpr int kOracleNodes = 8;
constexpr std::size_t kOracleEdges = 16;
constexpr int kQeFormulas = 1000;
constexpr int kQeSamplesPerFormula = 25;
constexpr std::size_t kSkylineEdges = 2000;
constexpr std::size_t kMaxCon = 35;
constexpr int kSkylineTrials = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  std::vector<std::string> failures;  // unexpected
  std::vector<std::string> known;     // documented deviations that were observed
  std::string note;

  void check(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

int unexpected = 0;

void report(int n, const std::string& title, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.failures.push_back(std::string("exception: ") + e.what());
  }
  const double secs = seconds_since(t0);
  std::string status = "PASS";
  std::string detail = o.note;
  if (!o.failures.empty()) {
    status = "FAIL";
    ++unexpected;
    for (const auto& f : o.failures) detail += (detail.empty() ? "" : "; ") + f;
  } else if (!o.known.empty()) {
    status = "FAIL (known)";
    for (const auto& k : o.known) detail += (detail.empty() ? "" : "; ") + k;
  }
  std::printf("%-12s %2d  %s [%.2fs]%s%s\n", status.c_str(), n, title.c_str(), secs, detail.empty() ? "" : " :: ",
              detail.c_str());
  std::fflush(stdout);
}

bool equiv(const DnfFormula& a, const DnfFormula& b) { return equivalent(a, b); }

using Keys = std::vector<NodeId>;

void car_table(Outcome& o) {
  const auto t0 = Clock::now();
  auto s = make_schema({{"make", Domain::C}, {"year", Domain::Q}, {"price", Domain::Q}});
  auto data = parse_dataset(
      "id,make,year,price\nt1,VW,2007,15000\nt2,VW,2007,20000\nt3,Kia,2006,15000\nt4,Kia,2007,12000\n", s);
  auto pref = parse_formula("L.year > R.year or (L.year = R.year and L.price < R.price)", s);
  auto con = parse_formula("L.year = 2007 and R.year = 2007 and L.price = 12000 and R.price = 15000", s);
  auto want = parse_formula(
      "(L.year > R.year or (L.year = R.year and L.price < R.price)) and "
      "not (L.year = 2007 and R.year = 2007 and L.price = 12000 and R.price > 12000 and R.price <= 15000)",
      s);
  const auto before = winnow(pref, data);
  o.check(before.keys() == Keys{"t4"}, "initial winnow is not {t4}");
  const auto out = min_contr_symbolic(pref, con);
  o.check(equiv(out.contracted, want), "contracted formula is not equivalent to the expected one");
  o.check(winnow(out.contracted, data).keys() == Keys{"t1", "t4"}, "winnow after contraction is not {t1, t4}");
  const auto fast = winnow_after_contraction(pref, out.contractor, con, data, before, true);
  o.check(fast.result.keys() == Keys{"t1", "t4"}, "contraction-aware winnow is not {t1, t4}");
  o.check(seconds_since(t0) < kExampleSeconds, "slower than 1 s");
}

void five_chain_prefix(Outcome& o) {
  const auto t0 = Clock::now();
  const auto r = min_contr_finite(total_order(5), FiniteRelation{{"x1", "x4"}, {"x2", "x5"}});
  o.check(r.contractor == FiniteRelation{{"x2", "x3"}, {"x2", "x4"}, {"x2", "x5"}, {"x1", "x3"}, {"x1", "x4"}},
          "contractor is " + to_string(r.contractor));
  o.check(r.strata_trace.size() == 2, "expected two strata");
  if (r.strata_trace.size() == 2) {
    o.check(r.strata_trace[0].added == FiniteRelation{{"x2", "x3"}, {"x2", "x4"}, {"x2", "x5"}},
            "E0 is " + to_string(r.strata_trace[0].added));
    o.check(r.strata_trace[1].added == FiniteRelation{{"x1", "x3"}, {"x1", "x4"}},
            "E1 is " + to_string(r.strata_trace[1].added));
  }
  o.check(seconds_since(t0) < kExampleSeconds, "slower than 1 s");
}

void protection_example(Outcome& o) {
  const auto pref = total_order(5);
  const FiniteRelation con{{"x1", "x4"}, {"x2", "x5"}};
  const FiniteRelation protect{{"x1", "x3"}, {"x2", "x3"}, {"x4", "x5"}};
  const auto q = q_set(pref, con, protect);
  o.check(q == FiniteRelation{{"x3", "x4"}, {"x3", "x5"}}, "Q is " + to_string(q));
  const auto r = min_contr_protecting(pref, con, protect);
  o.check(r.contractor == FiniteRelation{{"x2", "x4"}, {"x2", "x5"}, {"x3", "x4"}, {"x3", "x5"}, {"x1", "x4"}},
          "contractor is " + to_string(r.contractor));
  o.check(disjoint(r.contractor, transitive_closure(protect)), "contractor meets the protected closure");
}

void meet_examples(Outcome& o) {
  const auto pref = total_order(5);
  const FiniteRelation con{{"x1", "x3"}, {"x2", "x3"}, {"x2", "x5"}};
  const FiniteRelation printed{{"x1", "x3"}, {"x2", "x3"}, {"x2", "x5"}, {"x2", "x4"}, {"x3", "x4"}, {"x4", "x5"}};
  const auto meet = meet_contr(pref, con);
  FiniteRelation unioned;
  for (const auto& p : enumerate_minimal_contractors(pref, con)) unioned = unioned | p;
  o.check(meet.contractor == unioned, "meet differs from the union of all minimal contractors");
  if (meet.contractor != printed) {
    // The only tolerated difference: x3x4, which lies in no minimal contractor.
    FiniteRelation expected_gap{{"x3", "x4"}};
    if (printed - meet.contractor == expected_gap && is_subset(meet.contractor, printed))
      o.known.push_back("P^m lacks x3x4: no minimal contractor contains it (see README, known deviations)");
    else
      o.failures.push_back("meet contractor is " + to_string(meet.contractor));
  }
  const FiniteRelation protect{{"x2", "x4"}};
  const auto prot = meet_contr_protecting(pref, con, protect);
  o.check(prot.contractor == FiniteRelation{{"x1", "x3"}, {"x2", "x3"}, {"x2", "x5"}, {"x4", "x5"}},
          "protecting meet is " + to_string(prot.contractor));
  o.check(prot.forced && *prot.forced == (con | FiniteRelation{{"x4", "x5"}}), "C for the protected meet differs");
}

void symbolic_car_run(Outcome& o) {
  auto s = make_schema({{"m", Domain::C}, {"price", Domain::Q}});
  auto f = [&](const char* text) { return parse_formula(text, s); };
  auto pref = f("(L.m = 'BMW' and R.m = 'VW') or (L.m = R.m and L.price < R.price)");
  auto con = f(
      "L.m = R.m and ((L.price >= 11000 and L.price <= 13000 and R.price = 15000) or "
      "(L.price >= 10000 and L.price <= 12000 and R.price = 14000))");
  const auto k = end_nodes(con);
  const auto pc = restrict_to_end_nodes(pref, con);
  std::vector<DnfFormula> layers;
  for (int i = 0; i < 8; ++i) {
    auto l = get_stratum_symbolic(pc, k, i);
    if (!l) break;
    layers.push_back(*l);
  }
  const std::vector<DnfFormula> printed = {
      f("L.price = 15000 and L.m != 'BMW'"),
      f("(L.price = 15000 and L.m = 'BMW') or (L.price = 14000 and L.m != 'BMW')"),
      f("L.price = 14000 and L.m = 'BMW'")};
  o.check(!layers.empty() && equiv(layers[0], printed[0]), "L0 differs");
  const auto out = min_contr_symbolic(pref, con);
  o.check(equiv(out.contractor,
                f("L.m = R.m and ((L.price >= 11000 and L.price <= 13000 and R.price > 13000 and R.price <= 15000) "
                  "or (L.price >= 10000 and L.price < 11000 and R.price > 13000 and R.price <= 14000))")),
          "F_P- differs");

  // Layers must follow longest pref paths between end nodes; that is where the
  // printed L1/L2 split is off.
  std::vector<TupleValue> ends;
  for (const char* m : {"BMW", "VW", "Audi"})
    for (long p : {14000L, 15000L}) ends.push_back({Literal(m), Literal(p)});
  std::function<int(const TupleValue&)> longest = [&](const TupleValue& t) {
    int best = 0;
    for (const auto& u : ends)
      if (eval_pair(pref, t, u)) best = std::max(best, 1 + longest(u));
    return best;
  };
  bool by_definition = layers.size() == 4;
  for (const auto& t : ends)
    for (std::size_t i = 0; i < layers.size(); ++i)
      by_definition = by_definition && eval_unary(layers[i], t) == (static_cast<int>(i) == longest(t));
  const bool printed_match = layers.size() == 3 && equiv(layers[1], printed[1]) && equiv(layers[2], printed[2]);
  if (!printed_match) {
    if (by_definition)
      o.known.push_back("L1/L2 follow longest paths (BMW@15000 > VW@14000 > VW@15000), four strata (see README, known deviations)");
    else
      o.failures.push_back("strata match neither the printed split nor longest paths");
  }
}

void stratifiability_and_minimality(Outcome& o) {
  auto s = make_schema({{"price", Domain::Q}, {"year", Domain::Q}});
  auto pref = parse_formula("L.price < R.price", s);
  o.check(check_finitely_stratifiable(pref, parse_formula("L.price < 1 and (R.price = 2 or R.price = 3)", s)).stratifiable,
          "CON1 reported not finitely stratifiable");
  o.check(!check_finitely_stratifiable(pref, parse_formula("L.price < 1 and R.price >= 2", s)).stratifiable,
          "CON2 reported finitely stratifiable");

  auto line = make_schema({{"d", Domain::Q}});
  auto lp = parse_formula("L.d < R.d", line);
  auto lcon = parse_formula("(L.d >= 1 and L.d <= 2 and R.d = 4) or (L.d = 0 and R.d = 3)", line);
  auto p = check_minimal_symbolic(
      lp, lcon, parse_formula("(L.d >= 1 and L.d <= 2 and R.d > 2 and R.d <= 4) or (L.d = 0 and R.d > 0 and R.d <= 3)", line));
  o.check(p.is_full && !p.is_minimal, "P- not reported as full and non-minimal");
  auto star = check_minimal_symbolic(lp, lcon,
                                     parse_formula("(L.d >= 1 and L.d <= 2 and R.d > 2 and R.d <= 4) or "
                                                   "(L.d = 0 and ((R.d > 0 and R.d < 1) or (R.d > 2 and R.d <= 3)))",
                                                   line));
  o.check(star.is_full && star.is_minimal, "P* not reported as minimal");

  FiniteRelation r{{"u", "x"}, {"x", "y"}, {"y", "v"}, {"u", "y"}, {"x", "v"}, {"u", "v"}};
  auto rep = check_minimal_contractor(r, FiniteRelation{{"u", "v"}},
                                      FiniteRelation{{"u", "x"}, {"y", "v"}, {"x", "v"}, {"u", "v"}});
  o.check(!rep.is_minimal && rep.removable == FiniteRelation{{"u", "x"}, {"x", "v"}},
          "D is " + to_string(rep.removable));
}

void winnow_shortcut(Outcome& o) {
  auto s = make_schema({{"p", Domain::Q}});
  Dataset d{s, {}};
  for (long p : {1L, 2L, 3L, 4L}) d.rows.push_back({std::to_string(p), {Literal(p)}});
  auto pref = parse_formula("L.p < R.p", s);
  auto con = parse_formula("L.p = 0 and R.p = 3", s);
  const auto base = winnow(pref, d);
  o.check(base.keys() == Keys{"1"}, "base winnow is not {1}");
  auto one = winnow_after_contraction(pref, parse_formula("L.p = 0 and R.p > 0 and R.p <= 3", s), con, d, base, true);
  o.check(one.result.keys() == Keys{"1"} && one.report.strategy == WinnowStrategy::unchanged &&
              one.report.used_con_starts && one.report.start_hits == 0,
          "first contractor: " + to_json(one.report).dump());
  auto two = winnow_after_contraction(pref, parse_formula("L.p >= 0 and L.p < 3 and R.p = 3", s), con, d, base);
  o.check(two.result.keys() == Keys{"1", "3"} && two.report.strategy == WinnowStrategy::rewinnow_candidates &&
              two.report.start_hits == 1 && two.report.candidates == 2,
          "second contractor: " + to_json(two.report).dump());
}

void oracle_suite(Outcome& o) {
  const auto t0 = Clock::now();
  std::mt19937 rng(20240917);
  int cases = 0;
  std::size_t fails = 0;
  for (; cases < kOracleCases; ++cases) {
    const auto c = random_case(rng, kOracleNodes, kOracleEdges);
    auto bad = check_finite_case(c, rng);
    auto sym = check_symbolic_case(c, cases % 2 == 1);
    bad.insert(bad.end(), sym.begin(), sym.end());
    if (!bad.empty() && fails++ < 3) o.failures.push_back(bad.front());
  }
  if (fails > 3) o.failures.push_back(std::to_string(fails) + " failing cases in total");
  o.check(seconds_since(t0) < kSuiteSeconds, "suite slower than 5 min");
  o.note = std::to_string(cases) + " cases";
}

void qe_soundness(Outcome& o) {
  auto s = mixed();
  Gen gen(20240611);
  const auto samples = free_samples();
  std::uniform_int_distribution<std::size_t> any(0, samples.size() - 1);
  int disagreements = 0, tc_misses = 0;
  for (int trial = 0; trial < kQeFormulas; ++trial) {
    const auto f = gen.formula(s, 3);
    const auto g = qe_eliminate(f, 2);
    for (int k = 0; k < kQeSamplesPerFormula; ++k) {
      const auto& x = samples[any(gen.rng())];
      const auto& y = samples[any(gen.rng())];
      if (eval_pair(g, x, y) != exists_oracle(f, x, y)) ++disagreements;
    }
    try {
      const auto run = tc_symbolic_run(g, tc_lattice_bound(g));
      const auto twice = qe_eliminate(rename(run.closure, {0, 2}) && rename(run.closure, {2, 1}), 2);
      if (!implies(g, run.closure) || !implies(twice, run.closure)) ++tc_misses;
    } catch (const Error& e) {
      if (e.code() != Errc::iteration_cap) throw;
      ++tc_misses;
    }
  }
  o.check(disagreements == 0, std::to_string(disagreements) + " oracle disagreements");
  o.check(tc_misses == 0, std::to_string(tc_misses) + " closures missed the lattice bound");
  o.note = std::to_string(kQeFormulas) + " formulas";
}

// Grows a random point set until Pareto dominance has exactly `edges` edges,
// skipping points that would overshoot.
std::pair<Dataset, FiniteRelation> skyline_instance(std::mt19937& rng, std::size_t edges) {
  auto s = make_schema({{"a", Domain::Q}, {"b", Domain::Q}, {"c", Domain::Q}});
  const auto spec = parse_skyline_spec("a=min,b=min,c=min");
  std::uniform_int_distribution<int> v(0, 1000);
  Dataset d{s, {}};
  FiniteRelation r;
  for (int attempt = 0; attempt < 200000 && r.size() != edges; ++attempt) {
    d.rows.push_back({"r" + std::to_string(attempt), {Literal(v(rng)), Literal(v(rng)), Literal(v(rng))}});
    auto next = skyline_relation(d, spec);
    if (next.size() > edges)
      d.rows.pop_back();
    else
      r = std::move(next);
  }
  return {d, r};
}

void skyline_shape(Outcome& o) {
  std::mt19937 rng(8);
  double slowest = 0;
  for (int trial = 0; trial < kSkylineTrials; ++trial) {
    const auto [data, pref] = skyline_instance(rng, kSkylineEdges);
    o.check(pref.size() == kSkylineEdges, "generated " + std::to_string(pref.size()) + " edges");
    std::vector<Edge> all(pref.begin(), pref.end());
    std::shuffle(all.begin(), all.end(), rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, kMaxCon)(rng);
    const FiniteRelation con(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
    const auto t0 = Clock::now();
    const auto prefix = min_contr_finite(pref, con);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    o.check(secs < kPrefixSeconds, "prefix contraction took " + std::to_string(secs) + " s");
    const auto meet = meet_contr(pref, con);
    o.check(prefix.contractor.size() <= meet.contractor.size(), "prefix contractor larger than meet");
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "slowest prefix %.3f s", slowest);
  o.note = buf;
}

}  // namespace

int main() {
  report(1, "car table: winnow, symbolic contraction, winnow again", car_table);
  report(2, "five-chain prefix contractor and strata trace", five_chain_prefix);
  report(3, "protecting contractor and its forced set", protection_example);
  report(4, "meet contractor with and without protection", meet_examples);
  report(5, "symbolic strata and prefix contractor on makes and prices", symbolic_car_run);
  report(6, "finite stratifiability and minimality verdicts", stratifiability_and_minimality);
  report(7, "contraction-aware winnow strategies", winnow_shortcut);
  report(8, "random instances against exhaustive oracles and point encodings", oracle_suite);
  report(9, "quantifier elimination against grounded search; closure bound", qe_soundness);
  report(10, "prefix vs meet on 2000-edge skyline relations", skyline_shape);
  std::printf("%d unexpected failure%s\n", unexpected, unexpected == 1 ? "" : "s");
  return unexpected == 0 ? 0 : 1;
}
