#include "prefcon/contract_symbolic.hpp"

#include "prefcon/error.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace prefcon {
namespace {

constexpr int kX = 0;
constexpr int kY = 1;
constexpr int kU = 2;
constexpr int kV = 3;

// f(a, b) for a binary formula f(0, 1).
DnfFormula at(const DnfFormula& f, int a, int b) { return rename(f, {a, b}); }

DnfFormula exists(const DnfFormula& f, int var) { return compact(qe_eliminate(f, var)); }

// ∃z. f(x,z) ∧ g(z,y)
DnfFormula compose(const DnfFormula& f, const DnfFormula& g) {
  return exists(at(f, kX, kU) && at(g, kU, kY), kU);
}

nlohmann::json tuple_json(const Schema& schema, const TupleValue& t) {
  auto out = nlohmann::json::object();
  for (std::size_t i = 0; i < schema.size() && i < t.size(); ++i) out[schema.at(i).name] = to_string(t[i]);
  return out;
}

nlohmann::json pair_witness(const DnfFormula& f) {
  const auto sat = satisfiable(f);
  if (!sat.satisfiable) return nullptr;
  return nlohmann::json::array({tuple_json(f.schema(), sat.witness.at(0)), tuple_json(f.schema(), sat.witness.at(1))});
}

// xy ∈ pref such that some uv ∈ con has (u = x or left(u,x)) and (y = v or right(y,v)).
DnfFormula detour(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& left, const DnfFormula& right) {
  const auto& s = pref.schema_ptr();
  // A(x, v) := ∃u. con(u,v) ∧ (u = x ∨ left(u,x))
  DnfFormula a = exists(at(con, kU, kV) && (tuple_equal(s, kU, kX) || at(left, kU, kX)), kU);
  DnfFormula b = exists(a && (tuple_equal(s, kY, kV) || at(right, kY, kV)), kV);
  return compact(b && pref);
}

void same_schema(const DnfFormula& f, const DnfFormula& g, const char* what) {
  if (f.schema() != g.schema()) throw Error(Errc::precondition, std::string(what) + " uses a different schema");
}

// Reach_{i+1}(y) := ∃x. pref_con(y,x) ∧ Reach_i(x), Reach_0 := K.
DnfFormula reach_step(const DnfFormula& pref_con, const DnfFormula& reach) {
  return exists(pref_con && rename(reach, {kY}), kY);
}

struct StratumWalk {
  DnfFormula pref_con;
  DnfFormula k;
  DnfFormula reach;  // nodes starting a path of i edges
  DnfFormula next;   // nodes starting a path of i + 1 edges

  StratumWalk(DnfFormula pc, DnfFormula kc)
      : pref_con(std::move(pc)), k(std::move(kc)), reach(k), next(reach_step(pref_con, k)) {}

  DnfFormula layer() const { return compact(and_not(reach, next)); }
  void advance() {
    reach = next;
    next = reach_step(pref_con, reach);
  }
};

constexpr int kMaxStrata = 1 << 16;

SymbolicContraction blank(const SchemaPtr& s) {
  return {DnfFormula::falsum(s), DnfFormula::falsum(s), ContractionMode::prefix, {}, std::nullopt, std::nullopt};
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

}  // namespace

// ------------------------------------------------------------ stratifiability

bool lambda_paths_bounded(const Schema& schema, const Conjunct& lambda) {
  Conjunct path;
  for (int step = 0; step < 3; ++step)
    for (Atom a : lambda) {
      a.lhs += step;
      if (a.rhs >= 0) a.rhs += step;
      path.push_back(std::move(a));
    }
  auto shared = std::make_shared<const Schema>(schema);
  return DnfFormula(shared, {path}).is_false();
}

bool lambda_paths_bounded_structural(const Schema& schema, const Conjunct& lambda) {
  if (lambda.empty()) return false;
  const Domain domain = schema.at(lambda.front().attr).domain;
  DnfFormula alone(std::make_shared<const Schema>(schema), {lambda});
  if (alone.is_false()) return true;

  // Range of values allowed on both sides, and the relation between them.
  std::vector<const Atom*> range;
  bool m_eq = false, m_order = false, m_ne = false;
  for (const auto& a : lambda) {
    if (a.has_literal()) {
      range.push_back(&a);
      continue;
    }
    if (a.cmp == Cmp::eq) m_eq = true;
    else if (a.cmp == Cmp::ne) m_ne = true;
    else m_order = true;
  }
  // Size of the intersection of both ranges: 0, 1 or "many".
  enum class Size { none, one, many };
  auto admits = [&](const Literal& value) {
    return std::all_of(range.begin(), range.end(), [&](const Atom* a) {
      auto o = value <=> a->lit;
      switch (a->cmp) {
        case Cmp::eq: return o == 0;
        case Cmp::ne: return o != 0;
        case Cmp::lt: return o < 0;
        case Cmp::gt: return o > 0;
      }
      return false;
    });
  };
  Size size = Size::many;
  auto point = std::find_if(range.begin(), range.end(), [](const Atom* a) { return a->cmp == Cmp::eq; });
  if (point != range.end()) {
    size = admits((*point)->lit) ? Size::one : Size::none;
  } else if (domain == Domain::Q) {
    std::optional<Rational> lo, hi;
    for (const Atom* a : range) {
      if (a->cmp == Cmp::gt && (!lo || a->lit.rational() > *lo)) lo = a->lit.rational();
      if (a->cmp == Cmp::lt && (!hi || a->lit.rational() < *hi)) hi = a->lit.rational();
    }
    if (lo && hi && !(*lo < *hi)) size = Size::none;
  }
  if (m_eq || (!m_order && !m_ne)) return size == Size::none;
  return size != Size::many;
}

DnfFormula end_nodes(const DnfFormula& con) { return compact(project_side(con, Side::right)); }

DnfFormula restrict_to_end_nodes(const DnfFormula& pref, const DnfFormula& con) {
  const DnfFormula k = end_nodes(con);
  return compact(pref && k && rename(k, {kY}));
}

StratifiabilityReport check_finitely_stratifiable(const DnfFormula& pref, const DnfFormula& con) {
  same_schema(pref, con, "base contractor");
  const Schema& schema = pref.schema();
  StratifiabilityReport rep;
  const DnfFormula pc = restrict_to_end_nodes(pref, con);
  rep.pref_con = to_string(pc);
  for (std::size_t i = 0; i < pc.disjuncts().size(); ++i) {
    const Conjunct& d = pc.disjuncts()[i];
    DisjunctVerdict v;
    v.formula = to_string(DnfFormula::from_canonical(pref.schema_ptr(), {d}));
    std::map<std::size_t, Conjunct> groups;
    for (const auto& a : d) groups[a.attr].push_back(a);
    bool any = false;
    for (const auto& [attr, lambda] : groups) {
      const bool bounded = lambda_paths_bounded(schema, lambda);
      v.bounded[schema.at(attr).name] = bounded;
      any = any || bounded;
    }
    if (!any && rep.stratifiable) {
      rep.stratifiable = false;
      rep.failing_disjunct = i;
    }
    rep.disjuncts.push_back(std::move(v));
  }
  return rep;
}

nlohmann::json to_json(const StratifiabilityReport& r) {
  nlohmann::json j;
  j["stratifiable"] = r.stratifiable;
  j["failing_disjunct"] = r.failing_disjunct ? nlohmann::json(*r.failing_disjunct) : nlohmann::json(nullptr);
  j["pref_con"] = r.pref_con;
  auto ds = nlohmann::json::array();
  for (const auto& d : r.disjuncts) {
    nlohmann::json attrs = nlohmann::json::object();
    for (const auto& [name, bounded] : d.bounded) attrs[name] = {{"bounded", bounded}};
    ds.push_back({{"formula", d.formula}, {"attributes", attrs}});
  }
  j["disjuncts"] = std::move(ds);
  return j;
}

std::optional<DnfFormula> get_stratum_symbolic(const DnfFormula& pref_con, const DnfFormula& k_con, int i) {
  if (i < 0) throw Error(Errc::precondition, "stratum index must be non-negative");
  StratumWalk walk(pref_con, k_con);
  for (int step = 0; step < i; ++step) {
    if (walk.next.is_false()) return std::nullopt;
    walk.advance();
  }
  DnfFormula layer = walk.layer();
  if (layer.is_false()) return std::nullopt;
  return layer;
}

// ---------------------------------------------------------------- contraction

void validate_symbolic(const DnfFormula& pref, const DnfFormula& con) {
  same_schema(pref, con, "base contractor");
  if (!rename(pref, {kX, kX}).is_false())
    throw Error(Errc::not_spo, "preference formula is not irreflexive", {{"witness", pair_witness(rename(pref, {kX, kX}))}});
  DnfFormula gap = and_not(at(pref, kX, kU) && at(pref, kU, kY), pref);
  if (!gap.is_false()) throw Error(Errc::not_spo, "preference formula is not transitive", {{"witness", pair_witness(gap)}});
  DnfFormula outside = and_not(con, pref);
  if (!outside.is_false())
    throw Error(Errc::con_not_subset, "base contractor is not contained in the preference relation",
                {{"witness", pair_witness(outside)}});
}

namespace {

SymbolicContraction prefix_run(const DnfFormula& pref, const DnfFormula& con) {
  const auto rep = check_finitely_stratifiable(pref, con);
  if (!rep.stratifiable)
    throw Error(Errc::not_finitely_stratifiable, "base contractor is not finitely stratifiable", to_json(rep));
  const auto& s = pref.schema_ptr();
  SymbolicContraction out = blank(s);
  StratumWalk walk(restrict_to_end_nodes(pref, con), end_nodes(con));
  for (int i = 0;; ++i) {
    if (i >= kMaxStrata) throw Error(Errc::iteration_cap, "stratum count exceeded the cap");
    DnfFormula layer = walk.layer();
    if (layer.is_false()) break;
    // E_i(x,y) := ∃v. L_i(v) ∧ con(x,v) ∧ pref(x,y) ∧ (y = v ∨ pref(y,v) ∧ ¬(P(y,v) ∨ con(y,v)))
    DnfFormula fresh = and_not(at(pref, kY, kV), at(out.contractor || con, kY, kV));
    DnfFormula added = exists(rename(layer, {kV}) && at(con, kX, kV) && (tuple_equal(s, kY, kV) || fresh), kV);
    added = compact(added && pref);
    out.contractor = compact(out.contractor || added);
    out.strata_trace.push_back({i, std::move(layer), std::move(added)});
    if (walk.next.is_false()) break;
    walk.advance();
  }
  out.contracted = compact(and_not(pref, out.contractor));
  return out;
}

DnfFormula closed_protection(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& protect) {
  same_schema(pref, protect, "protected relation");
  DnfFormula outside = and_not(protect, pref);
  if (!outside.is_false())
    throw Error(Errc::precondition, "protected relation is not contained in the preference relation",
                {{"witness", pair_witness(outside)}});
  DnfFormula closed = tc_symbolic(protect);
  DnfFormula clash = closed && con;
  if (!clash.is_false())
    throw Error(Errc::protection_conflict, "the closure of the protected relation meets the base contractor",
                {{"witness", pair_witness(clash)}});
  return closed;
}

}  // namespace

SymbolicContraction min_contr_symbolic(const DnfFormula& pref, const DnfFormula& con) {
  validate_symbolic(pref, con);
  return prefix_run(pref, con);
}

SymbolicMinimality check_minimal_symbolic(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& p) {
  validate_symbolic(pref, con);
  same_schema(pref, p, "contractor");
  SymbolicMinimality out{false, false, DnfFormula::falsum(pref.schema_ptr())};
  const DnfFormula rest = and_not(pref, p);
  // p is full iff con ⊆ p ⊆ pref and pref − p is transitive.
  const DnfFormula gap = p && at(rest, kX, kU) && at(rest, kU, kY);
  out.is_full = implies(con, p) && implies(p, pref) && gap.is_false();
  out.removable = compact(and_not(p, detour(pref, con, rest, rest)));
  out.is_minimal = out.is_full && out.removable.is_false();
  return out;
}

SymbolicClosure tc_symbolic_run(const DnfFormula& r, std::size_t max_iter) {
  SymbolicClosure out{compact(r), 0};
  for (;;) {
    if (out.iterations >= max_iter) throw Error(Errc::iteration_cap, "transitive closure did not reach a fixpoint");
    ++out.iterations;
    DnfFormula step = compose(out.closure, r);
    if (implies(step, out.closure)) return out;
    out.closure = compact(out.closure || step);
  }
}

DnfFormula tc_symbolic(const DnfFormula& r, std::size_t max_iter) { return tc_symbolic_run(r, max_iter).closure; }

std::size_t tc_lattice_bound(const DnfFormula& r) {
  const Schema& schema = r.schema();
  std::vector<std::set<Literal>> constants(schema.size());
  for (const auto& d : r.disjuncts())
    for (const auto& a : d)
      if (a.has_literal()) constants[a.attr].insert(a.lit);
  std::size_t cells = 1;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const std::size_t c = constants[i].size();
    // Positions of one value relative to the constants, for two values,
    // times how the two compare.
    const std::size_t per = schema.at(i).domain == Domain::Q ? (2 * c + 1) * (2 * c + 1) * 3 : (c + 1) * (c + 1) * 2;
    cells = saturating_mul(cells, per);
  }
  return cells;
}

DnfFormula q_set_symbolic(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& protected_closure) {
  // ∃u. pref(u,x) ∧ pref(x,y) ∧ con(u,y) ∧ P⁺(u,x)
  DnfFormula left = exists(at(pref, kU, kX) && at(protected_closure, kU, kX) && at(con, kU, kY), kU);
  return compact(left && pref);
}

SymbolicContraction min_contr_protecting_symbolic(const DnfFormula& pref, const DnfFormula& con,
                                                  const DnfFormula& protect) {
  validate_symbolic(pref, con);
  DnfFormula closed = closed_protection(pref, con, protect);
  DnfFormula q = q_set_symbolic(pref, con, closed);
  auto out = prefix_run(pref, compact(con || q));
  out.mode = ContractionMode::protecting;
  out.protected_closure = std::move(closed);
  out.forced = std::move(q);
  return out;
}

SymbolicContraction meet_contr_symbolic(const DnfFormula& pref, const DnfFormula& con,
                                        const std::optional<DnfFormula>& protect) {
  validate_symbolic(pref, con);
  const auto& s = pref.schema_ptr();
  SymbolicContraction out = blank(s);
  if (!protect) {
    const DnfFormula rest = and_not(pref, con);
    out.contractor = detour(pref, con, rest, rest);
    out.mode = ContractionMode::meet;
  } else {
    DnfFormula closed = closed_protection(pref, con, *protect);
    DnfFormula forced = detour(pref, con, closed, closed);
    const DnfFormula rest = and_not(pref, forced);
    out.contractor = compact(and_not(detour(pref, con, rest, rest), closed));
    out.mode = ContractionMode::protecting_meet;
    out.protected_closure = std::move(closed);
    out.forced = std::move(forced);
  }
  out.contracted = compact(and_not(pref, out.contractor));
  return out;
}

nlohmann::json to_json(const SymbolicContraction& r) {
  nlohmann::json j;
  j["mode"] = std::string(to_string(r.mode));
  j["contractor"] = to_string(r.contractor);
  j["contracted"] = to_string(r.contracted);
  auto trace = nlohmann::json::array();
  for (const auto& st : r.strata_trace)
    trace.push_back({{"layer", st.layer}, {"end_nodes", to_string(st.end_nodes)}, {"added", to_string(st.added)}});
  j["strata_trace"] = std::move(trace);
  if (r.protected_closure) j["protected_closure"] = to_string(*r.protected_closure);
  if (r.forced) j["forced"] = to_string(*r.forced);
  return j;
}

}  // namespace prefcon
