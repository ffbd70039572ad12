#include "prefcon/contract_finite.hpp"

#include "graph.hpp"
#include "prefcon/error.hpp"

#include <algorithm>
#include <unordered_set>

namespace prefcon {
namespace {

using detail::Digraph;
using detail::NodeIndex;
using detail::pair_key;

nlohmann::json edge_list(const FiniteRelation& r) {
  auto out = nlohmann::json::array();
  for (const auto& e : r) out.push_back({e.from, e.to});
  return out;
}

// Dense view of one instance: the preference graph and membership sets.
class Indexed {
public:
  Indexed(const FiniteRelation& pref, std::initializer_list<const FiniteRelation*> extra) {
    idx_.add_all(pref);
    for (const auto* r : extra) idx_.add_all(*r);
    g_ = Digraph(pref, idx_);
  }

  const NodeIndex& index() const { return idx_; }
  const Digraph& pref() const { return g_; }
  int id(const NodeId& n) const { return idx_.find(n); }
  const NodeId& name(int i) const { return idx_.name(i); }

  std::unordered_set<std::uint64_t> keys(const FiniteRelation& r) const {
    std::unordered_set<std::uint64_t> out;
    out.reserve(r.size() * 2);
    for (const auto& e : r) out.insert(pair_key(id(e.from), id(e.to)));
    return out;
  }

  Digraph graph(const FiniteRelation& r) const { return Digraph(r, idx_); }

private:
  NodeIndex idx_;
  Digraph g_{0};
};

bool has(const std::unordered_set<std::uint64_t>& s, int a, int b) { return s.count(pair_key(a, b)) > 0; }

// Peels CON end nodes that start no edge of pref restricted to those nodes;
// each round is one layer.
std::vector<std::vector<int>> end_node_layers(const Indexed& in, const Digraph& con) {
  const Digraph& r = in.pref();
  const int n = r.size();
  std::vector<char> alive(static_cast<std::size_t>(n), 0);
  for (int v = 0; v < n; ++v)
    if (!con.in(v).empty()) alive[static_cast<std::size_t>(v)] = 1;
  std::vector<int> outdeg(static_cast<std::size_t>(n), 0);
  std::vector<int> remaining;
  for (int v = 0; v < n; ++v) {
    if (!alive[static_cast<std::size_t>(v)]) continue;
    remaining.push_back(v);
    for (int w : r.out(v))
      if (alive[static_cast<std::size_t>(w)]) ++outdeg[static_cast<std::size_t>(v)];
  }
  std::vector<std::vector<int>> layers;
  while (!remaining.empty()) {
    std::vector<int> layer;
    std::vector<int> rest;
    for (int v : remaining) (outdeg[static_cast<std::size_t>(v)] == 0 ? layer : rest).push_back(v);
    // pref is an SPO, so the restriction is acyclic and every round makes progress.
    if (layer.empty()) throw Error(Errc::not_spo, "preference relation restricted to CON end nodes is cyclic");
    for (int v : layer) {
      alive[static_cast<std::size_t>(v)] = 0;
      for (int p : r.in(v))
        if (alive[static_cast<std::size_t>(p)]) --outdeg[static_cast<std::size_t>(p)];
    }
    layers.push_back(std::move(layer));
    remaining = std::move(rest);
  }
  return layers;
}

ContractionResult finish(const FiniteRelation& pref, FiniteRelation contractor, ContractionMode mode) {
  ContractionResult out;
  out.contracted = pref - contractor;
  out.contractor = std::move(contractor);
  out.mode = mode;
  return out;
}

// Transitive closure of `protect` after checking it lies in pref and misses con.
FiniteRelation closed_protection(const FiniteRelation& pref, const FiniteRelation& con,
                                 const FiniteRelation& protect) {
  if (!is_subset(protect, pref))
    throw Error(Errc::precondition, "protected relation is not a subset of the preference relation",
                {{"edges", edge_list(protect - pref)}});
  FiniteRelation closed = transitive_closure(protect);
  FiniteRelation clash = closed & con;
  if (!clash.empty())
    throw Error(Errc::protection_conflict,
                "transitive closure of the protected relation contains CON edges: " + to_string(clash),
                {{"edges", edge_list(clash)}});
  return closed;
}

// {xy ∈ pref | ∃uv ∈ con. (u = x ∨ ux ∈ left) ∧ (y = v ∨ yv ∈ right)}
FiniteRelation detour_edges(const Indexed& in, const FiniteRelation& con, const Digraph& left,
                            const Digraph& right) {
  const Digraph& r = in.pref();
  std::unordered_set<std::uint64_t> seen;
  FiniteRelation out;
  std::vector<char> is_tail(static_cast<std::size_t>(r.size()), 0);
  for (const auto& e : con) {
    const int u = in.id(e.from);
    const int v = in.id(e.to);
    std::vector<int> heads{u};
    heads.insert(heads.end(), left.out(u).begin(), left.out(u).end());
    std::vector<int> tails{v};
    tails.insert(tails.end(), right.in(v).begin(), right.in(v).end());
    for (int y : tails) is_tail[static_cast<std::size_t>(y)] = 1;
    for (int x : heads)
      for (int y : r.out(x))
        if (is_tail[static_cast<std::size_t>(y)] && seen.insert(pair_key(x, y)).second)
          out.insert(in.name(x), in.name(y));
    for (int y : tails) is_tail[static_cast<std::size_t>(y)] = 0;
  }
  return out;
}

}  // namespace

std::string_view to_string(ContractionMode mode) {
  switch (mode) {
    case ContractionMode::prefix: return "PREFIX";
    case ContractionMode::protecting: return "PROTECTING";
    case ContractionMode::meet: return "MEET";
    case ContractionMode::protecting_meet: return "PROTECTING_MEET";
  }
  return "?";
}

void validate_instance(const FiniteRelation& pref, const FiniteRelation& con) {
  auto rep = spo_check(pref);
  if (!rep.is_spo()) {
    nlohmann::json detail{{"irreflexive", rep.is_irreflexive}, {"transitive", rep.is_transitive}};
    if (rep.witness) detail["witness"] = *rep.witness;
    throw Error(Errc::not_spo, rep.is_irreflexive ? "preference relation is not transitive"
                                                  : "preference relation is not irreflexive",
                std::move(detail));
  }
  if (!is_subset(con, pref)) {
    FiniteRelation extra = con - pref;
    throw Error(Errc::con_not_subset, "CON edges missing from the preference relation: " + to_string(extra),
                {{"edges", edge_list(extra)}});
  }
}

FullContractorReport check_full_contractor(const FiniteRelation& pref, const FiniteRelation& con,
                                           const FiniteRelation& p) {
  validate_instance(pref, con);
  FullContractorReport rep;
  for (const auto& e : con)
    if (!p.contains(e)) {
      rep.violation = ContractorViolation{ContractorViolation::Kind::missing_con_edge, e, {}};
      return rep;
    }
  for (const auto& e : p)
    if (!pref.contains(e)) {
      rep.violation = ContractorViolation{ContractorViolation::Kind::outside_pref, e, {}};
      return rep;
    }
  // pref − p is irreflexive, and since pref is transitive a path x..y in
  // pref − p with xy ∈ p exists iff pref − p has a two-edge violation.
  const FiniteRelation kept = pref - p;
  Indexed in(pref, {});
  const Digraph t = in.graph(kept);
  for (const auto& e : kept) {
    const int a = in.id(e.from);
    const int b = in.id(e.to);
    for (int c : t.out(b))
      if (!t.has(a, c)) {
        rep.violation = ContractorViolation{ContractorViolation::Kind::detour,
                                            Edge{e.from, in.name(c)},
                                            {e.from, e.to, in.name(c)}};
        return rep;
      }
  }
  rep.is_full = true;
  return rep;
}

MinimalityReport check_minimal_contractor(const FiniteRelation& pref, const FiniteRelation& con,
                                          const FiniteRelation& p) {
  auto full = check_full_contractor(pref, con, p);
  if (!full.is_full)
    throw Error(Errc::precondition, "relation is not a full contractor",
                {{"edge", {full.violation->edge.from, full.violation->edge.to}}});
  Indexed in(pref, {});
  const Digraph t = in.graph(pref - p);
  const FiniteRelation kept = detour_edges(in, con, t, t) & p;
  MinimalityReport rep;
  rep.removable = p - kept;
  rep.is_minimal = rep.removable.empty();
  return rep;
}

FiniteRelation naive_contractor(const FiniteRelation& pref, const FiniteRelation& con) {
  validate_instance(pref, con);
  FiniteRelation out;
  for (const auto& e : con)
    for (const auto& y : pref.successors(e.from))
      if (y == e.to || pref.contains(y, e.to)) out.insert(e.from, y);
  return out;
}

std::map<Edge, int> layer_indices(const FiniteRelation& pref, const FiniteRelation& con) {
  validate_instance(pref, con);
  Indexed in(pref, {});
  const Digraph c = in.graph(con);
  const auto layers = end_node_layers(in, c);
  std::map<Edge, int> out;
  for (std::size_t i = 0; i < layers.size(); ++i)
    for (int v : layers[i])
      for (int x : c.in(v)) out.emplace(Edge{in.name(x), in.name(v)}, static_cast<int>(i));
  return out;
}

ContractionResult min_contr_finite(const FiniteRelation& pref, const FiniteRelation& con) {
  validate_instance(pref, con);
  Indexed in(pref, {});
  const Digraph& r = in.pref();
  const Digraph c = in.graph(con);
  auto p = in.keys(con);
  FiniteRelation contractor = con;
  std::vector<StratumStep> trace;

  const auto layers = end_node_layers(in, c);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    StratumStep step;
    step.layer = static_cast<int>(i);
    std::vector<std::pair<int, int>> fresh;
    for (int v : layers[i])
      for (int x : c.in(v)) {
        step.con_edges.insert(in.name(x), in.name(v));
        step.added.insert(in.name(x), in.name(v));
        for (int y : r.out(x))
          if (y != v && r.has(y, v) && !has(p, y, v)) fresh.emplace_back(x, y);
      }
    for (auto [x, y] : fresh) {
      p.insert(pair_key(x, y));
      step.added.insert(in.name(x), in.name(y));
      contractor.insert(in.name(x), in.name(y));
    }
    trace.push_back(std::move(step));
  }
  auto out = finish(pref, std::move(contractor), ContractionMode::prefix);
  out.strata_trace = std::move(trace);
  return out;
}

FiniteRelation q_set(const FiniteRelation& pref, const FiniteRelation& con, const FiniteRelation& protected_rel) {
  validate_instance(pref, con);
  if (!is_subset(protected_rel, pref))
    throw Error(Errc::precondition, "protected relation is not a subset of the preference relation",
                {{"edges", edge_list(protected_rel - pref)}});
  if (!spo_check(protected_rel).is_transitive)
    throw Error(Errc::precondition, "protected relation must be transitively closed");
  FiniteRelation out;
  for (const auto& uy : con)
    for (const auto& x : protected_rel.successors(uy.from))
      if (pref.contains(x, uy.to)) out.insert(x, uy.to);
  return out;
}

ContractionResult min_contr_protecting(const FiniteRelation& pref, const FiniteRelation& con,
                                       const FiniteRelation& protect) {
  validate_instance(pref, con);
  FiniteRelation closed = closed_protection(pref, con, protect);
  FiniteRelation q = q_set(pref, con, closed);
  auto out = min_contr_finite(pref, con | q);
  out.mode = ContractionMode::protecting;
  out.protected_edges = std::move(closed);
  out.forced = std::move(q);
  return out;
}

ContractionResult meet_contr(const FiniteRelation& pref, const FiniteRelation& con) {
  validate_instance(pref, con);
  Indexed in(pref, {});
  const Digraph t = in.graph(pref - con);
  return finish(pref, detour_edges(in, con, t, t), ContractionMode::meet);
}

ContractionResult meet_contr_protecting(const FiniteRelation& pref, const FiniteRelation& con,
                                        const FiniteRelation& protect) {
  validate_instance(pref, con);
  FiniteRelation closed = closed_protection(pref, con, protect);
  Indexed in(pref, {});
  const Digraph plus = in.graph(closed);
  FiniteRelation forced = detour_edges(in, con, plus, plus);
  const Digraph t = in.graph(pref - forced);
  FiniteRelation meet = detour_edges(in, con, t, t) - closed;
  auto out = finish(pref, std::move(meet), ContractionMode::protecting_meet);
  out.protected_edges = std::move(closed);
  out.forced = std::move(forced);
  return out;
}

std::vector<FiniteRelation> enumerate_minimal_contractors(const FiniteRelation& pref, const FiniteRelation& con,
                                                          std::size_t bound) {
  validate_instance(pref, con);
  constexpr std::size_t kHardBound = 26;
  if (pref.size() > bound || pref.size() > kHardBound)
    throw Error(Errc::oracle_too_large,
                "preference relation has " + std::to_string(pref.size()) + " edges; oracle bound is " +
                    std::to_string(std::min(bound, kHardBound)),
                {{"edges", pref.size()}, {"bound", std::min(bound, kHardBound)}});

  // Bits 0..k-1 are the free edges pref − con; CON edges are always removed.
  const std::vector<Edge> free_edges = [&] {
    FiniteRelation f = pref - con;
    return std::vector<Edge>(f.begin(), f.end());
  }();
  const std::size_t k = free_edges.size();
  auto bit_of = [&](const Edge& e) -> int {
    auto it = std::lower_bound(free_edges.begin(), free_edges.end(), e);
    return it != free_edges.end() && *it == e ? static_cast<int>(it - free_edges.begin()) : -1;
  };

  // Composition triples ab, bc -> ac. The kept relation must be transitive:
  // whenever ab and bc are kept, ac must be kept too.
  struct Triple {
    int ab, bc, ac;  // -1 marks a CON edge, which is never kept
  };
  std::vector<Triple> triples;
  for (const auto& ab : pref)
    for (const auto& c : pref.successors(ab.to)) {
      Triple t{bit_of(ab), bit_of(Edge{ab.to, c}), bit_of(Edge{ab.from, c})};
      if (t.ab >= 0 && t.bc >= 0) triples.push_back(t);
    }

  const std::uint32_t total = std::uint32_t{1} << k;
  // full[m]: removing con plus the free edges in m leaves a transitive relation.
  std::vector<char> full(total, 0);
  for (std::uint32_t m = 0; m < total; ++m) {
    bool ok = true;
    for (const auto& t : triples) {
      const bool kept_ab = !((m >> t.ab) & 1U);
      const bool kept_bc = !((m >> t.bc) & 1U);
      const bool kept_ac = t.ac >= 0 && !((m >> t.ac) & 1U);
      if (kept_ab && kept_bc && !kept_ac) {
        ok = false;
        break;
      }
    }
    full[m] = ok;
  }
  // below[m]: some subset of m is full.
  std::vector<char> below = full;
  for (std::size_t b = 0; b < k; ++b)
    for (std::uint32_t m = 0; m < total; ++m)
      if ((m >> b) & 1U) below[m] = below[m] || below[m ^ (std::uint32_t{1} << b)];

  std::vector<FiniteRelation> out;
  for (std::uint32_t m = 0; m < total; ++m) {
    if (!full[m]) continue;
    bool minimal = true;
    for (std::size_t b = 0; b < k && minimal; ++b)
      if (((m >> b) & 1U) && below[m ^ (std::uint32_t{1} << b)]) minimal = false;
    if (!minimal) continue;
    FiniteRelation p = con;
    for (std::size_t b = 0; b < k; ++b)
      if ((m >> b) & 1U) p.insert(free_edges[b]);
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<FiniteRelation> restricted_change(const std::set<NodeId>& alternatives, const FiniteRelation& model,
                                                const std::vector<Statement>& statements, ChangeOp op) {
  auto rep = spo_check(model);
  if (!rep.is_spo()) throw Error(Errc::not_spo, "preference model is not a strict partial order");
  for (const auto& n : model.nodes())
    if (!alternatives.count(n)) throw Error(Errc::precondition, "model mentions unknown alternative '" + n + "'");
  for (const auto& s : statements)
    for (const auto* n : {&s.edge.from, &s.edge.to})
      if (!alternatives.count(*n))
        throw Error(Errc::precondition, "statement mentions unknown alternative '" + *n + "'");
  const bool any_pos = std::any_of(statements.begin(), statements.end(), [](const Statement& s) { return s.positive; });
  const bool any_neg = std::any_of(statements.begin(), statements.end(), [](const Statement& s) { return !s.positive; });
  if (any_pos && any_neg) throw Error(Errc::mixed_sign_set, "statements mix positive and negative sentences");

  // Contraction by S is revision by the complement of S.
  const bool positive = (op == ChangeOp::revise) ? !any_neg : !any_pos;
  FiniteRelation named;
  for (const auto& s : statements) named.insert(s.edge);
  if (positive) {
    FiniteRelation closed = transitive_closure(model | named);
    if (!spo_check(closed).is_irreflexive) return std::nullopt;
    return closed;
  }
  return model - meet_contr(model, named & model).contractor;
}

}  // namespace prefcon
