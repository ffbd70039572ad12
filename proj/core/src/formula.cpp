#include "prefcon/formula.hpp"

#include "formula_internal.hpp"
#include "prefcon/error.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <numeric>
#include <set>

namespace prefcon {

// ---------------------------------------------------------------- schema

Schema::Schema(std::vector<Attribute> attributes) : attrs_(std::move(attributes)) {
  if (attrs_.empty()) throw Error(Errc::precondition, "schema needs at least one attribute");
  std::set<std::string> seen;
  for (const auto& a : attrs_) {
    if (a.name.empty()) throw Error(Errc::precondition, "attribute names must be non-empty");
    if (!seen.insert(a.name).second)
      throw Error(Errc::precondition, "duplicate attribute name '" + a.name + "'");
  }
}

std::optional<std::size_t> Schema::find(std::string_view name) const {
  for (std::size_t i = 0; i < attrs_.size(); ++i)
    if (attrs_[i].name == name) return i;
  return std::nullopt;
}

SchemaPtr make_schema(std::vector<Attribute> attributes) {
  return std::make_shared<const Schema>(std::move(attributes));
}

// --------------------------------------------------------------- literals

std::strong_ordering operator<=>(const Literal& a, const Literal& b) {
  if (a.v_.index() != b.v_.index()) return a.v_.index() <=> b.v_.index();
  if (a.is_rational()) {
    int c = cmp(a.rational(), b.rational());
    return c < 0 ? std::strong_ordering::less
                 : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
  }
  return a.text() <=> b.text();
}

std::string to_string(const Literal& l) {
  if (l.is_rational()) return l.rational().get_str();
  std::string out = "\"";
  for (char ch : l.text()) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out + "\"";
}

std::optional<Rational> parse_rational(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) negative = text[i++] == '-';
  auto digits = [&](std::string& into) {
    std::size_t start = i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') into += text[i++];
    return i > start;
  };
  std::string whole;
  if (!digits(whole)) return std::nullopt;
  Rational value;
  if (i < text.size() && text[i] == '/') {
    ++i;
    std::string den;
    if (!digits(den) || i != text.size()) return std::nullopt;
    mpz_class d(den);
    if (d == 0) return std::nullopt;
    value = Rational(mpz_class(whole), d);
  } else if (i < text.size() && text[i] == '.') {
    ++i;
    std::string frac;
    if (!digits(frac) || i != text.size()) return std::nullopt;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    value = Rational(mpz_class(whole + frac), scale);
  } else {
    if (i != text.size()) return std::nullopt;
    value = Rational(mpz_class(whole));
  }
  value.canonicalize();
  if (negative) value = -value;
  return value;
}

// ------------------------------------------------------------------ atoms

std::strong_ordering operator<=>(const Atom& a, const Atom& b) {
  if (auto c = a.attr <=> b.attr; c != 0) return c;
  if (auto c = a.lhs <=> b.lhs; c != 0) return c;
  if (auto c = a.rhs <=> b.rhs; c != 0) return c;
  if (auto c = a.cmp <=> b.cmp; c != 0) return c;
  return a.lit <=> b.lit;
}

namespace detail {

Cmp flip(Cmp c) {
  switch (c) {
    case Cmp::lt: return Cmp::gt;
    case Cmp::gt: return Cmp::lt;
    default: return c;
  }
}

bool holds(const Literal& a, Cmp c, const Literal& b) {
  auto o = a <=> b;
  switch (c) {
    case Cmp::eq: return o == 0;
    case Cmp::ne: return o != 0;
    case Cmp::lt: return o < 0;
    case Cmp::gt: return o > 0;
  }
  return false;
}

Built build(std::size_t attr, Term a, Cmp c, Term b) {
  if (a.var < 0 && b.var < 0) return {holds(a.lit, c, b.lit) ? Truth::yes : Truth::no, {}};
  if (a.var < 0) {
    std::swap(a, b);
    c = flip(c);
  }
  if (b.var >= 0) {
    if (a.var == b.var) return {c == Cmp::eq ? Truth::yes : Truth::no, {}};
    if (a.var > b.var) {
      std::swap(a, b);
      c = flip(c);
    }
    return {Truth::atom, Atom{attr, a.var, c, b.var, Literal()}};
  }
  return {Truth::atom, Atom{attr, a.var, c, -1, std::move(b.lit)}};
}

std::vector<Atom> negate_atom(const Atom& a) {
  std::vector<Atom> out;
  auto with = [&](Cmp c) {
    Atom n = a;
    n.cmp = c;
    out.push_back(std::move(n));
  };
  switch (a.cmp) {
    case Cmp::eq: with(Cmp::ne); break;
    case Cmp::ne: with(Cmp::eq); break;
    case Cmp::lt: with(Cmp::gt); with(Cmp::eq); break;
    case Cmp::gt: with(Cmp::lt); with(Cmp::eq); break;
  }
  return out;
}

namespace {

// Canonical form of the atoms of one attribute. Equality classes collapse to
// their smallest variable or to a constant; per-variable constant bounds are
// merged into the tightest strict lower/upper bound; disequalities outside the
// bounds are dropped.
bool canonical_group(Domain domain, std::size_t attr, Conjunct::const_iterator first,
                     Conjunct::const_iterator last, Conjunct& out) {
  std::vector<int> vs;
  for (auto it = first; it != last; ++it) {
    vs.push_back(it->lhs);
    if (it->rhs >= 0) vs.push_back(it->rhs);
  }
  std::sort(vs.begin(), vs.end());
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
  const std::size_t n = vs.size();
  auto pos = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(vs.begin(), vs.end(), v) - vs.begin());
  };

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t k) {
    while (parent[k] != k) k = parent[k] = parent[parent[k]];
    return k;
  };
  for (auto it = first; it != last; ++it) {
    if (it->cmp != Cmp::eq || it->rhs < 0) continue;
    std::size_t a = find(pos(it->lhs)), b = find(pos(it->rhs));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::optional<Literal>> konst(n);
  for (auto it = first; it != last; ++it) {
    if (it->cmp != Cmp::eq || it->rhs >= 0) continue;
    auto& k = konst[find(pos(it->lhs))];
    if (k && *k != it->lit) return false;
    k = it->lit;
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t r = find(k);
    if (konst[r])
      out.push_back(Atom{attr, vs[k], Cmp::eq, -1, *konst[r]});
    else if (r != k)
      out.push_back(Atom{attr, vs[r], Cmp::eq, vs[k], Literal()});
  }

  struct Bounds {
    std::optional<Literal> lo, hi;
    std::vector<Literal> ne;
  };
  std::vector<Bounds> bounds(n);
  std::map<std::pair<int, int>, unsigned> rel;
  auto term_for = [&](int v) {
    std::size_t r = find(pos(v));
    return konst[r] ? Term{-1, *konst[r]} : Term{vs[r], Literal()};
  };
  for (auto it = first; it != last; ++it) {
    if (it->cmp == Cmp::eq) continue;
    Term rhs = it->rhs >= 0 ? term_for(it->rhs) : Term{-1, it->lit};
    Built b = build(attr, term_for(it->lhs), it->cmp, std::move(rhs));
    if (b.truth == Truth::no) return false;
    if (b.truth == Truth::yes) continue;
    const Atom& a = b.atom;
    if (a.has_literal()) {
      Bounds& bd = bounds[pos(a.lhs)];
      if (a.cmp == Cmp::lt && (!bd.hi || a.lit < *bd.hi)) bd.hi = a.lit;
      if (a.cmp == Cmp::gt && (!bd.lo || a.lit > *bd.lo)) bd.lo = a.lit;
      if (a.cmp == Cmp::ne) bd.ne.push_back(a.lit);
    } else {
      unsigned flag = a.cmp == Cmp::lt ? 1u : a.cmp == Cmp::gt ? 2u : 4u;
      rel[{a.lhs, a.rhs}] |= flag;
    }
  }
  (void)domain;
  for (std::size_t k = 0; k < n; ++k) {
    Bounds& bd = bounds[k];
    if (bd.lo && bd.hi && !(*bd.lo < *bd.hi)) return false;
    if (bd.lo) out.push_back(Atom{attr, vs[k], Cmp::gt, -1, *bd.lo});
    if (bd.hi) out.push_back(Atom{attr, vs[k], Cmp::lt, -1, *bd.hi});
    std::sort(bd.ne.begin(), bd.ne.end());
    bd.ne.erase(std::unique(bd.ne.begin(), bd.ne.end()), bd.ne.end());
    for (auto& c : bd.ne) {
      if ((bd.lo && c <= *bd.lo) || (bd.hi && c >= *bd.hi)) continue;
      out.push_back(Atom{attr, vs[k], Cmp::ne, -1, c});
    }
  }
  for (auto& [vars, flags] : rel) {
    if ((flags & 1u) && (flags & 2u)) return false;
    Cmp c = (flags & 1u) ? Cmp::lt : (flags & 2u) ? Cmp::gt : Cmp::ne;
    out.push_back(Atom{attr, vars.first, c, vars.second, Literal()});
  }
  return true;
}

struct OrderGraph {
  std::vector<int> nodes;
  std::vector<std::vector<std::size_t>> succ;
  std::vector<std::optional<Rational>> lo, hi;
  std::vector<std::size_t> topo;
};

// Strict-order constraints of one canonical Q group. Returns false on a cycle.
bool order_graph(Conjunct::const_iterator first, Conjunct::const_iterator last, OrderGraph& g) {
  for (auto it = first; it != last; ++it) {
    if (it->cmp == Cmp::eq) continue;
    g.nodes.push_back(it->lhs);
    if (it->rhs >= 0) g.nodes.push_back(it->rhs);
  }
  std::sort(g.nodes.begin(), g.nodes.end());
  g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
  const std::size_t n = g.nodes.size();
  auto pos = [&](int v) {
    return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), v) -
                                    g.nodes.begin());
  };
  g.succ.assign(n, {});
  g.lo.assign(n, std::nullopt);
  g.hi.assign(n, std::nullopt);
  std::vector<std::size_t> indeg(n, 0);
  for (auto it = first; it != last; ++it) {
    if (it->cmp == Cmp::eq || it->cmp == Cmp::ne) continue;
    std::size_t a = pos(it->lhs);
    if (it->has_literal()) {
      (it->cmp == Cmp::lt ? g.hi : g.lo)[a] = it->lit.rational();
      continue;
    }
    std::size_t b = pos(it->rhs);
    if (it->cmp == Cmp::gt) std::swap(a, b);
    g.succ[a].push_back(b);
    ++indeg[b];
  }
  std::vector<std::size_t> ready;
  for (std::size_t k = 0; k < n; ++k)
    if (indeg[k] == 0) ready.push_back(k);
  while (!ready.empty()) {
    std::size_t k = ready.back();
    ready.pop_back();
    g.topo.push_back(k);
    for (std::size_t s : g.succ[k])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  return g.topo.size() == n;
}

// minhi[k]: tightest upper bound over k and everything above it.
std::vector<std::optional<Rational>> upper_envelope(const OrderGraph& g) {
  std::vector<std::optional<Rational>> minhi = g.hi;
  for (auto it = g.topo.rbegin(); it != g.topo.rend(); ++it)
    for (std::size_t s : g.succ[*it])
      if (minhi[s] && (!minhi[*it] || *minhi[s] < *minhi[*it])) minhi[*it] = minhi[s];
  return minhi;
}

bool q_group_feasible(Conjunct::const_iterator first, Conjunct::const_iterator last) {
  OrderGraph g;
  if (!order_graph(first, last, g)) return false;
  auto minhi = upper_envelope(g);
  std::vector<std::optional<Rational>> maxlo = g.lo;
  for (std::size_t k : g.topo) {
    if (maxlo[k] && minhi[k] && !(*maxlo[k] < *minhi[k])) return false;
    for (std::size_t s : g.succ[k])
      if (maxlo[k] && (!maxlo[s] || *maxlo[k] > *maxlo[s])) maxlo[s] = maxlo[k];
  }
  return true;
}

template <typename F>
void for_each_group(const Conjunct& c, F&& f) {
  std::size_t i = 0;
  while (i < c.size()) {
    std::size_t j = i;
    while (j < c.size() && c[j].attr == c[i].attr) ++j;
    f(c.begin() + static_cast<std::ptrdiff_t>(i), c.begin() + static_cast<std::ptrdiff_t>(j));
    i = j;
  }
}

std::atomic<std::size_t> g_atom_cap{1'000'000};

}  // namespace

bool canonicalize(const Schema& schema, Conjunct& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  Conjunct out;
  out.reserve(c.size());
  bool ok = true;
  for_each_group(c, [&](auto first, auto last) {
    if (ok) ok = canonical_group(schema.at(first->attr).domain, first->attr, first, last, out);
  });
  if (!ok) return false;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  bool feasible = true;
  for_each_group(out, [&](auto first, auto last) {
    if (feasible && schema.at(first->attr).domain == Domain::Q)
      feasible = q_group_feasible(first, last);
  });
  if (!feasible) return false;
  c = std::move(out);
  return true;
}

void simplify(std::vector<Conjunct>& ds) {
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  for (const auto& d : ds)
    if (d.empty()) {
      ds.assign(1, Conjunct{});
      return;
    }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds[a].size() < ds[b].size(); });
  std::vector<bool> drop(ds.size(), false);
  std::vector<std::size_t> kept;
  for (std::size_t a : order) {
    for (std::size_t b : kept) {
      if (ds[b].size() < ds[a].size() &&
          std::includes(ds[a].begin(), ds[a].end(), ds[b].begin(), ds[b].end())) {
        drop[a] = true;
        break;
      }
    }
    if (!drop[a]) kept.push_back(a);
  }
  std::vector<Conjunct> out;
  out.reserve(kept.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!drop[i]) out.push_back(std::move(ds[i]));
  ds = std::move(out);
}

void check_cap(const std::vector<Conjunct>& ds) {
  std::size_t atoms = 0;
  for (const auto& d : ds) atoms += d.size() + 1;
  if (atoms > g_atom_cap.load())
    throw Error(Errc::resource_limit,
                "formula grew past the atom cap of " + std::to_string(g_atom_cap.load()),
                {{"atoms", atoms}});
}

bool conjunct_sat_with(const Schema& schema, const Conjunct& k, const std::vector<Atom>& extra,
                       Conjunct& out) {
  out = k;
  out.insert(out.end(), extra.begin(), extra.end());
  return canonicalize(schema, out);
}

bool conjunct_implies(const Schema& schema, const Conjunct& a, const Conjunct& b) {
  Conjunct scratch;
  for (const auto& atom : b)
    for (const auto& n : negate_atom(atom))
      if (conjunct_sat_with(schema, a, {n}, scratch)) return false;
  return true;
}

std::optional<Conjunct> eliminate(const Schema& schema, const Conjunct& c, int var) {
  Conjunct out;
  bool ok = true;
  for_each_group(c, [&](auto first, auto last) {
    if (!ok) return;
    const std::size_t attr = first->attr;
    auto mentions = [&](const Atom& a) { return a.lhs == var || a.rhs == var; };
    std::optional<Term> pinned;
    for (auto it = first; it != last && !pinned; ++it) {
      if (it->cmp != Cmp::eq || !mentions(*it)) continue;
      if (it->has_literal())
        pinned = Term{-1, it->lit};
      else
        pinned = Term{it->lhs == var ? it->rhs : it->lhs, Literal()};
    }
    auto emit = [&](Built b) {
      if (b.truth == Truth::no) ok = false;
      if (b.truth == Truth::atom) out.push_back(std::move(b.atom));
    };
    if (pinned) {
      auto sub = [&](int v, const Literal& lit) {
        if (v < 0) return Term{-1, lit};
        return v == var ? *pinned : Term{v, Literal()};
      };
      for (auto it = first; it != last && ok; ++it) {
        if (!mentions(*it)) {
          out.push_back(*it);
          continue;
        }
        emit(build(attr, sub(it->lhs, Literal()), it->cmp, sub(it->rhs, it->lit)));
      }
      return;
    }
    std::vector<Term> lower, upper;
    for (auto it = first; it != last; ++it) {
      if (!mentions(*it)) {
        out.push_back(*it);
        continue;
      }
      if (it->cmp == Cmp::ne) continue;
      Term other = it->lhs == var ? (it->has_literal() ? Term{-1, it->lit} : Term{it->rhs, Literal()})
                                  : Term{it->lhs, Literal()};
      // orient as "var cmp other"
      Cmp c = it->lhs == var ? it->cmp : flip(it->cmp);
      (c == Cmp::lt ? upper : lower).push_back(std::move(other));
    }
    for (const auto& l : lower)
      for (const auto& u : upper)
        if (ok) emit(build(attr, l, Cmp::lt, u));
  });
  if (!ok || !canonicalize(schema, out)) return std::nullopt;
  return out;
}

std::vector<TupleValue> witness_for(const Schema& schema, const Conjunct& c, int nvars) {
  std::vector<TupleValue> vals(static_cast<std::size_t>(nvars), TupleValue(schema.size()));
  std::set<std::string> used;
  for (const auto& a : c)
    if (a.has_literal() && !a.lit.is_rational()) used.insert(a.lit.text());
  int fresh_counter = 0;
  auto fresh = [&] {
    std::string s;
    do s = "_" + std::to_string(fresh_counter++);
    while (used.count(s));
    used.insert(s);
    return s;
  };
  for (std::size_t attr = 0; attr < schema.size(); ++attr) {
    const bool is_q = schema.at(attr).domain == Domain::Q;
    auto first = std::lower_bound(c.begin(), c.end(), attr,
                                  [](const Atom& a, std::size_t at) { return a.attr < at; });
    auto last = std::find_if(first, c.end(), [&](const Atom& a) { return a.attr != attr; });
    std::vector<bool> set(static_cast<std::size_t>(nvars), false);
    auto put = [&](int v, Literal l) {
      vals[static_cast<std::size_t>(v)][attr] = std::move(l);
      set[static_cast<std::size_t>(v)] = true;
    };
    for (auto it = first; it != last; ++it)
      if (it->cmp == Cmp::eq && it->has_literal()) put(it->lhs, it->lit);
    if (is_q) {
      OrderGraph g;
      order_graph(first, last, g);
      auto minhi = upper_envelope(g);
      auto pos = [&](int v) {
        return static_cast<std::size_t>(std::lower_bound(g.nodes.begin(), g.nodes.end(), v) -
                                        g.nodes.begin());
      };
      std::vector<std::optional<Rational>> floor = g.lo;
      for (std::size_t k : g.topo) {
        const int v = g.nodes[k];
        std::vector<Rational> forbidden;
        for (auto it = first; it != last; ++it) {
          if (it->cmp != Cmp::ne) continue;
          if (it->lhs == v && it->has_literal()) forbidden.push_back(it->lit.rational());
          int other = it->lhs == v ? it->rhs : it->rhs == v ? it->lhs : -1;
          if (other >= 0 && set[static_cast<std::size_t>(other)])
            forbidden.push_back(vals[static_cast<std::size_t>(other)][attr].rational());
        }
        auto bad = [&](const Rational& q) {
          return std::find(forbidden.begin(), forbidden.end(), q) != forbidden.end();
        };
        const auto& a = floor[k];
        const auto& b = minhi[k];
        Rational x;
        if (a && b) {
          x = (*a + *b) / 2;
          while (bad(x)) x = (*a + x) / 2;
        } else if (a) {
          x = *a + 1;
          while (bad(x)) x += 1;
        } else if (b) {
          x = *b - 1;
          while (bad(x)) x -= 1;
        } else {
          x = 0;
          while (bad(x)) x += 1;
        }
        put(v, Literal(x));
        for (std::size_t s : g.succ[k])
          if (!floor[s] || x > *floor[s]) floor[s] = x;
        (void)pos;
      }
    }
    // Remaining representatives: unconstrained in order, maybe bound by !=.
    for (int v = 0; v < nvars; ++v) {
      if (set[static_cast<std::size_t>(v)]) continue;
      bool non_rep = false;
      for (auto it = first; it != last; ++it)
        if (it->cmp == Cmp::eq && it->rhs == v) non_rep = true;
      if (non_rep) continue;
      if (is_q) {
        std::vector<Rational> forbidden;
        for (auto it = first; it != last; ++it) {
          if (it->cmp != Cmp::ne) continue;
          if (it->lhs == v && it->has_literal()) forbidden.push_back(it->lit.rational());
          int other = it->lhs == v ? it->rhs : it->rhs == v ? it->lhs : -1;
          if (other >= 0 && set[static_cast<std::size_t>(other)])
            forbidden.push_back(vals[static_cast<std::size_t>(other)][attr].rational());
        }
        Rational x = 0;
        while (std::find(forbidden.begin(), forbidden.end(), x) != forbidden.end()) x += 1;
        put(v, Literal(x));
      } else {
        put(v, Literal(fresh()));
      }
    }
    for (auto it = first; it != last; ++it)
      if (it->cmp == Cmp::eq && !it->has_literal())
        put(it->rhs, vals[static_cast<std::size_t>(it->lhs)][attr]);
  }
  return vals;
}

void check_atom(const Schema& schema, const Atom& a) {
  if (a.attr >= schema.size()) throw Error(Errc::type_error, "attribute index out of range");
  const Attribute& at = schema.at(a.attr);
  if (at.domain == Domain::C && (a.cmp == Cmp::lt || a.cmp == Cmp::gt))
    throw Error(Errc::type_error, "order comparison on C attribute '" + at.name + "'");
  if (a.has_literal() && a.lit.is_rational() != (at.domain == Domain::Q))
    throw Error(Errc::type_error, "literal " + to_string(a.lit) + " does not match the domain of '" +
                                      at.name + "'");
  if (a.lhs < 0) throw Error(Errc::type_error, "atom without a tuple variable");
}

}  // namespace detail

using detail::Built;
using detail::Term;
using detail::Truth;

void set_atom_cap(std::size_t cap) { detail::g_atom_cap = cap; }
std::size_t atom_cap() { return detail::g_atom_cap.load(); }

// ---------------------------------------------------------------- formula

DnfFormula::DnfFormula(SchemaPtr schema, std::vector<Conjunct> disjuncts)
    : schema_(std::move(schema)) {
  for (auto& d : disjuncts) {
    for (const auto& a : d) detail::check_atom(*schema_, a);
    Conjunct c;
    bool ok = true;
    for (const auto& a : d) {
      Built b = detail::build(a.attr, Term{a.lhs, Literal()}, a.cmp,
                              a.rhs >= 0 ? Term{a.rhs, Literal()} : Term{-1, a.lit});
      if (b.truth == Truth::no) ok = false;
      if (b.truth == Truth::atom) c.push_back(std::move(b.atom));
    }
    if (ok && detail::canonicalize(*schema_, c)) disjuncts_.push_back(std::move(c));
  }
  detail::check_cap(disjuncts_);
  detail::simplify(disjuncts_);
}

DnfFormula DnfFormula::truth(SchemaPtr schema) {
  return from_canonical(std::move(schema), {Conjunct{}});
}

DnfFormula DnfFormula::from_canonical(SchemaPtr schema, std::vector<Conjunct> disjuncts) {
  DnfFormula f(std::move(schema));
  f.disjuncts_ = std::move(disjuncts);
  detail::simplify(f.disjuncts_);
  return f;
}

bool DnfFormula::is_true() const noexcept {
  return std::any_of(disjuncts_.begin(), disjuncts_.end(), [](const Conjunct& c) { return c.empty(); });
}

std::size_t DnfFormula::atom_count() const noexcept {
  std::size_t n = 0;
  for (const auto& d : disjuncts_) n += d.size();
  return n;
}

int DnfFormula::max_var() const noexcept {
  int m = -1;
  for (const auto& d : disjuncts_)
    for (const auto& a : d) m = std::max({m, a.lhs, a.rhs});
  return m;
}

DnfFormula atom_formula(SchemaPtr schema, std::size_t attr, int var, Cmp cmp, Literal lit) {
  Atom a{attr, var, cmp, -1, std::move(lit)};
  return DnfFormula(std::move(schema), {Conjunct{a}});
}

DnfFormula atom_formula(SchemaPtr schema, std::size_t attr, int var, Cmp cmp, int other) {
  Atom a{attr, var, cmp, other, Literal()};
  return DnfFormula(std::move(schema), {Conjunct{a}});
}

DnfFormula tuple_equal(SchemaPtr schema, int a, int b) {
  Conjunct c;
  for (std::size_t i = 0; i < schema->size(); ++i) c.push_back(Atom{i, a, Cmp::eq, b, Literal()});
  return DnfFormula(std::move(schema), {c});
}

DnfFormula operator||(const DnfFormula& f, const DnfFormula& g) {
  std::vector<Conjunct> ds = f.disjuncts();
  ds.insert(ds.end(), g.disjuncts().begin(), g.disjuncts().end());
  detail::check_cap(ds);
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(ds));
}

DnfFormula operator&&(const DnfFormula& f, const DnfFormula& g) {
  std::vector<Conjunct> ds;
  Conjunct scratch;
  for (const auto& a : f.disjuncts()) {
    for (const auto& b : g.disjuncts()) {
      if (detail::conjunct_sat_with(f.schema(), a, b, scratch)) ds.push_back(std::move(scratch));
    }
    detail::check_cap(ds);
  }
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(ds));
}

DnfFormula and_not(const DnfFormula& f, const DnfFormula& g) {
  const Schema& schema = f.schema();
  std::vector<Conjunct> cur = f.disjuncts();
  Conjunct scratch;
  for (const auto& gc : g.disjuncts()) {
    if (cur.empty()) break;
    std::vector<Conjunct> next;
    for (auto& k : cur) {
      if (!detail::conjunct_sat_with(schema, k, gc, scratch)) {
        next.push_back(std::move(k));
        continue;
      }
      for (const auto& atom : gc)
        for (const auto& n : detail::negate_atom(atom))
          if (detail::conjunct_sat_with(schema, k, {n}, scratch)) next.push_back(std::move(scratch));
    }
    detail::simplify(next);
    detail::check_cap(next);
    cur = std::move(next);
  }
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(cur));
}

DnfFormula negate(const DnfFormula& f) { return and_not(DnfFormula::truth(f.schema_ptr()), f); }

DnfFormula rename(const DnfFormula& f, const std::vector<int>& map) {
  auto m = [&](int v) {
    return v >= 0 && static_cast<std::size_t>(v) < map.size() ? map[static_cast<std::size_t>(v)] : v;
  };
  std::vector<Conjunct> ds;
  for (const auto& d : f.disjuncts()) {
    Conjunct c;
    bool ok = true;
    for (const auto& a : d) {
      Built b = detail::build(a.attr, Term{m(a.lhs), Literal()}, a.cmp,
                              a.rhs >= 0 ? Term{m(a.rhs), Literal()} : Term{-1, a.lit});
      if (b.truth == Truth::no) {
        ok = false;
        break;
      }
      if (b.truth == Truth::atom) c.push_back(std::move(b.atom));
    }
    if (ok && detail::canonicalize(f.schema(), c)) ds.push_back(std::move(c));
  }
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(ds));
}

DnfFormula substitute(const DnfFormula& f, std::initializer_list<std::pair<int, int>> moves) {
  int top = std::max(f.max_var(), 0);
  for (auto [from, to] : moves) top = std::max(top, from);
  std::vector<int> map(static_cast<std::size_t>(top) + 1);
  std::iota(map.begin(), map.end(), 0);
  for (auto [from, to] : moves) map[static_cast<std::size_t>(from)] = to;
  return rename(f, map);
}

DnfFormula compact(const DnfFormula& f) {
  const auto& ds = f.disjuncts();
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  // Try to drop the most specific disjuncts first.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ds[a].size() > ds[b].size(); });
  std::vector<bool> drop(ds.size(), false);
  for (std::size_t a : order) {
    for (std::size_t b = 0; b < ds.size(); ++b) {
      if (b == a || drop[b]) continue;
      if (detail::conjunct_implies(f.schema(), ds[a], ds[b])) {
        drop[a] = true;
        break;
      }
    }
  }
  std::vector<Conjunct> out;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (!drop[i]) out.push_back(ds[i]);
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(out));
}

DnfFormula qe_eliminate(const DnfFormula& f, int var, Quantifier q) {
  if (q == Quantifier::forall) return negate(qe_eliminate(negate(f), var, Quantifier::exists));
  std::vector<Conjunct> ds;
  for (const auto& d : f.disjuncts())
    if (auto e = detail::eliminate(f.schema(), d, var)) ds.push_back(std::move(*e));
  return DnfFormula::from_canonical(f.schema_ptr(), std::move(ds));
}

SatResult satisfiable(const DnfFormula& f) {
  SatResult r;
  if (f.is_false()) return r;
  r.satisfiable = true;
  const int nvars = std::max(f.max_var() + 1, 2);
  r.witness = detail::witness_for(f.schema(), f.disjuncts().front(), nvars);
  return r;
}

bool implies(const DnfFormula& f, const DnfFormula& g) { return and_not(f, g).is_false(); }

bool equivalent(const DnfFormula& f, const DnfFormula& g) { return implies(f, g) && implies(g, f); }

DnfFormula project_side(const DnfFormula& f, Side side) {
  if (side == Side::left) return qe_eliminate(f, 1);
  return substitute(qe_eliminate(f, 0), {{1, 0}});
}

bool eval(const DnfFormula& f, const std::vector<TupleValue>& vars) {
  auto value = [&](int v, std::size_t attr) -> const Literal& {
    if (v < 0 || static_cast<std::size_t>(v) >= vars.size())
      throw Error(Errc::precondition, "formula mentions an unassigned tuple variable");
    return vars[static_cast<std::size_t>(v)].at(attr);
  };
  for (const auto& d : f.disjuncts()) {
    bool all = std::all_of(d.begin(), d.end(), [&](const Atom& a) {
      return detail::holds(value(a.lhs, a.attr), a.cmp, a.has_literal() ? a.lit : value(a.rhs, a.attr));
    });
    if (all) return true;
  }
  return false;
}

bool eval_pair(const DnfFormula& f, const TupleValue& left, const TupleValue& right) {
  return eval(f, {left, right});
}

bool eval_unary(const DnfFormula& f, const TupleValue& t) { return eval(f, {t}); }

}  // namespace prefcon
