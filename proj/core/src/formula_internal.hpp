#pragma once

#include "prefcon/formula.hpp"

#include <optional>
#include <vector>

namespace prefcon::detail {

struct Term {
  int var = -1;  // -1 means `lit`
  Literal lit;
};

enum class Truth { yes, no, atom };

struct Built {
  Truth truth;
  Atom atom;
};

Cmp flip(Cmp c);
bool holds(const Literal& a, Cmp c, const Literal& b);
// Orients `a c b` into canonical atom shape or decides it when ground.
Built build(std::size_t attr, Term a, Cmp c, Term b);
// Disjuncts of the negation of a single atom.
std::vector<Atom> negate_atom(const Atom& a);

// Canonical form in place; false when the conjunct is unsatisfiable.
bool canonicalize(const Schema& schema, Conjunct& c);
void simplify(std::vector<Conjunct>& ds);
void check_cap(const std::vector<Conjunct>& ds);
bool conjunct_sat_with(const Schema& schema, const Conjunct& k, const std::vector<Atom>& extra,
                       Conjunct& out);
bool conjunct_implies(const Schema& schema, const Conjunct& a, const Conjunct& b);
std::optional<Conjunct> eliminate(const Schema& schema, const Conjunct& c, int var);
std::vector<TupleValue> witness_for(const Schema& schema, const Conjunct& c, int nvars);
void check_atom(const Schema& schema, const Atom& a);

}  // namespace prefcon::detail
