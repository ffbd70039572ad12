#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace prefcon {

using Rational = mpq_class;

enum class Domain { C, Q };

struct Attribute {
  std::string name;
  Domain domain = Domain::Q;

  bool operator==(const Attribute&) const = default;
};

class Schema {
public:
  // Throws Errc::precondition on an empty list or duplicate names.
  explicit Schema(std::vector<Attribute> attributes);

  const std::vector<Attribute>& attributes() const noexcept { return attrs_; }
  std::size_t size() const noexcept { return attrs_.size(); }
  const Attribute& at(std::size_t i) const { return attrs_.at(i); }
  std::optional<std::size_t> find(std::string_view name) const;

  bool operator==(const Schema&) const = default;

private:
  std::vector<Attribute> attrs_;
};

using SchemaPtr = std::shared_ptr<const Schema>;

SchemaPtr make_schema(std::vector<Attribute> attributes);

// An exact rational or an uninterpreted constant.
class Literal {
public:
  Literal() : v_(Rational(0)) {}
  Literal(Rational q) : v_(std::move(q)) {}
  Literal(std::string s) : v_(std::move(s)) {}
  Literal(const char* s) : v_(std::string(s)) {}
  Literal(long n) : v_(Rational(n)) {}
  Literal(int n) : v_(Rational(n)) {}

  bool is_rational() const noexcept { return v_.index() == 0; }
  const Rational& rational() const { return std::get<0>(v_); }
  const std::string& text() const { return std::get<1>(v_); }

  friend std::strong_ordering operator<=>(const Literal& a, const Literal& b);
  friend bool operator==(const Literal& a, const Literal& b) { return (a <=> b) == 0; }

private:
  std::variant<Rational, std::string> v_;
};

std::string to_string(const Literal& l);
// Parses "12", "-3.25" or "7/4" exactly; nullopt otherwise.
std::optional<Rational> parse_rational(std::string_view text);

using TupleValue = std::vector<Literal>;

enum class Cmp : unsigned char { eq, ne, lt, gt };

// Tuple variables are small integers: 0 is the left tuple o, 1 the right
// tuple o'; higher indices are bound variables introduced by the algorithms.
enum class Side { left = 0, right = 1 };

struct Atom {
  std::size_t attr = 0;
  int lhs = 0;   // always a variable
  Cmp cmp = Cmp::eq;
  int rhs = -1;  // a variable greater than lhs, or -1 when `lit` is used
  Literal lit;

  bool has_literal() const noexcept { return rhs < 0; }
  friend std::strong_ordering operator<=>(const Atom& a, const Atom& b);
  friend bool operator==(const Atom& a, const Atom& b) { return (a <=> b) == 0; }
};

using Conjunct = std::vector<Atom>;

// A disjunction of canonical, satisfiable conjuncts. No disjuncts is FALSE;
// an empty conjunct is TRUE.
class DnfFormula {
public:
  explicit DnfFormula(SchemaPtr schema) : schema_(std::move(schema)) {}
  // Canonicalizes every conjunct and drops the unsatisfiable ones.
  DnfFormula(SchemaPtr schema, std::vector<Conjunct> disjuncts);

  static DnfFormula falsum(SchemaPtr schema) { return DnfFormula(std::move(schema)); }
  static DnfFormula truth(SchemaPtr schema);
  // Trusts the caller: every conjunct must already be canonical and satisfiable.
  static DnfFormula from_canonical(SchemaPtr schema, std::vector<Conjunct> disjuncts);

  const Schema& schema() const noexcept { return *schema_; }
  const SchemaPtr& schema_ptr() const noexcept { return schema_; }
  const std::vector<Conjunct>& disjuncts() const noexcept { return disjuncts_; }

  bool is_false() const noexcept { return disjuncts_.empty(); }
  bool is_true() const noexcept;
  std::size_t atom_count() const noexcept;
  int max_var() const noexcept;

private:
  SchemaPtr schema_;
  std::vector<Conjunct> disjuncts_;
};

// Upper bound on the number of atoms any boolean operation may produce.
void set_atom_cap(std::size_t cap);
std::size_t atom_cap();

// Parsing and printing.
DnfFormula parse_formula(std::string_view text, SchemaPtr schema);
std::string to_string(const DnfFormula& f);

// Atom builders. `var = literal` on Q and C, order only on Q.
DnfFormula atom_formula(SchemaPtr schema, std::size_t attr, int var, Cmp cmp, Literal lit);
DnfFormula atom_formula(SchemaPtr schema, std::size_t attr, int var, Cmp cmp, int other);
// Conjunction of per-attribute equalities between two tuple variables.
DnfFormula tuple_equal(SchemaPtr schema, int a, int b);

// Boolean structure.
DnfFormula operator||(const DnfFormula& f, const DnfFormula& g);
DnfFormula operator&&(const DnfFormula& f, const DnfFormula& g);
DnfFormula negate(const DnfFormula& f);
DnfFormula and_not(const DnfFormula& f, const DnfFormula& g);  // f ∧ ¬g

// Renames tuple variables: variable v becomes map[v] (identity past the end).
DnfFormula rename(const DnfFormula& f, const std::vector<int>& map);
// Shorthand for rename with explicit (from, to) pairs.
DnfFormula substitute(const DnfFormula& f, std::initializer_list<std::pair<int, int>> moves);

// Drops disjuncts implied by another disjunct.
DnfFormula compact(const DnfFormula& f);

enum class Quantifier { exists, forall };
DnfFormula qe_eliminate(const DnfFormula& f, int var, Quantifier q = Quantifier::exists);

struct SatResult {
  bool satisfiable = false;
  // witness[v] is a value for tuple variable v (left, right, ...).
  std::vector<TupleValue> witness;
};

SatResult satisfiable(const DnfFormula& f);
bool equivalent(const DnfFormula& f, const DnfFormula& g);
bool implies(const DnfFormula& f, const DnfFormula& g);

// Formula over variable 0 describing S(R) (left) or E(R) (right).
DnfFormula project_side(const DnfFormula& f, Side side);

bool eval(const DnfFormula& f, const std::vector<TupleValue>& vars);
bool eval_pair(const DnfFormula& f, const TupleValue& left, const TupleValue& right);
bool eval_unary(const DnfFormula& f, const TupleValue& t);

}  // namespace prefcon
