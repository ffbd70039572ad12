#pragma once

#include "prefcon/contract_finite.hpp"
#include "prefcon/formula.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prefcon {

// Formulas below use tuple variable 0 for the left tuple and 1 for the right
// one; unary formulas (node sets) use variable 0 only.

struct DisjunctVerdict {
  std::string formula;               // the disjunct of the restricted relation
  std::map<std::string, bool> bounded;  // attribute -> every path of its part is short
};

struct StratifiabilityReport {
  bool stratifiable = true;
  std::optional<std::size_t> failing_disjunct;
  std::vector<DisjunctVerdict> disjuncts;
  std::string pref_con;  // pref restricted to the CON end nodes
};

nlohmann::json to_json(const StratifiabilityReport& r);

// Whether the conjunction `lambda` (atoms over one attribute, variables 0 and
// 1) admits no path of three edges. The first decides satisfiability of the
// four-variable path formula; the second is a case analysis of the atom
// shapes. They must agree.
bool lambda_paths_bounded(const Schema& schema, const Conjunct& lambda);
bool lambda_paths_bounded_structural(const Schema& schema, const Conjunct& lambda);

// K_CON: the end nodes of con.
DnfFormula end_nodes(const DnfFormula& con);
// pref restricted to K_CON x K_CON.
DnfFormula restrict_to_end_nodes(const DnfFormula& pref, const DnfFormula& con);

StratifiabilityReport check_finitely_stratifiable(const DnfFormula& pref, const DnfFormula& con);

// End nodes whose longest outgoing path in pref_con has exactly i edges;
// nullopt when there are none.
std::optional<DnfFormula> get_stratum_symbolic(const DnfFormula& pref_con, const DnfFormula& k_con, int i);

struct SymbolicStratum {
  int layer = 0;
  DnfFormula end_nodes;  // L_i
  DnfFormula added;      // E_i
};

struct SymbolicContraction {
  DnfFormula contractor;
  DnfFormula contracted;
  ContractionMode mode = ContractionMode::prefix;
  std::vector<SymbolicStratum> strata_trace;
  std::optional<DnfFormula> protected_closure;
  std::optional<DnfFormula> forced;  // Q for protecting, C_{P⁺} for protecting meet
};

nlohmann::json to_json(const SymbolicContraction& r);

// Throws NOT_SPO, CON_NOT_SUBSET or precondition (schema mismatch).
void validate_symbolic(const DnfFormula& pref, const DnfFormula& con);

// Throws NOT_FINITELY_STRATIFIABLE with the report as detail.
SymbolicContraction min_contr_symbolic(const DnfFormula& pref, const DnfFormula& con);

struct SymbolicMinimality {
  bool is_full = false;
  bool is_minimal = false;
  DnfFormula removable;  // edges of p starting no detour in which they are the only p-edge
};

SymbolicMinimality check_minimal_symbolic(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& p);

struct SymbolicClosure {
  DnfFormula closure;
  std::size_t iterations = 0;
};

inline constexpr std::size_t kDefaultTcIterations = 256;

// Least fixpoint of T := T ∨ T∘r. Throws ITERATION_CAP past max_iter rounds.
SymbolicClosure tc_symbolic_run(const DnfFormula& r, std::size_t max_iter = kDefaultTcIterations);
DnfFormula tc_symbolic(const DnfFormula& r, std::size_t max_iter = kDefaultTcIterations);

// Number of cells of the two-variable order types over r's constants,
// saturating; an upper bound on the rounds tc_symbolic needs.
std::size_t tc_lattice_bound(const DnfFormula& r);

// ∃u. pref(u,x) ∧ pref(x,y) ∧ con(u,y) ∧ protected_closure(u,x).
DnfFormula q_set_symbolic(const DnfFormula& pref, const DnfFormula& con, const DnfFormula& protected_closure);

// Throws PROTECTION_CONFLICT (detail.witness) when TC(protect) meets con.
SymbolicContraction min_contr_protecting_symbolic(const DnfFormula& pref, const DnfFormula& con,
                                                  const DnfFormula& protect);

SymbolicContraction meet_contr_symbolic(const DnfFormula& pref, const DnfFormula& con,
                                        const std::optional<DnfFormula>& protect = std::nullopt);

}  // namespace prefcon
