#pragma once

#include "prefcon/relation.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace prefcon {

enum class ContractionMode { prefix, protecting, meet, protecting_meet };

std::string_view to_string(ContractionMode mode);

// One stratum of the prefix construction: the CON edges of that layer and
// every edge the layer added to the contractor (those CON edges included).
struct StratumStep {
  int layer = 0;
  FiniteRelation con_edges;
  FiniteRelation added;
};

struct ContractionResult {
  FiniteRelation contractor;  // P⁻
  FiniteRelation contracted;  // pref − P⁻
  ContractionMode mode = ContractionMode::prefix;
  std::vector<StratumStep> strata_trace;
  std::optional<FiniteRelation> protected_edges;  // transitive closure of the protected input
  std::optional<FiniteRelation> forced;           // Q for protecting, C_{P⁺} for protecting meet
};

// Throws NOT_SPO (detail.witness) or CON_NOT_SUBSET (detail.edges).
void validate_instance(const FiniteRelation& pref, const FiniteRelation& con);

struct ContractorViolation {
  enum class Kind { missing_con_edge, outside_pref, detour };
  Kind kind = Kind::detour;
  Edge edge;                  // the offending edge; for a detour, the contractor edge xy
  std::vector<NodeId> path;   // for a detour: x .. y through pref − p
};

struct FullContractorReport {
  bool is_full = false;
  std::optional<ContractorViolation> violation;
};

FullContractorReport check_full_contractor(const FiniteRelation& pref, const FiniteRelation& con,
                                           const FiniteRelation& p);

struct MinimalityReport {
  bool is_minimal = false;
  // Edges of p that start no CON-detour of at most three edges in which they
  // are the only p-edge.
  FiniteRelation removable;
};

// Throws precondition when p is not a full contractor.
MinimalityReport check_minimal_contractor(const FiniteRelation& pref, const FiniteRelation& con,
                                          const FiniteRelation& p);

// Every edge that starts a CON-detour.
FiniteRelation naive_contractor(const FiniteRelation& pref, const FiniteRelation& con);

// Longest path, inside pref restricted to CON end nodes, starting at each CON
// edge's end node.
std::map<Edge, int> layer_indices(const FiniteRelation& pref, const FiniteRelation& con);

// The unique prefix full contractor, built stratum by stratum.
ContractionResult min_contr_finite(const FiniteRelation& pref, const FiniteRelation& con);

// {xy | ∃u. u ≻ x ≻ y, uy ∈ con, ux ∈ protected_rel}; protected_rel must be transitive.
FiniteRelation q_set(const FiniteRelation& pref, const FiniteRelation& con, const FiniteRelation& protected_rel);

// Closes `protect` and throws PROTECTION_CONFLICT (detail.edges) when the
// closure meets con.
ContractionResult min_contr_protecting(const FiniteRelation& pref, const FiniteRelation& con,
                                       const FiniteRelation& protect);

// Union of all minimal full contractors.
ContractionResult meet_contr(const FiniteRelation& pref, const FiniteRelation& con);

// Union of all minimal full contractors disjoint from TC(protect).
ContractionResult meet_contr_protecting(const FiniteRelation& pref, const FiniteRelation& con,
                                        const FiniteRelation& protect);

inline constexpr std::size_t kDefaultOracleBound = 18;

// Exhaustive search; throws ORACLE_TOO_LARGE when |pref| exceeds `bound`.
// Results are listed in increasing order of their subset bitmask.
std::vector<FiniteRelation> enumerate_minimal_contractors(const FiniteRelation& pref, const FiniteRelation& con,
                                                          std::size_t bound = kDefaultOracleBound);

enum class ChangeOp { revise, contract };

struct Statement {
  Edge edge;
  bool positive = true;  // "from > to" when true, "not (from > to)" otherwise
};

// Revision or contraction of a single-SPO preference model over a fixed set
// of alternatives. nullopt is the FAILURE outcome (a positive revision that
// would close a cycle). Throws MIXED_SIGN_SET when signs differ.
std::optional<FiniteRelation> restricted_change(const std::set<NodeId>& alternatives, const FiniteRelation& model,
                                                const std::vector<Statement>& statements, ChangeOp op);

}  // namespace prefcon
