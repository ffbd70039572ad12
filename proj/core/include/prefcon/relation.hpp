#pragma once

#include <compare>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prefcon {

using NodeId = std::string;

struct Edge {
  NodeId from;
  NodeId to;

  auto operator<=>(const Edge&) const = default;
};

// A finite binary relation with set semantics. Iteration order is the
// canonical lexicographic order on (from, to).
class FiniteRelation {
public:
  using const_iterator = std::set<Edge>::const_iterator;

  FiniteRelation() = default;
  FiniteRelation(std::initializer_list<Edge> edges);
  template <typename It>
  FiniteRelation(It first, It last) {
    for (; first != last; ++first) insert(*first);
  }

  bool insert(Edge e);
  bool insert(NodeId from, NodeId to) { return insert(Edge{std::move(from), std::move(to)}); }
  bool erase(const Edge& e) { return edges_.erase(e) > 0; }
  bool contains(const Edge& e) const { return edges_.count(e) > 0; }
  bool contains(const NodeId& from, const NodeId& to) const;

  std::size_t size() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return edges_.empty(); }
  const_iterator begin() const noexcept { return edges_.begin(); }
  const_iterator end() const noexcept { return edges_.end(); }

  std::set<NodeId> nodes() const;
  // Targets of edges leaving `from`, in lexicographic order.
  std::vector<NodeId> successors(const NodeId& from) const;

  bool operator==(const FiniteRelation&) const = default;

private:
  std::set<Edge> edges_;
};

FiniteRelation operator|(const FiniteRelation& a, const FiniteRelation& b);
FiniteRelation operator&(const FiniteRelation& a, const FiniteRelation& b);
FiniteRelation operator-(const FiniteRelation& a, const FiniteRelation& b);
bool is_subset(const FiniteRelation& a, const FiniteRelation& b);
bool disjoint(const FiniteRelation& a, const FiniteRelation& b);

std::string to_string(const Edge& e);
std::string to_string(const FiniteRelation& r);
std::ostream& operator<<(std::ostream& os, const Edge& e);
std::ostream& operator<<(std::ostream& os, const FiniteRelation& r);

struct SpoReport {
  bool is_irreflexive = true;
  bool is_transitive = true;
  // {x, x} for a loop, {x, z, y} for xz, zy present and xy missing.
  std::optional<std::vector<NodeId>> witness;

  bool is_spo() const noexcept { return is_irreflexive && is_transitive; }
};

SpoReport spo_check(const FiniteRelation& r);

FiniteRelation transitive_closure(const FiniteRelation& r);

// Node sequence of a path of length >= 1 from `from` to `to` in r - removed.
std::optional<std::vector<NodeId>> find_path_avoiding(const FiniteRelation& r,
                                                      const FiniteRelation& removed,
                                                      const NodeId& from, const NodeId& to);

bool has_path_avoiding(const FiniteRelation& r, const FiniteRelation& removed,
                       const NodeId& from, const NodeId& to);

// Edges that must leave `contractor` together with `seed` so that the rest
// still separates every detour. Throws Errc::precondition if seed is not in
// the contractor.
FiniteRelation outer_edge_set(const FiniteRelation& pref, const FiniteRelation& contractor,
                              const Edge& seed);

struct BoundarySets {
  std::set<NodeId> starts;   // {x | xy in r}
  std::set<NodeId> ends;     // {y | xy in r}
  std::set<NodeId> middles;  // {y | x pref y, xz in r, y = z or y pref z}
};

BoundarySets boundary_sets(const FiniteRelation& r, const FiniteRelation& pref);

}  // namespace prefcon
