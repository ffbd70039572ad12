#include "prefcon/relation.hpp"

#include "graph.hpp"
#include "prefcon/error.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace prefcon {

FiniteRelation::FiniteRelation(std::initializer_list<Edge> edges) {
  for (const auto& e : edges) insert(e);
}

bool FiniteRelation::insert(Edge e) {
  if (e.from.empty() || e.to.empty())
    throw Error(Errc::precondition, "node ids must be non-empty");
  return edges_.insert(std::move(e)).second;
}

bool FiniteRelation::contains(const NodeId& from, const NodeId& to) const {
  return edges_.count(Edge{from, to}) > 0;
}

std::set<NodeId> FiniteRelation::nodes() const {
  std::set<NodeId> out;
  for (const auto& e : edges_) {
    out.insert(e.from);
    out.insert(e.to);
  }
  return out;
}

std::vector<NodeId> FiniteRelation::successors(const NodeId& from) const {
  std::vector<NodeId> out;
  for (auto it = edges_.lower_bound(Edge{from, ""}); it != edges_.end() && it->from == from; ++it)
    out.push_back(it->to);
  return out;
}

FiniteRelation operator|(const FiniteRelation& a, const FiniteRelation& b) {
  FiniteRelation out = a;
  for (const auto& e : b) out.insert(e);
  return out;
}

FiniteRelation operator&(const FiniteRelation& a, const FiniteRelation& b) {
  FiniteRelation out;
  for (const auto& e : a)
    if (b.contains(e)) out.insert(e);
  return out;
}

FiniteRelation operator-(const FiniteRelation& a, const FiniteRelation& b) {
  FiniteRelation out;
  for (const auto& e : a)
    if (!b.contains(e)) out.insert(e);
  return out;
}

bool is_subset(const FiniteRelation& a, const FiniteRelation& b) {
  return std::all_of(a.begin(), a.end(), [&](const Edge& e) { return b.contains(e); });
}

bool disjoint(const FiniteRelation& a, const FiniteRelation& b) {
  return std::none_of(a.begin(), a.end(), [&](const Edge& e) { return b.contains(e); });
}

std::string to_string(const Edge& e) { return e.from + "->" + e.to; }

std::string to_string(const FiniteRelation& r) {
  std::string out = "{";
  bool first = true;
  for (const auto& e : r) {
    if (!first) out += ", ";
    first = false;
    out += to_string(e);
  }
  return out + "}";
}

std::ostream& operator<<(std::ostream& os, const Edge& e) { return os << to_string(e); }
std::ostream& operator<<(std::ostream& os, const FiniteRelation& r) { return os << to_string(r); }

SpoReport spo_check(const FiniteRelation& r) {
  SpoReport rep;
  detail::NodeIndex idx;
  idx.add_all(r);
  const detail::Digraph g(r, idx);
  for (int x = 0; x < g.size(); ++x) {
    if (g.has(x, x)) {
      rep.is_irreflexive = false;
      if (!rep.witness) rep.witness = std::vector<NodeId>{idx.name(x), idx.name(x)};
    }
  }
  for (int x = 0; x < g.size() && rep.is_transitive; ++x) {
    for (int z : g.out(x)) {
      auto miss = std::find_if(g.out(z).begin(), g.out(z).end(), [&](int y) { return !g.has(x, y); });
      if (miss != g.out(z).end()) {
        rep.is_transitive = false;
        if (!rep.witness) rep.witness = std::vector<NodeId>{idx.name(x), idx.name(z), idx.name(*miss)};
        break;
      }
    }
  }
  return rep;
}

FiniteRelation transitive_closure(const FiniteRelation& r) {
  detail::NodeIndex idx;
  idx.add_all(r);
  const detail::Digraph g(r, idx);
  FiniteRelation out;
  std::vector<int> seen(static_cast<std::size_t>(g.size()), -1);
  for (int s = 0; s < g.size(); ++s) {
    std::vector<int> stack(g.out(s).begin(), g.out(s).end());
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (seen[static_cast<std::size_t>(v)] == s) continue;
      seen[static_cast<std::size_t>(v)] = s;
      out.insert(idx.name(s), idx.name(v));
      for (int w : g.out(v))
        if (seen[static_cast<std::size_t>(w)] != s) stack.push_back(w);
    }
  }
  return out;
}

std::optional<std::vector<NodeId>> find_path_avoiding(const FiniteRelation& r,
                                                      const FiniteRelation& removed,
                                                      const NodeId& from, const NodeId& to) {
  const FiniteRelation live = r - removed;
  detail::NodeIndex idx;
  idx.add_all(live);
  const int s = idx.find(from);
  const int t = idx.find(to);
  if (s < 0 || t < 0) return std::nullopt;
  const detail::Digraph g(live, idx);

  std::vector<int> parent(static_cast<std::size_t>(g.size()), -2);
  std::deque<int> queue;
  for (int v : g.out(s)) {
    if (parent[static_cast<std::size_t>(v)] != -2) continue;
    parent[static_cast<std::size_t>(v)] = -1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    int v = queue.front();
    queue.pop_front();
    if (v == t) {
      std::vector<NodeId> path{idx.name(t)};
      for (int p = parent[static_cast<std::size_t>(t)]; p >= 0 && p != t;
           p = parent[static_cast<std::size_t>(p)])
        path.push_back(idx.name(p));
      path.push_back(from);
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int w : g.out(v)) {
      if (parent[static_cast<std::size_t>(w)] != -2) continue;
      parent[static_cast<std::size_t>(w)] = v;
      queue.push_back(w);
    }
  }
  return std::nullopt;
}

bool has_path_avoiding(const FiniteRelation& r, const FiniteRelation& removed,
                       const NodeId& from, const NodeId& to) {
  return find_path_avoiding(r, removed, from, to).has_value();
}

FiniteRelation outer_edge_set(const FiniteRelation& pref, const FiniteRelation& contractor,
                              const Edge& seed) {
  if (!contractor.contains(seed))
    throw Error(Errc::precondition, "seed edge " + to_string(seed) + " is not in the contractor");

  detail::NodeIndex idx;
  idx.add_all(pref);
  idx.add_all(contractor);
  const detail::Digraph p(pref, idx);
  const detail::Digraph c(contractor, idx);
  auto kept = [&](int a, int b) { return p.has(a, b) && !c.has(a, b); };

  FiniteRelation phi{seed};
  std::vector<std::pair<int, int>> frontier{{idx.find(seed.from), idx.find(seed.to)}};
  while (!frontier.empty()) {
    std::vector<std::pair<int, int>> next;
    auto visit = [&](int a, int b) {
      if (c.has(a, b) && phi.insert(idx.name(a), idx.name(b))) next.emplace_back(a, b);
    };
    for (auto [u, v] : frontier) {
      for (int w : p.out(v))
        if (kept(v, w)) visit(u, w);
      for (int w : p.in(u))
        if (kept(w, u)) visit(w, v);
    }
    frontier = std::move(next);
  }
  return phi;
}

BoundarySets boundary_sets(const FiniteRelation& r, const FiniteRelation& pref) {
  BoundarySets out;
  for (const auto& e : r) {
    out.starts.insert(e.from);
    out.ends.insert(e.to);
    for (const auto& y : pref.successors(e.from))
      if (y == e.to || pref.contains(y, e.to)) out.middles.insert(y);
  }
  return out;
}

}  // namespace prefcon
