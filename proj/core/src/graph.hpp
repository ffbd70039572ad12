#pragma once

#include "prefcon/relation.hpp"

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace prefcon::detail {

// Dense integer ids for the nodes of one or more relations.
class NodeIndex {
public:
  int add(const NodeId& id) {
    auto [it, fresh] = ids_.try_emplace(id, static_cast<int>(names_.size()));
    if (fresh) names_.push_back(id);
    return it->second;
  }
  void add_all(const FiniteRelation& r) {
    for (const auto& e : r) {
      add(e.from);
      add(e.to);
    }
  }
  int find(const NodeId& id) const {
    auto it = ids_.find(id);
    return it == ids_.end() ? -1 : it->second;
  }
  const NodeId& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
  int size() const { return static_cast<int>(names_.size()); }

private:
  std::vector<NodeId> names_;
  std::unordered_map<NodeId, int> ids_;
};

// Adjacency lists kept sorted so membership is a binary search.
class Digraph {
public:
  explicit Digraph(int n) : out_(static_cast<std::size_t>(n)), in_(static_cast<std::size_t>(n)) {}

  Digraph(const FiniteRelation& r, const NodeIndex& index) : Digraph(index.size()) {
    for (const auto& e : r) add(index.find(e.from), index.find(e.to));
    finish();
  }

  void add(int a, int b) {
    out_[static_cast<std::size_t>(a)].push_back(b);
    in_[static_cast<std::size_t>(b)].push_back(a);
  }
  void finish() {
    for (auto* lists : {&out_, &in_})
      for (auto& l : *lists) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
      }
  }
  bool has(int a, int b) const {
    const auto& l = out_[static_cast<std::size_t>(a)];
    return std::binary_search(l.begin(), l.end(), b);
  }
  const std::vector<int>& out(int a) const { return out_[static_cast<std::size_t>(a)]; }
  const std::vector<int>& in(int b) const { return in_[static_cast<std::size_t>(b)]; }
  int size() const { return static_cast<int>(out_.size()); }

private:
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

inline std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace prefcon::detail
