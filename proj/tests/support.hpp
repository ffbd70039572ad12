#pragma once

#include "prefcon/formula.hpp"
#include "prefcon/relation.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <vector>

namespace prefcon::test {

// Total order over prefix1 .. prefixN with prefix1 most preferred.
inline FiniteRelation total_order(int n, const std::string& prefix = "x") {
  FiniteRelation r;
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) r.insert(prefix + std::to_string(i), prefix + std::to_string(j));
  return r;
}

inline FiniteRelation total_order(const std::vector<std::string>& names) {
  FiniteRelation r;
  for (std::size_t i = 0; i < names.size(); ++i)
    for (std::size_t j = i + 1; j < names.size(); ++j) r.insert(names[i], names[j]);
  return r;
}

// Random SPO: a random DAG over a random permutation, transitively closed.
inline FiniteRelation random_spo(std::mt19937& rng, int nodes, double density) {
  std::vector<int> perm(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::bernoulli_distribution coin(density);
  FiniteRelation r;
  for (int i = 0; i < nodes; ++i)
    for (int j = i + 1; j < nodes; ++j)
      if (coin(rng))
        r.insert("n" + std::to_string(perm[static_cast<std::size_t>(i)]),
                 "n" + std::to_string(perm[static_cast<std::size_t>(j)]));
  return transitive_closure(r);
}

inline FiniteRelation random_subset(std::mt19937& rng, const FiniteRelation& r, double p) {
  std::bernoulli_distribution coin(p);
  FiniteRelation out;
  for (const auto& e : r)
    if (coin(rng)) out.insert(e);
  return out;
}

}  // namespace prefcon::test
