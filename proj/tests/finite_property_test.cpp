#include "finite_suite.hpp"

#include <gtest/gtest.h>

using namespace prefcon;
using namespace prefcon::test;

TEST(FiniteProperty, RandomSposAgreeWithOracles) {
  std::mt19937 rng(424242);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    auto c = random_case(rng);
    for (const auto& msg : check_finite_case(c, rng)) ADD_FAILURE() << msg;
    ++checked;
  }
  EXPECT_GE(checked, 500);
}

TEST(FiniteProperty, OracleBoundCoversSuiteInstances) {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = random_case(rng, 8, kDefaultOracleBound);
    EXPECT_NO_THROW(enumerate_minimal_contractors(c.pref, c.con));
  }
}

TEST(FiniteProperty, RestrictedChangeProperties) {
  std::mt19937 rng(77);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 200; ++trial) {
    auto model = random_spo(rng, 6, 0.4);
    std::set<NodeId> alts;
    for (int i = 0; i < 6; ++i) alts.insert("n" + std::to_string(i));
    std::uniform_int_distribution<int> node(0, 5);
    std::vector<Statement> s;
    const bool positive = coin(rng);
    const int count = node(rng);
    for (int i = 0; i < count; ++i) {
      int a = node(rng), b = node(rng);
      if (a == b) continue;
      s.push_back({{"n" + std::to_string(a), "n" + std::to_string(b)}, positive});
    }
    // Vacuity: statements already in the state leave the model unchanged.
    bool held = true;
    for (const auto& st : s) held = held && (model.contains(st.edge) == st.positive);
    auto revised = restricted_change(alts, model, s, ChangeOp::revise);
    if (held) {
      ASSERT_TRUE(revised);
      EXPECT_EQ(*revised, model);
    }
    // Closure and limited success.
    if (revised) {
      EXPECT_TRUE(spo_check(*revised).is_spo());
      for (const auto& st : s) EXPECT_EQ(revised->contains(st.edge), st.positive);
    } else {
      EXPECT_TRUE(positive);
    }
    // Harper identity: contraction is revision by the complement.
    std::vector<Statement> flipped = s;
    for (auto& st : flipped) st.positive = !st.positive;
    EXPECT_EQ(restricted_change(alts, model, flipped, ChangeOp::contract), revised);
  }
}
