#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "wpsat/generator.hpp"
#include "wpsat/residual_solver.hpp"
#include "wpsat/wp_engine.hpp"

using namespace wpsat;

namespace {

Literal pos(Var v) { return Literal(v, true); }
Literal neg(Var v) { return Literal(v, false); }

}  // namespace

TEST(InitMessages, FairCoin) {
  Rng rng(1);
  Formula f = oracle::random_formula(1000, 34000, 3, 3, rng);
  FactorGraph g(f);
  ASSERT_GE(g.num_edges(), 100000u);
  Rng r(42);
  MessageState s = init_messages(g, r);
  double mean = 0;
  for (auto b : s) {
    ASSERT_LE(b, 1);
    mean += b;
  }
  mean /= static_cast<double>(s.size());
  EXPECT_GE(mean, 0.49);
  EXPECT_LE(mean, 0.51);
  Rng r2(42);
  EXPECT_EQ(init_messages(g, r2), s);
}

TEST(InitMessages, NoEdges) {
  Rng rng(3);
  EXPECT_TRUE(init_messages(FactorGraph(Formula(5)), rng).empty());
}

TEST(VarToClause, OnlyOccurrenceGivesZero) {
  Formula f(3, {Clause{pos(1), pos(2), pos(3)}});
  FactorGraph g(f);
  EXPECT_EQ(var_to_clause(g, MessageState(3, 1), 0, 1), 0);
}

TEST(VarToClause, SumsExcludingTarget) {
  // x1 in C0 (target), positively in C1, C2, negatively in C3.
  Formula f(5, {Clause{pos(1), pos(2)}, Clause{pos(1), pos(3)}, Clause{pos(1), pos(4)}, Clause{neg(1), pos(5)}});
  FactorGraph g(f);
  MessageState s(g.num_edges(), 0);
  s[g.find_edge(0, 1)] = 1;  // excluded
  s[g.find_edge(1, 1)] = 1;
  s[g.find_edge(2, 1)] = 1;
  s[g.find_edge(3, 1)] = 1;
  EXPECT_EQ(var_to_clause(g, s, 0, 1), 1);
  EXPECT_EQ(var_to_clause(g, MessageState(g.num_edges(), 0), 0, 1), 0);
  EXPECT_THROW(var_to_clause(g, s, 0, 5), std::invalid_argument);
}

TEST(ClauseToVar, UnitClauseWarns) {
  Formula f(1, {Clause{pos(1)}});
  FactorGraph g(f);
  EXPECT_EQ(clause_to_var_value(g, MessageState(1, 0), 0, 1), 1);
}

TEST(ClauseToVar, BothIndicatorsFire) {
  // C0 = (x1 v -x2 v -x3); x2 -> C0 = 1 and x3 -> C0 = 3.
  Formula f(5, {Clause{pos(1), neg(2), neg(3)}, Clause{pos(2), pos(4)}, Clause{pos(3), pos(4)},
                Clause{pos(3), pos(5)}, Clause{pos(3)}});
  FactorGraph g(f);
  MessageState s(g.num_edges(), 0);
  s[g.find_edge(1, 2)] = 1;
  for (std::size_t j : {2, 3, 4}) s[g.find_edge(j, 3)] = 1;
  ASSERT_EQ(var_to_clause(g, s, 0, 2), 1);
  ASSERT_EQ(var_to_clause(g, s, 0, 3), 3);
  EXPECT_EQ(clause_to_var_value(g, s, 0, 1), 1);
  s[g.find_edge(1, 2)] = 0;  // x2 -> C0 drops to 0
  EXPECT_EQ(clause_to_var_value(g, s, 0, 1), 0);
  EXPECT_THROW(clause_to_var_value(g, s, 0, 4), std::invalid_argument);
}

TEST(RunPass, AllZeroUnchanged) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Formula f = oracle::random_formula(20, 40, 2, 3, rng);
    FactorGraph g(f);
    MessageState s(g.num_edges(), 0);
    EXPECT_EQ(run_pass(g, s, random_edge_order(g, rng)), 0u);
  }
}

TEST(RunPass, AllPositiveFormulaClearsInOnePass) {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    Formula f(15);
    for (int j = 0; j < 30; ++j) {
      auto vars = oracle::distinct_vars(15, 2 + rng() % 2, rng);
      std::vector<Literal> lits;
      for (Var v : vars) lits.push_back(pos(v));
      f.add(Clause(std::span<const Literal>(lits)));
    }
    FactorGraph g(f);
    MessageState s = init_messages(g, rng);
    run_pass(g, s, random_edge_order(g, rng));
    EXPECT_EQ(s, MessageState(g.num_edges(), 0));
  }
}

TEST(RunPass, Deterministic) {
  Rng rng(10);
  Formula f = oracle::random_formula(30, 80, 1, 3, rng);
  FactorGraph g(f);
  MessageState s = init_messages(g, rng);
  EdgeOrder order = random_edge_order(g, rng);
  MessageState a = s, b = s;
  EXPECT_EQ(run_pass(g, a, order), run_pass(g, b, order));
  EXPECT_EQ(a, b);
}

TEST(RunPass, WithinPassFeedback) {
  // Chain (x1) -> (-x1 v x2) -> (-x2 v x3): in forward order one pass propagates
  // the unit warning all the way; in reverse order it takes three passes.
  Formula f(3, {Clause{pos(1)}, Clause{neg(1), pos(2)}, Clause{neg(2), pos(3)}});
  FactorGraph g(f);
  EdgeOrder forward(g.num_edges());
  std::iota(forward.begin(), forward.end(), EdgeId{0});
  MessageState s(g.num_edges(), 0);
  run_pass(g, s, forward);
  EXPECT_EQ(s[g.find_edge(2, 3)], 1);
  EdgeOrder backward(forward.rbegin(), forward.rend());
  MessageState r(g.num_edges(), 0);
  run_pass(g, r, backward);
  EXPECT_EQ(r[g.find_edge(2, 3)], 0);
}

TEST(Run, AllPositiveTrivialFixedPoint) {
  Rng rng(12);
  Formula f(10);
  for (int j = 0; j < 25; ++j) {
    auto vars = oracle::distinct_vars(10, 3, rng);
    f.add(Clause{pos(vars[0]), pos(vars[1]), pos(vars[2])});
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto r = run(f, WPConfig{0, seed, false});
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.passes_used, 2u);
    for (Var v = 1; v <= 10; ++v) {
      EXPECT_EQ(r.bias[v], 0);
      EXPECT_FALSE(r.assignment.assigned(v));
    }
  }
}

TEST(Run, ContradictoryUnits) {
  Formula f(1, {Clause{pos(1)}, Clause{neg(1)}});
  auto r = run(f, WPConfig{0, 1, false});
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.bias[1], 0);
  EXPECT_EQ(r.assignment[1], Value::Unassigned);
}

TEST(Run, DenseRegimeRecoversPlanted) {
  const std::size_t n = 400;
  const double p = 60 * std::log(static_cast<double>(n)) / (n * n);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = generate({n, p, seed, false});
    auto r = run(inst.formula, WPConfig{0, seed + 100, false});
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.passes_used, 5u);
    EXPECT_EQ(r.assignment.num_assigned(), n);
    EXPECT_TRUE(r.assignment.consistent_with(inst.planted));
  }
}

TEST(Run, MaxPassesCapAndDefault) {
  EXPECT_EQ(default_max_passes(2), 100u);
  EXPECT_EQ(default_max_passes(1u << 10), 200u);
  EXPECT_EQ(default_max_passes(10000), 266u);
  // A free 2-cycle rarely settles in one pass; cap at 1 reports non-convergence.
  Formula f(2, {Clause{pos(1), neg(2)}, Clause{pos(2), neg(1)}});
  std::size_t failures = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = run(f, WPConfig{1, seed, false});
    EXPECT_EQ(r.passes_used, 1u);
    failures += !r.converged;
  }
  EXPECT_GT(failures, 0u);
}

TEST(Run, DeterministicGivenSeed) {
  auto inst = generate(GenParams::with_density(500, 20, 3));
  auto a = run(inst.formula, WPConfig{0, 77, true});
  auto b = run(inst.formula, WPConfig{0, 77, true});
  EXPECT_EQ(a.converged, b.converged);
  EXPECT_EQ(a.passes_used, b.passes_used);
  EXPECT_EQ(a.final_messages, b.final_messages);
  EXPECT_EQ(a.bias, b.bias);
  EXPECT_EQ(a.history->orders, b.history->orders);
  ASSERT_EQ(a.history->states.size(), a.passes_used);
  EXPECT_EQ(a.history->states.back(), a.final_messages);
}

TEST(Run, AssignmentFollowsBiasSign) {
  auto inst = generate(GenParams::with_density(800, 14, 4));
  auto r = run(inst.formula, WPConfig{0, 5, false});
  EXPECT_EQ(r.bias, compute_bias(FactorGraph(inst.formula), r.final_messages));
  for (Var v = 1; v <= 800; ++v) {
    if (r.bias[v] > 0) EXPECT_EQ(r.assignment[v], Value::True);
    if (r.bias[v] < 0) EXPECT_EQ(r.assignment[v], Value::False);
    if (r.bias[v] == 0) EXPECT_EQ(r.assignment[v], Value::Unassigned);
  }
}

TEST(ComputeBias, Examples) {
  Formula f(4, {Clause{pos(1), pos(2)}, Clause{pos(1), pos(3)}, Clause{neg(1), pos(4)}});
  FactorGraph g(f);
  MessageState s(g.num_edges(), 0);
  EXPECT_EQ(compute_bias(g, s)[4], 0);
  s[g.find_edge(0, 1)] = s[g.find_edge(1, 1)] = s[g.find_edge(2, 1)] = 1;
  auto b = compute_bias(g, s);
  EXPECT_EQ(b[1], 1);
  EXPECT_EQ(assignment_from_bias(b)[1], Value::True);
  s[g.find_edge(1, 1)] = 0;
  b = compute_bias(g, s);
  EXPECT_EQ(b[1], 0);
  EXPECT_EQ(assignment_from_bias(b)[1], Value::Unassigned);
  EXPECT_EQ(compute_bias(FactorGraph(Formula(3)), MessageState{})[2], 0);
}

TEST(FixedPoint, AllZeroOnWidthAtLeastTwo) {
  Rng rng(13);
  for (int t = 0; t < 50; ++t) {
    Formula f = oracle::random_formula(5 + rng() % 30, 1 + rng() % 60, 2, 3, rng);
    FactorGraph g(f);
    EXPECT_TRUE(is_fixed_point(g, MessageState(g.num_edges(), 0)));
  }
}

TEST(FixedPoint, LocalMaximumConstruction) {
  Rng rng(14);
  for (auto& [f, tau] : fixtures::strict_local_maxima(20, rng)) {
    FactorGraph g(f);
    EXPECT_TRUE(is_fixed_point(g, fixtures::local_max_messages(g, f, tau)));
  }
}

TEST(FixedPoint, BrokenRecomputationDetected) {
  Formula f(3, {Clause{pos(1), neg(2)}, Clause{pos(2), pos(3)}});
  FactorGraph g(f);
  MessageState s(g.num_edges(), 0);
  s[0] = 1;
  EXPECT_FALSE(is_fixed_point(g, s));
}

TEST(FixedPoint, StableUnderAnyOrder) {
  Rng rng(15);
  for (int t = 0; t < 30; ++t) {
    Formula f = oracle::random_formula(12, 20, 1, 3, rng);
    FactorGraph g(f);
    auto r = run(g, WPConfig{0, rng(), false});
    if (!r.converged) continue;
    ASSERT_TRUE(is_fixed_point(g, r.final_messages));
    for (int k = 0; k < 10; ++k) {
      MessageState s = r.final_messages;
      EXPECT_EQ(run_pass(g, s, random_edge_order(g, rng)), 0u);
    }
  }
}

TEST(Trees, ConvergeConsistentWithSomeSolution) {
  Rng rng(16);
  int checked = 0;
  while (checked < 100) {
    Formula f = oracle::random_tree_formula(3 + rng() % 10, rng);
    auto sols = oracle::all_solutions(f);
    if (sols.empty()) continue;
    ++checked;
    auto r = run(f, WPConfig{0, rng(), false});
    ASSERT_TRUE(r.converged);
    bool found = false;
    for (auto mask : sols) found |= r.assignment.consistent_with(oracle::from_mask(f.num_vars(), mask));
    EXPECT_TRUE(found);
  }
}

TEST(Trees, PlantedAllTrueWarningsOnlyToPositiveOccurrences) {
  Rng rng(18);
  int checked = 0;
  while (checked < 100) {
    Formula t = oracle::random_tree_formula(3 + rng() % 10, rng);
    if (!eval(t, Assignment(t.num_vars(), true))) continue;
    ++checked;
    FactorGraph g(t);
    auto r = run(g, WPConfig{0, rng(), false});
    ASSERT_TRUE(r.converged);
    for (EdgeId e = 0; e < g.num_edges(); ++e)
      if (r.final_messages[e]) EXPECT_TRUE(g.edge_positive(e));
  }
}
