#include <gtest/gtest.h>

#include <chrono>

#include "support/oracles.hpp"
#include "wpsat/generator.hpp"
#include "wpsat/residual_solver.hpp"

using namespace wpsat;

namespace {

Literal pos(Var v) { return Literal(v, true); }
Literal neg(Var v) { return Literal(v, false); }

Assignment totalize(const PartialAssignment& a) {
  Assignment t(a.num_vars());
  for (Var v = 1; v <= a.num_vars(); ++v) t.set(v, a[v] == Value::True);
  return t;
}

Formula unsat_unicyclic(Rng& rng) {
  for (;;) {
    Formula f = oracle::random_unicyclic_formula(2 + rng() % 5, rng);
    if (!oracle::satisfiable(f)) return f;
  }
}

}  // namespace

TEST(SolveTree, EmptyFormula) {
  auto r = solve_tree(Formula(0));
  EXPECT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.assignment.num_vars(), 0u);
}

TEST(SolveTree, UnitClause) {
  auto r = solve_tree(Formula(1, {Clause{pos(1)}}));
  ASSERT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.assignment[1], Value::True);
}

TEST(SolveTree, UnitPropagationChain) {
  auto r = solve_tree(Formula(2, {Clause{neg(1), pos(2)}, Clause{neg(2)}}));
  ASSERT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.assignment[2], Value::False);
  EXPECT_EQ(r.assignment[1], Value::False);
}

TEST(SolveTree, UnsatTree) {
  auto r = solve_tree(Formula(2, {Clause{pos(1)}, Clause{neg(1), pos(2)}, Clause{neg(2)}}));
  EXPECT_EQ(r.status, SolveStatus::Unsat);
}

TEST(SolveTree, RejectsCycles) {
  EXPECT_THROW(solve_tree(Formula(2, {Clause{pos(1), pos(2)}, Clause{neg(1), neg(2)}})), std::invalid_argument);
}

TEST(SolveTree, AgreesWithBruteForce) {
  Rng rng(21);
  for (int t = 0; t < 300; ++t) {
    Formula f = oracle::random_tree_formula(1 + rng() % 12, rng);
    auto r = solve_tree(f);
    EXPECT_EQ(r.status == SolveStatus::Sat, oracle::satisfiable(f));
    if (r.status == SolveStatus::Sat) EXPECT_TRUE(eval(f, totalize(r.assignment)));
  }
}

TEST(SolveUnicyclic, TwoClauseCycle) {
  Formula f(2, {Clause{pos(1), pos(2)}, Clause{neg(1), neg(2)}});
  auto r = solve_unicyclic(f);
  ASSERT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.assignment[1], Value::True);
  EXPECT_EQ(r.assignment[2], Value::False);
}

TEST(SolveUnicyclic, RejectsMulticyclic) {
  Formula f(2, {Clause{pos(1), pos(2)}, Clause{neg(1), pos(2)}, Clause{neg(2), pos(1)}, Clause{neg(2), neg(1)}});
  auto comps = components(FactorGraph(f));
  ASSERT_EQ(comps.size(), 1u);
  EXPECT_EQ(comps[0].nodes(), 6u);
  EXPECT_EQ(comps[0].edges, 8u);
  EXPECT_THROW(solve_unicyclic(f), std::invalid_argument);
  EXPECT_THROW(solve_unicyclic(Formula(3, {Clause{pos(1), pos(2)}})), std::invalid_argument);
}

TEST(SolveUnicyclic, UnsatAfterBothBranches) {
  Rng rng(22);
  for (int t = 0; t < 20; ++t) EXPECT_EQ(solve_unicyclic(unsat_unicyclic(rng)).status, SolveStatus::Unsat);
  Formula f(2, {Clause{pos(1), pos(2)}, Clause{neg(1), pos(2)}, Clause{neg(2)}});
  EXPECT_EQ(solve_unicyclic(f).status, SolveStatus::Unsat);
}

TEST(SolveUnicyclic, AgreesWithBruteForce) {
  Rng rng(23);
  for (int t = 0; t < 300; ++t) {
    Formula f = oracle::random_unicyclic_formula(2 + rng() % 11, rng);
    ASSERT_EQ(oracle::cycle_ranks(f), (std::vector<std::size_t>{1}));
    auto r = solve_unicyclic(f);
    EXPECT_EQ(r.status == SolveStatus::Sat, oracle::satisfiable(f));
    if (r.status == SolveStatus::Sat) EXPECT_TRUE(eval(f, totalize(r.assignment)));
  }
}

TEST(SolveResidual, EmptyFormula) { EXPECT_EQ(solve_residual(Formula(4)).status, SolveStatus::Sat); }

TEST(SolveResidual, DisjointUnion) {
  // (-x1 v x2) & (-x2)  plus  (x3 v x4) & (-x3 v -x4)
  Formula f(4, {Clause{neg(1), pos(2)}, Clause{neg(2)}, Clause{pos(3), pos(4)}, Clause{neg(3), neg(4)}});
  auto r = solve_residual(f);
  ASSERT_EQ(r.status, SolveStatus::Sat);
  EXPECT_EQ(r.assignment[1], Value::False);
  EXPECT_EQ(r.assignment[2], Value::False);
  EXPECT_EQ(r.assignment[3], Value::True);
  EXPECT_EQ(r.assignment[4], Value::False);
  ASSERT_EQ(r.log.size(), 2u);
  EXPECT_EQ(r.log[0].kind, ComponentClass::Tree);
  EXPECT_EQ(r.log[1].kind, ComponentClass::Unicyclic);
}

TEST(SolveResidual, EmptyClauseIsUnsat) {
  Formula f(1, {Clause{neg(1)}});
  PartialAssignment psi(1);
  psi.set(1, true);
  EXPECT_EQ(solve_residual(simplify(f, psi)).status, SolveStatus::Unsat);
}

TEST(SolveResidual, SmallMulticyclicBruteForced) {
  Rng rng(24);
  for (int t = 0; t < 100; ++t) {
    Formula f = oracle::random_formula(8, 14, 2, 3, rng);
    auto r = solve_residual(f);
    ASSERT_NE(r.status, SolveStatus::GaveUp);
    EXPECT_EQ(r.status == SolveStatus::Sat, oracle::satisfiable(f));
    if (r.status == SolveStatus::Sat) EXPECT_TRUE(eval(f, totalize(r.assignment)));
  }
}

TEST(SolveResidual, LargeMulticyclicGivesUp) {
  // A 30-variable ladder of binary clauses: connected, many cycles.
  Formula f(30);
  for (Var v = 1; v < 30; ++v) {
    f.add(Clause{pos(v), pos(v + 1)});
    f.add(Clause{neg(v), neg(v + 1)});
  }
  auto r = solve_residual(f);
  EXPECT_EQ(r.status, SolveStatus::GaveUp);
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].kind, ComponentClass::Multicyclic);
}

// Every success is a brute-force-confirmed model; WP may still settle on a
// fixed point no solution extends at n = 8 (measured around 0.2% at d = 25).
TEST(Pipeline, PlantedSmallAgreesWithBruteForce) {
  std::size_t failures = 0;
  const std::size_t runs = 1000;
  for (std::uint64_t seed = 0; seed < runs; ++seed) {
    auto inst = generate(GenParams::with_density(8, 25, seed));
    auto sols = oracle::all_solutions(inst.formula);
    ASSERT_FALSE(sols.empty());
    auto res = solve_planted(inst.formula, WPConfig{0, seed, false});
    if (!res.report.success) {
      ++failures;
      continue;
    }
    std::uint32_t mask = 0;
    for (Var v = 1; v <= 8; ++v) mask |= static_cast<std::uint32_t>(res.assignment[v]) << (v - 1);
    EXPECT_TRUE(std::binary_search(sols.begin(), sols.end(), mask));
  }
  EXPECT_LE(failures, runs / 100);
}

TEST(Pipeline, ReportsFailureInsteadOfThrowing) {
  Formula f(1, {Clause{pos(1)}, Clause{neg(1)}});
  auto res = solve_planted(f, WPConfig{0, 1, false});
  EXPECT_FALSE(res.report.success);
  EXPECT_EQ(res.report.failure, PipelineFailure::ResidualUnsat);

  Formula cyc(2, {Clause{pos(1), neg(2)}, Clause{pos(2), neg(1)}});
  bool saw_not_converged = false;
  for (std::uint64_t s = 0; s < 30; ++s) {
    auto r = solve_planted(cyc, WPConfig{1, s, false});
    if (!r.report.converged) {
      saw_not_converged = true;
      EXPECT_EQ(r.report.failure, PipelineFailure::NotConverged);
    }
  }
  EXPECT_TRUE(saw_not_converged);
}

TEST(Pipeline, MidDensitySucceeds) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto inst = generate(GenParams::with_density(2000, 25, seed));
    auto res = solve_planted(inst.formula, WPConfig{0, seed, false});
    EXPECT_TRUE(res.report.success) << to_string(res.report.failure);
    EXPECT_GE(res.report.assigned_fraction, 0.9);
    auto residual = simplify(inst.formula, res.wp.assignment);
    EXPECT_EQ(res.report.census.total(), components(FactorGraph(residual.formula)).size());
    EXPECT_EQ(res.report.residual_clauses, residual.formula.num_clauses());
  }
}

TEST(Linearity, ResidualSolveScalesLinearly) {
  auto forest = [](std::size_t trees, std::uint64_t seed) {
    Rng rng(seed);
    std::size_t n = 12 * trees;
    Formula f(n);
    for (std::size_t t = 0; t < trees; ++t) {
      Formula piece = t % 2 ? oracle::random_unicyclic_formula(12, rng) : oracle::random_tree_formula(12, rng);
      Var base = static_cast<Var>(12 * t);
      for (const auto& c : piece.clauses()) {
        std::vector<Literal> lits;
        for (Literal l : c) lits.emplace_back(l.var() + base, l.positive());
        f.add(Clause(std::span<const Literal>(lits)));
      }
    }
    return f;
  };
  auto time_of = [](const Formula& f) {
    std::vector<double> runs;
    for (int k = 0; k < 5; ++k) {
      auto t0 = std::chrono::steady_clock::now();
      auto r = solve_residual(f);
      runs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      EXPECT_NE(r.status, SolveStatus::GaveUp);
    }
    std::sort(runs.begin(), runs.end());
    return runs[2];
  };
  Formula small = forest(2000, 1), large = forest(20000, 2);
  double ratio = time_of(large) / time_of(small);
  EXPECT_GE(ratio, 10.0 / 2);
  EXPECT_LE(ratio, 10.0 * 2);
}
