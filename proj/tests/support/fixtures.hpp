#pragma once

#include <utility>
#include <vector>

#include "support/oracles.hpp"
#include "wpsat/factor_graph.hpp"
#include "wpsat/wp_engine.hpp"

namespace fixtures {

using namespace wpsat;

/// C -> x = 1 iff no other variable of C satisfies C under tau.
MessageState local_max_messages(const FactorGraph& g, const Formula& f, std::uint32_t tau) {
  MessageState s(g.num_edges(), 0);
  for (std::size_t j = 0; j < f.num_clauses(); ++j)
    for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e) {
      bool other_satisfies = false;
      for (EdgeId h = g.clause_begin(j); h < g.clause_end(j); ++h) {
        if (h == e) continue;
        Literal l = g.edge_literal(h);
        other_satisfies |= (((tau >> (l.var() - 1)) & 1U) != 0) == l.positive();
      }
      s[e] = !other_satisfies;
    }
  return s;
}

/// Searches random formulas and hill-climbs to strict local maxima of the
/// number of satisfied clauses, verified by exhaustive single flips.
std::vector<std::pair<Formula, std::uint32_t>> strict_local_maxima(std::size_t count, Rng& rng) {
  std::vector<std::pair<Formula, std::uint32_t>> out;
  while (out.size() < count) {
    std::size_t n = 4 + rng() % 7;  // 4..10
    Formula f = oracle::random_formula(n, 2 * n + rng() % (4 * n), 2, 3, rng);
    std::uint32_t tau = static_cast<std::uint32_t>(rng()) & ((1U << n) - 1);
    for (int iter = 0; iter < 200; ++iter) {
      std::size_t here = oracle::satisfied_count(f, tau);
      bool moved = false;
      for (Var v = 1; v <= n && !moved; ++v) {
        std::uint32_t t = tau ^ (1U << (v - 1));
        if (oracle::satisfied_count(f, t) > here) {
          tau = t;
          moved = true;
        }
      }
      if (!moved) break;
    }
    if (oracle::strict_local_max(f, tau)) out.emplace_back(std::move(f), tau);
  }
  return out;
}

}  // namespace fixtures
