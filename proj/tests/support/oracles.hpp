#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the library's solvers or graph code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "wpsat/formula.hpp"
#include "wpsat/rng.hpp"

namespace oracle {

using wpsat::Assignment;
using wpsat::Clause;
using wpsat::Formula;
using wpsat::Literal;
using wpsat::Rng;
using wpsat::Var;

inline bool clause_true(const Clause& c, std::uint32_t mask) {
  for (Literal l : c)
    if ((((mask >> (l.var() - 1)) & 1U) != 0) == l.positive()) return true;
  return false;
}

inline bool formula_true(const Formula& f, std::uint32_t mask) {
  for (const auto& c : f.clauses())
    if (!clause_true(c, mask)) return false;
  return true;
}

inline Assignment from_mask(std::size_t n, std::uint32_t mask) {
  Assignment a(n);
  for (Var v = 1; v <= n; ++v) a.set(v, (mask >> (v - 1)) & 1U);
  return a;
}

/// Every satisfying assignment as a bit mask (bit v-1 = value of x_v). n <= 22.
inline std::vector<std::uint32_t> all_solutions(const Formula& f) {
  std::vector<std::uint32_t> out;
  const std::uint32_t total = 1U << f.num_vars();
  for (std::uint32_t mask = 0; mask < total; ++mask)
    if (formula_true(f, mask)) out.push_back(mask);
  return out;
}

inline bool satisfiable(const Formula& f) {
  const std::uint32_t total = 1U << f.num_vars();
  for (std::uint32_t mask = 0; mask < total; ++mask)
    if (formula_true(f, mask)) return true;
  return false;
}

inline std::size_t satisfied_count(const Formula& f, std::uint32_t mask) {
  std::size_t k = 0;
  for (const auto& c : f.clauses()) k += clause_true(c, mask);
  return k;
}

/// Every single-variable flip strictly lowers the number of satisfied clauses.
inline bool strict_local_max(const Formula& f, std::uint32_t mask) {
  std::size_t here = satisfied_count(f, mask);
  for (Var v = 1; v <= f.num_vars(); ++v)
    if (satisfied_count(f, mask ^ (1U << (v - 1))) >= here) return false;
  return true;
}

inline Literal random_literal(Var v, Rng& rng) { return Literal(v, (rng() & 1U) != 0); }

inline Clause make_clause(const std::vector<Var>& vars, Rng& rng) {
  std::vector<Literal> lits;
  for (Var v : vars) lits.push_back(random_literal(v, rng));
  return Clause(std::span<const Literal>(lits));
}

inline std::vector<Var> distinct_vars(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<Var> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Var>(i + 1);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  return all;
}

/// m clauses of widths in [wmin, wmax] over n variables; duplicates allowed.
inline Formula random_formula(std::size_t n, std::size_t m, std::size_t wmin, std::size_t wmax, Rng& rng) {
  Formula f(n);
  std::uniform_int_distribution<std::size_t> width(wmin, std::min(wmax, n));
  for (std::size_t j = 0; j < m; ++j) f.add(make_clause(distinct_vars(n, width(rng), rng), rng));
  return f;
}

/// A connected tree-shaped factor graph: each new clause touches exactly one
/// variable already present, the rest are fresh. Uses at most n variables;
/// unused variables stay isolated.
inline Formula random_tree_formula(std::size_t n, Rng& rng) {
  Formula f(n);
  std::vector<Var> used{1};
  Var next = 2;
  std::uniform_int_distribution<int> width(1, 3);
  while (next <= n) {
    std::size_t w = static_cast<std::size_t>(width(rng));
    w = std::min<std::size_t>(w, n - next + 2);
    std::vector<Var> vars{used[rng() % used.size()]};
    while (vars.size() < w) {
      vars.push_back(next);
      used.push_back(next++);
    }
    f.add(make_clause(vars, rng));
    if (rng() % 4 == 0) break;
  }
  return f;
}

/// Tree plus one clause touching exactly two existing variables: one cycle.
inline Formula random_unicyclic_formula(std::size_t n, Rng& rng) {
  for (;;) {
    Formula t = random_tree_formula(n, rng);
    std::vector<Var> present;
    for (Var v = 1; v <= n; ++v)
      for (const auto& c : t.clauses())
        if (c.contains(v)) {
          present.push_back(v);
          break;
        }
    if (present.size() < 2) continue;
    std::shuffle(present.begin(), present.end(), rng);
    std::vector<Var> vars{present[0], present[1]};
    Var fresh = 0;
    for (Var v = 1; v <= n && !fresh; ++v)
      if (std::find(present.begin(), present.end(), v) == present.end()) fresh = v;
    if (fresh && rng() % 2) vars.push_back(fresh);
    t.add(make_clause(vars, rng));
    return t;
  }
}

/// Per connected component (isolated variables excluded): number of non-tree
/// edges found by an explicit DFS. 0 = tree, 1 = unicyclic, more = multicyclic.
/// Returned sorted.
inline std::vector<std::size_t> cycle_ranks(const Formula& f) {
  const std::size_t n = f.num_vars(), m = f.num_clauses();
  // nodes: variables 0..n-1, clauses n..n+m-1; edges keep an id to skip the parent edge only.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n + m);
  std::size_t id = 0;
  for (std::size_t j = 0; j < m; ++j)
    for (Literal l : f[j]) {
      adj[l.var() - 1].push_back({n + j, id});
      adj[n + j].push_back({l.var() - 1, id});
      ++id;
    }
  std::vector<int> seen(n + m, 0);
  std::vector<char> done(id, 0);
  std::vector<std::size_t> ranks;
  for (std::size_t root = 0; root < n + m; ++root) {
    if (seen[root] || adj[root].empty()) continue;
    std::size_t back = 0;
    seen[root] = 1;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};  // node, next adjacency index
    while (!stack.empty()) {
      auto& [u, k] = stack.back();
      if (k == adj[u].size()) {
        stack.pop_back();
        continue;
      }
      auto [w, e] = adj[u][k++];
      if (done[e]) continue;
      done[e] = 1;
      if (seen[w]) {
        ++back;
      } else {
        seen[w] = 1;
        stack.push_back({w, 0});
      }
    }
    ranks.push_back(back);
  }
  std::sort(ranks.begin(), ranks.end());
  return ranks;
}

/// P[Binomial(trials, p) < bound], summed term by term in long double.
inline double binomial_cdf_below(std::uint64_t trials, double p, double bound) {
  long double term = std::pow(1.0L - p, static_cast<long double>(trials));  // k = 0
  long double sum = 0;
  for (std::uint64_t k = 0; static_cast<double>(k) < bound; ++k) {
    sum += term;
    term *= static_cast<long double>(trials - k) / static_cast<long double>(k + 1) * p / (1.0L - p);
  }
  return static_cast<double>(sum);
}

}  // namespace oracle
