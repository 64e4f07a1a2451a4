#pragma once

// Planted 3-SAT: pick an assignment phi uniformly, then include each of the
// 7 * C(n,3) clauses satisfied by phi independently with probability p.
//
// The clause count K ~ Binomial(7 C(n,3), p) is drawn first and K distinct
// satisfied clauses are then sampled uniformly (rejection against a hash set,
// or by enumerating the universe when K exceeds half of it). Conditioned on K
// the included set is a uniform K-subset, which is the same law as
// independent inclusion.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "wpsat/formula.hpp"
#include "wpsat/rng.hpp"

namespace wpsat {

struct GenParams {
  std::size_t n = 0;
  double p = 0.0;
  std::uint64_t seed = 0;
  /// Fix phi to all-TRUE instead of sampling it.
  bool all_true = false;

  /// p = d / n^2.
  static GenParams with_density(std::size_t n, double d, std::uint64_t seed) {
    return {n, d / (static_cast<double>(n) * static_cast<double>(n)), seed, false};
  }
  static GenParams with_probability(std::size_t n, double p, std::uint64_t seed) { return {n, p, seed, false}; }

  double density() const { return p * static_cast<double>(n) * static_cast<double>(n); }
};

struct PlantedInstance {
  Formula formula;
  Assignment planted;
};

/// Number of clauses over n variables satisfied by a fixed assignment: 7 * C(n,3).
inline std::uint64_t universe_size(std::size_t n) {
  if (n < 3) throw std::invalid_argument("universe_size requires n >= 3");
  const std::uint64_t a = n, b = n - 1, c = n - 2;
  // a*b*c is divisible by 6; divide early to stay inside 64 bits.
  std::uint64_t ab = a * b / 2;
  std::uint64_t prod = ab % 3 == 0 ? (ab / 3) * c : ab * (c / 3);
  return 7 * prod;
}

namespace detail {

/// Builds a clause over sorted variables vars[0..2]; bit k of `pattern`
/// (1..7) says whether literal k agrees with phi.
inline Clause planted_clause(const std::array<Var, 3>& vars, unsigned pattern, const Assignment& phi) {
  std::array<Literal, 3> lits;
  for (unsigned k = 0; k < 3; ++k) {
    bool agree = (pattern >> k) & 1U;
    lits[k] = Literal(vars[k], agree == phi[vars[k]]);
  }
  return Clause(std::span<const Literal>(lits));
}

inline std::uint64_t clause_key(const std::array<Var, 3>& v, unsigned pattern, std::uint64_t n) {
  return ((static_cast<std::uint64_t>(v[0]) * (n + 1) + v[1]) * (n + 1) + v[2]) * 8 + pattern;
}

}  // namespace detail

inline PlantedInstance generate(const GenParams& params) {
  const std::size_t n = params.n;
  if (n < 3) throw std::invalid_argument("generate requires n >= 3, got " + std::to_string(n));
  if (!(params.p >= 0.0 && params.p <= 1.0))
    throw std::invalid_argument("clause probability p must lie in [0,1], got " + std::to_string(params.p));
  if (n > (1U << 20)) throw std::invalid_argument("n too large for clause hashing");

  Rng rng(params.seed);
  PlantedInstance inst{Formula(n), Assignment(n, true)};
  if (!params.all_true) {
    std::uint64_t bits = 0;
    for (Var v = 1; v <= n; ++v) {
      if ((v - 1) % 64 == 0) bits = rng();
      inst.planted.set(v, (bits >> ((v - 1) % 64)) & 1U);
    }
  }

  const std::uint64_t universe = universe_size(n);
  std::uint64_t k = 0;
  if (params.p >= 1.0) {
    k = universe;
  } else if (params.p > 0.0) {
    std::binomial_distribution<std::uint64_t> binom(universe, params.p);
    k = binom(rng);
  }

  std::vector<Clause> clauses;
  clauses.reserve(k);

  if (2 * k > universe) {
    // Dense: enumerate the universe and keep a uniform k-subset.
    if (universe > 200'000'000ULL) throw std::invalid_argument("instance too dense to enumerate");
    std::vector<Clause> all;
    all.reserve(universe);
    for (Var a = 1; a <= n; ++a)
      for (Var b = a + 1; b <= n; ++b)
        for (Var c = b + 1; c <= n; ++c)
          for (unsigned pat = 1; pat < 8; ++pat) all.push_back(detail::planted_clause({a, b, c}, pat, inst.planted));
    for (std::uint64_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::uint64_t> pick(i, universe - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(k);
    clauses = std::move(all);
  } else {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(k * 2);
    std::uniform_int_distribution<Var> var_dist(1, static_cast<Var>(n));
    std::uniform_int_distribution<unsigned> pat_dist(1, 7);
    while (clauses.size() < k) {
      std::array<Var, 3> v{var_dist(rng), var_dist(rng), var_dist(rng)};
      if (v[0] == v[1] || v[0] == v[2] || v[1] == v[2]) continue;
      std::sort(v.begin(), v.end());
      unsigned pat = pat_dist(rng);
      if (!seen.insert(detail::clause_key(v, pat, n)).second) continue;
      clauses.push_back(detail::planted_clause(v, pat, inst.planted));
    }
  }

  shuffle(std::span<Clause>(clauses), rng);
  inst.formula.reserve(clauses.size());
  for (const auto& c : clauses) inst.formula.add(c);
  return inst;
}

}  // namespace wpsat
