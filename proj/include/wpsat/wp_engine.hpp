#pragma once

// Warning Propagation.
//
// Only clause->variable messages are stored, one bit per edge. Variable->clause
// messages are recomputed on demand from the current stored values:
//
//   x -> C  =  sum_{C' in N+(x), C' != C} C' -> x  -  sum_{C' in N-(x), C' != C} C' -> x
//   C -> x  =  prod over other literals l_y of C of
//                [y -> C < 0]  if y occurs positively in C
//                [y -> C > 0]  if y occurs negatively in C
//              (1 for a unit clause)
//
// A pass visits the edges in a fresh uniformly random order and overwrites each
// message in place, so later updates in the same pass see earlier ones. The
// run converges when a whole pass changes nothing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wpsat/factor_graph.hpp"
#include "wpsat/formula.hpp"
#include "wpsat/rng.hpp"

namespace wpsat {

/// alpha: one clause->variable message value (0 or 1) per edge id.
using MessageState = std::vector<std::uint8_t>;
/// A permutation of the edge ids.
using EdgeOrder = std::vector<EdgeId>;

struct WPConfig {
  /// 0 selects default_max_passes(n).
  std::size_t max_passes = 0;
  std::uint64_t seed = 0;
  /// Keep the initial messages and every pass's order and resulting state.
  bool record_history = false;
};

inline std::size_t default_max_passes(std::size_t n) {
  if (n < 2) return 100;
  return std::max<std::size_t>(100, static_cast<std::size_t>(std::ceil(20.0 * std::log2(static_cast<double>(n)))));
}

struct WPHistory {
  MessageState initial;
  std::vector<EdgeOrder> orders;
  /// states[t] is the message vector after pass t + 1.
  std::vector<MessageState> states;
};

struct WPResult {
  bool converged = false;
  std::size_t passes_used = 0;
  MessageState final_messages;
  /// B_v for v = 1..n (slot 0 unused).
  std::vector<std::int64_t> bias;
  PartialAssignment assignment;
  std::optional<WPHistory> history;

  double assigned_fraction() const {
    return assignment.num_vars() == 0 ? 1.0
                                      : static_cast<double>(assignment.num_assigned()) /
                                            static_cast<double>(assignment.num_vars());
  }
};

/// Each message independently 0 or 1 with probability 1/2.
inline MessageState init_messages(const FactorGraph& g, Rng& rng) {
  MessageState s(g.num_edges());
  std::uint64_t bits = 0;
  for (std::size_t e = 0; e < s.size(); ++e) {
    if (e % 64 == 0) bits = rng();
    s[e] = static_cast<std::uint8_t>((bits >> (e % 64)) & 1U);
  }
  return s;
}

inline EdgeOrder random_edge_order(const FactorGraph& g, Rng& rng) {
  EdgeOrder order(g.num_edges());
  std::iota(order.begin(), order.end(), EdgeId{0});
  shuffle(std::span<EdgeId>(order), rng);
  return order;
}

namespace detail {

/// Per-variable sums of stored messages from clauses where the variable
/// occurs positively / negatively.
struct WarningSums {
  std::vector<std::int64_t> pos, neg;

  WarningSums(const FactorGraph& g, const MessageState& s) : pos(g.num_vars() + 1, 0), neg(g.num_vars() + 1, 0) {
    for (EdgeId e = 0; e < s.size(); ++e)
      if (s[e]) ++(g.edge_positive(e) ? pos : neg)[g.edge_var(e)];
  }

  /// y -> C along edge f (which joins C and y), excluding f's own message.
  std::int64_t var_to_clause(const FactorGraph& g, const MessageState& s, EdgeId f) const {
    Var y = g.edge_var(f);
    std::int64_t own = s[f];
    return g.edge_positive(f) ? (pos[y] - own) - neg[y] : pos[y] - (neg[y] - own);
  }

  std::uint8_t clause_to_var(const FactorGraph& g, const MessageState& s, EdgeId e) const {
    std::size_t j = g.edge_clause(e);
    for (EdgeId f = g.clause_begin(j); f < g.clause_end(j); ++f) {
      if (f == e) continue;
      std::int64_t m = var_to_clause(g, s, f);
      bool fires = g.edge_positive(f) ? m < 0 : m > 0;
      if (!fires) return 0;
    }
    return 1;
  }

  void apply(const FactorGraph& g, EdgeId e, int delta) { (g.edge_positive(e) ? pos : neg)[g.edge_var(e)] += delta; }
};

inline void check_state(const FactorGraph& g, const MessageState& s) {
  if (s.size() != g.num_edges()) throw std::invalid_argument("message state size does not match the factor graph");
}

}  // namespace detail

/// Message from variable `x` to clause `clause`. Throws if x does not occur in it.
inline std::int64_t var_to_clause(const FactorGraph& g, const MessageState& s, std::size_t clause, Var x) {
  detail::check_state(g, s);
  EdgeId e = g.find_edge(clause, x);
  if (e == g.num_edges()) throw std::invalid_argument("variable does not occur in clause");
  std::int64_t sum = 0;
  for (EdgeId f : g.positive_edges(x))
    if (f != e) sum += s[f];
  for (EdgeId f : g.negative_edges(x))
    if (f != e) sum -= s[f];
  return sum;
}

/// Value clause `clause` would send to `x` given the current stored messages.
inline std::uint8_t clause_to_var_value(const FactorGraph& g, const MessageState& s, std::size_t clause, Var x) {
  detail::check_state(g, s);
  EdgeId e = g.find_edge(clause, x);
  if (e == g.num_edges()) throw std::invalid_argument("variable does not occur in clause");
  for (EdgeId f = g.clause_begin(clause); f < g.clause_end(clause); ++f) {
    if (f == e) continue;
    std::int64_t m = var_to_clause(g, s, clause, g.edge_var(f));
    if (!(g.edge_positive(f) ? m < 0 : m > 0)) return 0;
  }
  return 1;
}

/// One sequential pass in `order`; returns how many stored messages changed.
inline std::size_t run_pass(const FactorGraph& g, MessageState& s, const EdgeOrder& order) {
  detail::check_state(g, s);
  detail::WarningSums sums(g, s);
  std::size_t changed = 0;
  for (EdgeId e : order) {
    std::uint8_t v = sums.clause_to_var(g, s, e);
    if (v != s[e]) {
      sums.apply(g, e, v ? 1 : -1);
      s[e] = v;
      ++changed;
    }
  }
  return changed;
}

/// B_v = sum over N+(v) of C -> v minus sum over N-(v) of C -> v.
inline std::vector<std::int64_t> compute_bias(const FactorGraph& g, const MessageState& s) {
  detail::check_state(g, s);
  detail::WarningSums sums(g, s);
  std::vector<std::int64_t> b(g.num_vars() + 1, 0);
  for (Var v = 1; v <= g.num_vars(); ++v) b[v] = sums.pos[v] - sums.neg[v];
  return b;
}

inline PartialAssignment assignment_from_bias(const std::vector<std::int64_t>& bias) {
  PartialAssignment psi(bias.empty() ? 0 : bias.size() - 1);
  for (Var v = 1; v < bias.size(); ++v)
    if (bias[v] != 0) psi.set(v, bias[v] > 0);
  return psi;
}

/// True iff recomputing every clause->variable message from `s` reproduces it.
inline bool is_fixed_point(const FactorGraph& g, const MessageState& s) {
  detail::check_state(g, s);
  detail::WarningSums sums(g, s);
  for (EdgeId e = 0; e < s.size(); ++e)
    if (sums.clause_to_var(g, s, e) != s[e]) return false;
  return true;
}

inline WPResult run(const FactorGraph& g, const WPConfig& config) {
  const std::size_t cap = config.max_passes ? config.max_passes : default_max_passes(g.num_vars());
  Rng rng(config.seed);
  WPResult r;
  r.final_messages = init_messages(g, rng);
  if (config.record_history) r.history.emplace().initial = r.final_messages;

  while (r.passes_used < cap) {
    EdgeOrder order = random_edge_order(g, rng);
    std::size_t changed = run_pass(g, r.final_messages, order);
    ++r.passes_used;
    if (r.history) {
      r.history->orders.push_back(std::move(order));
      r.history->states.push_back(r.final_messages);
    }
    if (changed == 0) {
      r.converged = true;
      break;
    }
  }
  r.bias = compute_bias(g, r.final_messages);
  r.assignment = assignment_from_bias(r.bias);
  return r;
}

inline WPResult run(const Formula& f, const WPConfig& config) { return run(FactorGraph(f), config); }

}  // namespace wpsat
