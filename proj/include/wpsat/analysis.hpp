#pragma once

// Diagnostics relative to a planted assignment phi: support deficiency,
// stability w.r.t. an edge order, violation by an initial message vector, the
// iteratively pruned core, and message correctness.
//
// All polarity-relative sets are taken w.r.t. phi: "agreeing" means the
// literal phi satisfies. Thresholds are compared exactly as k * count vs d.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "wpsat/factor_graph.hpp"
#include "wpsat/formula.hpp"
#include "wpsat/generator.hpp"
#include "wpsat/wp_engine.hpp"

namespace wpsat {

/// Threshold family derived from the density parameter d:
///   support_min      d/3   (A1 and stability condition c)
///   gap              d/30  (stability/violation conditions a, b; core external clauses)
///   core_support_min d/4   (core pruning)
///   warn_min         d/7   (violation condition c)
struct StabilityParams {
  double d = 0;

  explicit StabilityParams(double density) : d(density) {
    if (!(density > 0)) throw std::invalid_argument("density parameter d must be positive");
  }

  double support_min() const { return d / 3; }
  double gap() const { return d / 30; }
  double core_support_min() const { return d / 4; }
  double warn_min() const { return d / 7; }

  bool below_support_min(std::int64_t count) const { return 3.0 * static_cast<double>(count) < d; }
  bool within_gap(std::int64_t diff) const { return 30.0 * static_cast<double>(diff < 0 ? -diff : diff) <= d; }
  bool below_core_support(std::int64_t count) const { return 4.0 * static_cast<double>(count) < d; }
  bool above_gap(std::int64_t count) const { return 30.0 * static_cast<double>(count) > d; }
  bool below_warn_min(std::int64_t count) const { return 7.0 * static_cast<double>(count) < d; }
};

/// Shared per-instance structures for the analyses.
class PlantedAnalysis {
 public:
  PlantedAnalysis(const Formula& f, const Assignment& phi)
      : formula_(f), phi_(phi), graph_(f), occ_(f, graph_, phi) {
    if (phi.num_vars() != f.num_vars()) throw std::invalid_argument("planted assignment size mismatch");
  }
  explicit PlantedAnalysis(const PlantedInstance& inst) : PlantedAnalysis(inst.formula, inst.planted) {}

  const Formula& formula() const { return formula_; }
  const Assignment& planted() const { return phi_; }
  const FactorGraph& graph() const { return graph_; }
  const OccurrenceIndex& occurrences() const { return occ_; }

 private:
  const Formula& formula_;
  const Assignment& phi_;
  FactorGraph graph_;
  OccurrenceIndex occ_;
};

/// A1: variables supporting fewer than d/3 clauses w.r.t. phi.
inline VarSet support_deficient(const PlantedAnalysis& a, const StabilityParams& params) {
  VarSet out(a.formula().num_vars());
  for (Var v = 1; v <= a.formula().num_vars(); ++v)
    if (params.below_support_min(static_cast<std::int64_t>(a.occurrences().supported(v)))) out.insert(v);
  return out;
}

namespace detail {

/// For every variable, its edges sorted by position in an order together with
/// running counts, so "how many of y's edges of a kind precede index i" is a
/// binary search. Only edges accepted by `keep` are counted.
class PrefixCounts {
 public:
  template <typename Keep>
  PrefixCounts(const FactorGraph& g, const OccurrenceIndex& occ, const std::vector<std::uint32_t>& pos, Keep keep)
      : begin_(g.num_vars() + 2, 0) {
    for (Var v = 1; v <= g.num_vars(); ++v) begin_[v + 1] = begin_[v] + static_cast<std::uint32_t>(g.degree(v));
    positions_.resize(g.num_edges());
    balance_.resize(g.num_edges() + g.num_vars() + 1);
    for (Var v = 1; v <= g.num_vars(); ++v) {
      auto edges = g.edges_of(v);
      std::vector<EdgeId> sorted(edges.begin(), edges.end());
      std::sort(sorted.begin(), sorted.end(), [&](EdgeId x, EdgeId y) { return pos[x] < pos[y]; });
      std::int64_t running = 0;
      std::size_t base = begin_[v];
      balance_[base + v] = 0;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        EdgeId e = sorted[k];
        positions_[base + k] = pos[e];
        if (keep(e)) {
          if (occ.kind(e) == Occurrence::AgreeingUnsupported) ++running;
          if (occ.kind(e) == Occurrence::Disagreeing) --running;
        }
        balance_[base + v + k + 1] = running;
      }
    }
  }

  /// #(N++ edges of y before index i) - #(N- edges of y before index i).
  std::int64_t balance_before(Var y, std::uint32_t i) const {
    auto first = positions_.begin() + begin_[y];
    auto last = positions_.begin() + begin_[y + 1];
    std::size_t k = static_cast<std::size_t>(std::lower_bound(first, last, i) - first);
    return balance_[begin_[y] + y + k];
  }

 private:
  std::vector<std::uint32_t> begin_;
  std::vector<std::uint32_t> positions_;
  std::vector<std::int64_t> balance_;  // per variable: degree + 1 prefix values
};

inline std::vector<std::uint32_t> positions_of(const FactorGraph& g, const EdgeOrder& order) {
  if (order.size() != g.num_edges()) throw std::invalid_argument("edge order size does not match the factor graph");
  std::vector<std::uint32_t> pos(order.size(), UINT32_MAX);
  for (std::uint32_t i = 0; i < order.size(); ++i) {
    if (order[i] >= order.size() || pos[order[i]] != UINT32_MAX)
      throw std::invalid_argument("edge order is not a permutation");
    pos[order[i]] = i;
  }
  return pos;
}

/// Checks the three per-neighbour conditions of every edge into every
/// variable; `ok(y, i)` decides one neighbour y at order index i.
template <typename NeighbourOk>
VarSet failing_variables(const FactorGraph& g, const std::vector<std::uint32_t>& pos, std::span<const Var> candidates,
                         NeighbourOk ok) {
  VarSet out(g.num_vars());
  for (Var x : candidates) {
    bool good = true;
    for (EdgeId e : g.edges_of(x)) {
      std::size_t j = g.edge_clause(e);
      for (EdgeId f = g.clause_begin(j); f < g.clause_end(j) && good; ++f)
        if (f != e && !ok(g.edge_var(f), pos[e])) good = false;
      if (!good) break;
    }
    if (!good) out.insert(x);
  }
  return out;
}

inline std::vector<Var> all_vars(std::size_t n) {
  std::vector<Var> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Var>(i + 1);
  return v;
}

}  // namespace detail

/// A2: variables that are not stable w.r.t. `order`. A variable x is stable if
/// for every edge C -> x at index i and every other variable y of C:
///   (a) |#(N++(y) edges before i) - #(N-(y) edges before i)| <= d/30
///   (b) |#N++(y) - #N-(y)| <= d/30
///   (c) #N^s(y) >= d/3
inline VarSet unstable(const PlantedAnalysis& a, const EdgeOrder& order, const StabilityParams& params) {
  const auto& g = a.graph();
  const auto& occ = a.occurrences();
  auto pos = detail::positions_of(g, order);
  detail::PrefixCounts prefix(g, occ, pos, [](EdgeId) { return true; });
  auto ok = [&](Var y, std::uint32_t i) {
    return params.within_gap(prefix.balance_before(y, i)) &&
           params.within_gap(static_cast<std::int64_t>(occ.agreeing_unsupported(y)) -
                             static_cast<std::int64_t>(occ.disagreeing(y))) &&
           !params.below_support_min(static_cast<std::int64_t>(occ.supported(y)));
  };
  auto vars = detail::all_vars(g.num_vars());
  return detail::failing_variables(g, pos, vars, ok);
}

/// A3: stable variables violated by the message vector `alpha`, i.e. with an
/// edge C -> x at index i and a neighbour y of C such that, counting only
/// edges whose alpha value is 1,
///   (a) |#(N++(y) before i) - #(N-(y) before i)| > d/30, or
///   (b) |#N++(y) - #N-(y)| > d/30, or
///   (c) #N^s(y) < d/7.
inline VarSet violated(const PlantedAnalysis& a, const EdgeOrder& order, const MessageState& alpha,
                       const StabilityParams& params, const VarSet& stable) {
  const auto& g = a.graph();
  const auto& occ = a.occurrences();
  if (alpha.size() != g.num_edges()) throw std::invalid_argument("message state size does not match the factor graph");
  auto pos = detail::positions_of(g, order);
  detail::PrefixCounts prefix(g, occ, pos, [&](EdgeId e) { return alpha[e] != 0; });

  std::vector<std::int64_t> balance(g.num_vars() + 1, 0), warned_support(g.num_vars() + 1, 0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    if (!alpha[e]) continue;
    Var y = g.edge_var(e);
    switch (occ.kind(e)) {
      case Occurrence::AgreeingUnsupported: ++balance[y]; break;
      case Occurrence::Disagreeing: --balance[y]; break;
      case Occurrence::Supported: ++warned_support[y]; break;
    }
  }
  auto ok = [&](Var y, std::uint32_t i) {
    return params.within_gap(prefix.balance_before(y, i)) && params.within_gap(balance[y]) &&
           !params.below_warn_min(warned_support[y]);
  };
  auto candidates = stable.members();
  return detail::failing_variables(g, pos, candidates, ok);
}

inline VarSet violated(const PlantedAnalysis& a, const EdgeOrder& order, const MessageState& alpha,
                       const StabilityParams& params) {
  return violated(a, order, alpha, params, unstable(a, order, params).complement());
}

enum class RemovalReason { LowSupport, ExternalClauses };

inline std::string_view to_string(RemovalReason r) {
  return r == RemovalReason::LowSupport ? "low_support" : "external_clauses";
}

struct CoreRemoval {
  Var var = 0;
  RemovalReason reason = RemovalReason::LowSupport;
  std::size_t support_inside = 0;
  std::size_t external_clauses = 0;
};

struct CoreReport {
  VarSet core;
  VarSet a1, a2, a3;
  /// Variables removed from H0 by the pruning loop, in removal order.
  std::vector<CoreRemoval> trace;
};

/// Prunes `start` until every remaining variable supports at least d/4 clauses
/// of F[H] and occurs in at most d/30 clauses outside F[H]. Both conditions
/// only get worse as H shrinks, so the result does not depend on `scan_order`
/// (a permutation of 1..n deciding which candidate is examined first).
inline std::pair<VarSet, std::vector<CoreRemoval>> prune_core(const PlantedAnalysis& a, VarSet start,
                                                              const StabilityParams& params,
                                                              std::span<const Var> scan_order = {}) {
  const auto& g = a.graph();
  const auto& occ = a.occurrences();
  const std::size_t n = g.num_vars(), m = g.num_clauses();
  VarSet& h = start;

  std::vector<std::uint32_t> outside(m, 0);
  std::vector<std::int64_t> support_in(n + 1, 0), external(n + 1, 0);
  for (std::size_t j = 0; j < m; ++j)
    for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e)
      if (!h.contains(g.edge_var(e))) ++outside[j];
  for (std::size_t j = 0; j < m; ++j)
    for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e) {
      Var v = g.edge_var(e);
      if (outside[j] > 0) {
        ++external[v];
      } else if (occ.kind(e) == Occurrence::Supported) {
        ++support_in[v];
      }
    }

  auto failing = [&](Var v) -> std::optional<RemovalReason> {
    if (!h.contains(v)) return std::nullopt;
    if (params.below_core_support(support_in[v])) return RemovalReason::LowSupport;
    if (params.above_gap(external[v])) return RemovalReason::ExternalClauses;
    return std::nullopt;
  };

  std::deque<Var> queue;
  if (scan_order.empty()) {
    for (Var v = 1; v <= n; ++v) queue.push_back(v);
  } else {
    if (scan_order.size() != n) throw std::invalid_argument("scan order must list every variable");
    queue.assign(scan_order.begin(), scan_order.end());
  }

  std::vector<CoreRemoval> trace;
  while (!queue.empty()) {
    Var v = queue.front();
    queue.pop_front();
    auto reason = failing(v);
    if (!reason) continue;
    trace.push_back({v, *reason, static_cast<std::size_t>(support_in[v]), static_cast<std::size_t>(external[v])});
    h.erase(v);
    for (EdgeId e : g.edges_of(v)) {
      std::size_t j = g.edge_clause(e);
      if (++outside[j] != 1) continue;
      for (EdgeId f = g.clause_begin(j); f < g.clause_end(j); ++f) {
        Var u = g.edge_var(f);
        ++external[u];
        if (occ.kind(f) == Occurrence::Supported) --support_in[u];
        if (u != v) queue.push_back(u);
      }
    }
  }
  return {std::move(h), std::move(trace)};
}

inline CoreReport core(const PlantedAnalysis& a, const EdgeOrder& order, const MessageState& alpha,
                       const StabilityParams& params, std::span<const Var> scan_order = {}) {
  CoreReport r;
  r.a1 = support_deficient(a, params);
  r.a2 = unstable(a, order, params);
  r.a3 = violated(a, order, alpha, params, r.a2.complement());
  VarSet h0(a.formula().num_vars(), true);
  for (const VarSet* s : {&r.a1, &r.a2, &r.a3})
    for (Var v : s->members()) h0.erase(v);
  auto [h, trace] = prune_core(a, std::move(h0), params, scan_order);
  r.core = std::move(h);
  r.trace = std::move(trace);
  return r;
}

/// The value of C -> x once its other variables have settled on phi: 1 iff x
/// supports C w.r.t. phi.
inline std::uint8_t correct_message(const Clause& c, Var x, const Assignment& phi) {
  if (!c.contains(x)) throw std::invalid_argument("variable does not occur in clause");
  return supports(x, c, phi) ? 1 : 0;
}

/// Number of clauses with at least two variables in U.
inline std::size_t density_count(const Formula& f, const VarSet& u) {
  std::size_t count = 0;
  for (const auto& c : f.clauses()) {
    std::size_t inside = 0;
    for (Literal l : c) inside += u.contains(l.var());
    if (inside >= 2) ++count;
  }
  return count;
}

struct MessageAgreement {
  std::size_t edges = 0;
  std::size_t correct = 0;
  bool all_correct() const { return edges == correct; }
};

/// Compares the stored messages on edges of clauses inside F[H] with correct_message.
inline MessageAgreement core_message_agreement(const PlantedAnalysis& a, const VarSet& core_set,
                                               const MessageState& state) {
  const auto& g = a.graph();
  const auto& f = a.formula();
  MessageAgreement out;
  for (std::size_t j = 0; j < f.num_clauses(); ++j) {
    bool inside = std::all_of(f[j].begin(), f[j].end(), [&](Literal l) { return core_set.contains(l.var()); });
    if (!inside) continue;
    for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e) {
      ++out.edges;
      out.correct += state[e] == correct_message(f[j], g.edge_var(e), a.planted());
    }
  }
  return out;
}

/// The formula the non-core variables induce: F simplified by giving every
/// core variable its planted value.
inline SimplifyResult non_core_formula(const Formula& f, const Assignment& phi, const VarSet& core_set) {
  PartialAssignment psi(f.num_vars());
  for (Var v : core_set.members()) psi.set(v, phi[v]);
  return simplify(f, psi);
}

}  // namespace wpsat
