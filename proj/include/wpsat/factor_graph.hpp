#pragma once

// Bipartite clause/variable incidence graph with dense directed edge ids,
// connected components with tree/unicyclic/multicyclic classification, and
// occurrence bookkeeping relative to a reference assignment.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "wpsat/formula.hpp"

namespace wpsat {

/// Identifies the clause->variable message along one occurrence. The edges of
/// clause j are clause_begin(j) .. clause_begin(j) + width - 1, in literal order.
using EdgeId = std::uint32_t;

class FactorGraph {
 public:
  FactorGraph() = default;

  explicit FactorGraph(const Formula& f) : n_(f.num_vars()) {
    const std::size_t m = f.num_clauses();
    clause_begin_.resize(m + 1);
    std::size_t e = 0;
    for (std::size_t j = 0; j < m; ++j) {
      clause_begin_[j] = static_cast<EdgeId>(e);
      e += f[j].width();
    }
    clause_begin_[m] = static_cast<EdgeId>(e);
    edge_lit_.resize(e);
    edge_clause_.resize(e);

    std::vector<std::uint32_t> pos_count(n_ + 2, 0), neg_count(n_ + 2, 0);
    for (std::size_t j = 0; j < m; ++j) {
      EdgeId id = clause_begin_[j];
      for (Literal l : f[j]) {
        edge_lit_[id] = l;
        edge_clause_[id] = static_cast<std::uint32_t>(j);
        ++(l.positive() ? pos_count : neg_count)[l.var()];
        ++id;
      }
    }
    // CSR: for variable v, positive edges then negative edges.
    var_begin_.assign(n_ + 2, 0);
    var_split_.assign(n_ + 1, 0);
    for (Var v = 1; v <= n_; ++v) var_begin_[v + 1] = var_begin_[v] + pos_count[v] + neg_count[v];
    var_edges_.resize(e);
    std::vector<std::uint32_t> pos_fill(n_ + 1), neg_fill(n_ + 1);
    for (Var v = 1; v <= n_; ++v) {
      var_split_[v] = var_begin_[v] + pos_count[v];
      pos_fill[v] = var_begin_[v];
      neg_fill[v] = var_split_[v];
    }
    for (EdgeId id = 0; id < e; ++id) {
      Literal l = edge_lit_[id];
      var_edges_[l.positive() ? pos_fill[l.var()]++ : neg_fill[l.var()]++] = id;
    }
  }

  std::size_t num_vars() const { return n_; }
  std::size_t num_clauses() const { return clause_begin_.empty() ? 0 : clause_begin_.size() - 1; }
  std::size_t num_edges() const { return edge_lit_.size(); }

  Literal edge_literal(EdgeId e) const { return edge_lit_[e]; }
  Var edge_var(EdgeId e) const { return edge_lit_[e].var(); }
  bool edge_positive(EdgeId e) const { return edge_lit_[e].positive(); }
  std::size_t edge_clause(EdgeId e) const { return edge_clause_[e]; }

  EdgeId clause_begin(std::size_t j) const { return clause_begin_[j]; }
  EdgeId clause_end(std::size_t j) const { return clause_begin_[j + 1]; }
  std::size_t clause_width(std::size_t j) const { return clause_begin_[j + 1] - clause_begin_[j]; }

  /// Edges from clauses where v occurs positively (N+(v)) / negatively (N-(v)).
  std::span<const EdgeId> positive_edges(Var v) const {
    return {var_edges_.data() + var_begin_[v], var_edges_.data() + var_split_[v]};
  }
  std::span<const EdgeId> negative_edges(Var v) const {
    return {var_edges_.data() + var_split_[v], var_edges_.data() + var_begin_[v + 1]};
  }
  std::span<const EdgeId> edges_of(Var v) const {
    return {var_edges_.data() + var_begin_[v], var_edges_.data() + var_begin_[v + 1]};
  }
  std::size_t degree(Var v) const { return var_begin_[v + 1] - var_begin_[v]; }

  /// Edge joining clause j and variable v, or num_edges() if v is not in clause j.
  EdgeId find_edge(std::size_t j, Var v) const {
    for (EdgeId e = clause_begin(j); e < clause_end(j); ++e)
      if (edge_var(e) == v) return e;
    return static_cast<EdgeId>(num_edges());
  }

 private:
  std::size_t n_ = 0;
  std::vector<EdgeId> clause_begin_;
  std::vector<Literal> edge_lit_;
  std::vector<std::uint32_t> edge_clause_;
  std::vector<std::uint32_t> var_begin_;
  std::vector<std::uint32_t> var_split_;
  std::vector<EdgeId> var_edges_;
};

enum class ComponentClass { Tree, Unicyclic, Multicyclic };

inline std::string_view to_string(ComponentClass c) {
  switch (c) {
    case ComponentClass::Tree: return "tree";
    case ComponentClass::Unicyclic: return "unicyclic";
    case ComponentClass::Multicyclic: return "multicyclic";
  }
  return "?";
}

struct Component {
  std::vector<Var> variables;
  std::vector<std::size_t> clauses;
  std::size_t edges = 0;
  ComponentClass kind = ComponentClass::Tree;

  std::size_t nodes() const { return variables.size() + clauses.size(); }
};

inline ComponentClass classify(std::size_t nodes, std::size_t edges) {
  if (edges + 1 == nodes) return ComponentClass::Tree;
  if (edges == nodes) return ComponentClass::Unicyclic;
  return ComponentClass::Multicyclic;
}

/// Connected components over the non-isolated nodes, variables and clauses
/// sorted ascending inside each component, components ordered by their
/// smallest variable.
inline std::vector<Component> components(const FactorGraph& g) {
  const std::size_t n = g.num_vars(), m = g.num_clauses();
  std::vector<bool> var_seen(n + 1, false), clause_seen(m, false);
  std::vector<Component> out;
  std::vector<std::size_t> stack;  // clause ids

  auto visit_var = [&](Var v, Component& comp) {
    var_seen[v] = true;
    comp.variables.push_back(v);
    for (EdgeId e : g.edges_of(v)) {
      std::size_t j = g.edge_clause(e);
      if (!clause_seen[j]) {
        clause_seen[j] = true;
        stack.push_back(j);
      }
    }
  };

  for (Var root = 1; root <= n; ++root) {
    if (var_seen[root] || g.degree(root) == 0) continue;
    Component comp;
    visit_var(root, comp);
    while (!stack.empty()) {
      std::size_t j = stack.back();
      stack.pop_back();
      comp.clauses.push_back(j);
      comp.edges += g.clause_width(j);
      for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e)
        if (!var_seen[g.edge_var(e)]) visit_var(g.edge_var(e), comp);
    }
    std::sort(comp.variables.begin(), comp.variables.end());
    std::sort(comp.clauses.begin(), comp.clauses.end());
    comp.kind = classify(comp.nodes(), comp.edges);
    out.push_back(std::move(comp));
  }
  return out;
}

/// The clauses of `f` listed in `comp`, over the same variable indices.
inline Formula component_formula(const Formula& f, const Component& comp) {
  Formula out(f.num_vars());
  out.reserve(comp.clauses.size());
  for (std::size_t j : comp.clauses) out.add(f[j]);
  return out;
}

/// True iff x's literal in c is satisfied by psi, every other variable of c is
/// assigned by psi, and no other literal of c is satisfied.
inline bool supports(Var x, const Clause& c, const PartialAssignment& psi) {
  bool found = false;
  for (Literal l : c) {
    if (l.var() == x) {
      if (!psi.satisfies(l)) return false;
      found = true;
    } else if (!psi.falsifies(l)) {
      return false;
    }
  }
  return found;
}

inline bool supports(Var x, const Clause& c, const Assignment& phi) {
  bool found = false;
  for (Literal l : c) {
    if (l.var() == x) {
      if (!phi.satisfies(l)) return false;
      found = true;
    } else if (phi.satisfies(l)) {
      return false;
    }
  }
  return found;
}

/// Indices of the clauses of f that x supports under psi.
inline std::vector<std::size_t> support_of(Var x, const PartialAssignment& psi, const Formula& f) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < f.num_clauses(); ++j)
    if (supports(x, f[j], psi)) out.push_back(j);
  return out;
}

/// How a clause relates to one of its variables under a reference assignment
/// phi: the variable supports it (N^s), agrees with phi without supporting
/// (N^{++}), or occurs with the polarity phi falsifies (N^-).
enum class Occurrence : std::uint8_t { Supported, AgreeingUnsupported, Disagreeing };

/// Occurrence categories per edge relative to phi. For phi(x) = FALSE the
/// polarities are mirrored so "agreeing" always means the literal phi satisfies.
class OccurrenceIndex {
 public:
  OccurrenceIndex(const Formula& f, const FactorGraph& g, const Assignment& phi)
      : kind_(g.num_edges()), supported_(f.num_vars() + 1, 0), agreeing_(f.num_vars() + 1, 0),
        disagreeing_(f.num_vars() + 1, 0) {
    for (std::size_t j = 0; j < f.num_clauses(); ++j) {
      const Clause& c = f[j];
      std::size_t satisfied = 0;
      for (Literal l : c) satisfied += phi.satisfies(l);
      for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e) {
        Literal l = g.edge_literal(e);
        Var v = l.var();
        if (!phi.satisfies(l)) {
          kind_[e] = Occurrence::Disagreeing;
          ++disagreeing_[v];
        } else if (satisfied == 1) {
          kind_[e] = Occurrence::Supported;
          ++supported_[v];
        } else {
          kind_[e] = Occurrence::AgreeingUnsupported;
          ++agreeing_[v];
        }
      }
    }
  }

  Occurrence kind(EdgeId e) const { return kind_[e]; }
  /// #N^s(v)
  std::size_t supported(Var v) const { return supported_[v]; }
  /// #N^{++}(v)
  std::size_t agreeing_unsupported(Var v) const { return agreeing_[v]; }
  /// #N^-(v)
  std::size_t disagreeing(Var v) const { return disagreeing_[v]; }

 private:
  std::vector<Occurrence> kind_;
  std::vector<std::uint32_t> supported_, agreeing_, disagreeing_;
};

}  // namespace wpsat
