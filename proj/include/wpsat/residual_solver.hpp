#pragma once

// Satisfying the formula left after simplifying by the WP assignment.
//
// Components of the residual factor graph are solved independently: trees by
// leaf elimination, unicyclic components by branching on one cycle variable
// and tree-solving both branches, small multicyclic components by DPLL.

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wpsat/factor_graph.hpp"
#include "wpsat/formula.hpp"
#include "wpsat/wp_engine.hpp"

namespace wpsat {

enum class SolveStatus { Sat, Unsat, GaveUp };

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Sat: return "SAT";
    case SolveStatus::Unsat: return "UNSAT";
    case SolveStatus::GaveUp: return "GAVE_UP";
  }
  return "?";
}

struct ComponentLog {
  std::size_t variables = 0;
  std::size_t clauses = 0;
  ComponentClass kind = ComponentClass::Tree;
  SolveStatus status = SolveStatus::Sat;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Sat;
  /// Values for the variables occurring in the solved formula (when SAT);
  /// every other variable is left unassigned.
  PartialAssignment assignment;
  std::vector<ComponentLog> log;
};

inline constexpr std::size_t kMulticyclicBruteForceLimit = 25;

namespace detail {

inline bool is_forest(const FactorGraph& g) {
  for (const auto& c : components(g))
    if (c.kind != ComponentClass::Tree) return false;
  return true;
}

/// Leaf elimination. Complete on formulas whose factor graph is a forest: a
/// unit clause forces its variable, and a variable left in a single live
/// clause can always be set to satisfy it.
inline SolveOutcome eliminate_leaves(const Formula& f, const FactorGraph& g) {
  const std::size_t n = f.num_vars(), m = f.num_clauses();
  SolveOutcome out{SolveStatus::Sat, PartialAssignment(n), {}};
  PartialAssignment& a = out.assignment;

  std::vector<bool> satisfied(m, false);
  std::vector<std::uint8_t> open(m);  // unassigned literals in unsatisfied clauses
  std::vector<std::uint32_t> live(n + 1, 0);  // unsatisfied clauses containing v
  for (std::size_t j = 0; j < m; ++j) open[j] = static_cast<std::uint8_t>(f[j].width());
  for (Var v = 1; v <= n; ++v) live[v] = static_cast<std::uint32_t>(g.degree(v));

  std::vector<std::size_t> units;
  std::vector<Var> leaves;
  for (std::size_t j = 0; j < m; ++j)
    if (open[j] == 1) units.push_back(j);
  for (Var v = 1; v <= n; ++v)
    if (live[v] == 1) leaves.push_back(v);

  auto assign = [&](Var v, bool value) -> bool {
    a.set(v, value);
    for (EdgeId e : g.edges_of(v)) {
      std::size_t j = g.edge_clause(e);
      if (satisfied[j]) continue;
      if (g.edge_literal(e).satisfied_by(value)) {
        satisfied[j] = true;
        for (EdgeId k = g.clause_begin(j); k < g.clause_end(j); ++k) {
          Var u = g.edge_var(k);
          if (a.assigned(u)) continue;
          if (--live[u] == 1) leaves.push_back(u);
        }
      } else {
        if (--open[j] == 0) return false;
        if (open[j] == 1) units.push_back(j);
      }
    }
    return true;
  };

  while (!units.empty() || !leaves.empty()) {
    if (!units.empty()) {
      std::size_t j = units.back();
      units.pop_back();
      if (satisfied[j] || open[j] != 1) continue;
      for (Literal l : f[j]) {
        if (!a.assigned(l.var())) {
          if (!assign(l.var(), l.positive())) {
            out.status = SolveStatus::Unsat;
            return out;
          }
          break;
        }
      }
      continue;
    }
    Var v = leaves.back();
    leaves.pop_back();
    if (a.assigned(v) || live[v] != 1) continue;
    for (EdgeId e : g.edges_of(v)) {
      if (!satisfied[g.edge_clause(e)]) {
        if (!assign(v, g.edge_positive(e))) {
          out.status = SolveStatus::Unsat;
          return out;
        }
        break;
      }
    }
  }

  for (Var v = 1; v <= n; ++v)
    if (!a.assigned(v) && g.degree(v) > 0) {
      if (live[v] != 0) throw std::logic_error("leaf elimination stalled: factor graph is not a forest");
      a.set(v, true);
    }
  return out;
}

/// Variables on the unique cycle: peel degree-1 nodes until none remain.
inline std::vector<Var> cycle_variables(const Formula& f, const FactorGraph& g) {
  const std::size_t n = f.num_vars(), m = f.num_clauses();
  std::vector<std::uint32_t> vdeg(n + 1), cdeg(m);
  std::vector<bool> vgone(n + 1, false), cgone(m, false);
  std::vector<std::int64_t> queue;  // >0 variable, <=0 clause encoded as -(j)
  for (Var v = 1; v <= n; ++v) {
    vdeg[v] = static_cast<std::uint32_t>(g.degree(v));
    if (vdeg[v] == 1) queue.push_back(v);
  }
  for (std::size_t j = 0; j < m; ++j) {
    cdeg[j] = static_cast<std::uint32_t>(g.clause_width(j));
    if (cdeg[j] == 1) queue.push_back(-static_cast<std::int64_t>(j));
  }
  while (!queue.empty()) {
    std::int64_t item = queue.back();
    queue.pop_back();
    if (item > 0) {
      Var v = static_cast<Var>(item);
      if (vgone[v] || vdeg[v] != 1) continue;
      vgone[v] = true;
      for (EdgeId e : g.edges_of(v)) {
        std::size_t j = g.edge_clause(e);
        if (!cgone[j] && --cdeg[j] == 1) queue.push_back(-static_cast<std::int64_t>(j));
      }
    } else {
      std::size_t j = static_cast<std::size_t>(-item);
      if (cgone[j] || cdeg[j] != 1) continue;
      cgone[j] = true;
      for (EdgeId e = g.clause_begin(j); e < g.clause_end(j); ++e) {
        Var v = g.edge_var(e);
        if (!vgone[v] && --vdeg[v] == 1) queue.push_back(v);
      }
    }
  }
  std::vector<Var> out;
  for (Var v = 1; v <= n; ++v)
    if (!vgone[v] && g.degree(v) > 0) out.push_back(v);
  return out;
}

class Dpll {
 public:
  explicit Dpll(const Formula& f) : f_(f), a_(f.num_vars()) {}

  bool solve() { return search(); }
  const PartialAssignment& assignment() const { return a_; }

 private:
  // 0 unsatisfied-but-open, 1 satisfied, -1 falsified; sets unit to the sole open literal.
  int status(const Clause& c, Literal& unit, std::size_t& open) const {
    open = 0;
    for (Literal l : c) {
      if (a_.satisfies(l)) return 1;
      if (!a_.assigned(l.var())) {
        unit = l;
        ++open;
      }
    }
    return open == 0 ? -1 : 0;
  }

  bool search() {
    std::vector<Var> trail;
    bool conflict = false;
    for (bool progress = true; progress && !conflict;) {
      progress = false;
      for (const auto& c : f_.clauses()) {
        Literal unit;
        std::size_t open = 0;
        int st = status(c, unit, open);
        if (st == -1) {
          conflict = true;
          break;
        }
        if (st == 0 && open == 1) {
          a_.set(unit.var(), unit.positive());
          trail.push_back(unit.var());
          progress = true;
        }
      }
    }
    if (!conflict) {
      const Clause* pick = nullptr;
      for (const auto& c : f_.clauses()) {
        Literal unit;
        std::size_t open = 0;
        if (status(c, unit, open) == 0) {
          pick = &c;
          break;
        }
      }
      if (pick == nullptr) return true;
      Var v = 0;
      for (Literal l : *pick)
        if (!a_.assigned(l.var())) {
          v = l.var();
          break;
        }
      for (bool value : {true, false}) {
        a_.set(v, value);
        if (search()) return true;
        a_.set(v, Value::Unassigned);
      }
    }
    for (Var v : trail) a_.set(v, Value::Unassigned);
    return false;
  }

  const Formula& f_;
  PartialAssignment a_;
};

inline void fill_occurring(const FactorGraph& g, PartialAssignment& a) {
  for (Var v = 1; v <= g.num_vars(); ++v)
    if (g.degree(v) > 0 && !a.assigned(v)) a.set(v, true);
}

}  // namespace detail

/// Solves a formula whose factor graph is a forest. Throws std::invalid_argument otherwise.
inline SolveOutcome solve_tree(const Formula& f) {
  FactorGraph g(f);
  if (!detail::is_forest(g)) throw std::invalid_argument("solve_tree: factor graph is not a tree");
  SolveOutcome out = detail::eliminate_leaves(f, g);
  if (out.status == SolveStatus::Sat) {
    Assignment total(f.num_vars());
    for (Var v = 1; v <= f.num_vars(); ++v) total.set(v, out.assignment[v] == Value::True);
    if (!eval(f, total)) throw std::logic_error("solve_tree produced a non-satisfying assignment");
  } else {
    out.assignment = PartialAssignment(f.num_vars());
  }
  return out;
}

/// Solves a connected formula with exactly one cycle by branching on the
/// lowest-index cycle variable. Throws std::invalid_argument otherwise.
inline SolveOutcome solve_unicyclic(const Formula& f) {
  FactorGraph g(f);
  auto comps = components(g);
  if (comps.size() != 1 || comps.front().kind != ComponentClass::Unicyclic)
    throw std::invalid_argument("solve_unicyclic: formula is not a single unicyclic component");
  auto cycle = detail::cycle_variables(f, g);
  if (cycle.empty()) throw std::logic_error("unicyclic component without a cycle");
  const Var x = cycle.front();

  for (bool value : {true, false}) {
    PartialAssignment psi(f.num_vars());
    psi.set(x, value);
    SimplifyResult s = simplify(f, psi);
    if (s.has_empty_clause) continue;
    SolveOutcome branch = solve_tree(s.formula);
    if (branch.status != SolveStatus::Sat) continue;
    branch.assignment.set(x, value);
    detail::fill_occurring(g, branch.assignment);
    return branch;
  }
  return {SolveStatus::Unsat, PartialAssignment(f.num_vars()), {}};
}

/// Exhaustive search for a small component of any shape.
inline SolveOutcome solve_small(const Formula& f) {
  detail::Dpll dpll(f);
  if (!dpll.solve()) return {SolveStatus::Unsat, PartialAssignment(f.num_vars()), {}};
  SolveOutcome out{SolveStatus::Sat, dpll.assignment(), {}};
  detail::fill_occurring(FactorGraph(f), out.assignment);
  return out;
}

inline SolveOutcome solve_residual(const Formula& f) {
  FactorGraph g(f);
  SolveOutcome out{SolveStatus::Sat, PartialAssignment(f.num_vars()), {}};
  bool gave_up = false, unsat = false;
  std::vector<Var> local(f.num_vars() + 1, 0);
  for (const auto& comp : components(g)) {
    // Renumber onto 1..k so per-component work is proportional to its size.
    for (std::size_t i = 0; i < comp.variables.size(); ++i) local[comp.variables[i]] = static_cast<Var>(i + 1);
    Formula sub(comp.variables.size());
    sub.reserve(comp.clauses.size());
    for (std::size_t j : comp.clauses) {
      std::array<Literal, kMaxClauseWidth> buf;
      const Clause& c = f[j];
      for (std::size_t k = 0; k < c.width(); ++k) buf[k] = Literal(local[c[k].var()], c[k].positive());
      sub.add(Clause(std::span<const Literal>(buf.data(), c.width())));
    }
    ComponentLog entry{comp.variables.size(), comp.clauses.size(), comp.kind, SolveStatus::Sat};
    SolveOutcome part;
    switch (comp.kind) {
      case ComponentClass::Tree: part = solve_tree(sub); break;
      case ComponentClass::Unicyclic: part = solve_unicyclic(sub); break;
      case ComponentClass::Multicyclic:
        if (comp.variables.size() <= kMulticyclicBruteForceLimit) {
          part = solve_small(sub);
        } else {
          part.status = SolveStatus::GaveUp;
        }
        break;
    }
    entry.status = part.status;
    out.log.push_back(entry);
    if (part.status == SolveStatus::Unsat) unsat = true;
    if (part.status == SolveStatus::GaveUp) gave_up = true;
    if (part.status == SolveStatus::Sat)
      for (std::size_t i = 0; i < comp.variables.size(); ++i)
        out.assignment.set(comp.variables[i], part.assignment[static_cast<Var>(i + 1)]);
  }
  if (unsat || gave_up) {
    out.status = unsat ? SolveStatus::Unsat : SolveStatus::GaveUp;
    out.assignment = PartialAssignment(f.num_vars());
  }
  return out;
}

/// A simplification that produced an empty clause is UNSAT without further work.
inline SolveOutcome solve_residual(const SimplifyResult& s) {
  if (s.has_empty_clause) return {SolveStatus::Unsat, PartialAssignment(s.formula.num_vars()), {}};
  return solve_residual(s.formula);
}

struct ComponentCensus {
  std::size_t trees = 0;
  std::size_t unicyclic = 0;
  std::size_t multicyclic = 0;
  std::size_t largest = 0;  // variables in the largest component

  void add(const ComponentLog& c) {
    switch (c.kind) {
      case ComponentClass::Tree: ++trees; break;
      case ComponentClass::Unicyclic: ++unicyclic; break;
      case ComponentClass::Multicyclic: ++multicyclic; break;
    }
    largest = std::max(largest, c.variables);
  }
  std::size_t total() const { return trees + unicyclic + multicyclic; }
};

enum class PipelineFailure { None, NotConverged, EmptyClause, ResidualUnsat, ResidualGaveUp, VerificationFailed };

inline std::string_view to_string(PipelineFailure f) {
  switch (f) {
    case PipelineFailure::None: return "none";
    case PipelineFailure::NotConverged: return "wp_not_converged";
    case PipelineFailure::EmptyClause: return "empty_clause";
    case PipelineFailure::ResidualUnsat: return "residual_unsat";
    case PipelineFailure::ResidualGaveUp: return "residual_gave_up";
    case PipelineFailure::VerificationFailed: return "verification_failed";
  }
  return "?";
}

struct StageTimes {
  double wp_seconds = 0;
  double simplify_seconds = 0;
  double residual_seconds = 0;
};

struct PipelineReport {
  bool success = false;
  PipelineFailure failure = PipelineFailure::None;
  bool converged = false;
  std::size_t passes = 0;
  double assigned_fraction = 0;
  std::size_t residual_clauses = 0;
  ComponentCensus census;
  StageTimes times;
};

struct PipelineResult {
  PipelineReport report;
  WPResult wp;
  /// Satisfies the input formula when report.success.
  Assignment assignment;
};

/// Runs WP, simplifies by its assignment, solves the residual formula, merges
/// and re-checks the merged assignment against the original formula.
inline PipelineResult solve_planted(const Formula& f, const WPConfig& config) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };

  PipelineResult r;
  auto t0 = clock::now();
  r.wp = run(f, config);
  auto t1 = clock::now();
  r.report.times.wp_seconds = seconds(t0, t1);
  r.report.converged = r.wp.converged;
  r.report.passes = r.wp.passes_used;
  r.report.assigned_fraction = r.wp.assigned_fraction();
  r.assignment = Assignment(f.num_vars());
  if (!r.wp.converged) {
    r.report.failure = PipelineFailure::NotConverged;
    return r;
  }

  SimplifyResult s = simplify(f, r.wp.assignment);
  auto t2 = clock::now();
  r.report.times.simplify_seconds = seconds(t1, t2);
  r.report.residual_clauses = s.formula.num_clauses();
  if (s.has_empty_clause) {
    r.report.failure = PipelineFailure::EmptyClause;
    return r;
  }

  SolveOutcome residual = solve_residual(s);
  r.report.times.residual_seconds = seconds(t2, clock::now());
  for (const auto& c : residual.log) r.report.census.add(c);
  if (residual.status != SolveStatus::Sat) {
    r.report.failure =
        residual.status == SolveStatus::Unsat ? PipelineFailure::ResidualUnsat : PipelineFailure::ResidualGaveUp;
    return r;
  }

  for (Var v = 1; v <= f.num_vars(); ++v) {
    Value psi = r.wp.assignment[v];
    Value res = residual.assignment[v];
    bool value = psi != Value::Unassigned ? psi == Value::True : res != Value::False;
    r.assignment.set(v, value);
  }
  if (!eval(f, r.assignment)) {
    r.report.failure = PipelineFailure::VerificationFailed;
    return r;
  }
  r.report.success = true;
  return r;
}

}  // namespace wpsat
