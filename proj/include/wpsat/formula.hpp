#pragma once

// CNF formulas over variables 1..n with clauses of width 1 to 3, total and
// partial assignments, evaluation, simplification and restriction.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wpsat {

/// Variables are 1-based. Arrays indexed by variable have n + 1 slots and
/// slot 0 is unused.
using Var = std::uint32_t;

class Literal {
 public:
  constexpr Literal() = default;
  constexpr Literal(Var var, bool positive)
      : code_(positive ? static_cast<std::int32_t>(var)
                       : -static_cast<std::int32_t>(var)) {}

  /// DIMACS-style signed integer: +v or -v.
  static constexpr Literal from_dimacs(std::int32_t code) {
    Literal l;
    l.code_ = code;
    return l;
  }

  constexpr Var var() const { return static_cast<Var>(code_ < 0 ? -code_ : code_); }
  constexpr bool positive() const { return code_ > 0; }
  constexpr Literal negated() const { return from_dimacs(-code_); }
  constexpr std::int32_t dimacs() const { return code_; }

  /// True iff the literal evaluates to TRUE when its variable takes `value`.
  constexpr bool satisfied_by(bool value) const { return value == positive(); }

  friend constexpr bool operator==(Literal, Literal) = default;

 private:
  std::int32_t code_ = 0;
};

inline constexpr std::size_t kMaxClauseWidth = 3;

class Clause {
 public:
  Clause() = default;

  Clause(std::initializer_list<Literal> lits) : Clause(std::span<const Literal>(lits.begin(), lits.size())) {}

  explicit Clause(std::span<const Literal> lits) {
    if (lits.empty() || lits.size() > kMaxClauseWidth)
      throw std::invalid_argument("clause width must be between 1 and 3, got " +
                                  std::to_string(lits.size()));
    for (std::size_t i = 0; i < lits.size(); ++i) {
      if (lits[i].var() == 0) throw std::invalid_argument("variable index 0 is not valid");
      for (std::size_t j = 0; j < i; ++j)
        if (lits[i].var() == lits[j].var())
          throw std::invalid_argument("duplicate variable " + std::to_string(lits[i].var()) +
                                      " in clause");
      lits_[i] = lits[i];
    }
    size_ = static_cast<std::uint8_t>(lits.size());
  }

  std::size_t width() const { return size_; }
  std::span<const Literal> literals() const { return {lits_.data(), size_}; }
  Literal operator[](std::size_t i) const { return lits_[i]; }
  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.begin() + size_; }

  bool contains(Var v) const {
    return std::any_of(begin(), end(), [v](Literal l) { return l.var() == v; });
  }

  friend bool operator==(const Clause& a, const Clause& b) {
    return a.size_ == b.size_ && std::equal(a.begin(), a.end(), b.begin());
  }

 private:
  std::array<Literal, kMaxClauseWidth> lits_{};
  std::uint8_t size_ = 0;
};

class Formula {
 public:
  Formula() = default;
  explicit Formula(std::size_t num_vars) : n_(num_vars) {}
  Formula(std::size_t num_vars, std::vector<Clause> clauses) : n_(num_vars) {
    clauses_.reserve(clauses.size());
    for (auto& c : clauses) add(c);
  }

  void add(const Clause& c) {
    for (Literal l : c)
      if (l.var() > n_)
        throw std::out_of_range("literal " + std::to_string(l.dimacs()) +
                                " out of range for " + std::to_string(n_) + " variables");
    clauses_.push_back(c);
  }
  void reserve(std::size_t m) { clauses_.reserve(m); }

  std::size_t num_vars() const { return n_; }
  std::size_t num_clauses() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  const std::vector<Clause>& clauses() const { return clauses_; }
  const Clause& operator[](std::size_t j) const { return clauses_[j]; }

  std::size_t num_literals() const {
    std::size_t total = 0;
    for (const auto& c : clauses_) total += c.width();
    return total;
  }

  std::size_t min_width() const {
    std::size_t w = kMaxClauseWidth;
    for (const auto& c : clauses_) w = std::min(w, c.width());
    return clauses_.empty() ? 0 : w;
  }

  friend bool operator==(const Formula&, const Formula&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Clause> clauses_;
};

class Assignment {
 public:
  Assignment() = default;
  explicit Assignment(std::size_t num_vars, bool fill = false) : values_(num_vars + 1, fill) {}
  explicit Assignment(const std::vector<bool>& zero_based) : values_(zero_based.size() + 1, false) {
    for (std::size_t i = 0; i < zero_based.size(); ++i) values_[i + 1] = zero_based[i];
  }

  std::size_t num_vars() const { return values_.empty() ? 0 : values_.size() - 1; }
  bool operator[](Var v) const { return values_[v]; }
  void set(Var v, bool value) { values_[v] = value; }
  bool satisfies(Literal l) const { return l.satisfied_by(values_[l.var()]); }

  /// Values of variables 1..n in order.
  std::vector<bool> to_vector() const { return {values_.begin() + (values_.empty() ? 0 : 1), values_.end()}; }

  friend bool operator==(const Assignment&, const Assignment&) = default;

 private:
  std::vector<bool> values_;
};

enum class Value : std::int8_t { False = 0, True = 1, Unassigned = 2 };

inline Value to_value(bool b) { return b ? Value::True : Value::False; }

class PartialAssignment {
 public:
  PartialAssignment() = default;
  explicit PartialAssignment(std::size_t num_vars) : values_(num_vars + 1, Value::Unassigned) {}

  std::size_t num_vars() const { return values_.empty() ? 0 : values_.size() - 1; }
  Value operator[](Var v) const { return values_[v]; }
  void set(Var v, Value value) { values_[v] = value; }
  void set(Var v, bool value) { values_[v] = to_value(value); }
  bool assigned(Var v) const { return values_[v] != Value::Unassigned; }

  /// True iff the literal's variable is assigned and the literal evaluates to TRUE.
  bool satisfies(Literal l) const {
    Value v = values_[l.var()];
    return v != Value::Unassigned && l.satisfied_by(v == Value::True);
  }
  bool falsifies(Literal l) const {
    Value v = values_[l.var()];
    return v != Value::Unassigned && !l.satisfied_by(v == Value::True);
  }

  std::size_t num_assigned() const {
    return static_cast<std::size_t>(std::count_if(values_.begin() + (values_.empty() ? 0 : 1), values_.end(),
                                                  [](Value v) { return v != Value::Unassigned; }));
  }

  /// True iff every assigned variable agrees with `a`.
  bool consistent_with(const Assignment& a) const {
    for (Var v = 1; v <= num_vars(); ++v)
      if (assigned(v) && (values_[v] == Value::True) != a[v]) return false;
    return true;
  }

  friend bool operator==(const PartialAssignment&, const PartialAssignment&) = default;

 private:
  std::vector<Value> values_;
};

/// Membership set over variables 1..n.
class VarSet {
 public:
  VarSet() = default;
  explicit VarSet(std::size_t num_vars, bool full = false) : in_(num_vars + 1, full) {
    if (!in_.empty()) in_[0] = false;
    size_ = full ? num_vars : 0;
  }
  VarSet(std::size_t num_vars, std::span<const Var> members) : VarSet(num_vars) {
    for (Var v : members) insert(v);
  }

  std::size_t universe() const { return in_.empty() ? 0 : in_.size() - 1; }
  std::size_t size() const { return size_; }
  bool contains(Var v) const { return v < in_.size() && in_[v]; }

  void insert(Var v) {
    if (v == 0 || v >= in_.size()) throw std::out_of_range("variable " + std::to_string(v) + " out of range");
    if (!in_[v]) {
      in_[v] = true;
      ++size_;
    }
  }
  void erase(Var v) {
    if (contains(v)) {
      in_[v] = false;
      --size_;
    }
  }

  std::vector<Var> members() const {
    std::vector<Var> out;
    out.reserve(size_);
    for (Var v = 1; v < in_.size(); ++v)
      if (in_[v]) out.push_back(v);
    return out;
  }

  VarSet complement() const {
    VarSet out(universe());
    for (Var v = 1; v < in_.size(); ++v)
      if (!in_[v]) out.insert(v);
    return out;
  }

  friend bool operator==(const VarSet&, const VarSet&) = default;

 private:
  std::vector<bool> in_;
  std::size_t size_ = 0;
};

inline bool eval(const Clause& c, const Assignment& a) {
  return std::any_of(c.begin(), c.end(), [&](Literal l) { return a.satisfies(l); });
}

inline bool eval(const Formula& f, const Assignment& a) {
  if (a.num_vars() != f.num_vars())
    throw std::invalid_argument("assignment covers " + std::to_string(a.num_vars()) +
                                " variables, formula has " + std::to_string(f.num_vars()));
  return std::all_of(f.clauses().begin(), f.clauses().end(),
                     [&](const Clause& c) { return eval(c, a); });
}

struct SimplifyResult {
  /// Residual clauses, still over the original variable indices and the same n.
  Formula formula;
  bool has_empty_clause = false;
  /// Indices (into the input formula) of clauses all of whose literals were falsified.
  std::vector<std::size_t> empty_clauses;
  /// Compact numbering of the variables left unassigned: new index i + 1 is
  /// residual_vars[i]. old_to_new[v] is 0 for assigned variables.
  std::vector<Var> residual_vars;
  std::vector<Var> old_to_new;

  /// The residual formula renumbered onto 1..#residual_vars.
  Formula compacted() const {
    Formula out(residual_vars.size());
    out.reserve(formula.num_clauses());
    std::array<Literal, kMaxClauseWidth> buf;
    for (const auto& c : formula.clauses()) {
      for (std::size_t k = 0; k < c.width(); ++k)
        buf[k] = Literal(old_to_new[c[k].var()], c[k].positive());
      out.add(Clause(std::span<const Literal>(buf.data(), c.width())));
    }
    return out;
  }
};

/// Substitutes every assigned variable: satisfied clauses are dropped, false
/// literals are deleted, and clauses left with no literal raise the flag.
inline SimplifyResult simplify(const Formula& f, const PartialAssignment& psi) {
  if (psi.num_vars() != f.num_vars())
    throw std::invalid_argument("partial assignment size does not match formula");
  SimplifyResult r;
  r.formula = Formula(f.num_vars());
  r.old_to_new.assign(f.num_vars() + 1, 0);
  for (Var v = 1; v <= f.num_vars(); ++v) {
    if (!psi.assigned(v)) {
      r.residual_vars.push_back(v);
      r.old_to_new[v] = static_cast<Var>(r.residual_vars.size());
    }
  }
  std::array<Literal, kMaxClauseWidth> buf;
  for (std::size_t j = 0; j < f.num_clauses(); ++j) {
    const Clause& c = f[j];
    std::size_t kept = 0;
    bool satisfied = false;
    for (Literal l : c) {
      if (psi.satisfies(l)) {
        satisfied = true;
        break;
      }
      if (!psi.assigned(l.var())) buf[kept++] = l;
    }
    if (satisfied) continue;
    if (kept == 0) {
      r.has_empty_clause = true;
      r.empty_clauses.push_back(j);
      continue;
    }
    r.formula.add(Clause(std::span<const Literal>(buf.data(), kept)));
  }
  return r;
}

/// The clauses all of whose variables lie in `vars`.
inline Formula restrict(const Formula& f, const VarSet& vars) {
  Formula out(f.num_vars());
  for (const auto& c : f.clauses())
    if (std::all_of(c.begin(), c.end(), [&](Literal l) { return vars.contains(l.var()); })) out.add(c);
  return out;
}

}  // namespace wpsat
