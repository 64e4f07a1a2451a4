#pragma once

// The copying process on a ring {0,1}^L that governs a free cycle of 2-clauses
// under sequential WP: each round draws a uniform permutation sigma of the
// positions and, for j = 1..L in turn, position sigma(j-1) takes the current
// value of its right neighbour (sigma(j-1) + 1 mod L). The all-0 and all-1
// states are absorbing.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "wpsat/formula.hpp"
#include "wpsat/rng.hpp"
#include "wpsat/wp_engine.hpp"

namespace wpsat::cycle {

using RingState = std::vector<std::uint8_t>;
using Permutation = std::vector<std::uint32_t>;

inline void check_ring(const RingState& s) {
  if (s.size() < 2) throw std::invalid_argument("ring length must be at least 2");
}

inline bool is_absorbed(const RingState& s) {
  return std::all_of(s.begin(), s.end(), [&](std::uint8_t b) { return b == s.front(); });
}

/// One round with an explicit permutation.
template <typename Cell>
void copy_round(std::vector<Cell>& cells, const Permutation& sigma) {
  const std::size_t len = cells.size();
  for (std::uint32_t p : sigma) cells[p] = cells[(p + 1) % len];
}

inline RingState step(RingState s, const Permutation& sigma) {
  check_ring(s);
  if (sigma.size() != s.size()) throw std::invalid_argument("permutation length must equal ring length");
  copy_round(s, sigma);
  return s;
}

inline Permutation random_permutation(std::size_t len, Rng& rng) {
  Permutation p(len);
  std::iota(p.begin(), p.end(), 0U);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

inline RingState step(RingState s, Rng& rng) {
  check_ring(s);
  copy_round(s, random_permutation(s.size(), rng));
  return s;
}

inline RingState random_state(std::size_t len, Rng& rng) {
  RingState s(len);
  for (auto& b : s) b = static_cast<std::uint8_t>(rng() & 1U);
  return s;
}

/// Rounds until absorption; nullopt if still mixed after max_steps rounds.
inline std::optional<std::size_t> run_until_absorbed(RingState s, std::size_t max_steps, Rng& rng) {
  check_ring(s);
  if (max_steps == 0) throw std::invalid_argument("max_steps must be positive");
  Permutation sigma(s.size());
  std::iota(sigma.begin(), sigma.end(), 0U);
  for (std::size_t t = 0; t <= max_steps; ++t) {
    if (is_absorbed(s)) return t;
    if (t == max_steps) break;
    std::shuffle(sigma.begin(), sigma.end(), rng);
    copy_round(s, sigma);
  }
  return std::nullopt;
}

/// Colours every maximal run of equal values (cyclically) with its own label.
inline std::vector<std::uint32_t> colour_runs(const RingState& s) {
  const std::size_t len = s.size();
  std::vector<std::uint32_t> colour(len, 0);
  if (is_absorbed(s)) return colour;
  std::size_t start = 0;
  while (s[start] == s[(start + len - 1) % len]) ++start;  // first position beginning a run
  std::uint32_t label = 0;
  for (std::size_t k = 0; k < len; ++k) {
    std::size_t p = (start + k) % len;
    if (k > 0 && s[p] != s[(p + len - 1) % len]) ++label;
    colour[p] = label;
  }
  return colour;
}

/// Length series X_0, X_1, ... of the coloured interval initially containing
/// `position`, until it dies (0) or fills the ring (L), or max_steps rounds.
/// Copying moves colours along with values, so the tracked colour always
/// occupies one contiguous interval.
inline std::vector<std::size_t> interval_length_series(const RingState& start, std::size_t position, Rng& rng,
                                                       std::size_t max_steps) {
  check_ring(start);
  const std::size_t len = start.size();
  auto colour = colour_runs(start);
  const std::uint32_t tracked = colour.at(position);
  auto length = [&] { return static_cast<std::size_t>(std::count(colour.begin(), colour.end(), tracked)); };
  std::vector<std::size_t> series{length()};
  Permutation sigma(len);
  std::iota(sigma.begin(), sigma.end(), 0U);
  for (std::size_t t = 0; t < max_steps && series.back() != 0 && series.back() != len; ++t) {
    std::shuffle(sigma.begin(), sigma.end(), rng);
    copy_round(colour, sigma);
    series.push_back(length());
  }
  return series;
}

struct DriftBin {
  std::size_t length = 0;  // X_t = k
  std::size_t visits = 0;
  double mean = 0;         // mean of X_{t+1} - X_t
  double stddev = 0;
  double second_moment = 0;  // E[(X_{t+1} - X_t)^2]
  bool tested = false;
  bool passed = true;
};

struct MartingaleCheck {
  std::size_t ring_length = 0;
  std::size_t trials = 0;
  std::size_t min_visits = 0;
  std::vector<DriftBin> bins;  // k = 1..L-1
  bool passed = true;
};

/// Empirical conditional drift of the tracked interval length: for each k with
/// at least min_visits visits, |mean| must not exceed 3 standard errors.
inline MartingaleCheck martingale_check(std::size_t len, std::size_t trials, Rng& rng, std::size_t min_visits = 1000,
                                        std::size_t max_steps = 100000) {
  if (len < 2) throw std::invalid_argument("ring length must be at least 2");
  std::vector<double> sum(len + 1, 0), sum_sq(len + 1, 0);
  std::vector<std::size_t> visits(len + 1, 0);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RingState s = random_state(len, rng);
    if (is_absorbed(s)) continue;
    std::size_t pos = std::uniform_int_distribution<std::size_t>(0, len - 1)(rng);
    auto series = interval_length_series(s, pos, rng, max_steps);
    for (std::size_t t = 0; t + 1 < series.size(); ++t) {
      double delta = static_cast<double>(series[t + 1]) - static_cast<double>(series[t]);
      std::size_t k = series[t];
      ++visits[k];
      sum[k] += delta;
      sum_sq[k] += delta * delta;
    }
  }
  MartingaleCheck out{len, trials, min_visits, {}, true};
  for (std::size_t k = 1; k < len; ++k) {
    DriftBin bin;
    bin.length = k;
    bin.visits = visits[k];
    if (visits[k] > 0) {
      double nv = static_cast<double>(visits[k]);
      bin.mean = sum[k] / nv;
      bin.second_moment = sum_sq[k] / nv;
      double var = visits[k] > 1 ? (sum_sq[k] - nv * bin.mean * bin.mean) / (nv - 1) : 0.0;
      bin.stddev = std::sqrt(std::max(0.0, var));
    }
    if (visits[k] >= min_visits) {
      bin.tested = true;
      bin.passed = std::abs(bin.mean) <= 3.0 * bin.stddev / std::sqrt(static_cast<double>(visits[k]));
      out.passed = out.passed && bin.passed;
    }
    out.bins.push_back(bin);
  }
  return out;
}

/// How far the left endpoint of the interval [first, first + length) of ones
/// (in a ring that is otherwise zero) moved left after one round: the number
/// of former zeros directly left of `first` that now hold a one. A filled ring
/// counts as L - length.
inline std::size_t left_advance(const RingState& after, std::size_t first, std::size_t length) {
  const std::size_t len = after.size();
  if (std::all_of(after.begin(), after.end(), [](std::uint8_t b) { return b == 1; })) return len - length;
  std::size_t g = 0;
  while (g < len - length && after[(first + len - g - 1) % len] == 1) ++g;
  return g;
}

/// 1/j! - 1/(m+j)!: probability that an interval of length m advances its left
/// endpoint by at least j in one round (1 <= j <= L - m).
inline double shift_law(std::size_t j, std::size_t m) {
  return 1.0 / std::tgamma(static_cast<double>(j) + 1.0) - 1.0 / std::tgamma(static_cast<double>(m + j) + 1.0);
}

/// Bounds on the absorption time of a ring of length L.
inline double expected_time_bound(std::size_t len) { return 2.0 * static_cast<double>(len * len); }
inline std::size_t tail_threshold(std::size_t len, unsigned a) { return 4 * a * len * len; }
inline double tail_bound(std::size_t len, unsigned a) { return static_cast<double>(len) * std::pow(2.0, -static_cast<double>(a)); }

struct TailEntry {
  unsigned a = 0;
  std::size_t threshold = 0;   // 4 a L^2
  double worst_start = 0;      // max over starts of P[T >= threshold]
  double uniform_start = 0;    // start drawn uniformly from {0,1}^L
  double bound = 0;            // L 2^{-a}
};

struct ExactAbsorption {
  std::size_t ring_length = 0;
  /// True when transition rows were estimated by sampling permutations (L > 6).
  bool approximate = false;
  /// E[T | start = s] for s = 0 .. 2^L - 1 (bit p of s is position p).
  std::vector<double> expected_time;
  /// Exact rational values, when not approximate.
  std::vector<boost::multiprecision::cpp_rational> expected_time_exact;
  double max_expected_time = 0;
  double uniform_expected_time = 0;
  std::vector<TailEntry> tails;
};

inline constexpr std::size_t kMaxExactRing = 10;
inline constexpr std::size_t kMaxEnumeratedRing = 6;

namespace detail {

inline RingState decode(std::uint32_t code, std::size_t len) {
  RingState s(len);
  for (std::size_t p = 0; p < len; ++p) s[p] = (code >> p) & 1U;
  return s;
}
inline std::uint32_t encode(const RingState& s) {
  std::uint32_t code = 0;
  for (std::size_t p = 0; p < s.size(); ++p) code |= static_cast<std::uint32_t>(s[p]) << p;
  return code;
}

struct Transition {
  std::uint32_t to;
  std::uint64_t count;
};

template <typename Scalar>
std::vector<Scalar> solve_linear(std::vector<std::vector<Scalar>> a, std::vector<Scalar> b) {
  using std::abs;
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col; r < n; ++r)
      if (abs(a[r][col]) > abs(a[pivot][col])) pivot = r;
    if (a[pivot][col] == Scalar(0)) throw std::runtime_error("singular absorption system");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == Scalar(0)) continue;
      Scalar factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) b[r] /= a[r][r];
  return b;
}

}  // namespace detail

/// Builds the full 2^L-state chain and solves it. For L <= 6 every one of the
/// L! permutations is enumerated and E[T] is exact (rational); for 7 <= L <= 10
/// each row is estimated from `samples_per_row` sampled permutations.
inline ExactAbsorption exact_absorption(std::size_t len, std::vector<unsigned> tail_a = {1, 2, 3},
                                        std::uint64_t samples_per_row = 1'000'000, std::uint64_t seed = 0) {
  if (len < 2) throw std::invalid_argument("ring length must be at least 2");
  if (len > kMaxExactRing) throw std::invalid_argument("exact absorption supports L <= 10, got " + std::to_string(len));
  using boost::multiprecision::cpp_rational;

  const std::uint32_t states = 1U << len;
  const std::uint32_t all_ones = states - 1;
  ExactAbsorption out;
  out.ring_length = len;
  out.approximate = len > kMaxEnumeratedRing;

  std::vector<std::vector<detail::Transition>> rows(states);
  std::uint64_t row_total = 0;
  Rng rng(seed);
  for (std::uint32_t code = 1; code < all_ones; ++code) {
    std::vector<std::uint64_t> counts(states, 0);
    RingState start = detail::decode(code, len);
    Permutation sigma(len);
    std::iota(sigma.begin(), sigma.end(), 0U);
    if (!out.approximate) {
      row_total = 0;
      do {
        RingState s = start;
        copy_round(s, sigma);
        ++counts[detail::encode(s)];
        ++row_total;
      } while (std::next_permutation(sigma.begin(), sigma.end()));
    } else {
      row_total = samples_per_row;
      for (std::uint64_t k = 0; k < samples_per_row; ++k) {
        std::shuffle(sigma.begin(), sigma.end(), rng);
        RingState s = start;
        copy_round(s, sigma);
        ++counts[detail::encode(s)];
      }
    }
    for (std::uint32_t to = 0; to < states; ++to)
      if (counts[to]) rows[code].push_back({to, counts[to]});
  }

  // Transient states are 1 .. 2^L - 2; index them 0 .. states - 3.
  const std::size_t t = states - 2;
  auto index = [](std::uint32_t code) { return static_cast<std::size_t>(code - 1); };
  auto is_transient = [&](std::uint32_t code) { return code != 0 && code != all_ones; };

  out.expected_time.assign(states, 0.0);
  if (!out.approximate) {
    std::vector<std::vector<cpp_rational>> a(t, std::vector<cpp_rational>(t, cpp_rational(0)));
    std::vector<cpp_rational> b(t, cpp_rational(1));
    for (std::uint32_t code = 1; code < all_ones; ++code) {
      a[index(code)][index(code)] += 1;
      for (const auto& tr : rows[code])
        if (is_transient(tr.to)) a[index(code)][index(tr.to)] -= cpp_rational(tr.count, row_total);
    }
    auto x = detail::solve_linear(std::move(a), std::move(b));
    out.expected_time_exact.assign(states, cpp_rational(0));
    for (std::uint32_t code = 1; code < all_ones; ++code) {
      out.expected_time_exact[code] = x[index(code)];
      out.expected_time[code] = static_cast<double>(x[index(code)]);
    }
  } else {
    std::vector<std::vector<double>> a(t, std::vector<double>(t, 0.0));
    std::vector<double> b(t, 1.0);
    for (std::uint32_t code = 1; code < all_ones; ++code) {
      a[index(code)][index(code)] += 1.0;
      for (const auto& tr : rows[code])
        if (is_transient(tr.to))
          a[index(code)][index(tr.to)] -= static_cast<double>(tr.count) / static_cast<double>(row_total);
    }
    auto x = detail::solve_linear(std::move(a), std::move(b));
    for (std::uint32_t code = 1; code < all_ones; ++code) out.expected_time[code] = x[index(code)];
  }
  out.max_expected_time = *std::max_element(out.expected_time.begin(), out.expected_time.end());
  out.uniform_expected_time =
      std::accumulate(out.expected_time.begin(), out.expected_time.end(), 0.0) / static_cast<double>(states);

  // survive[s] = P[not absorbed after k rounds | start s]; P[T >= k + 1] = survive_k.
  std::sort(tail_a.begin(), tail_a.end());
  std::vector<long double> survive(states, 0.0L), next(states, 0.0L);
  for (std::uint32_t code = 1; code < all_ones; ++code) survive[code] = 1.0L;
  std::size_t rounds = 0;  // survive currently holds k = rounds
  for (unsigned a : tail_a) {
    std::size_t threshold = tail_threshold(len, a);
    while (rounds + 1 < threshold) {
      for (std::uint32_t code = 1; code < all_ones; ++code) {
        long double acc = 0;
        for (const auto& tr : rows[code])
          acc += static_cast<long double>(tr.count) * survive[tr.to];
        next[code] = acc / static_cast<long double>(row_total);
      }
      std::swap(survive, next);
      ++rounds;
    }
    TailEntry entry{a, threshold, 0.0, 0.0, tail_bound(len, a)};
    long double total = 0;
    for (std::uint32_t code = 0; code < states; ++code) {
      entry.worst_start = std::max(entry.worst_start, static_cast<double>(survive[code]));
      total += survive[code];
    }
    entry.uniform_start = static_cast<double>(total / states);
    out.tails.push_back(entry);
  }
  return out;
}

struct AbsorptionStats {
  std::size_t ring_length = 0;
  std::vector<std::size_t> samples;  // absorption times of absorbed trials
  std::size_t timeouts = 0;
  std::size_t absorbed_at_ones = 0;
  double mean = 0;
  double stddev = 0;

  double quantile(double q) const {
    if (samples.empty()) return 0;
    std::vector<std::size_t> s = samples;
    std::size_t k = static_cast<std::size_t>(q * static_cast<double>(s.size() - 1));
    std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
    return static_cast<double>(s[k]);
  }
  double fraction_at_least(std::size_t threshold) const {
    if (samples.empty() && timeouts == 0) return 0;
    std::size_t c = timeouts;
    for (auto t : samples) c += t >= threshold;
    return static_cast<double>(c) / static_cast<double>(samples.size() + timeouts);
  }
};

/// Absorption times from uniformly random starts.
inline AbsorptionStats simulate(std::size_t len, std::size_t trials, Rng& rng, std::size_t max_steps = 1'000'000) {
  if (len < 2) throw std::invalid_argument("ring length must be at least 2");
  AbsorptionStats st;
  st.ring_length = len;
  st.samples.reserve(trials);
  Permutation sigma(len);
  std::iota(sigma.begin(), sigma.end(), 0U);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RingState s = random_state(len, rng);
    std::size_t t = 0;
    while (!is_absorbed(s) && t < max_steps) {
      std::shuffle(sigma.begin(), sigma.end(), rng);
      copy_round(s, sigma);
      ++t;
    }
    if (!is_absorbed(s)) {
      ++st.timeouts;
      continue;
    }
    st.samples.push_back(t);
    st.absorbed_at_ones += s.front() == 1;
  }
  double sum = 0, sq = 0;
  for (auto t : st.samples) {
    sum += static_cast<double>(t);
    sq += static_cast<double>(t) * static_cast<double>(t);
  }
  if (!st.samples.empty()) {
    double nn = static_cast<double>(st.samples.size());
    st.mean = sum / nn;
    st.stddev = st.samples.size() > 1 ? std::sqrt(std::max(0.0, (sq - nn * st.mean * st.mean) / (nn - 1))) : 0.0;
  }
  return st;
}

/// Free cycle of 2-clauses with no pure literal:
/// (x_1 v -x_2), (x_2 v -x_3), ..., (x_L v -x_1).
inline Formula free_cycle_formula(std::size_t len) {
  if (len < 2) throw std::invalid_argument("cycle length must be at least 2");
  Formula f(len);
  for (Var i = 1; i <= len; ++i) {
    Var next = i == len ? 1 : i + 1;
    f.add(Clause{Literal(i, true), Literal(next, false)});
  }
  return f;
}

/// Under WP on free_cycle_formula(L), the messages C_i -> x_{i+1} form one
/// directed cycle in which each update copies C_{i-1} -> x_i. Returns the
/// number of passes until those L messages agree, or nullopt if WP stopped first.
inline std::optional<std::size_t> wp_cycle_absorption_time(std::size_t len, std::uint64_t seed,
                                                           std::size_t max_passes = 100000) {
  Formula f = free_cycle_formula(len);
  FactorGraph g(f);
  WPResult r = run(g, WPConfig{max_passes, seed, true});
  auto ring = [&](const MessageState& s) {
    RingState out(len);
    for (std::size_t j = 0; j < len; ++j) out[j] = s[g.clause_begin(j) + 1];  // edge to the negative literal
    return out;
  };
  if (is_absorbed(ring(r.history->initial))) return 0;
  for (std::size_t t = 0; t < r.history->states.size(); ++t)
    if (is_absorbed(ring(r.history->states[t]))) return t + 1;
  return std::nullopt;
}

}  // namespace wpsat::cycle
