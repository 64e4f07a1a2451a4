#pragma once

// DIMACS CNF reading and writing.
//
//   c <comment>
//   p cnf <n> <m>
//   <lit> <lit> ... 0
//
// Clauses may span lines. Widths outside 1..3 and repeated variables inside a
// clause are rejected.

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wpsat/formula.hpp"

namespace wpsat {

class DimacsError : public std::runtime_error {
 public:
  DimacsError(std::size_t line, const std::string& what)
      : std::runtime_error("dimacs line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view tok, Int& out) {
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace detail

inline Formula parse_dimacs(std::string_view text) {
  std::size_t line_no = 0;
  bool have_header = false;
  std::size_t n = 0, m = 0;
  Formula f;
  std::vector<Literal> pending;
  std::size_t pending_line = 0;

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    auto toks = detail::split_ws(line);
    if (toks.empty() || toks[0] == "c" || toks[0].front() == 'c') continue;
    if (toks[0] == "%") break;  // SATLIB trailer
    if (toks[0] == "p") {
      if (have_header) throw DimacsError(line_no, "duplicate header");
      if (toks.size() != 4 || toks[1] != "cnf" || !detail::parse_int(toks[2], n) ||
          !detail::parse_int(toks[3], m))
        throw DimacsError(line_no, "malformed header, expected 'p cnf <n> <m>'");
      have_header = true;
      f = Formula(n);
      f.reserve(m);
      continue;
    }
    if (!have_header) throw DimacsError(line_no, "clause before 'p cnf' header");

    for (auto tok : toks) {
      std::int64_t code = 0;
      if (!detail::parse_int(tok, code)) throw DimacsError(line_no, "bad literal '" + std::string(tok) + "'");
      if (code == 0) {
        if (pending.empty()) throw DimacsError(line_no, "empty clause");
        if (pending.size() > kMaxClauseWidth)
          throw DimacsError(pending_line, "clause of width " + std::to_string(pending.size()) +
                                              " exceeds 3");
        for (std::size_t i = 0; i < pending.size(); ++i)
          for (std::size_t j = 0; j < i; ++j)
            if (pending[i].var() == pending[j].var())
              throw DimacsError(pending_line, "duplicate variable " + std::to_string(pending[i].var()) +
                                                  " in clause");
        f.add(Clause(pending));
        pending.clear();
        continue;
      }
      std::int64_t var = code < 0 ? -code : code;
      if (var > static_cast<std::int64_t>(n))
        throw DimacsError(line_no, "literal " + std::string(tok) + " out of range for n=" + std::to_string(n));
      if (pending.empty()) pending_line = line_no;
      pending.push_back(Literal::from_dimacs(static_cast<std::int32_t>(code)));
    }
  }
  if (!have_header) throw DimacsError(line_no, "missing 'p cnf' header");
  if (!pending.empty()) throw DimacsError(pending_line, "clause not terminated by 0");
  if (f.num_clauses() != m)
    throw DimacsError(line_no, "header declares " + std::to_string(m) + " clauses, found " +
                                   std::to_string(f.num_clauses()));
  return f;
}

/// Canonical form: header line, then one clause per line.
inline std::string write_dimacs(const Formula& f) {
  std::string out = "p cnf " + std::to_string(f.num_vars()) + " " + std::to_string(f.num_clauses()) + "\n";
  out.reserve(out.size() + f.num_clauses() * 20);
  for (const auto& c : f.clauses()) {
    for (Literal l : c) {
      out += std::to_string(l.dimacs());
      out += ' ';
    }
    out += "0\n";
  }
  return out;
}

inline Formula read_dimacs_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_dimacs(ss.str());
}

inline void write_dimacs_file(const std::string& path, const Formula& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << write_dimacs(f);
}

}  // namespace wpsat
