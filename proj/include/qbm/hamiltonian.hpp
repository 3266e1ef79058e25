#pragma once

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "qbm/spin_basis.hpp"

namespace qbm {

enum class Axis : char { X = 'x', Y = 'y', Z = 'z' };

inline char to_char(Axis a) { return static_cast<char>(a); }

inline Axis axis_from_char(char c) {
  switch (c) {
    case 'x': return Axis::X;
    case 'y': return Axis::Y;
    case 'z': return Axis::Z;
  }
  throw std::invalid_argument(std::string("invalid axis '") + c + "'");
}

/// One weighted Pauli term: a single-site field w sigma_i^k or a same-axis
/// pair coupling w sigma_i^k sigma_j^k with i < j.
struct PauliTerm {
  enum class Kind { Field, Coupling };

  Kind kind = Kind::Field;
  int i = 0;
  int j = -1;  // unused for fields
  Axis axis = Axis::Z;
  double weight = 0.0;

  static PauliTerm field(int i, Axis axis, double w) {
    PauliTerm t{Kind::Field, i, -1, axis, w};
    return t;
  }
  static PauliTerm coupling(int i, int j, Axis axis, double w) {
    PauliTerm t{Kind::Coupling, i, j, axis, w};
    return t;
  }

  bool is_field() const { return kind == Kind::Field; }

  /// Identity of the term without its weight; duplicates are rejected on this.
  std::tuple<int, int, int, char> key() const {
    return {static_cast<int>(kind), i, j, to_char(axis)};
  }
};

/// Ordered list of Pauli terms on n spins. Term order defines the parameter
/// index r used by moment vectors and the learning rules.
struct HamiltonianSpec {
  int n = 0;
  std::vector<PauliTerm> terms;

  HamiltonianSpec() = default;
  HamiltonianSpec(int n_, std::vector<PauliTerm> terms_)
      : n(n_), terms(std::move(terms_)) {
    validate();
  }

  std::size_t size() const { return terms.size(); }

  void validate(int max_n = 31) const {
    check_spin_count(n, max_n);
    std::set<std::tuple<int, int, int, char>> seen;
    for (const auto& t : terms) {
      detail::check_site(n, t.i);
      if (t.kind == PauliTerm::Kind::Coupling) {
        detail::check_site(n, t.j);
        if (t.i >= t.j)
          throw std::invalid_argument("coupling sites must satisfy i < j");
      } else if (t.j != -1) {
        throw std::invalid_argument("field term with a second site");
      }
      if (!std::isfinite(t.weight))
        throw std::invalid_argument("non-finite term weight");
      if (!seen.insert(t.key()).second)
        throw std::invalid_argument("duplicate term (kind, sites, axis)");
    }
  }

  std::vector<double> weights() const {
    std::vector<double> w(terms.size());
    for (std::size_t r = 0; r < terms.size(); ++r) w[r] = terms[r].weight;
    return w;
  }

  /// Same terms with a different weight vector.
  HamiltonianSpec with_weights(const std::vector<double>& w) const {
    if (w.size() != terms.size())
      throw std::invalid_argument("weight vector length mismatch");
    HamiltonianSpec out = *this;
    for (std::size_t r = 0; r < w.size(); ++r) out.terms[r].weight = w[r];
    return out;
  }

  bool z_only() const {
    for (const auto& t : terms)
      if (t.axis != Axis::Z) return false;
    return true;
  }
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what),
        line(line_) {}
};

namespace detail {

inline bool strip_comment_and_blank(std::string& line) {
  if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
  return line.find_first_not_of(" \t\r\n") != std::string::npos;
}

}  // namespace detail

/// Reads the term-per-line spec format:
///   field <i> <axis> <weight>
///   coupling <i> <j> <axis> <weight>
/// Sites are 0-based; '#' starts a comment. The spin count is the smallest
/// n covering all sites unless `n_hint` (> 0) says otherwise.
inline HamiltonianSpec read_hamiltonian_spec(std::istream& in, int n_hint = 0) {
  std::vector<PauliTerm> terms;
  int max_site = -1;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::strip_comment_and_blank(line)) continue;
    std::istringstream ss(line);
    std::string kind, axis;
    ss >> kind;
    try {
      if (kind == "field") {
        int i;
        double w;
        if (!(ss >> i >> axis >> w) || axis.size() != 1)
          throw std::invalid_argument("expected: field <i> <axis> <weight>");
        terms.push_back(PauliTerm::field(i, axis_from_char(axis[0]), w));
        max_site = std::max(max_site, i);
      } else if (kind == "coupling") {
        int i, j;
        double w;
        if (!(ss >> i >> j >> axis >> w) || axis.size() != 1)
          throw std::invalid_argument(
              "expected: coupling <i> <j> <axis> <weight>");
        terms.push_back(PauliTerm::coupling(i, j, axis_from_char(axis[0]), w));
        max_site = std::max(max_site, std::max(i, j));
      } else {
        throw std::invalid_argument("unknown term kind '" + kind + "'");
      }
      std::string rest;
      if (ss >> rest) throw std::invalid_argument("trailing tokens");
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (terms.empty() && n_hint <= 0)
    throw ParseError(lineno, "empty spec and no spin count given");
  int n = n_hint > 0 ? n_hint : max_site + 1;
  try {
    return HamiltonianSpec(n, std::move(terms));
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
}

inline void write_hamiltonian_spec(std::ostream& out,
                                   const HamiltonianSpec& spec) {
  for (const auto& t : spec.terms) {
    if (t.is_field())
      out << "field " << t.i << ' ' << to_char(t.axis) << ' ';
    else
      out << "coupling " << t.i << ' ' << t.j << ' ' << to_char(t.axis) << ' ';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", t.weight);
    out << buf << '\n';
  }
}

}  // namespace qbm
