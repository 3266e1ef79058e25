#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "qbm/density.hpp"
#include "qbm/density_matrix.hpp"
#include "qbm/hamiltonian.hpp"

namespace qbm {

/// Normalized map from n-spin configurations to probabilities, stored
/// support-sparse (sorted by basis index).
class EmpiricalDistribution {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  EmpiricalDistribution(int n, std::vector<Entry> support)
      : n_(n), support_(std::move(support)) {
    check_spin_count(n_, 31);
    std::sort(support_.begin(), support_.end());
    double total = 0.0;
    std::uint32_t prev = 0;
    bool first = true;
    for (const auto& [idx, p] : support_) {
      if (idx >= (std::uint32_t{1} << n_))
        throw std::invalid_argument("configuration index out of range");
      if (!first && idx == prev)
        throw std::invalid_argument("duplicate configuration in support");
      if (!(p > 0.0))
        throw std::invalid_argument("support probabilities must be positive");
      total += p;
      prev = idx;
      first = false;
    }
    if (support_.empty() || std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("probabilities must sum to 1 within 1e-12");
  }

  int spins() const { return n_; }
  const std::vector<Entry>& support() const { return support_; }

  double probability(std::uint32_t index) const {
    auto it = std::lower_bound(
        support_.begin(), support_.end(), index,
        [](const Entry& e, std::uint32_t i) { return e.first < i; });
    return it != support_.end() && it->first == index ? it->second : 0.0;
  }

 private:
  int n_;
  std::vector<Entry> support_;
};

/// q(s) = N(s)/N by sort-and-count of basis indices.
inline EmpiricalDistribution from_samples(
    const std::vector<std::vector<int>>& samples) {
  if (samples.empty()) throw std::invalid_argument("empty sample set");
  const std::size_t n = samples.front().size();
  if (n < 1 || n > 31) throw std::invalid_argument("bad sample length");
  std::vector<std::uint32_t> idx;
  idx.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.size() != n) throw std::invalid_argument("inconsistent sample length");
    std::uint32_t v = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (s[b] == -1)
        v |= std::uint32_t{1} << b;
      else if (s[b] != 1)
        throw std::invalid_argument("sample entries must be +1 or -1");
    }
    idx.push_back(v);
  }
  std::sort(idx.begin(), idx.end());
  std::vector<EmpiricalDistribution::Entry> support;
  const double inv = 1.0 / static_cast<double>(idx.size());
  for (std::size_t a = 0; a < idx.size();) {
    std::size_t b = a;
    while (b < idx.size() && idx[b] == idx[a]) ++b;
    support.emplace_back(idx[a], static_cast<double>(b - a) * inv);
    a = b;
  }
  return EmpiricalDistribution(static_cast<int>(n), std::move(support));
}

/// psi(s) = sqrt(q(s)) as a dense amplitude vector.
inline Eigen::VectorXd data_wavefunction(const EmpiricalDistribution& q) {
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(Eigen::Index{1} << q.spins());
  for (const auto& [idx, p] : q.support()) psi(idx) = std::sqrt(p);
  return psi;
}

/// Rank-one data density matrix eta = |psi><psi| with <s|psi> = sqrt(q(s)).
inline DensityMatrix data_density(const EmpiricalDistribution& q,
                                  int max_n = default_max_spins) {
  check_spin_count(q.spins(), max_n);
  const Eigen::VectorXd psi = data_wavefunction(q);
  Eigen::MatrixXcd eta = (psi * psi.transpose()).cast<std::complex<double>>();
  return DensityMatrix(q.spins(), std::move(eta));
}

/// z-axis entries of the moment vector: plain weighted sums over the support.
/// Entries for x/y terms are left zero.
inline MomentVector classical_moments(const HamiltonianSpec& spec,
                                      const EmpiricalDistribution& q) {
  detail::check_same_system(spec.n, q.spins());
  MomentVector m(spec.size());
  for (std::size_t r = 0; r < spec.size(); ++r) {
    const auto& t = spec.terms[r];
    if (t.axis != Axis::Z) continue;
    double acc = 0.0;
    for (const auto& [s, p] : q.support()) {
      int sign = spin_sign(s, t.i);
      if (!t.is_field()) sign *= spin_sign(s, t.j);
      acc += sign * p;
    }
    m[r] = acc;
  }
  return m;
}

/// x/y-axis entries, computed directly from q:
///   <sigma_i^x>           =  sum_s sqrt(q(F_i s) q(s))
///   <sigma_i^y>           =  0
///   <sigma_i^x sigma_j^x> =  sum_s sqrt(q(F_i F_j s) q(s))
///   <sigma_i^y sigma_j^y> = -sum_s s_i s_j sqrt(q(F_i F_j s) q(s))
/// Terms with q(F s) = 0 vanish, so the sums run over the support only.
/// Entries for z terms are left zero.
inline MomentVector quantum_moments(const HamiltonianSpec& spec,
                                    const EmpiricalDistribution& q) {
  detail::check_same_system(spec.n, q.spins());
  MomentVector m(spec.size());
  for (std::size_t r = 0; r < spec.size(); ++r) {
    const auto& t = spec.terms[r];
    if (t.axis == Axis::Z) continue;
    if (t.is_field() && t.axis == Axis::Y) continue;  // exactly zero
    const std::uint32_t mask =
        t.is_field() ? std::uint32_t{1} << t.i
                     : (std::uint32_t{1} << t.i) | (std::uint32_t{1} << t.j);
    double acc = 0.0;
    for (const auto& [s, p] : q.support()) {
      const double pf = q.probability(s ^ mask);
      if (pf == 0.0) continue;
      double term = std::sqrt(pf * p);
      if (t.axis == Axis::Y) term *= -spin_sign(s, t.i) * spin_sign(s, t.j);
      acc += term;
    }
    m[r] = acc;
  }
  return m;
}

/// All target statistics of the data density matrix, one pass per class.
inline MomentVector data_moments(const HamiltonianSpec& spec,
                                 const EmpiricalDistribution& q) {
  MomentVector m = classical_moments(spec, q);
  const MomentVector qm = quantum_moments(spec, q);
  for (std::size_t r = 0; r < m.size(); ++r) m[r] += qm[r];
  return m;
}

// ---------------------------------------------------------------------------
// File formats

/// Sample file: one sample per line, n whitespace-separated tokens from
/// {+1, -1}; with zero_one = true the alphabet is {1, 0} and 0 maps to -1.
/// '#' starts a comment.
inline std::vector<std::vector<int>> read_samples(std::istream& in,
                                                  bool zero_one = false) {
  std::vector<std::vector<int>> samples;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::strip_comment_and_blank(line)) continue;
    std::istringstream ss(line);
    std::vector<int> s;
    int tok;
    while (ss >> tok) {
      if (zero_one && tok == 0) tok = -1;
      if (tok != 1 && tok != -1)
        throw ParseError(lineno, "sample entries must be " +
                                     std::string(zero_one ? "1 or 0" : "+1 or -1"));
      s.push_back(tok);
    }
    if (!ss.eof()) throw ParseError(lineno, "malformed sample token");
    if (s.empty()) continue;
    if (!samples.empty() && s.size() != samples.front().size())
      throw ParseError(lineno, "inconsistent sample length");
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ParseError(lineno, "no samples in file");
  return samples;
}

/// Distribution file: per line, n tokens from {+1, -1} followed by the
/// probability.
inline EmpiricalDistribution read_distribution(std::istream& in) {
  std::vector<EmpiricalDistribution::Entry> support;
  std::size_t n = 0;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::strip_comment_and_blank(line)) continue;
    std::istringstream ss(line);
    std::vector<double> tok;
    double v;
    while (ss >> v) tok.push_back(v);
    if (!ss.eof()) throw ParseError(lineno, "malformed token");
    if (tok.size() < 2) throw ParseError(lineno, "expected spins and probability");
    if (n == 0)
      n = tok.size() - 1;
    else if (tok.size() - 1 != n)
      throw ParseError(lineno, "inconsistent configuration length");
    std::uint32_t idx = 0;
    for (std::size_t b = 0; b < n; ++b) {
      if (tok[b] == -1.0)
        idx |= std::uint32_t{1} << b;
      else if (tok[b] != 1.0)
        throw ParseError(lineno, "configuration entries must be +1 or -1");
    }
    support.emplace_back(idx, tok.back());
  }
  if (support.empty()) throw ParseError(lineno, "no entries in file");
  try {
    return EmpiricalDistribution(static_cast<int>(n), std::move(support));
  } catch (const std::invalid_argument& e) {
    throw ParseError(lineno, e.what());
  }
}

inline void write_distribution(std::ostream& out,
                               const EmpiricalDistribution& q) {
  for (const auto& [idx, p] : q.support()) {
    for (int i = 0; i < q.spins(); ++i)
      out << (spin_sign(idx, i) > 0 ? "+1 " : "-1 ");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << buf << '\n';
  }
}

}  // namespace qbm
