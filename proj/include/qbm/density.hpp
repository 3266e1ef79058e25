#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qbm/density_matrix.hpp"
#include "qbm/operators.hpp"

namespace qbm {

/// Target or model statistics <H_r>, indexed identically to the term list of
/// the HamiltonianSpec they were computed for.
struct MomentVector {
  std::vector<double> values;

  MomentVector() = default;
  explicit MomentVector(std::size_t size) : values(size, 0.0) {}
  explicit MomentVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t r) { return values[r]; }
  double operator[](std::size_t r) const { return values[r]; }

  /// Pauli expectations have unit spectral radius.
  void validate() const {
    for (double v : values)
      if (!(v >= -1.0 - 1e-9 && v <= 1.0 + 1e-9))
        throw std::invalid_argument("moment outside [-1, 1]");
  }
};

namespace detail {

/// x log x with the small-eigenvalue clamp used for all entropies.
inline double xlogx(double x) { return x > 1e-14 ? x * std::log(x) : 0.0; }

inline void check_same_system(int na, int nb) {
  if (na != nb) throw std::invalid_argument("spin count mismatch");
}

/// <H_r>_rho for a unit-weight term, from the entries rho(s ^ mask, s).
/// All six term shapes reduce to sums over one flip mask:
///   z field/coupling: mask 0, sign-weighted diagonal
///   x field/coupling: plain sum of Re rho(F s, s)
///   y field:          sum of s_i Im rho(F_i s, s)
///   y coupling:       sign-weighted sum of -Re rho(F_i F_j s, s)
inline double term_moment(const PauliTerm& t, const Eigen::MatrixXcd& rho) {
  const std::uint32_t dim = static_cast<std::uint32_t>(rho.rows());
  double acc = 0.0;
  if (t.is_field()) {
    const std::uint32_t bit = std::uint32_t{1} << t.i;
    switch (t.axis) {
      case Axis::Z:
        for (std::uint32_t s = 0; s < dim; ++s)
          acc += spin_sign(s, t.i) * rho(s, s).real();
        break;
      case Axis::X:
        for (std::uint32_t s = 0; s < dim; ++s) acc += rho(s ^ bit, s).real();
        break;
      case Axis::Y:
        for (std::uint32_t s = 0; s < dim; ++s)
          acc += spin_sign(s, t.i) * rho(s ^ bit, s).imag();
        break;
    }
    return acc;
  }
  const std::uint32_t mask =
      (std::uint32_t{1} << t.i) | (std::uint32_t{1} << t.j);
  switch (t.axis) {
    case Axis::Z:
      for (std::uint32_t s = 0; s < dim; ++s)
        acc += spin_sign(s, t.i) * spin_sign(s, t.j) * rho(s, s).real();
      break;
    case Axis::X:
      for (std::uint32_t s = 0; s < dim; ++s) acc += rho(s ^ mask, s).real();
      break;
    case Axis::Y:
      for (std::uint32_t s = 0; s < dim; ++s)
        acc -= spin_sign(s, t.i) * spin_sign(s, t.j) * rho(s ^ mask, s).real();
      break;
  }
  return acc;
}

}  // namespace detail

/// Re Tr(A rho). Throws if the imaginary residual exceeds 1e-10.
inline double expectation(const HermitianOperator& a, const DensityMatrix& rho) {
  detail::check_same_system(a.spins(), rho.spins());
  const std::complex<double> tr =
      a.matrix().cwiseProduct(rho.matrix().transpose()).sum();
  if (std::abs(tr.imag()) > 1e-10)
    throw std::runtime_error("expectation has imaginary residual " +
                             std::to_string(tr.imag()));
  return tr.real();
}

/// Per-term expectations via the flip structure; no matrix products.
inline MomentVector moments(const HamiltonianSpec& spec,
                            const DensityMatrix& rho) {
  detail::check_same_system(spec.n, rho.spins());
  MomentVector m(spec.size());
  for (std::size_t r = 0; r < spec.size(); ++r)
    m[r] = detail::term_moment(spec.terms[r], rho.matrix());
  return m;
}

/// Tr(eta log eta), from eta's spectrum with the 1e-14 clamp.
inline double trace_eta_log_eta(const DensityMatrix& eta) {
  const auto& ev = eta.spectrum().eigenvalues;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) acc += detail::xlogx(ev(i));
  return acc;
}

/// S(eta, rho) for rho given in Boltzmann form, where log rho = H - logZ I
/// is exact:  S = Tr(eta log eta) - <H>_eta + logZ.
inline double cross_entropy(const DensityMatrix& eta,
                            const HermitianOperator& h, double log_z) {
  detail::check_same_system(eta.spins(), h.spins());
  return trace_eta_log_eta(eta) - expectation(h, eta) + log_z;
}

/// Raw-matrix variant: both arguments decomposed. Used for comparisons
/// against diagonal (classical) density matrices. Returns +infinity when
/// eta has weight on the null space of rho.
inline double cross_entropy(const DensityMatrix& eta, const DensityMatrix& rho) {
  detail::check_same_system(eta.spins(), rho.spins());
  const auto& sp = rho.spectrum();
  double acc = trace_eta_log_eta(eta);
  for (Eigen::Index m = 0; m < sp.eigenvalues.size(); ++m) {
    const double weight =
        sp.eigenvectors.col(m).dot(eta.matrix() * sp.eigenvectors.col(m)).real();
    const double lambda = sp.eigenvalues(m);
    if (lambda <= 1e-14) {
      if (weight > 1e-12) return std::numeric_limits<double>::infinity();
      continue;
    }
    acc -= weight * std::log(lambda);
  }
  return acc;
}

/// -sum lambda log lambda in nats.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  return -trace_eta_log_eta(rho);
}

namespace detail {

/// Bit-scatter tables for a bipartition: sub-index -> full basis index.
inline std::vector<std::uint32_t> scatter_table(const std::vector<int>& sites) {
  std::vector<std::uint32_t> table(std::size_t{1} << sites.size());
  for (std::uint32_t k = 0; k < table.size(); ++k) {
    std::uint32_t full = 0;
    for (std::size_t b = 0; b < sites.size(); ++b)
      if (k >> b & 1u) full |= std::uint32_t{1} << sites[b];
    table[k] = full;
  }
  return table;
}

inline std::vector<int> complement_sites(int n, const std::vector<int>& keep) {
  std::vector<bool> in(n, false);
  for (int s : keep) {
    check_site(n, s);
    if (in[s]) throw std::invalid_argument("duplicate site in subset");
    in[s] = true;
  }
  std::vector<int> rest;
  for (int s = 0; s < n; ++s)
    if (!in[s]) rest.push_back(s);
  if (keep.empty() || rest.empty())
    throw std::invalid_argument("subset must be nonempty and proper");
  return rest;
}

}  // namespace detail

/// Reduced density matrix on the kept sites (ascending order of `keep`
/// defines the bit order of the result).
inline DensityMatrix partial_trace(const DensityMatrix& rho,
                                   std::vector<int> keep) {
  std::sort(keep.begin(), keep.end());
  const auto rest = detail::complement_sites(rho.spins(), keep);
  const auto ka = detail::scatter_table(keep);
  const auto kb = detail::scatter_table(rest);
  const auto da = static_cast<Eigen::Index>(ka.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(da, da);
  for (Eigen::Index a2 = 0; a2 < da; ++a2)
    for (Eigen::Index a1 = 0; a1 < da; ++a1) {
      std::complex<double> acc = 0.0;
      for (std::uint32_t b : kb) acc += rho.matrix()(ka[a1] | b, ka[a2] | b);
      out(a1, a2) = acc;
    }
  return DensityMatrix(static_cast<int>(keep.size()), std::move(out));
}

/// I_AB = S(rho_A) + S(rho_B) - S(rho).
inline double mutual_information(const DensityMatrix& rho,
                                 const std::vector<int>& a) {
  const auto b = detail::complement_sites(rho.spins(), a);
  return von_neumann_entropy(partial_trace(rho, a)) +
         von_neumann_entropy(partial_trace(rho, b)) - von_neumann_entropy(rho);
}

struct SchmidtResult {
  Eigen::VectorXd lambdas;  // squared singular values, descending
  double entropy = 0.0;     // -sum lambda log lambda, equals S(eta_A)=S(eta_B)
};

/// Schmidt decomposition of a pure state across (A, complement of A).
inline SchmidtResult schmidt_entanglement(const Eigen::VectorXcd& psi, int n,
                                          std::vector<int> a_sites) {
  if (psi.size() != (Eigen::Index{1} << n))
    throw std::invalid_argument("state dimension mismatch");
  if (std::abs(psi.norm() - 1.0) > 1e-10)
    throw std::invalid_argument("state not normalized");
  std::sort(a_sites.begin(), a_sites.end());
  const auto rest = detail::complement_sites(n, a_sites);
  const auto ka = detail::scatter_table(a_sites);
  const auto kb = detail::scatter_table(rest);
  Eigen::MatrixXcd m(ka.size(), kb.size());
  for (std::size_t b = 0; b < kb.size(); ++b)
    for (std::size_t a = 0; a < ka.size(); ++a)
      m(a, b) = psi(ka[a] | kb[b]);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  SchmidtResult out;
  out.lambdas = svd.singularValues().array().square();
  const double total = out.lambdas.sum();
  if (std::abs(total - 1.0) > 1e-10)
    throw std::runtime_error("Schmidt weights do not sum to 1");
  for (Eigen::Index i = 0; i < out.lambdas.size(); ++i)
    out.entropy -= detail::xlogx(out.lambdas(i));
  return out;
}

/// Entropy of the 2x2 density matrix with Bloch vector (m_x, m_y, m_z):
/// S = log 2 - (1/2) log(1 - m^2) - (m/2) log((1+m)/(1-m)).
inline double single_spin_entropy(double mx, double my, double mz) {
  const double m = std::sqrt(mx * mx + my * my + mz * mz);
  if (m > 1.0 + 1e-12)
    throw std::invalid_argument("Bloch vector length exceeds 1");
  if (m >= 1.0 - 1e-12) return 0.0;  // pure-state limit
  return std::numbers::ln2 - 0.5 * std::log1p(-m * m) -
         0.5 * m * std::log((1.0 + m) / (1.0 - m));
}

}  // namespace qbm
