#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "qbm/density_matrix.hpp"
#include "qbm/detail/eigh.hpp"
#include "qbm/hamiltonian.hpp"
#include "qbm/spin_basis.hpp"

namespace qbm {

/// Dense complex Hermitian operator on the 2^n spin basis with a cached
/// spectral decomposition.
class HermitianOperator {
 public:
  struct Spectrum {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXcd eigenvectors;  // columns, unitary
  };

  HermitianOperator(int n, Eigen::MatrixXcd entries, int max_n = 31)
      : n_(n), mat_(std::move(entries)) {
    check_spin_count(n_, max_n);
    const auto dim = Eigen::Index{1} << n_;
    if (mat_.rows() != dim || mat_.cols() != dim)
      throw std::invalid_argument("operator dimension mismatch");
    hermiticity_defect_ = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (hermiticity_defect_ > 1e-12)
      throw std::invalid_argument("operator not Hermitian within 1e-12");
  }

  int spins() const { return n_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }
  bool has_spectrum() const { return spectrum_.has_value(); }

  const Spectrum& spectrum() const {
    if (!spectrum_) {
      if (hermiticity_defect_ > 1e-8)
        throw std::runtime_error("symmetrization failure: Hermiticity defect " +
                                 std::to_string(hermiticity_defect_));
      Spectrum s;
      Eigen::MatrixXcd sym = 0.5 * (mat_ + mat_.adjoint());
      detail::eigh_hermitian(sym, s.eigenvalues, s.eigenvectors);
      spectrum_ = std::move(s);
    }
    return *spectrum_;
  }

 private:
  int n_;
  Eigen::MatrixXcd mat_;
  double hermiticity_defect_ = 0.0;
  mutable std::optional<Spectrum> spectrum_;
};

namespace detail {

/// Adds the matrix elements of one unit-weight Pauli term, scaled by w:
///   <s'|sigma_i^z|s>           = s_i                delta_{s',s}
///   <s'|sigma_i^x|s>           = 1                  delta_{s',F_i s}
///   <s'|sigma_i^y|s>           = i s_i              delta_{s',F_i s}
///   <s'|sigma_i^k sigma_j^k|s> = analogous with F_i F_j (see moments()).
template <typename Mat>
void add_pauli_term(Mat& h, const PauliTerm& t, double w) {
  const std::uint32_t dim = static_cast<std::uint32_t>(h.rows());
  using Scalar = typename Mat::Scalar;
  if (t.is_field()) {
    const std::uint32_t bit = std::uint32_t{1} << t.i;
    switch (t.axis) {
      case Axis::Z:
        for (std::uint32_t s = 0; s < dim; ++s)
          h(s, s) += Scalar(w * spin_sign(s, t.i));
        break;
      case Axis::X:
        for (std::uint32_t s = 0; s < dim; ++s) h(s ^ bit, s) += Scalar(w);
        break;
      case Axis::Y:
        if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
          for (std::uint32_t s = 0; s < dim; ++s)
            h(s ^ bit, s) += Scalar(0.0, w * spin_sign(s, t.i));
        } else {
          throw std::logic_error("y field requires complex storage");
        }
        break;
    }
    return;
  }
  const std::uint32_t mask =
      (std::uint32_t{1} << t.i) | (std::uint32_t{1} << t.j);
  switch (t.axis) {
    case Axis::Z:
      for (std::uint32_t s = 0; s < dim; ++s)
        h(s, s) += Scalar(w * spin_sign(s, t.i) * spin_sign(s, t.j));
      break;
    case Axis::X:
      for (std::uint32_t s = 0; s < dim; ++s) h(s ^ mask, s) += Scalar(w);
      break;
    case Axis::Y:
      for (std::uint32_t s = 0; s < dim; ++s)
        h(s ^ mask, s) -= Scalar(w * spin_sign(s, t.i) * spin_sign(s, t.j));
      break;
  }
}

inline bool needs_complex(const HamiltonianSpec& spec) {
  for (const auto& t : spec.terms)
    if (t.is_field() && t.axis == Axis::Y && t.weight != 0.0) return true;
  return false;
}

/// log(sum_s exp(e_s)) with the max shifted out.
inline double log_sum_exp(const Eigen::VectorXd& e) {
  const double m = e.maxCoeff();
  return m + std::log((e.array() - m).exp().sum());
}

}  // namespace detail

/// Dense Hermitian matrix of the spec's weighted Pauli terms.
inline HermitianOperator build_hamiltonian(const HamiltonianSpec& spec,
                                           int max_n = default_max_spins) {
  spec.validate(max_n);
  const auto dim = Eigen::Index{1} << spec.n;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& t : spec.terms) detail::add_pauli_term(h, t, t.weight);
  return HermitianOperator(spec.n, std::move(h), max_n);
}

/// Populates (and caches) the spectral decomposition.
inline const HermitianOperator& spectral_decompose(const HermitianOperator& a) {
  a.spectrum();
  return a;
}

/// log Tr(e^H), evaluated stably from the spectrum.
inline double log_partition(const HermitianOperator& h) {
  return detail::log_sum_exp(h.spectrum().eigenvalues);
}

/// rho = e^H / Tr(e^H).
inline DensityMatrix boltzmann_density(const HermitianOperator& h) {
  const auto& sp = h.spectrum();
  const double emax = sp.eigenvalues.maxCoeff();
  Eigen::VectorXd p = (sp.eigenvalues.array() - emax).exp();
  p /= p.sum();
  Eigen::MatrixXcd w = sp.eigenvectors * p.cwiseSqrt().asDiagonal();
  Eigen::MatrixXcd rho = w * w.adjoint();
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return DensityMatrix(h.spins(), std::move(rho));
}

struct GroundState {
  Eigen::VectorXcd state;  // top eigenvector of H, unit norm
  double gap = 0.0;        // top eigenvalue minus the next one
  bool degenerate = false;  // gap < 1e-10
};

/// Top eigenvector of H (the beta -> infinity limit of e^{beta H}/Z), with
/// the phase fixed so the largest-magnitude component is real positive.
inline GroundState ground_state(const HermitianOperator& h) {
  const auto& sp = h.spectrum();
  const auto dim = h.dim();
  GroundState g;
  g.state = sp.eigenvectors.col(dim - 1);
  g.gap = dim > 1 ? sp.eigenvalues(dim - 1) - sp.eigenvalues(dim - 2)
                  : std::numeric_limits<double>::infinity();
  g.degenerate = g.gap < 1e-10;
  Eigen::Index k;
  g.state.cwiseAbs().maxCoeff(&k);
  g.state *= std::conj(g.state(k)) / std::abs(g.state(k));
  return g;
}

}  // namespace qbm
