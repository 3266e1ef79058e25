#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "qbm/detail/eigh.hpp"
#include "qbm/spin_basis.hpp"

namespace qbm {

/// Hermitian, positive semidefinite, unit-trace operator on n spins.
/// Hermiticity (1e-12) and trace (1e-10) are enforced at construction;
/// positivity (eigenvalues >= -1e-10) is enforced when the spectrum is
/// first computed.
class DensityMatrix {
 public:
  struct Spectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXcd eigenvectors;
  };

  DensityMatrix(int n, Eigen::MatrixXcd entries)
      : n_(n), mat_(std::move(entries)) {
    check_spin_count(n_, 31);
    const auto dim = Eigen::Index{1} << n_;
    if (mat_.rows() != dim || mat_.cols() != dim)
      throw std::invalid_argument("density matrix dimension mismatch");
    if ((mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("density matrix not Hermitian within 1e-12");
    if (std::abs(mat_.trace().real() - 1.0) > 1e-10 ||
        std::abs(mat_.trace().imag()) > 1e-10)
      throw std::invalid_argument("density matrix trace != 1 within 1e-10");
  }

  int spins() const { return n_; }
  Eigen::Index dim() const { return mat_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return mat_; }

  bool has_spectrum() const { return spectrum_.has_value(); }

  /// Computed once, cached. Throws if an eigenvalue is below -1e-10.
  const Spectrum& spectrum() const {
    if (!spectrum_) {
      Spectrum s;
      detail::eigh_hermitian(mat_, s.eigenvalues, s.eigenvectors);
      if (s.eigenvalues(0) < -1e-10)
        throw std::invalid_argument(
            "density matrix has an eigenvalue below -1e-10");
      spectrum_ = std::move(s);
    }
    return *spectrum_;
  }

 private:
  int n_;
  Eigen::MatrixXcd mat_;
  mutable std::optional<Spectrum> spectrum_;
};

}  // namespace qbm
