#pragma once

// Thin LAPACKE wrappers for dense Hermitian eigenproblems.
//
// Only the four routines used by the library are declared, so no lapacke.h
// is required at build time. QBM_LAPACKE_PREFIX supports OpenBLAS builds
// configured with SYMBOLPREFIX (the prototypes below are the stable LAPACKE
// C ABI with 32-bit integers).

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#define QBM_DETAIL_CONCAT_(a, b) a##b
#define QBM_DETAIL_CONCAT(a, b) QBM_DETAIL_CONCAT_(a, b)
#ifdef QBM_LAPACKE_PREFIX
#define QBM_LAPACKE(name) QBM_DETAIL_CONCAT(QBM_LAPACKE_PREFIX, name)
#else
#define QBM_LAPACKE(name) name
#endif

extern "C" {
int QBM_LAPACKE(LAPACKE_dsyevd)(int layout, char jobz, char uplo, int n,
                                double* a, int lda, double* w);
int QBM_LAPACKE(LAPACKE_zheevd)(int layout, char jobz, char uplo, int n,
                                std::complex<double>* a, int lda, double* w);
int QBM_LAPACKE(LAPACKE_dsyevr)(int layout, char jobz, char range, char uplo,
                                int n, double* a, int lda, double vl,
                                double vu, int il, int iu, double abstol,
                                int* m, double* w, double* z, int ldz,
                                int* isuppz);
int QBM_LAPACKE(LAPACKE_zheevr)(int layout, char jobz, char range, char uplo,
                                int n, std::complex<double>* a, int lda,
                                double vl, double vu, int il, int iu,
                                double abstol, int* m, double* w,
                                std::complex<double>* z, int ldz, int* isuppz);
}

namespace qbm::detail {

inline constexpr int lapack_col_major = 102;

[[noreturn]] inline void eigh_fail(int info) {
  throw std::runtime_error("eigendecomposition failed (LAPACK info=" +
                           std::to_string(info) + ")");
}

/// Full decomposition; A is overwritten with the eigenvectors (columns),
/// eigenvalues come back ascending.
inline void eigh_in_place(Eigen::MatrixXd& a, Eigen::VectorXd& w) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  int info = QBM_LAPACKE(LAPACKE_dsyevd)(lapack_col_major, 'V', 'L', n,
                                         a.data(), n, w.data());
  if (info != 0) eigh_fail(info);
}

inline void eigh_in_place(Eigen::MatrixXcd& a, Eigen::VectorXd& w) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  int info = QBM_LAPACKE(LAPACKE_zheevd)(lapack_col_major, 'V', 'L', n,
                                         a.data(), n, w.data());
  if (info != 0) eigh_fail(info);
}

/// Eigenpairs with eigenvalue > vl only. A is destroyed. Returns the count m;
/// the first m entries of w and columns of z are valid, ascending.
inline int eigh_above(Eigen::MatrixXd& a, double vl, Eigen::VectorXd& w,
                      Eigen::MatrixXd& z, std::vector<int>& isuppz) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  z.resize(n, n);
  isuppz.resize(2 * static_cast<std::size_t>(n));
  int m = 0;
  int info = QBM_LAPACKE(LAPACKE_dsyevr)(
      lapack_col_major, 'V', 'V', 'L', n, a.data(), n, vl,
      std::numeric_limits<double>::max(), 0, 0, 0.0, &m, w.data(), z.data(), n,
      isuppz.data());
  if (info != 0) eigh_fail(info);
  return m;
}

inline int eigh_above(Eigen::MatrixXcd& a, double vl, Eigen::VectorXd& w,
                      Eigen::MatrixXcd& z, std::vector<int>& isuppz) {
  const int n = static_cast<int>(a.rows());
  w.resize(n);
  z.resize(n, n);
  isuppz.resize(2 * static_cast<std::size_t>(n));
  int m = 0;
  int info = QBM_LAPACKE(LAPACKE_zheevr)(
      lapack_col_major, 'V', 'V', 'L', n, a.data(), n, vl,
      std::numeric_limits<double>::max(), 0, 0, 0.0, &m, w.data(), z.data(), n,
      isuppz.data());
  if (info != 0) eigh_fail(info);
  return m;
}

/// Dispatch on storage: exactly real Hermitian matrices go through the
/// real-symmetric solver (about 4x cheaper), everything else through zheevd.
inline void eigh_hermitian(const Eigen::MatrixXcd& a, Eigen::VectorXd& w,
                           Eigen::MatrixXcd& v) {
  if (a.size() > 0 && a.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::MatrixXd ar = a.real();
    eigh_in_place(ar, w);
    v = ar.cast<std::complex<double>>();
  } else {
    Eigen::MatrixXcd ac = a;
    eigh_in_place(ac, w);
    v = std::move(ac);
  }
}

}  // namespace qbm::detail
