#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qbm/density.hpp"
#include "qbm/detail/eigh.hpp"
#include "qbm/hamiltonian.hpp"
#include "qbm/operators.hpp"

namespace qbm {

struct LearnConfig {
  double epsilon = 0.1;
  long max_iters = 200000;
  double tol_dL = 1e-15;    // stop when |L_t - L_{t-1}| drops below this
  double weight_cap = 30.0;  // stop when any |w_r| reaches this
  std::optional<std::vector<double>> init_weights;  // default: zeros
  long log_every = 0;  // stride of the progress callback (0 = silent)
  std::function<void(long iter, double likelihood, double max_grad)> progress;

  void validate() const {
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(tol_dL >= 0)) throw std::invalid_argument("tol_dL must be >= 0");
    if (!(weight_cap > 0)) throw std::invalid_argument("weight_cap must be > 0");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  }
};

enum class Termination { Converged, WeightCap, MaxIters };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::WeightCap: return "weight_cap";
    case Termination::MaxIters: return "max_iters";
  }
  return "?";
}

struct TracePoint {
  long iter;
  double likelihood;
  double max_grad;
  double delta_likelihood;  // 0 for the first iteration
};

struct LearnResult {
  std::vector<double> weights;
  std::vector<TracePoint> trace;  // one point per iteration
  Termination termination = Termination::MaxIters;
  long iters = 0;
  double final_likelihood = 0.0;
  double final_moment_error = 0.0;  // max_r |<H_r>_target - <H_r>_model|
};

namespace detail {

/// Dense Boltzmann-model evaluator: given weights w, produces log Z and the
/// model moments <H_r>_rho for rho = e^{H(w)}/Z without materializing rho.
///
/// Eigenpairs with Boltzmann weight below e^-45 relative to the top of the
/// spectrum contribute less than ~1e-16 to any unit-norm observable, so only
/// the top spectral window is needed. Between iterations the spectrum moves
/// by at most ||dH||_2 <= sum_r |dw_r| (each Pauli term has unit norm), which
/// bounds a safe window from the previous top eigenvalue; when the window
/// holds fewer than a third of the eigenvalues we switch from *syevd to the
/// selected-range *syevr path.
template <typename Scalar>
class BoltzmannEngine {
 public:
  explicit BoltzmannEngine(const HamiltonianSpec& spec)
      : spec_(spec), dim_(std::uint32_t{1} << spec.n) {
    const auto d = static_cast<Eigen::Index>(dim_);
    h_.resize(d, d);
    for (const auto& t : spec_.terms) {
      if (t.axis == Axis::Z) {  // served by the diagonal, no overlap vector
        mask_slot_.push_back(SIZE_MAX);
        continue;
      }
      const std::uint32_t mask =
          t.is_field() ? std::uint32_t{1} << t.i
                       : (std::uint32_t{1} << t.i) | (std::uint32_t{1} << t.j);
      // x and y terms on the same sites share one flip-overlap vector
      std::size_t slot = 0;
      while (slot < masks_.size() && masks_[slot] != mask) ++slot;
      if (slot == masks_.size()) masks_.push_back(mask);
      mask_slot_.push_back(slot);
    }
    overlaps_.resize(masks_.size());
  }

  struct Eval {
    double log_z;
    std::vector<double> moments;
  };

  Eval evaluate(const std::vector<double>& w) {
    build(w);
    decompose();
    Eval out;
    const double top = evals_(kept_ - 1);
    double z = 0.0;
    for (int m = 0; m < kept_; ++m) z += std::exp(evals_(m) - top);
    out.log_z = top + std::log(z);
    // scale kept eigenvectors by sqrt of their Boltzmann probability
    for (int m = 0; m < kept_; ++m)
      vecs_.col(m) *= std::sqrt(std::exp(evals_(m) - top) / z);
    compute_overlaps();
    out.moments.resize(spec_.size());
    for (std::size_t r = 0; r < spec_.size(); ++r)
      out.moments[r] = term_moment(r);
    return out;
  }

  /// Callers report each weight update so the next spectral window is valid.
  void note_step(double l1_change) { drift_ += l1_change; }

 private:
  void build(const std::vector<double>& w) {
    h_.setZero();
    for (std::size_t r = 0; r < spec_.size(); ++r)
      add_pauli_term(h_, spec_.terms[r], w[r]);
  }

  void decompose() {
    const auto d = static_cast<Eigen::Index>(dim_);
    const bool try_window =
        have_solved_ && last_kept_ < static_cast<int>(dim_) / 3;
    if (try_window) {
      const double vl = prev_top_ - drift_ - 46.0;
      kept_ = eigh_above(h_, vl, evals_, vecs_, isuppz_);
    } else {
      eigh_in_place(h_, evals_);
      vecs_.swap(h_);
      // drop weightless eigenpairs; keeps the moment pass proportional
      // to the occupied part of the spectrum
      const double cut = evals_(d - 1) - 45.0;
      int lo = 0;
      while (lo < d && evals_(lo) < cut) ++lo;
      if (lo > 0) {
        const int m = static_cast<int>(d) - lo;
        evals_.segment(0, m) = evals_.segment(lo, m).eval();
        // move columns left; cheaper than a full permutation copy
        for (int c = 0; c < m; ++c) vecs_.col(c) = vecs_.col(lo + c);
      }
      kept_ = static_cast<int>(d) - lo;
    }
    if (kept_ < 1) throw std::runtime_error("empty spectral window");
    prev_top_ = evals_(kept_ - 1);
    drift_ = 0.0;
    last_kept_ = kept_;
    have_solved_ = true;
  }

  void compute_overlaps() {
    diag_.assign(dim_, 0.0);
    for (int m = 0; m < kept_; ++m) {
      const Scalar* col = vecs_.col(m).data();
      for (std::uint32_t s = 0; s < dim_; ++s)
        diag_[s] += std::norm(col[s]);
    }
    for (std::size_t k = 0; k < masks_.size(); ++k) {
      auto& v = overlaps_[k];
      v.assign(dim_, Scalar(0));
      const std::uint32_t mask = masks_[k];
      for (int m = 0; m < kept_; ++m) {
        const Scalar* col = vecs_.col(m).data();
        if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
          for (std::uint32_t s = 0; s < dim_; ++s)
            v[s] += col[s ^ mask] * std::conj(col[s]);
        } else {
          for (std::uint32_t s = 0; s < dim_; ++s) v[s] += col[s ^ mask] * col[s];
        }
      }
    }
  }

  static double real_part(double x) { return x; }
  static double real_part(const std::complex<double>& x) { return x.real(); }
  static double imag_part(double) { return 0.0; }
  static double imag_part(const std::complex<double>& x) { return x.imag(); }

  double term_moment(std::size_t r) const {
    const auto& t = spec_.terms[r];
    double acc = 0.0;
    if (t.axis == Axis::Z) {
      if (t.is_field()) {
        for (std::uint32_t s = 0; s < dim_; ++s)
          acc += spin_sign(s, t.i) * diag_[s];
      } else {
        for (std::uint32_t s = 0; s < dim_; ++s)
          acc += spin_sign(s, t.i) * spin_sign(s, t.j) * diag_[s];
      }
      return acc;
    }
    const auto& v = overlaps_[mask_slot_[r]];
    switch (t.axis) {
      case Axis::X:
        for (std::uint32_t s = 0; s < dim_; ++s) acc += real_part(v[s]);
        break;
      case Axis::Y:
        if (t.is_field()) {
          for (std::uint32_t s = 0; s < dim_; ++s)
            acc += spin_sign(s, t.i) * imag_part(v[s]);
        } else {
          for (std::uint32_t s = 0; s < dim_; ++s)
            acc -= spin_sign(s, t.i) * spin_sign(s, t.j) * real_part(v[s]);
        }
        break;
      default: break;
    }
    return acc;
  }

  const HamiltonianSpec& spec_;
  std::uint32_t dim_;
  std::vector<std::uint32_t> masks_;     // distinct off-diagonal flip masks
  std::vector<std::size_t> mask_slot_;   // term -> index into masks_
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> h_, vecs_;
  Eigen::VectorXd evals_;
  std::vector<int> isuppz_;
  std::vector<double> diag_;
  std::vector<std::vector<Scalar>> overlaps_;
  int kept_ = 0;
  int last_kept_ = 0;
  double prev_top_ = 0.0;
  double drift_ = 0.0;
  bool have_solved_ = false;
};

/// Diagonal (classical Boltzmann) evaluator for z-only specs: the partition
/// sum runs over the 2^n configurations, no eigendecomposition.
class DiagonalEngine {
 public:
  explicit DiagonalEngine(const HamiltonianSpec& spec) {
    const auto d = Eigen::Index{1} << spec.n;
    signs_.resize(d, static_cast<Eigen::Index>(spec.size()));
    for (std::size_t r = 0; r < spec.size(); ++r) {
      const auto& t = spec.terms[r];
      for (Eigen::Index s = 0; s < d; ++s) {
        int v = spin_sign(static_cast<std::uint32_t>(s), t.i);
        if (!t.is_field()) v *= spin_sign(static_cast<std::uint32_t>(s), t.j);
        signs_(s, static_cast<Eigen::Index>(r)) = v;
      }
    }
  }

  struct Eval {
    double log_z;
    std::vector<double> moments;
  };

  Eval evaluate(const std::vector<double>& w) {
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(),
                                               static_cast<Eigen::Index>(w.size()));
    Eigen::VectorXd energy = signs_ * wv;
    const double log_z = log_sum_exp(energy);
    Eigen::VectorXd p = (energy.array() - log_z).exp();
    Eigen::VectorXd m = signs_.transpose() * p;
    Eval out;
    out.log_z = log_z;
    out.moments.assign(m.data(), m.data() + m.size());
    return out;
  }

  /// Diagonal Boltzmann probabilities at the given weights.
  Eigen::VectorXd probabilities(const std::vector<double>& w) {
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(),
                                               static_cast<Eigen::Index>(w.size()));
    Eigen::VectorXd energy = signs_ * wv;
    return (energy.array() - log_sum_exp(energy)).exp();
  }

 private:
  Eigen::MatrixXd signs_;  // (config, term) -> +-1 interaction value
};

template <typename Evaluate, typename NoteStep>
LearnResult gradient_ascent(const HamiltonianSpec& spec,
                            const MomentVector& target, const LearnConfig& cfg,
                            Evaluate&& evaluate, NoteStep&& note_step) {
  cfg.validate();
  if (target.size() != spec.size())
    throw std::invalid_argument("target moment vector length mismatch");
  target.validate();
  const std::size_t nr = spec.size();
  std::vector<double> w(nr, 0.0);
  if (cfg.init_weights) {
    if (cfg.init_weights->size() != nr)
      throw std::invalid_argument("init_weights length mismatch");
    w = *cfg.init_weights;
  }

  LearnResult res;
  res.trace.reserve(static_cast<std::size_t>(std::min(cfg.max_iters, 1L << 20)));
  std::vector<double> grad(nr);
  double prev_l = 0.0;
  for (long it = 1;; ++it) {
    const auto ev = evaluate(w);
    double l = -ev.log_z;
    for (std::size_t r = 0; r < nr; ++r) l += w[r] * target[r];
    if (!std::isfinite(l))
      throw std::runtime_error("non-finite likelihood at iteration " +
                               std::to_string(it) + " (diverged step)");
    double gmax = 0.0;
    double l1 = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      grad[r] = target[r] - ev.moments[r];
      gmax = std::max(gmax, std::abs(grad[r]));
      l1 += std::abs(grad[r]);
    }
    const double dl = it == 1 ? 0.0 : l - prev_l;
    res.trace.push_back({it, l, gmax, dl});
    if (cfg.progress && cfg.log_every > 0 &&
        (it % cfg.log_every == 0 || it == 1))
      cfg.progress(it, l, gmax);
    res.iters = it;
    res.final_likelihood = l;
    res.final_moment_error = gmax;
    res.weights = w;
    if (it > 1 && std::abs(dl) < cfg.tol_dL) {
      res.termination = Termination::Converged;
      break;
    }
    bool capped = false;
    for (double x : w)
      if (std::abs(x) >= cfg.weight_cap) capped = true;
    if (capped) {
      res.termination = Termination::WeightCap;
      break;
    }
    if (it == cfg.max_iters) {
      res.termination = Termination::MaxIters;
      break;
    }
    for (std::size_t r = 0; r < nr; ++r) w[r] += cfg.epsilon * grad[r];
    note_step(cfg.epsilon * l1);
    prev_l = l;
  }
  return res;
}

/// The complex path is only needed when a y-axis field can acquire weight:
/// y couplings have real matrix elements, and a y field whose target moment
/// and initial weight are both zero keeps zero gradient on the real path.
inline bool real_path_valid(const HamiltonianSpec& spec,
                            const MomentVector& target, const LearnConfig& cfg) {
  for (std::size_t r = 0; r < spec.size(); ++r) {
    const auto& t = spec.terms[r];
    if (t.is_field() && t.axis == Axis::Y) {
      if (target[r] != 0.0) return false;
      if (cfg.init_weights && (*cfg.init_weights)[r] != 0.0) return false;
    }
  }
  return true;
}

}  // namespace detail

/// L(w) = <H>_eta - log Z, with <H>_eta assembled from the target moments.
inline double quantum_likelihood(const HamiltonianSpec& spec,
                                 const std::vector<double>& w,
                                 const MomentVector& target) {
  if (w.size() != spec.size() || target.size() != spec.size())
    throw std::invalid_argument("dimension mismatch");
  double l = -log_partition(build_hamiltonian(spec.with_weights(w)));
  for (std::size_t r = 0; r < spec.size(); ++r) l += w[r] * target[r];
  return l;
}

/// dL/dw_r = <H_r>_eta - <H_r>_rho at the given weights, with the model
/// moments taken from the Boltzmann density of H(w).
inline std::vector<double> gradient(const HamiltonianSpec& spec,
                                    const std::vector<double>& w,
                                    const MomentVector& target) {
  if (w.size() != spec.size() || target.size() != spec.size())
    throw std::invalid_argument("dimension mismatch");
  const DensityMatrix rho =
      boltzmann_density(build_hamiltonian(spec.with_weights(w)));
  const MomentVector m = moments(spec, rho);
  std::vector<double> g(spec.size());
  for (std::size_t r = 0; r < spec.size(); ++r) g[r] = target[r] - m[r];
  return g;
}

/// Gradient ascent on the quantum likelihood (the QBM learning rule).
inline LearnResult fit_qbm(const HamiltonianSpec& spec,
                           const MomentVector& target,
                           const LearnConfig& cfg = {}) {
  spec.validate();
  if (detail::real_path_valid(spec, target, cfg)) {
    detail::BoltzmannEngine<double> engine(spec);
    return detail::gradient_ascent(
        spec, target, cfg, [&](const std::vector<double>& w) { return engine.evaluate(w); },
        [&](double d) { engine.note_step(d); });
  }
  detail::BoltzmannEngine<std::complex<double>> engine(spec);
  return detail::gradient_ascent(
      spec, target, cfg, [&](const std::vector<double>& w) { return engine.evaluate(w); },
      [&](double d) { engine.note_step(d); });
}

/// Classical Boltzmann machine: the diagonal special case (z-only spec).
inline LearnResult fit_bm(const HamiltonianSpec& spec,
                          const MomentVector& target,
                          const LearnConfig& cfg = {}) {
  spec.validate();
  if (!spec.z_only())
    throw std::invalid_argument("fit_bm requires a z-only spec");
  detail::DiagonalEngine engine(spec);
  return detail::gradient_ascent(
      spec, target, cfg, [&](const std::vector<double>& w) { return engine.evaluate(w); },
      [](double) {});
}

/// Diagonal Boltzmann probabilities p(s) at the learned weights.
inline Eigen::VectorXd bm_probabilities(const HamiltonianSpec& spec,
                                        const std::vector<double>& w) {
  if (!spec.z_only())
    throw std::invalid_argument("bm_probabilities requires a z-only spec");
  detail::DiagonalEngine engine(spec);
  return engine.probabilities(w);
}

}  // namespace qbm
