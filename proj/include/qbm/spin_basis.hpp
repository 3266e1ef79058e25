#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qbm {

/// Upper bound on the spin count accepted by default. Dense operators on
/// n spins take 16 * 4^n bytes; n = 12 is already 256 MB per matrix.
/// Override via max_spins arguments (the CLI reads QBM_LAB_MAX_N).
inline constexpr int default_max_spins = 12;

inline int max_spins_from_env() {
  if (const char* s = std::getenv("QBM_LAB_MAX_N")) {
    int v = std::atoi(s);
    if (v >= 1) return v;
  }
  return default_max_spins;
}

inline void check_spin_count(int n, int max_n = default_max_spins) {
  if (n < 1 || n > max_n)
    throw std::invalid_argument("spin count " + std::to_string(n) +
                                " outside [1, " + std::to_string(max_n) + "]");
}

/// One configuration s in {-1,+1}^n of an n-spin system, encoded as a basis
/// index. Site 0 is the least significant bit; bit value 0 encodes s = +1,
/// bit value 1 encodes s = -1.
struct SpinConfig {
  int n = 0;
  std::uint32_t index = 0;

  SpinConfig() = default;
  SpinConfig(int n_, std::uint32_t index_) : n(n_), index(index_) {
    check_spin_count(n, 31);
    if (index >= (std::uint32_t{1} << n))
      throw std::invalid_argument("basis index out of range");
  }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

namespace detail {
inline void check_site(int n, int i) {
  if (i < 0 || i >= n)
    throw std::out_of_range("site index " + std::to_string(i) +
                            " out of range for n=" + std::to_string(n));
}
}  // namespace detail

/// Bit-level primitives used in operator construction. No range checks.
inline std::uint32_t flip_index(std::uint32_t index, int i) {
  return index ^ (std::uint32_t{1} << i);
}

/// s_i of the configuration encoded by `index`: +1 or -1.
inline int spin_sign(std::uint32_t index, int i) {
  return (index >> i) & 1u ? -1 : +1;
}

/// F_i s: spin i negated, all others unchanged.
inline SpinConfig flip(SpinConfig s, int i) {
  detail::check_site(s.n, i);
  s.index = flip_index(s.index, i);
  return s;
}

inline int spin_value(const SpinConfig& s, int i) {
  detail::check_site(s.n, i);
  return spin_sign(s.index, i);
}

}  // namespace qbm
