// Deterministic counter-based random number generation. Every random draw in
// the toolkit flows from a single seed through this generator, so outputs are
// reproducible bit-for-bit and independent streams can be split safely.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "relaxctl/common.hpp"

namespace relaxctl {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Counter-based generator: draw i of stream s is a pure function of
// (seed, s, i). No hidden state beyond the counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : base_(detail::splitmix64(seed ^ detail::splitmix64(stream))) {}

  std::uint64_t next_u64() { return detail::splitmix64(base_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1].
  double next_double_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller; one standard normal per call, pairs drawn eagerly.
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u = next_double_open();
    const double v = next_double();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double a = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  cplx next_complex_gaussian() {
    const double re = next_gaussian();
    const double im = next_gaussian();
    return {re, im};
  }

  // Haar-like random pure state: i.i.d. complex Gaussian amplitudes,
  // normalized.
  Vec random_amplitudes(Index dim) {
    Vec v(dim);
    for (Index i = 0; i < dim; ++i) v[i] = next_complex_gaussian();
    v /= v.norm();
    return v;
  }

  // Full-rank random density matrix A A^dag / tr, generic in every basis.
  Mat random_density_entries(Index dim) {
    Mat a(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) a(i, j) = next_complex_gaussian();
    Mat rho = a * a.adjoint();
    rho /= rho.trace().real();
    return rho;
  }

 private:
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace relaxctl
