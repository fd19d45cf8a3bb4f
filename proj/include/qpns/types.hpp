#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qpns {

using Cx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;

inline constexpr Cx kI{0.0, 1.0};

/// Thrown when a parameter point fails a required non-resonance scan.
struct NonResonanceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when an iterative solver fails to reach its tolerance.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// pow with a fast path for small integer exponents (the non-resonance
/// scans hit this in tight loops).
inline double pow_fast(double x, double e) {
  int n = static_cast<int>(e);
  if (e == n && n >= 0 && n <= 8) {
    double r = 1.0;
    for (int k = 0; k < n; ++k) r *= x;
    return r;
  }
  return std::pow(x, e);
}

/// Deterministic 64-bit generator (splitmix64), identical output on any
/// platform. Used everywhere a seeded stream is required.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  Cx unit_complex() {
    double re = 2.0 * uniform() - 1.0;
    double im = 2.0 * uniform() - 1.0;
    return Cx(re, im);
  }

 private:
  std::uint64_t state_;
};

}  // namespace qpns
