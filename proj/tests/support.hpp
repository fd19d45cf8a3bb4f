#pragma once

#include <doctest.h>

#include "qpns/pipeline.hpp"

namespace qpns::test {

/// Desk-scale lattice used across the unit tests (smaller than the demo
/// config so the suites stay fast).
inline Lattice small_lattice(bool zero_average = true) {
  return Lattice(1, 3, 2, zero_average);
}

// Passes the Diophantine scan (doubled-offset range of the demo box) and
// both Melnikov scans with q = 0 at gamma = 1e-3^{0.35}, tau = 3, margin
// 2.8 (deterministic search, seed 23).
inline ParameterPoint lambda_generic() {
  ParameterPoint p;
  p.omega = {1.2080075941928361};
  p.zeta = {0.85224724396916274, 1.4881527305196611};
  return p;
}

inline SolverConfig small_config() {
  SolverConfig cfg;
  cfg.d = 1;
  cfg.L_max = 3;
  cfg.J_max = 2;
  cfg.lambda = lambda_generic();
  cfg.forcing = {{std::vector<int>{1}, {1, 1}, 1.0}};
  return cfg;
}

inline double rel_err(const Field& got, const Field& want) {
  double wn = want.coeffs().norm();
  return wn > 0 ? (got - want).coeffs().norm() / wn
                : got.coeffs().norm();
}

}  // namespace qpns::test
