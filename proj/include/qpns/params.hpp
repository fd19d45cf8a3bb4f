#pragma once

#include <cmath>
#include <vector>

#include "qpns/types.hpp"

namespace qpns {

/// lambda = (omega, zeta) in R^d x R^2: time frequencies and the constant
/// velocity field.
struct ParameterPoint {
  std::vector<double> omega;  // length d
  std::array<double, 2> zeta{0.0, 0.0};

  int d() const { return static_cast<int>(omega.size()); }

  double omega_dot(const std::vector<int>& l) const {
    double s = 0;
    for (size_t k = 0; k < omega.size(); ++k) s += omega[k] * l[k];
    return s;
  }
  double zeta_dot(const std::array<int, 2>& j) const {
    return zeta[0] * j[0] + zeta[1] * j[1];
  }

  double dist(const ParameterPoint& o) const {
    double s = 0;
    for (size_t k = 0; k < omega.size(); ++k) {
      double dd = omega[k] - o.omega[k];
      s += dd * dd;
    }
    for (int k = 0; k < 2; ++k) {
      double dd = zeta[k] - o.zeta[k];
      s += dd * dd;
    }
    return std::sqrt(s);
  }
};

/// tau := max{d, 2} + 1.
inline double default_tau(int d) { return std::max(d, 2) + 1; }
/// gamma := eps^{a/2}.
inline double default_gamma(double eps, double ansatz_a) {
  return std::pow(eps, ansatz_a / 2.0);
}
/// Smallest admissible base regularity: floor((d+2)/2) + 2.
inline int min_s0(int d) { return (d + 2) / 2 + 2; }

/// One forcing term F += amplitude * cos(l.phi + j.x).
struct ForcingMode {
  std::vector<int> ell;
  std::array<int, 2> j{1, 1};
  double amplitude = 1.0;
};

struct SolverConfig {
  int d = 1;
  int L_max = 6;
  int J_max = 4;
  double eps = 1e-3;
  double nu = 1e-2;
  double ansatz_a = 0.5;
  double gamma = 0.0;  // 0 -> default_gamma(eps, ansatz_a)
  double tau = 0.0;    // 0 -> default_tau(d)
  int s0 = 0;          // 0 -> min_s0(d)
  double s = 0.0;      // 0 -> s0 + 2

  double newton_tol = 1e-11;
  int newton_max_iter = 25;
  double kam_tol = 1e-12;  // relative to the initial KAM remainder norm
  int kam_n_max = 12;
  double fixpoint_tol = 1e-11;
  int fixpoint_max_iter = 60;
  double alpha_tol = 1e-13;
  int alpha_max_iter = 50;
  double neumann_tol = 1e-14;
  int neumann_max_terms = 60;
  double vector_neumann_tol = 1e-13;
  int vector_neumann_max_iter = 200;

  double N0 = 2.0;
  int M_override = 0;  // 0 -> [4 tau] + 1

  ParameterPoint lambda;
  std::vector<ForcingMode> forcing;

  std::vector<double> nu_grid;     // sweep grid
  std::vector<double> gamma_list;  // measure experiment
  int n_samples = 4000;
  std::uint64_t seed = 1;
  int threads = 1;

  // Resolved accessors.
  double tau_eff() const { return tau > 0 ? tau : default_tau(d); }
  double gamma_eff() const {
    return gamma > 0 ? gamma : default_gamma(eps, ansatz_a);
  }
  int s0_eff() const { return s0 > 0 ? s0 : min_s0(d); }
  double s_eff() const { return s > 0 ? s : s0_eff() + 2.0; }
  int M_eff() const {
    return M_override > 0 ? M_override
                          : static_cast<int>(std::floor(4.0 * tau_eff())) + 1;
  }

  void validate() const;
};

}  // namespace qpns
