#pragma once

#include "qpns/top.hpp"

namespace qpns {

// -- bilinear term -------------------------------------------------------------

/// Convolution kernel of N(v1, v2) = grad_perp (-Delta)^{-1} v1 . grad v2:
/// pairs (xi1, xi2) contribute (xi1 x xi2) / |xi1|^2 with
/// xi1 x xi2 = xi1_1 xi2_2 - xi1_2 xi2_1 (zero when xi2 || xi1; exact zero
/// when xi1 + xi2 = 0, so the output has zero space average).
double bilinear_kernel(const XMode& xi1, const XMode& xi2);

/// N(v1, v2) by exact spectral convolution on the shared zero-average
/// lattice.
Field bilinear_N(const Field& v1, const Field& v2);

/// The Toeplitz matrix of h -> N(v, h) (transport by v's velocity field).
TOp bilinear_left_top(const Field& v);
/// The Toeplitz matrix of h -> N(h, v) (order -1 remainder at v).
TOp bilinear_right_top(const Field& v);
/// dQ(v)[h] = N(v, h) + N(h, v) as a TOp.
TOp dQ_top(const Field& v);

// -- the nonlinear functional --------------------------------------------------

/// F_nu(v) = L0 v - nu Lap v + eps (Pi0perp Q(v) - F), Q(v) = N(v, v).
Field eval_F_nu(const Field& v, const Field& F, const ParameterPoint& lambda,
                double eps, double nu);

/// Forcing built from cosine modes; even(phi,x), zero space average.
Field build_forcing(const Lattice& lat, const std::vector<ForcingMode>& modes);

// -- Euler solve ---------------------------------------------------------------

struct EulerReport {
  double residual = 0.0;
  double odd_violation = 0.0;
  double reality_violation = 0.0;
  double v_norm_s0 = 0.0;
  double v_norm_over_eps_a = 0.0;  // ||v_e||_{s0} / eps^a, recorded only
  int iterations = 0;
  bool converged = false;
};

/// Newton iteration from v = 0 for L0 v + eps(Q(v) - F) = 0, each linear
/// step solved by the dense LU oracle on the truncated lattice.
Field solve_euler(const Field& F, const ParameterPoint& lambda,
                  const SolverConfig& cfg, EulerReport* report = nullptr);

}  // namespace qpns

#include "qpns/reduced_form.hpp"

namespace qpns {

// -- viscous approximation and correction ---------------------------------------

struct ApproximateSolution {
  Field v1;     // L_e^{-1} Lap v_e
  Field v_app;  // v_e + nu v1
  double v1_residual = 0.0;       // ||L_e v1 - Lap v_e|| / ||Lap v_e||
  double defect_norm_s0 = 0.0;    // ||F_nu(v_app)||_{s0}
  double identity_error = 0.0;    // F_nu(v_app) vs nu^2(-Lap v1 + eps Q(v1))
};

/// v_app = v_e + nu v1 with v1 = L_e^{-1} Lap v_e; reports the O(nu^2)
/// defect and the algebraic identity
/// F_nu(v_app) = F_0(v_e) + nu (L_e v1 - Lap v_e) + nu^2 (-Lap v1 + eps Q(v1)).
ApproximateSolution build_approximate(const Field& v_e, const ReducedForm& rf,
                                      double nu, const Field& F,
                                      const SolverConfig& cfg);

struct FixedPointReport {
  int iterations = 0;
  double last_step = 0.0;
  double residual = 0.0;     // ||F_nu(v_nu)||_{s0}
  double max_psi_norm = 0.0; // ball monitor
  bool converged = false;
  bool ball_escape = false;
};

/// Picard iteration psi <- -L_nu^{-1}(F_nu(v_app) + eps nu dQ(v1)[psi]
/// + eps Q(psi)) from psi = 0; returns v_nu = v_app + psi.
Field fixed_point_solve(const ApproximateSolution& approx, const Field& v_e,
                        const ReducedForm& rf, double nu, const Field& F,
                        const SolverConfig& cfg,
                        FixedPointReport* report = nullptr);

struct SweepRow {
  double eps = 0.0;
  double nu = 0.0;
  double s = 0.0;
  double diff_norm = 0.0;  // ||v_nu - v_e||_{s0}
  double residual = 0.0;   // ||F_nu(v_nu)||_{s0}
  double sup_diff = 0.0;   // oversampled grid sup of |v_nu - v_e|
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double slope = 0.0;      // log-log fit of diff_norm vs nu
  double sup_slope = 0.0;  // same for the sup-norm column
  bool slope_defined = false;
};

/// Solves v_nu for every nu in the grid and fits the convergence rate.
SweepResult nu_sweep(const Field& v_e, const ReducedForm& rf,
                     const std::vector<double>& nu_grid, const Field& F,
                     const SolverConfig& cfg);

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are
/// rejected. Undefined (returns false) for fewer than two points.
bool fit_loglog_slope(const std::vector<std::pair<double, double>>& xy,
                      double* slope);

struct SupNormRow {
  int t_order = 0;              // d_t iterations (through w.d_phi)
  std::array<int, 2> x_order{0, 0};
  double sup = 0.0;
  double sobolev_bound = 0.0;   // embedding-direction bound at s0
};

/// Sup over an oversampled uniform (phi, x) grid of derivatives of
/// (u - w), the time-uniform difference surrogate.
std::vector<SupNormRow> supnorm_diff(
    const Field& u, const Field& w,
    const std::vector<std::pair<int, std::array<int, 2>>>& derivatives,
    const ParameterPoint& lambda, int oversample = 4);

}  // namespace qpns
