#pragma once

#include "qpns/smooth_reduce.hpp"

namespace qpns {

/// Scale and exponent bookkeeping of the quadratic scheme:
/// N_{-1} = 1, N_n = N0^{chi^n}, chi = 3/2, M = [4 tau] + 1,
/// tau1 = 4 tau + 2 + M, alpha = (1 + chi^{-1}) tau1 + 1, beta = alpha + 1.
struct KamSchedule {
  double N0 = 2.0;
  double chi = 1.5;
  int M = 0;
  double tau = 0.0;
  double tau1 = 0.0;
  double alpha_exp = 0.0;
  double beta = 0.0;
  int n_max = 12;
  double kam_tol = 1e-12;  // relative to the initial remainder norm

  static KamSchedule make(double tau, double N0, int n_max, double kam_tol,
                          int M_override = 0);
  double N(int n) const;  // N_{-1} = 1 at n = -1
};

/// Diagonal data mu(j) = i zeta.j + q(j) over the x-modes of a lattice.
struct Spectrum {
  Lattice lat;
  ParameterPoint lambda;
  VecC q;  // per x-mode

  Cx mu(int xi) const {
    return kI * lambda.zeta_dot(lat.x_mode(xi)) + q(xi);
  }
  double max_re_q() const;
  double sym_violation() const;  // max |q(j) + q(-j)|
  /// max_j |q(j)| |j|.
  double weighted_sup() const;
};

struct CantorCheck {
  bool ok = false;
  double worst_margin = 0.0;  // min |divisor| * <l>^tau |j|^tau |j'|^tau / gamma
  PhiMode worst_l;
  XMode worst_j{0, 0}, worst_jp{0, 0};
};

/// Second Melnikov conditions at scale N: |i w.l + mu(j) - mu(j')| >=
/// gamma_factor * gamma / (<l>^tau |j|^tau |j'|^tau) for (l, j, j') !=
/// (0, j, j), |l|, |j - j'| <= N. Offsets l range over the doubled box.
CantorCheck cantor_check_step(const Spectrum& spec, double gamma, double tau,
                              double N, double gamma_factor = 1.0);

/// Solution of the reducibility homological equation at scale N: entries
/// -R^(l)_j^{j'} / (i w.l + mu(j) - mu(j')) on |l|, |j-j'| <= N away from
/// the (0, j, j) diagonal, zero elsewhere.
TOp kam_homological_solution(const Spectrum& spec, const TOp& R_n, double N);

struct KamStepResult {
  TOp Psi;
  TOp Phi_inv;  // (Id + Psi)^{-1}
  Spectrum spec_next;
  TOp R_next;
};

/// One reducibility step at scale N_n: Psi supported on |l|, |j-j'| <= N_n,
/// entries -R^(l)_j^{j'} / (i w.l + mu(j) - mu(j')); updates
/// q_{n+1}(j) = q_n(j) + R^(0)_j^j and
/// R_{n+1} = PiN^perp R + (Phi^{-1} - Id)(D_R + PiN^perp R) + Phi^{-1} R Psi.
KamStepResult kam_step(const Spectrum& spec, const TOp& R_n,
                       const KamSchedule& sched, int n,
                       const SolverConfig& cfg);

struct KamStepDiag {
  int n = 0;
  double Nn = 0.0;
  double R_norm_s0 = 0.0;  // |R_n|_{-M, s0} entering the step
  double worst_margin = 0.0;
  double sup_dq = 0.0;  // sup_j |q_{n+1}(j) - q_n(j)|
};

struct KamResult {
  std::vector<TOp> psi_stack;
  TOp Phi, Phi_inv;  // composed product of the Phi_n
  Spectrum spectrum;
  std::vector<KamStepDiag> steps;
  double final_R_norm = 0.0;
  bool converged = false;
  int cantor_failure_step = -1;  // >= 0 when a scale failed the conditions
};

/// Full reducibility loop from (Q0, R0); stops when |R_n|_{-M,s0} falls
/// below kam_tol relative to the initial norm (or n_max steps). A Cantor
/// failure returns the partial result flagged with the failing step.
KamResult run_kam(const VecC& Q0, const TOp& R0, const KamSchedule& sched,
                  const ParameterPoint& lambda, const SolverConfig& cfg);

/// Non-resonance of the final eigenvalues: full lattice-range scan with the
/// 2 gamma threshold.
CantorCheck final_cantor_membership(const Spectrum& spec, double gamma,
                                    double tau);

}  // namespace qpns
