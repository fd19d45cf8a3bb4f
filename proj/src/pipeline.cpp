#include "qpns/pipeline.hpp"

namespace qpns {

Field apply_L_nu_direct(const Field& v_e, const ParameterPoint& lambda,
                        double eps, double nu, const Field& u) {
  Field out = transport_L0(u, lambda);
  if (nu != 0.0) out = out - nu * laplacian(u);
  out = out + eps * (bilinear_N(v_e, u) + bilinear_N(u, v_e));
  return out;
}

ReducedForm reduce_linearized(const Field& v_e, const SolverConfig& cfg,
                              PipelineDiagnostics* diag) {
  const Lattice& lat = v_e.lattice();
  if (!lat.zero_average())
    throw std::invalid_argument("reduce_linearized: zero-average lattice required");
  const ParameterPoint& lambda = cfg.lambda;
  const double gamma = cfg.gamma_eff();
  const double tau = cfg.tau_eff();

  // Divisors live on the doubled offset box: scan that far.
  double K = 2.0 * lat.L_max() * std::sqrt(double(lat.d())) +
             2.0 * std::sqrt(2.0) * (2.0 * lat.J_max()) + 1.0;
  ScanResult dio = is_diophantine(lambda, gamma, tau, K);
  if (!dio.ok)
    throw NonResonanceError("reduce_linearized: Diophantine scan failed, margin " +
                            std::to_string(dio.worst_margin));

  PipelineDiagnostics d;

  auto [a1, a2] = grad_perp_inv_lap(v_e);
  VectorField a{a1, a2};
  Straightening S =
      build_straightening(a, lambda, cfg.eps, cfg.alpha_tol, cfg.alpha_max_iter);
  d.alpha = S.alpha_report;
  d.straighten_roundtrip = S.roundtrip_error;
  d.reality_A = is_real(S.A);
  d.rev_pres_A = is_reversibility_preserving(S.A);

  L1Parts l1 = conjugate_L1(v_e, S, lambda, cfg.eps, cfg.s0_eff());
  d.r1_norm = l1.r1_norm_s0;
  d.reality_R1 = is_real(l1.R1);
  d.reversible_R1 = is_reversible(l1.R1);

  const int M = cfg.M_eff();
  SmoothingReduction sr = run_smoothing_reduction(l1, M, lambda, cfg);
  d.q_norm = sr.q_norm;
  d.r2_norm = sr.r2_norm_s0;
  d.r2nu_norm = sr.r2nu_norm_s0;
  d.smoothing_steps = sr.steps;

  KamSchedule sched =
      KamSchedule::make(tau, cfg.N0, cfg.kam_n_max, cfg.kam_tol, M);
  KamResult kr = run_kam(sr.Q, sr.R2, sched, lambda, cfg);
  if (kr.cantor_failure_step >= 0)
    throw NonResonanceError("reduce_linearized: Cantor conditions failed at step " +
                            std::to_string(kr.cantor_failure_step));
  if (!kr.converged)
    throw ConvergenceError("reduce_linearized: KAM remainder " +
                           std::to_string(kr.final_R_norm) +
                           " after n_max steps");
  d.kam_steps = kr.steps;
  d.kam_final_R_norm = kr.final_R_norm;
  d.max_re_q = kr.spectrum.max_re_q();
  d.q_decay_constant = kr.spectrum.weighted_sup() / cfg.eps;

  ReducedForm rf;
  rf.lat = lat;
  rf.lambda = lambda;
  rf.eps = cfg.eps;
  rf.gamma = gamma;
  rf.tau = tau;
  rf.alpha = S.alpha;
  rf.breve = S.breve;
  rf.A = S.A;
  rf.A_inv = S.Ainv;
  rf.T_stack = sr.T_stack;
  rf.B = sr.B;
  rf.B_inv = sr.B_inv;
  rf.psi_stack = kr.psi_stack;
  rf.Phi = kr.Phi;
  rf.Phi_inv = kr.Phi_inv;
  rf.W = compose(compose(rf.A, rf.B), rf.Phi);
  rf.W_inv = compose(rf.Phi_inv, compose(rf.B_inv, rf.A_inv));
  rf.spectrum = kr.spectrum;
  rf.Q = sr.Q;
  rf.R2 = sr.R2;
  rf.R_nu_unit = assemble_R_nu_unit(kr.Phi, kr.Phi_inv, sr.R2_nu_unit);
  rf.kam_final_R_norm = kr.final_R_norm;

  if (diag) *diag = d;
  return rf;
}

}  // namespace qpns
