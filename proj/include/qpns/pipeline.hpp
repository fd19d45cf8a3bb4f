#pragma once

#include "qpns/ns_solver.hpp"
#include "qpns/param_measure.hpp"
#include "qpns/spectral_invert.hpp"

namespace qpns {

struct PipelineDiagnostics {
  AlphaReport alpha;
  double straighten_roundtrip = 0.0;
  double r1_norm = 0.0;
  double q_norm = 0.0;
  double r2_norm = 0.0;
  double r2nu_norm = 0.0;
  std::vector<ReduceStepDiag> smoothing_steps;
  std::vector<KamStepDiag> kam_steps;
  double kam_final_R_norm = 0.0;
  double max_re_q = 0.0;
  double q_decay_constant = 0.0;  // sup_j |q(j)| |j| / eps
  PredicateReport reality_A, rev_pres_A, reality_R1, reversible_R1;
};

/// Straightening + smoothing order reduction + KAM reducibility, producing
/// the full transform stack and the final spectrum for one (lambda, eps).
ReducedForm reduce_linearized(const Field& v_e, const SolverConfig& cfg,
                              PipelineDiagnostics* diag = nullptr);

/// The direct linearized operator L_nu u = L0 u - nu Lap u + eps dQ(v_e)[u]
/// evaluated without any reduction (reference path for residual checks).
Field apply_L_nu_direct(const Field& v_e, const ParameterPoint& lambda,
                        double eps, double nu, const Field& u);

}  // namespace qpns
