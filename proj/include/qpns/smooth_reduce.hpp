#pragma once

#include "qpns/straighten.hpp"

namespace qpns {

struct ReduceStepResult {
  TOp T;        // Id + K_{n+1}
  TOp T_inv;    // materialized inverse
  VecC Z_next;  // diagonal collection, x-mode entries
  TOp R_next;
};

struct ReduceStepDiag {
  int n = 0;
  double R_norm = 0.0;          // |R_{n+1}|_{-(n+2), s0}
  double conj_residual = -1.0;  // two-path check when requested
};

/// One order-lowering step: K = descent homological solution of R_n,
/// T = Id + K, Z_{n+1} = Z_n + diag(R_n),
/// R_{n+1} = (T^{-1} - Id) Z_{n+1} + T^{-1} (Z_n K + R_n K).
ReduceStepResult reduce_order_step(const VecC& Z_n, const TOp& R_n,
                                   const ParameterPoint& lambda,
                                   const SolverConfig& cfg);

struct SmoothingReduction {
  std::vector<TOp> T_stack;  // T_1 ... T_{M-1}
  TOp B, B_inv;              // composed transforms
  VecC Q;                    // diagonal of order -1 (exactly diagonal)
  TOp R2;                    // order -M remainder
  TOp R2_nu_unit;            // order 2; viscous remainder is nu * this
  std::vector<ReduceStepDiag> steps;
  double q_norm = 0.0;        // sup_j |j| |q(j)|
  double r2_norm_s0 = 0.0;    // |R2|_{-M, s0}
  double r2nu_norm_s0 = 0.0;  // |R2_nu_unit|_{2, s0}
};

/// Runs M-1 order-lowering steps on L^(1) = L0 + R1 and conjugates the
/// viscous part:  B = T_1 o ... o T_{M-1},  Q = Z_{M-1},
/// R2_nu = -( Lap (B - Id) + (B^{-1} - Id) Lap B ) + B^{-1} RnuUnit B.
SmoothingReduction run_smoothing_reduction(const L1Parts& l1, int M,
                                           const ParameterPoint& lambda,
                                           const SolverConfig& cfg);

}  // namespace qpns
