#include "qpns/smooth_reduce.hpp"

namespace qpns {

ReduceStepResult reduce_order_step(const VecC& Z_n, const TOp& R_n,
                                   const ParameterPoint& lambda,
                                   const SolverConfig& cfg) {
  const Lattice& lat = R_n.lattice();
  ReduceStepResult out;
  TOp K = solve_descent_homological(R_n, lambda);
  out.T = TOp::identity(lat) + K;
  TOp H = neumann_invert(K, K.order(), cfg.s0_eff(), cfg.neumann_tol,
                         cfg.neumann_max_terms);
  out.T_inv = TOp::identity(lat) + H;
  out.Z_next = Z_n + diag_entries(R_n);
  TOp Z_next_top = TOp::x_diagonal(lat, out.Z_next, -1.0);
  TOp Z_n_top = TOp::x_diagonal(lat, Z_n, -1.0);
  // R_{n+1} = (T^{-1} - Id) Z_{n+1} + T^{-1} (Z_n K + R_n K)
  TOp ZK = compose(Z_n_top, K) + compose(R_n, K);
  out.R_next = compose(H, Z_next_top) + ZK + compose(H, ZK);
  out.R_next.set_order(R_n.order() - 1.0);
  return out;
}

SmoothingReduction run_smoothing_reduction(const L1Parts& l1, int M,
                                           const ParameterPoint& lambda,
                                           const SolverConfig& cfg) {
  if (M < 1) throw std::invalid_argument("run_smoothing_reduction: M >= 1");
  const Lattice& lat = l1.R1.lattice();
  SmoothingReduction out;
  out.B = TOp::identity(lat);
  out.B_inv = TOp::identity(lat);
  out.Q = VecC::Zero(lat.n_x());
  TOp R = l1.R1;
  for (int n = 0; n + 1 < M; ++n) {
    ReduceStepResult step = reduce_order_step(out.Q, R, lambda, cfg);
    out.Q = step.Z_next;
    R = step.R_next;
    out.B = compose(out.B, step.T);
    out.B_inv = compose(step.T_inv, out.B_inv);
    out.T_stack.push_back(std::move(step.T));
    ReduceStepDiag d;
    d.n = n + 1;
    d.R_norm = decay_norm(R, -double(n + 2), cfg.s0_eff());
    out.steps.push_back(d);
  }
  out.R2 = R;
  out.R2.set_order(-double(M));
  // R_nu^(2) = -nu( Lap (B - Id) + (B^{-1} - Id) Lap B ) + B^{-1} Rnu1 B;
  // with mL = -Lap this is nu ( mL (B - Id) + (B^{-1} - Id) mL B ) + ...
  TOp mL = TOp::minus_laplacian(lat);
  TOp Bm = out.B - TOp::identity(lat);
  TOp Binvm = out.B_inv - TOp::identity(lat);
  out.R2_nu_unit = compose(mL, Bm) + compose(Binvm, compose(mL, out.B)) +
                   compose(out.B_inv, compose(l1.R_nu_unit, out.B));
  out.R2_nu_unit.set_order(2.0);
  for (int xi = 0; xi < lat.n_x(); ++xi)
    out.q_norm = std::max(out.q_norm, std::abs(out.Q(xi)) * lat.x_abs(xi));
  out.r2_norm_s0 = decay_norm(out.R2, -double(M), cfg.s0_eff());
  out.r2nu_norm_s0 = decay_norm(out.R2_nu_unit, 2.0, cfg.s0_eff());
  return out;
}

}  // namespace qpns
