#include "qpns/kam.hpp"

#include <sstream>

namespace qpns {

KamSchedule KamSchedule::make(double tau, double N0, int n_max, double kam_tol,
                              int M_override) {
  KamSchedule s;
  s.N0 = N0;
  s.tau = tau;
  s.M = M_override > 0 ? M_override : static_cast<int>(std::floor(4.0 * tau)) + 1;
  s.tau1 = 4.0 * tau + 2.0 + s.M;
  s.alpha_exp = (1.0 + 1.0 / s.chi) * s.tau1 + 1.0;
  s.beta = s.alpha_exp + 1.0;
  s.n_max = n_max;
  s.kam_tol = kam_tol;
  return s;
}

double KamSchedule::N(int n) const {
  if (n < 0) return 1.0;
  return std::pow(N0, std::pow(chi, n));
}

double Spectrum::max_re_q() const {
  double m = 0;
  for (int xi = 0; xi < q.size(); ++xi) m = std::max(m, std::abs(q(xi).real()));
  return m;
}

double Spectrum::sym_violation() const {
  double m = 0;
  for (int xi = 0; xi < q.size(); ++xi)
    m = std::max(m, std::abs(q(xi) + q(lat.x_negate(xi))));
  return m;
}

double Spectrum::weighted_sup() const {
  double m = 0;
  for (int xi = 0; xi < q.size(); ++xi)
    m = std::max(m, std::abs(q(xi)) * lat.x_abs(xi));
  return m;
}

CantorCheck cantor_check_step(const Spectrum& spec, double gamma, double tau,
                              double N, double gamma_factor) {
  const Lattice& lat = spec.lat;
  PhiOffsetBox box(lat.d(), 2 * lat.L_max());
  CantorCheck out;
  out.worst_margin = std::numeric_limits<double>::infinity();
  out.worst_l = PhiMode(lat.d(), 0);
  for (int k = 0; k < box.size(); ++k) {
    if (box.abs(k) > N) continue;
    double wl = spec.lambda.omega_dot(box.mode(k));
    bool l_zero = box.abs(k) == 0.0;
    double lw = std::max(1.0, box.abs(k));
    for (int j = 0; j < lat.n_x(); ++j) {
      Cx mu_j = spec.mu(j);
      const XMode& xj = lat.x_mode(j);
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        if (l_zero && j == jp) continue;
        const XMode& xjp = lat.x_mode(jp);
        double d1 = xj[0] - xjp[0], d2 = xj[1] - xjp[1];
        if (std::sqrt(d1 * d1 + d2 * d2) > N) continue;
        double div = std::abs(kI * wl + mu_j - spec.mu(jp));
        double thr = gamma_factor * gamma /
                     (pow_fast(lw, tau) * pow_fast(lat.x_abs(j), tau) *
                      pow_fast(lat.x_abs(jp), tau));
        double margin = div / thr;
        if (margin < out.worst_margin) {
          out.worst_margin = margin;
          out.worst_l = box.mode(k);
          out.worst_j = xj;
          out.worst_jp = xjp;
        }
      }
    }
  }
  out.ok = out.worst_margin >= 1.0;
  return out;
}

TOp kam_homological_solution(const Spectrum& spec, const TOp& R_n, double N) {
  const Lattice& lat = R_n.lattice();
  const PhiOffsetBox& box = R_n.offsets();
  TOp psi(lat, 0.0);
  for (int k = 0; k < box.size(); ++k) {
    if (box.abs(k) > N) continue;
    double wl = spec.lambda.omega_dot(box.mode(k));
    bool l_zero = box.abs(k) == 0.0;
    const MatC& src = R_n.block(k);
    MatC& dst = psi.block(k);
    for (int j = 0; j < lat.n_x(); ++j) {
      Cx mu_j = spec.mu(j);
      const XMode& xj = lat.x_mode(j);
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        if (l_zero && j == jp) continue;
        const XMode& xjp = lat.x_mode(jp);
        double d1 = xj[0] - xjp[0], d2 = xj[1] - xjp[1];
        if (std::sqrt(d1 * d1 + d2 * d2) > N) continue;
        Cx v = src(j, jp);
        if (v == Cx(0, 0)) continue;
        Cx div = kI * wl + mu_j - spec.mu(jp);
        if (std::abs(div) < 1e-15)
          throw NonResonanceError("kam homological equation: vanishing divisor");
        dst(j, jp) = -v / div;
      }
    }
  }
  return psi;
}

KamStepResult kam_step(const Spectrum& spec, const TOp& R_n,
                       const KamSchedule& sched, int n,
                       const SolverConfig& cfg) {
  const Lattice& lat = R_n.lattice();
  const double N = sched.N(n);
  KamStepResult out;
  out.Psi = kam_homological_solution(spec, R_n, N);
  TOp H = neumann_invert(out.Psi, 0.0, cfg.s0_eff(), cfg.neumann_tol,
                         cfg.neumann_max_terms);
  out.Phi_inv = TOp::identity(lat) + H;
  out.spec_next = spec;
  out.spec_next.q += diag_entries(R_n);
  TOp PiPerp = op_project_N_perp(R_n, N);
  TOp D_R = diag_part(R_n);
  // R_{n+1} = PiN^perp R + (Phi^{-1} - Id)(D_R + PiN^perp R) + Phi^{-1} R Psi
  TOp RPsi = compose(R_n, out.Psi);
  out.R_next = PiPerp + compose(H, D_R + PiPerp) + RPsi + compose(H, RPsi);
  out.R_next.set_order(R_n.order());
  return out;
}

KamResult run_kam(const VecC& Q0, const TOp& R0, const KamSchedule& sched,
                  const ParameterPoint& lambda, const SolverConfig& cfg) {
  const Lattice& lat = R0.lattice();
  KamResult out;
  out.Phi = TOp::identity(lat);
  out.Phi_inv = TOp::identity(lat);
  out.spectrum = Spectrum{lat, lambda, Q0};
  const double s0 = cfg.s0_eff();
  const double M = double(sched.M);
  const double r_initial = decay_norm(R0, -M, s0);
  // Relative target, floored at 1e3 machine epsilons (absolute).
  const double stop = std::max(sched.kam_tol * r_initial,
                               1e3 * std::numeric_limits<double>::epsilon());
  TOp R = R0;
  for (int n = 0; n < sched.n_max; ++n) {
    double r_norm = decay_norm(R, -M, s0);
    out.final_R_norm = r_norm;
    if (r_norm <= stop) {
      out.converged = true;
      break;
    }
    CantorCheck cc =
        cantor_check_step(out.spectrum, cfg.gamma_eff(), cfg.tau_eff(), sched.N(n));
    if (!cc.ok) {
      out.cantor_failure_step = n;
      break;
    }
    KamStepResult step = kam_step(out.spectrum, R, sched, n, cfg);
    KamStepDiag d;
    d.n = n;
    d.Nn = sched.N(n);
    d.R_norm_s0 = r_norm;
    d.worst_margin = cc.worst_margin;
    d.sup_dq = (step.spec_next.q - out.spectrum.q).cwiseAbs().maxCoeff();
    out.steps.push_back(d);
    out.Phi = compose(out.Phi, TOp::identity(lat) + step.Psi);
    out.Phi_inv = compose(step.Phi_inv, out.Phi_inv);
    out.psi_stack.push_back(std::move(step.Psi));
    out.spectrum = std::move(step.spec_next);
    R = std::move(step.R_next);
    out.final_R_norm = decay_norm(R, -M, s0);
    if (out.final_R_norm <= stop) {
      out.converged = true;
      break;
    }
  }
  return out;
}

CantorCheck final_cantor_membership(const Spectrum& spec, double gamma,
                                    double tau) {
  return cantor_check_step(spec, gamma, tau,
                           std::numeric_limits<double>::infinity(), 2.0);
}

}  // namespace qpns
