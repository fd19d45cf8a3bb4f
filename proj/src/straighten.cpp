#include "qpns/straighten.hpp"

#include "qpns/ns_solver.hpp"

namespace qpns {

namespace {

/// Harmonic count n with (eta^n / n!) <= tol for the phase scale eta.
int harmonic_count(double eta, double tol) {
  double amp = 1.0;
  int n = 0;
  while (amp > tol && n < 16) {
    ++n;
    amp *= eta / n;
  }
  return n;
}

double phase_eta(const VectorField& alpha) {
  // |j . alpha| <= |j|_1 sup|alpha| <= 2 J_max sup|alpha|.
  return 2.0 * alpha.lattice().J_max() * alpha.sup_bound();
}

Field diag_transport_inverse(const Field& rhs, const ParameterPoint& lambda,
                             double floor = 1e-13) {
  const Lattice& lat = rhs.lattice();
  Field out(lat, rhs.parity() == Parity::None
                     ? Parity::None
                     : (rhs.parity() == Parity::Even ? Parity::Odd : Parity::Even));
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      Cx c = rhs.coeff(li, xi);
      if (c == Cx(0, 0)) continue;
      double div = wl + lambda.zeta_dot(lat.x_mode(xi));
      if (std::abs(div) < floor)
        throw NonResonanceError("transport inversion: vanishing divisor");
      out.coeff(li, xi) = c / (kI * div);
    }
  }
  return out;
}

}  // namespace

double VectorField::sup_bound() const {
  double s1 = c1.coeffs().cwiseAbs().sum();
  double s2 = c2.coeffs().cwiseAbs().sum();
  return std::max(s1, s2);
}

Field apply_transport(const VectorField& a, const ParameterPoint& lambda,
                      double eps, const Field& u) {
  Field out = transport_L0(u, lambda);
  if (eps != 0.0) {
    out = out + eps * (pointwise_product(a.c1, dx(u, 0)) +
                       pointwise_product(a.c2, dx(u, 1)));
  }
  return out;
}

VectorField solve_alpha(const VectorField& a, const ParameterPoint& lambda,
                        double eps, double tol, int max_iter,
                        AlphaReport* report) {
  const Lattice& lat = a.lattice();
  VectorField alpha{Field(lat, Parity::Odd), Field(lat, Parity::Odd)};
  AlphaReport rep;
  if (eps == 0.0 || a.sup_bound() == 0.0) {
    rep.converged = true;
    if (report) *report = rep;
    return alpha;
  }
  auto residual = [&](const Field& ak, const Field& fk) {
    // G(alpha)_k = L0 a_k + eps a.grad a_k + eps f_k
    return transport_L0(ak, lambda) +
           eps * (pointwise_product(a.c1, dx(ak, 0)) +
                  pointwise_product(a.c2, dx(ak, 1))) +
           eps * fk;
  };
  const Field* comp_a[2] = {&a.c1, &a.c2};
  Field* comp_alpha[2] = {&alpha.c1, &alpha.c2};
  for (rep.iterations = 1; rep.iterations <= max_iter; ++rep.iterations) {
    double step = 0;
    for (int k = 0; k < 2; ++k) {
      Field r = residual(*comp_alpha[k], *comp_a[k]);
      Field delta = diag_transport_inverse(r, lambda);
      comp_alpha[k]->coeffs() -= delta.coeffs();
      step = std::max(step, delta.coeffs().norm());
    }
    if (step <= tol) {
      rep.converged = true;
      break;
    }
  }
  rep.pde_residual = std::max(residual(alpha.c1, a.c1).coeffs().norm(),
                              residual(alpha.c2, a.c2).coeffs().norm());
  rep.odd_violation = std::max(parity_violation(alpha.c1, Parity::Odd),
                               parity_violation(alpha.c2, Parity::Odd));
  if (!rep.converged)
    throw ConvergenceError("solve_alpha: no convergence in " +
                           std::to_string(max_iter) + " iterations");
  alpha.c1.set_parity(Parity::Odd);
  alpha.c2.set_parity(Parity::Odd);
  if (report) *report = rep;
  return alpha;
}

VectorField invert_diffeo(const VectorField& alpha, double tol,
                          double* roundtrip) {
  const Lattice& lat = alpha.lattice();
  VectorField breve{Field(lat, Parity::Odd), Field(lat, Parity::Odd)};
  if (alpha.sup_bound() == 0.0) {
    if (roundtrip) *roundtrip = 0.0;
    return breve;
  }
  double eta = phase_eta(alpha);
  int nh = harmonic_count(eta, 1e-14);
  int content_phi = lat.L_max() * (1 + nh);
  int content_x = lat.J_max() * (1 + nh);
  TorusGrid grid(lat.d(), content_phi + lat.L_max() + 2,
                 content_x + lat.J_max() + 2);
  MatC b1 = MatC::Zero(grid.x_count(), grid.phi_count());
  MatC b2 = b1;
  for (int it = 0; it < 80; ++it) {
    MatC n1 = -grid.eval_shifted(alpha.c1, b1, b2);
    MatC n2 = -grid.eval_shifted(alpha.c2, b1, b2);
    double step = std::max((n1 - b1).cwiseAbs().maxCoeff(),
                           (n2 - b2).cwiseAbs().maxCoeff());
    b1.swap(n1);
    b2.swap(n2);
    if (step <= tol) break;
    if (it == 79)
      throw ConvergenceError("invert_diffeo: fixed point not reached");
  }
  breve.c1 = grid.to_field(b1, lat);
  breve.c2 = grid.to_field(b2, lat);
  breve.c1.set_parity(Parity::Odd);
  breve.c2.set_parity(Parity::Odd);
  if (roundtrip) {
    MatC s1 = grid.eval(alpha.c1);
    MatC s2 = grid.eval(alpha.c2);
    MatC r1 = grid.eval_shifted(breve.c1, s1, s2);
    MatC r2 = grid.eval_shifted(breve.c2, s1, s2);
    *roundtrip = std::max((s1 + r1).cwiseAbs().maxCoeff(),
                          (s2 + r2).cwiseAbs().maxCoeff());
  }
  return breve;
}

Field compose_with_diffeo(const Field& h, const VectorField& alpha,
                          const Lattice& target) {
  if (alpha.sup_bound() == 0.0) return h.on_lattice(target);
  const Lattice& hl = h.lattice();
  double eta = 2.0 * hl.J_max() * alpha.sup_bound();
  int nh = harmonic_count(eta, 1e-14);
  int content_phi = hl.L_max() + nh * alpha.lattice().L_max();
  int content_x = hl.J_max() + nh * alpha.lattice().J_max();
  TorusGrid grid(hl.d(), content_phi + target.L_max() + 2,
                 content_x + target.J_max() + 2);
  MatC s1 = grid.eval(alpha.c1);
  MatC s2 = grid.eval(alpha.c2);
  MatC vals = grid.eval_shifted(h, s1, s2);
  Field out = grid.to_field(vals, target);
  return out;
}

TOp assemble_composition_top(const VectorField& alpha, const Lattice& base) {
  TOp out = TOp::identity(base);
  if (alpha.sup_bound() == 0.0) return out;
  out = TOp(base, 0.0);
  const int L = base.L_max(), J = base.J_max();
  Lattice col_lat(base.d(), 2 * L, J, base.zero_average());
  double eta = phase_eta(alpha);
  int nh = std::max(2, harmonic_count(eta, 1e-14));
  TorusGrid grid(base.d(), nh * L + 2 * L + 2, (1 + nh) * J + J + 2);
  MatC s1 = grid.eval(alpha.c1);
  MatC s2 = grid.eval(alpha.c2);
  // Cached transform matrices for the column lattice.
  MatC Ex = grid.x_eval_matrix(col_lat);
  MatC Ep = grid.phi_eval_matrix(col_lat);
  const PhiOffsetBox& box = out.offsets();
  for (int jp = 0; jp < base.n_x(); ++jp) {
    MatC vals = grid.exp_mode_shifted(base.x_mode(jp), s1, s2);
    MatC P = Ex.adjoint() * vals / double(grid.x_count());
    MatC C = P * Ep.conjugate() / double(grid.phi_count());  // n_x x n_phi(col)
    for (int li = 0; li < col_lat.n_phi(); ++li) {
      int k = box.index(col_lat.phi_mode(li));
      for (int j = 0; j < base.n_x(); ++j) {
        int cj = col_lat.x_index(base.x_mode(j));
        out.block(k)(j, jp) = C(cj, li);
      }
    }
  }
  return out;
}

Straightening build_straightening(const VectorField& a_velocity,
                                  const ParameterPoint& lambda, double eps,
                                  double tol, int max_iter) {
  Straightening S;
  S.lambda = lambda;
  S.eps = eps;
  S.alpha = solve_alpha(a_velocity, lambda, eps, tol, max_iter, &S.alpha_report);
  S.breve = invert_diffeo(S.alpha, std::max(tol, 1e-14), &S.roundtrip_error);
  const Lattice& base = a_velocity.lattice();
  S.A = assemble_composition_top(S.alpha, base);
  S.Ainv = assemble_composition_top(S.breve, base);
  return S;
}

TOp a_perp_conjugate(const TOp& R, const Straightening& S) {
  TOp out = compose(S.Ainv, compose(R, S.A));
  out.set_order(R.order());
  return out;
}

TOp conjugate_laplacian(const Straightening& S) {
  const Lattice& lat = S.alpha.lattice();
  if (S.alpha.sup_bound() == 0.0) return TOp(lat, 2.0);
  // Coefficient functions live on a widened box without the zero-average
  // restriction: the quadratic terms carry a nonzero mean and twice the
  // band of alpha, and every x-offset |j - j'| <= 2 J_max matters for the
  // base matrix.
  Lattice ext(lat.d(), 2 * lat.L_max(), 2 * lat.J_max(), false);
  Field a1 = S.alpha.c1.on_lattice(ext);
  Field a2 = S.alpha.c2.on_lattice(ext);
  const Field* comp[2] = {&a1, &a2};
  Field grad[2][2];  // grad[k][i] = d_{x_i} alpha_k
  for (int k = 0; k < 2; ++k)
    for (int i = 0; i < 2; ++i) grad[k][i] = dx(*comp[k], i);
  TOp out(lat, 2.0);
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 2; ++m) {
      // a_{km} = -(d_k alpha_m + d_m alpha_k + grad alpha_k . grad alpha_m)
      Field c = grad[m][k] + grad[k][m] +
                pointwise_product(grad[k][0], grad[m][0]) +
                pointwise_product(grad[k][1], grad[m][1]);
      Field conj_c = compose_with_diffeo(-1.0 * c, S.breve, ext);
      out += compose(from_multiplication(conj_c, &lat),
                     TOp::partial_xx(lat, k, m));
    }
  for (int k = 0; k < 2; ++k) {
    Field b = -1.0 * laplacian(*comp[k]);
    Field conj_b = compose_with_diffeo(b, S.breve, ext);
    out += compose(from_multiplication(conj_b, &lat), TOp::partial_x(lat, k));
  }
  out.set_order(2.0);
  return out;
}

L1Parts conjugate_L1(const Field& v_e, const Straightening& S,
                     const ParameterPoint& /*lambda*/, double eps, double s0) {
  const Lattice& lat = v_e.lattice();
  L1Parts parts;
  TOp R = bilinear_right_top(v_e);  // h -> N(h, v_e), order -1
  parts.R1 = eps * a_perp_conjugate(R, S);
  parts.R1.set_order(-1.0);
  // R_nu^(1) = nu Pi0perp (Lap - A^{-1} Lap A) Pi0perp = nu R_Delta,
  // assembled by direct conjugation so that it matches the A-algebra.
  TOp minus_lap = TOp::minus_laplacian(lat);
  parts.R_nu_unit = a_perp_conjugate(minus_lap, S) - minus_lap;
  parts.R_nu_unit.set_order(2.0);
  parts.r1_norm_s0 = decay_norm(parts.R1, -1.0, s0);
  parts.rnu_norm_s0 = decay_norm(parts.R_nu_unit, 2.0, s0);
  return parts;
}

}  // namespace qpns
