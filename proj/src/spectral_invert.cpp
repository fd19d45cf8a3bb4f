#include "qpns/spectral_invert.hpp"

#include <sstream>

#include "qpns/param_measure.hpp"

namespace qpns {

TOp assemble_R_nu_unit(const TOp& Phi, const TOp& Phi_inv,
                       const TOp& R2_nu_unit) {
  const Lattice& lat = Phi.lattice();
  TOp mL = TOp::minus_laplacian(lat);
  TOp Pm = Phi - TOp::identity(lat);
  TOp Pim = Phi_inv - TOp::identity(lat);
  TOp out = compose(mL, Pm) + compose(Pim, compose(mL, Phi)) +
            compose(Phi_inv, compose(R2_nu_unit, Phi));
  out.set_order(2.0);
  return out;
}

Field apply_diag_viscous(const Spectrum& spec, double nu, const Field& u) {
  const Lattice& lat = u.lattice();
  Field out(lat);
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = spec.lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < lat.n_x(); ++xi)
      out.coeff(li, xi) =
          (kI * wl + spec.mu(xi) + nu * lat.x_abs2(xi)) * u.coeff(li, xi);
  }
  return out;
}

Field invert_diag_viscous(const Spectrum& spec, double nu, const Field& rhs,
                          double re_tol) {
  if (nu <= 0) throw std::invalid_argument("invert_diag_viscous: nu > 0 required");
  double re = spec.max_re_q();
  if (re > re_tol)
    throw ConvergenceError(
        "invert_diag_viscous: spectrum real part " + std::to_string(re) +
        " above tolerance");
  const Lattice& lat = rhs.lattice();
  Field out(lat);
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = spec.lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      // Purely imaginary normalization keeps |divisor| >= nu |j|^2 exact.
      double im = wl + spec.lambda.zeta_dot(lat.x_mode(xi)) + spec.q(xi).imag();
      Cx div(nu * lat.x_abs2(xi), im);
      out.coeff(li, xi) = rhs.coeff(li, xi) / div;
    }
  }
  return out;
}

Field invert_L_nu(const ReducedForm& rf, double nu, const Field& rhs,
                  const SolverConfig& cfg, InvertReport* report) {
  if (nu <= 0) throw std::invalid_argument("invert_L_nu: nu > 0 required");
  Field g = rf.apply_W_inv(rhs);
  Field y0 = invert_diag_viscous(rf.spectrum, nu, g);
  auto T = [&](const Field& y) {
    return invert_diag_viscous(rf.spectrum, nu,
                               Cx(nu, 0) * rf.R_nu_unit.apply(y));
  };
  InvertReport rep;
  Field y = y0;
  double base = y0.coeffs().norm();
  for (rep.neumann_iterations = 1;
       rep.neumann_iterations <= cfg.vector_neumann_max_iter;
       ++rep.neumann_iterations) {
    Field Ty = T(y);
    double yn = y.coeffs().norm();
    rep.contraction = yn > 0 ? Ty.coeffs().norm() / yn : 0.0;
    if (rep.contraction >= 1.0)
      throw ConvergenceError("invert_L_nu: Neumann contraction factor " +
                             std::to_string(rep.contraction) + " >= 1");
    Field y_next = y0 - Ty;
    double step = (y_next - y).coeffs().norm();
    y = std::move(y_next);
    if (step <= cfg.vector_neumann_tol * std::max(base, 1e-300)) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw ConvergenceError("invert_L_nu: Neumann iteration cap reached");
  if (report) *report = rep;
  return rf.apply_W(y);
}

Field invert_L_e(const ReducedForm& rf, const Field& rhs,
                 const SolverConfig& cfg) {
  ScanResult mel = is_melnikov1(rf.spectrum, rf.gamma, rf.tau);
  if (!mel.ok) {
    std::ostringstream os;
    os << "invert_L_e: first Melnikov failure, margin " << mel.worst_margin
       << " at l = (";
    for (size_t q = 0; q < mel.worst_l.size(); ++q)
      os << (q ? "," : "") << mel.worst_l[q];
    os << "), j = (" << mel.worst_j[0] << "," << mel.worst_j[1] << ")";
    throw NonResonanceError(os.str());
  }
  const Lattice& lat = rhs.lattice();
  Field g = rf.apply_W_inv(rhs);
  Field y(lat);
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = rf.lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < lat.n_x(); ++xi)
      y.coeff(li, xi) = g.coeff(li, xi) / (kI * wl + rf.spectrum.mu(xi));
  }
  (void)cfg;
  return rf.apply_W(y);
}

MatC dense_assemble(const Lattice& lat, const FieldOp& op) {
  const long n = lat.n_modes();
  MatC M(n, n);
  for (long c = 0; c < n; ++c) {
    VecC e = VecC::Zero(n);
    e(c) = Cx(1, 0);
    Field col = op(field_from_flat(lat, e));
    M.col(c) = flat_from_field(col);
  }
  return M;
}

MatC dense_linearized(const Lattice& lat, const ParameterPoint& lambda,
                      double nu, const TOp* extra) {
  const long n = lat.n_modes();
  const int nx = lat.n_x();
  MatC M = MatC::Zero(n, n);
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < nx; ++xi) {
      long r = static_cast<long>(li) * nx + xi;
      M(r, r) = kI * (wl + lambda.zeta_dot(lat.x_mode(xi))) +
                nu * lat.x_abs2(xi);
    }
  }
  if (extra) {
    const PhiOffsetBox& box = extra->offsets();
    for (int lo = 0; lo < lat.n_phi(); ++lo)
      for (int li = 0; li < lat.n_phi(); ++li) {
        int k = box.index(PhiOffsetBox::sub(lat.phi_mode(lo), lat.phi_mode(li)));
        if (k < 0) continue;
        M.block(static_cast<long>(lo) * nx, static_cast<long>(li) * nx, nx, nx) +=
            extra->block(k);
      }
  }
  return M;
}

DenseSolver::DenseSolver(const Lattice& lat, MatC matrix)
    : lat_(lat), mat_(std::move(matrix)), lu_(mat_) {}

Field DenseSolver::solve(const Field& rhs) const {
  if (rhs.lattice() != lat_)
    throw std::invalid_argument("DenseSolver::solve: lattice mismatch");
  VecC x = lu_.solve(flat_from_field(rhs));
  return field_from_flat(lat_, x);
}

double DenseSolver::residual(const Field& rhs, const Field& sol) const {
  VecC b = flat_from_field(rhs);
  VecC x = flat_from_field(sol);
  double bn = b.norm();
  return bn > 0 ? (mat_ * x - b).norm() / bn : (mat_ * x).norm();
}

Field field_from_flat(const Lattice& lat, const VecC& flat) {
  Field f(lat);
  const int nx = lat.n_x();
  for (int li = 0; li < lat.n_phi(); ++li)
    f.coeffs().col(li) = flat.segment(static_cast<long>(li) * nx, nx);
  return f;
}

VecC flat_from_field(const Field& u) {
  const Lattice& lat = u.lattice();
  const int nx = lat.n_x();
  VecC flat(lat.n_modes());
  for (int li = 0; li < lat.n_phi(); ++li)
    flat.segment(static_cast<long>(li) * nx, nx) = u.coeffs().col(li);
  return flat;
}

}  // namespace qpns
