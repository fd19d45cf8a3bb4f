#pragma once

#include <functional>

#include "qpns/reduced_form.hpp"

namespace qpns {

using FieldOp = std::function<Field(const Field&)>;

// -- diagonal / reduced inverses ----------------------------------------------

/// R_nu^(infty) = -( Lap (Phi - Id) + (Phi^{-1} - Id) Lap Phi )
///                + Phi^{-1} R2_nu_unit Phi, the nu-proportional part of the
/// conjugated viscous remainder (multiply by nu to get the operator).
TOp assemble_R_nu_unit(const TOp& Phi, const TOp& Phi_inv,
                       const TOp& R2_nu_unit);

/// Divides coefficients by i w.l + mu(j) + nu |j|^2. Each divisor magnitude
/// is at least nu |j|^2 once the spectrum is purely imaginary (validated
/// against re_tol, real parts are discarded for the division).
Field invert_diag_viscous(const Spectrum& spec, double nu, const Field& rhs,
                          double re_tol = 1e-12);

/// Forward action of the diagonal operator w.d_phi + D_infty - nu Lap.
Field apply_diag_viscous(const Spectrum& spec, double nu, const Field& u);

struct InvertReport {
  int neumann_iterations = 0;
  double contraction = 0.0;  // measured ||T y|| / ||y|| of the last sweep
  bool converged = false;
};

/// L_nu^{-1} rhs = W (Id + (L^inf_nu)^{-1} R_nu^inf)^{-1} (L^inf_nu)^{-1}
/// W^{-1} rhs; the Neumann inverse is applied iteratively to the vector.
Field invert_L_nu(const ReducedForm& rf, double nu, const Field& rhs,
                  const SolverConfig& cfg, InvertReport* report = nullptr);

/// L_e^{-1} rhs = W diag(1/(i w.l + mu(j))) W^{-1} rhs. Requires the first
/// Melnikov conditions; the worst margin is reported on failure.
Field invert_L_e(const ReducedForm& rf, const Field& rhs,
                 const SolverConfig& cfg);

// -- dense oracle ---------------------------------------------------------------

/// Flattened dense matrix of a linear operator, built by applying it to
/// every basis field. Mode order is the lattice's flat (l, j) order.
MatC dense_assemble(const Lattice& lat, const FieldOp& op);

/// Dense matrix of L0 + extra - nu Lap (+ i w.l + i zeta.j diagonal), the
/// direct linearized operator; `extra` may be empty.
MatC dense_linearized(const Lattice& lat, const ParameterPoint& lambda,
                      double nu, const TOp* extra);

class DenseSolver {
 public:
  DenseSolver(const Lattice& lat, MatC matrix);

  Field solve(const Field& rhs) const;
  double residual(const Field& rhs, const Field& sol) const;
  const MatC& matrix() const { return mat_; }

 private:
  Lattice lat_;
  MatC mat_;
  Eigen::PartialPivLU<MatC> lu_;
};

Field field_from_flat(const Lattice& lat, const VecC& flat);
VecC flat_from_field(const Field& u);

}  // namespace qpns
