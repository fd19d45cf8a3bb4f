#pragma once

#include "qpns/grid.hpp"
#include "qpns/top.hpp"

namespace qpns {

/// Two-component field (velocity fields, torus displacements).
struct VectorField {
  Field c1, c2;

  const Lattice& lattice() const { return c1.lattice(); }
  double sup_bound() const;  // sum of |coefficients|, a sup-norm bound
};

struct AlphaReport {
  double pde_residual = 0.0;
  double odd_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Solves w.d_phi alpha + (zeta + eps a).grad alpha + eps a = 0 componentwise
/// on the (zero-average) lattice by iterating the diagonally inverted
/// transport; `a` is the velocity field driving the transport term.
VectorField solve_alpha(const VectorField& a, const ParameterPoint& lambda,
                        double eps, double tol = 1e-13, int max_iter = 50,
                        AlphaReport* report = nullptr);

/// breve with breve(phi,y) = -alpha(phi, y + breve(phi,y)) to fixed-point
/// tolerance; `roundtrip` receives the max grid error of
/// x -> x + alpha -> back.
VectorField invert_diffeo(const VectorField& alpha, double tol = 1e-12,
                          double* roundtrip = nullptr);

/// (A h)(phi,x) = h(phi, x + alpha(phi,x)), evaluated by exact Fourier
/// evaluation on an oversampled uniform grid, then transformed onto
/// `target`.
Field compose_with_diffeo(const Field& h, const VectorField& alpha,
                          const Lattice& target);

/// Base-lattice Toeplitz matrix of h -> h(phi, x + alpha(phi,x)), assembled
/// columnwise from the exponential images of the x-mode basis.
TOp assemble_composition_top(const VectorField& alpha, const Lattice& base);

/// Straightened transport data: alpha, its inverse displacement, and the
/// assembled maps A, A^{-1} on the base lattice.
struct Straightening {
  ParameterPoint lambda;
  double eps = 0.0;
  VectorField alpha, breve;
  TOp A, Ainv;
  AlphaReport alpha_report;
  double roundtrip_error = 0.0;
};

Straightening build_straightening(const VectorField& a_velocity,
                                  const ParameterPoint& lambda, double eps,
                                  double tol = 1e-13, int max_iter = 50);

/// T u = (w.d_phi + (zeta + eps a).grad) u, the transport operator itself.
Field apply_transport(const VectorField& a, const ParameterPoint& lambda,
                      double eps, const Field& u);

/// A_perp^{-1} R A_perp as a base-lattice TOp (order tag preserved).
TOp a_perp_conjugate(const TOp& R, const Straightening& S);

/// R_Delta = A_perp^{-1}(-Delta)A_perp - (-Delta), built from the
/// conjugated coefficient fields of the transformed Laplacian:
///   a_{km} = -(d_k alpha_m + d_m alpha_k + grad alpha_k . grad alpha_m),
///   b_k    = -Delta alpha_k,
///   R_Delta = Pi0perp( sum A^{-1}[a_{km}] d_{y_k y_m}
///                     + sum A^{-1}[b_k] d_{y_k} ) Pi0perp.
TOp conjugate_laplacian(const Straightening& S);

struct L1Parts {
  TOp R1;         // order -1, eps * A_perp^{-1} R A_perp
  TOp R_nu_unit;  // order 2; the viscous remainder is nu * R_nu_unit
  double r1_norm_s0 = 0.0;
  double rnu_norm_s0 = 0.0;
};

/// Conjugation of the linearized operator through A_perp:
/// L^(1) = w.d_phi + zeta.grad + R1 - nu Delta + nu R_nu_unit.
L1Parts conjugate_L1(const Field& v_e, const Straightening& S,
                     const ParameterPoint& lambda, double eps, double s0);

}  // namespace qpns
