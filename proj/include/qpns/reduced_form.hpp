#pragma once

#include "qpns/kam.hpp"

namespace qpns {

/// Everything produced by the normal-form chain at one parameter point:
/// the transform stack W = A_perp B Phi, the final spectrum, and the
/// nu-proportional remainder of the conjugated viscous term.
struct ReducedForm {
  Lattice lat;
  ParameterPoint lambda;
  double eps = 0.0;
  double gamma = 0.0;
  double tau = 0.0;

  VectorField alpha, breve;
  TOp A, A_inv;
  std::vector<TOp> T_stack;
  TOp B, B_inv;
  std::vector<TOp> psi_stack;
  TOp Phi, Phi_inv;
  TOp W, W_inv;  // composed A_perp B Phi and its inverse

  Spectrum spectrum;
  VecC Q;            // order -1 diagonal collected by the smoothing stage
  TOp R2;            // order -M remainder left before the KAM stage
  TOp R_nu_unit;     // R_nu^(infty) = nu * R_nu_unit
  double kam_final_R_norm = 0.0;

  Field apply_W(const Field& u) const { return W.apply(u); }
  Field apply_W_inv(const Field& u) const { return W_inv.apply(u); }
};

}  // namespace qpns
