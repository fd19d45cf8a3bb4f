#pragma once

#include <optional>

#include "qpns/lattice.hpp"
#include "qpns/params.hpp"

namespace qpns {

enum class Parity { Even, Odd, None };

/// Scalar function on T^d x T^2, stored as truncated Fourier coefficients.
/// Coefficients live in an n_x x n_phi matrix: column per phi-mode, row per
/// x-mode. Reality and parity are checked, never assumed.
class Field {
 public:
  Field() = default;
  explicit Field(const Lattice& lat, Parity parity = Parity::None)
      : lat_(lat), c_(MatC::Zero(lat.n_x(), lat.n_phi())), parity_(parity) {}

  const Lattice& lattice() const { return lat_; }
  Parity parity() const { return parity_; }
  void set_parity(Parity p) { parity_ = p; }

  MatC& coeffs() { return c_; }
  const MatC& coeffs() const { return c_; }

  Cx coeff(int li, int xi) const { return c_(xi, li); }
  Cx& coeff(int li, int xi) { return c_(xi, li); }
  Cx coeff(const PhiMode& l, const XMode& j) const;
  void set_coeff(const PhiMode& l, const XMode& j, Cx v);

  /// Restrict / re-truncate onto another box (missing modes are zero).
  Field on_lattice(const Lattice& target) const;

 private:
  Lattice lat_;
  MatC c_;
  Parity parity_ = Parity::None;
};

// -- norms -------------------------------------------------------------------

/// ( sum <l,j>^{2s} |u^(l,j)|^2 )^{1/2} over the truncated lattice.
double sobolev_norm(const Field& u, double s);

struct LipGammaNorm {
  double value = 0.0;
  double sup_part = 0.0;
  double lip_part = 0.0;       // max finite-difference quotient at s-1
  bool single_point = false;   // grid had < 2 points; lip part reported as 0
};

/// sup-norm at s plus gamma * max nearest-neighbor difference quotient at
/// s-1. Nearest neighbors are consecutive entries of the grid list.
LipGammaNorm lip_gamma_norm(
    const std::vector<std::pair<ParameterPoint, Field>>& family, double s,
    double gamma);

// -- projectors --------------------------------------------------------------

Field project_N(const Field& u, double N);        // keep <l,j> <= N
Field project_N_perp(const Field& u, double N);   // complement
Field project_zero_average(const Field& u);       // Pi_0: keep j = 0 modes
Field project_zero_average_perp(const Field& u);  // Pi_0^perp
Field parity_project(const Field& u, Parity p);

// -- products ----------------------------------------------------------------

/// Exact coefficient convolution over the truncated index set, re-truncated
/// to the shared lattice (Galerkin, alias-free).
Field pointwise_product(const Field& u, const Field& v);

// -- diagonal differential operators -----------------------------------------

Field omega_dphi(const Field& u, const ParameterPoint& lambda);   // i w.l
Field zeta_grad(const Field& u, const ParameterPoint& lambda);    // i zeta.j
Field laplacian(const Field& u);                                  // -|j|^2
Field inv_laplacian(const Field& u);                              // -|j|^-2
Field bracket2(const Field& u);      // (Id - Delta): 1 + |j|^2
Field inv_bracket2(const Field& u);  // (1 + |j|^2)^{-1}
Field dx(const Field& u, int axis);  // i j_axis

/// Components of grad_perp (-Delta)^{-1} u = (i j2, -i j1)/|j|^2 u^.
/// First = d_{x2}(-Delta)^{-1} u, second = -d_{x1}(-Delta)^{-1} u.
std::pair<Field, Field> grad_perp_inv_lap(const Field& u);

/// w.d_phi + zeta.grad as one diagonal multiplier.
Field transport_L0(const Field& u, const ParameterPoint& lambda);

// -- structure checks --------------------------------------------------------

/// max |u^(l,j) - conj(u^(-l,-j))|.
double reality_violation(const Field& u);
/// max |u^(l,j) -+ u^(-l,-j)| for the requested parity.
double parity_violation(const Field& u, Parity p);

Field conj_reflect(const Field& u);  // coefficients conj(u^(-l,-j))

// -- arithmetic --------------------------------------------------------------

Field operator+(const Field& a, const Field& b);
Field operator-(const Field& a, const Field& b);
Field operator*(Cx s, const Field& a);
Field operator*(double s, const Field& a);

// -- test / experiment helpers -----------------------------------------------

/// Random real field with coefficient envelope <l,j>^{-decay}; optionally a
/// fixed parity. Deterministic under the seed.
Field random_field(const Lattice& lat, Rng& rng, double decay,
                   Parity parity = Parity::None);

}  // namespace qpns
