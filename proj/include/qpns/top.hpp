#pragma once

#include <functional>
#include <optional>

#include "qpns/field.hpp"

namespace qpns {

/// Time-Toeplitz operator on Fields: blocks R^(ld) over the doubled
/// phi-difference box |ld|_inf <= 2 L_max, each an n_x x n_x matrix in
/// (j, j'). Action: (R u)^(l,j) = sum_{l',j'} R^(l-l')_j^{j'} u^(l',j'),
/// offsets outside the doubled box treated as zero.
class TOp {
 public:
  TOp() = default;
  TOp(const Lattice& lat, double order);

  static TOp identity(const Lattice& lat);
  /// Diagonal in x for every l-offset zero: R^(0)_j^j = m(j).
  static TOp x_diagonal(const Lattice& lat, const VecC& diag, double order);
  static TOp minus_laplacian(const Lattice& lat);
  static TOp inverse_laplacian(const Lattice& lat);
  static TOp partial_x(const Lattice& lat, int axis);
  static TOp partial_xx(const Lattice& lat, int a, int b);

  const Lattice& lattice() const { return lat_; }
  double order() const { return order_; }
  void set_order(double m) { order_ = m; }
  const PhiOffsetBox& offsets() const { return box_; }

  MatC& block(int k) { return blocks_[k]; }
  const MatC& block(int k) const { return blocks_[k]; }
  int n_blocks() const { return static_cast<int>(blocks_.size()); }

  Cx entry(const PhiMode& ld, const XMode& j, const XMode& jp) const;

  Field apply(const Field& u) const;

  /// Frobenius mass of all blocks (diagnostic).
  double frobenius() const;

  TOp& operator+=(const TOp& o);
  TOp& operator-=(const TOp& o);
  TOp& operator*=(Cx s);

 private:
  Lattice lat_;
  PhiOffsetBox box_;
  double order_ = 0.0;
  std::vector<MatC> blocks_;
};

TOp operator+(TOp a, const TOp& b);
TOp operator-(TOp a, const TOp& b);
TOp operator*(Cx s, TOp a);
TOp operator*(double s, TOp a);

/// sup_{j'} ( sum_{(l,j)} <l, j-j'>^{2s} |R^(l)_j^{j'}|^2 )^{1/2} <j'>^{-m},
/// summed over the stored blocks.
double decay_norm(const TOp& R, double m, double s);

/// Composition R o Q with blocks (RQ)^(ld) = sum_k R^(ld-k) Q^(k) over
/// in-box offsets; order tags add. When `defect` is given, it receives the
/// Frobenius mass dropped outside the doubled offset box.
TOp compose(const TOp& R, const TOp& Q, double* defect = nullptr);

/// Keeps only l = 0, j = j' entries.
TOp diag_part(const TOp& R);
/// Diagonal entries R^(0)_j^j as a vector over x-modes.
VecC diag_entries(const TOp& R);

/// Zero entries with |l| > N or |j - j'| > N (Euclidean), resp. complement.
TOp op_project_N(const TOp& R, double N);
TOp op_project_N_perp(const TOp& R, double N);

/// Multiplication operator M_a: blocks M^(ld)_j^{j'} = a^(ld, j-j'). The
/// coefficient may live on a wider box than the target lattice (pass
/// `base`); offsets outside the doubled box are dropped.
TOp from_multiplication(const Field& a, const Lattice* base = nullptr);

struct NeumannReport {
  int terms = 0;
  double last_term_norm = 0.0;
  bool converged = false;
};

/// H with (Id + R)^{-1} = Id + H, by the truncated Neumann series; requires
/// |R|_{m,s0} < 1. Series stops when the term decay norm at s0 falls below
/// tol or the term cap is reached (then a ConvergenceError is thrown).
TOp neumann_invert(const TOp& R, double m, double s0, double tol = 1e-14,
                   int max_terms = 60, NeumannReport* report = nullptr);

struct PredicateReport {
  bool ok = false;
  double max_violation = 0.0;
};

PredicateReport is_real(const TOp& R, double tol = 1e-11);
PredicateReport is_reversible(const TOp& R, double tol = 1e-11);
PredicateReport is_reversibility_preserving(const TOp& R, double tol = 1e-11);

/// Solves w.d_phi Psi + [zeta.grad, Psi] + R = D_R entrywise:
/// Psi^(l)_j^{j'} = -R^(l)_j^{j'} / (i (w.l + zeta.(j-j'))) off the
/// diagonal (l, j-j') != 0. Throws NonResonanceError naming the offending
/// (l, j-j') if a divisor falls below `divisor_floor`.
TOp solve_descent_homological(const TOp& R, const ParameterPoint& lambda,
                              double divisor_floor = 1e-13);

/// lhs(Psi) = w.d_phi Psi + [zeta.grad, Psi] for residual checks.
TOp descent_homological_lhs(const TOp& Psi, const ParameterPoint& lambda);

/// Random operator with entries rho * g * <l, j-j'>^{-s_decay} <j'>^{m}
/// (g complex of unit scale), the truncated decay class. Optionally
/// symmetrized to real + reversible.
TOp random_decay_top(const Lattice& lat, Rng& rng, double m, double s_decay,
                     double rho, bool real_reversible = false);

}  // namespace qpns
