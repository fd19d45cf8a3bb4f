#pragma once

#include "qpns/field.hpp"

namespace qpns {

/// Uniform collocation grid on T^d x T^2 with enough nodes per axis to hold
/// a prescribed mode band alias-free. Values are stored as an
/// (x_count x phi_count) matrix, x node fastest along rows.
class TorusGrid {
 public:
  TorusGrid(int d, int phi_nodes_per_axis, int x_nodes_per_axis);

  int d() const { return d_; }
  int phi_nodes_per_axis() const { return n_phi_axis_; }
  int x_nodes_per_axis() const { return n_x_axis_; }
  long phi_count() const { return phi_count_; }
  long x_count() const { return static_cast<long>(n_x_axis_) * n_x_axis_; }

  double phi_angle(int g) const { return step_phi_ * g; }  // per axis index
  double x_angle(int g) const { return step_x_ * g; }

  /// Exact Fourier evaluation of u at every grid node.
  MatC eval(const Field& u) const;

  /// Values of u at (phi_g, x_g + shift(g)); the two shift components are
  /// given as value matrices on this grid.
  MatC eval_shifted(const Field& u, const MatC& s1, const MatC& s2) const;

  /// Values of exp(i j.(x_g + shift(g))) for a single x-mode (no phi
  /// dependence): the fast path for operator columns.
  MatC exp_mode_shifted(const XMode& j, const MatC& s1, const MatC& s2) const;

  /// Inverse transform onto the target lattice. Exact when the function's
  /// band fits the node capacity per axis.
  Field to_field(const MatC& values, const Lattice& target) const;

  MatC phi_eval_matrix(const Lattice& lat) const;  // e^{+i l.phi_g}
  MatC x_eval_matrix(const Lattice& lat) const;    // e^{+i j.x_g}

 private:
  int d_;
  int n_phi_axis_;
  int n_x_axis_;
  long phi_count_;
  double step_phi_;
  double step_x_;

  // phi multi-node enumeration: flat g -> per-axis node indices.
  std::vector<std::vector<int>> phi_nodes_;
};

/// Nodes per axis so that modes up to K survive alias-free given content
/// whose band is at most `content_band`.
int nodes_for_band(int content_band);

/// Band needed to hold `base_band` shifted by harmonics of a displacement of
/// sup-norm `shift_sup` supported on modes up to `shift_band`, to tolerance
/// tol. Grows base_band by shift_band per harmonic order.
int composed_band(int base_band, int shift_band, double shift_sup, double tol);

}  // namespace qpns
