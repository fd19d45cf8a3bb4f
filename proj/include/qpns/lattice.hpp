#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "qpns/types.hpp"

namespace qpns {

using XMode = std::array<int, 2>;
using PhiMode = std::vector<int>;  // length d

/// Truncated mode set {(l, j) : |l|_inf <= L_max, |j|_inf <= J_max},
/// optionally without the j = 0 column (zero space average).
/// The weight <l,j> := max{1, |l|, |j|} uses Euclidean norms on each block.
class Lattice {
 public:
  Lattice() = default;
  Lattice(int d, int L_max, int J_max, bool zero_average);

  int d() const { return d_; }
  int L_max() const { return L_max_; }
  int J_max() const { return J_max_; }
  bool zero_average() const { return zero_average_; }

  int n_phi() const { return n_phi_; }
  int n_x() const { return n_x_; }
  long n_modes() const { return static_cast<long>(n_phi_) * n_x_; }

  bool operator==(const Lattice& o) const {
    return d_ == o.d_ && L_max_ == o.L_max_ && J_max_ == o.J_max_ &&
           zero_average_ == o.zero_average_;
  }
  bool operator!=(const Lattice& o) const { return !(*this == o); }

  // phi-mode indexing: flat index in [0, n_phi) <-> multi-index l.
  const PhiMode& phi_mode(int li) const { return phi_modes_[li]; }
  int phi_index(const PhiMode& l) const;           // -1 when out of box
  bool phi_in_box(const PhiMode& l) const;
  double phi_abs(int li) const { return phi_abs_[li]; }  // |l|_2
  int phi_negate(int li) const { return n_phi_ - 1 - li; }

  // x-mode indexing.
  const XMode& x_mode(int xi) const { return x_modes_[xi]; }
  int x_index(const XMode& j) const;               // -1 when absent
  double x_abs(int xi) const { return x_abs_[xi]; }      // |j|_2
  double x_abs2(int xi) const { return x_abs2_[xi]; }    // |j|^2
  int x_negate(int xi) const { return x_neg_[xi]; }

  /// <l, j> = max{1, |l|, |j|} for the mode pair (li, xi).
  double weight(int li, int xi) const {
    return std::max({1.0, phi_abs_[li], x_abs_[xi]});
  }

  /// Largest <l,j> present on the lattice.
  double max_weight() const;

  /// Same box, no zero-average restriction.
  Lattice with_zero_average(bool za) const {
    return Lattice(d_, L_max_, J_max_, za);
  }

 private:
  int d_ = 1;
  int L_max_ = 1;
  int J_max_ = 2;
  bool zero_average_ = true;
  int n_phi_ = 0;
  int n_x_ = 0;
  std::vector<PhiMode> phi_modes_;
  std::vector<double> phi_abs_;
  std::vector<XMode> x_modes_;
  std::vector<double> x_abs_, x_abs2_;
  std::vector<int> x_neg_;
  std::vector<int> x_lookup_;  // (j1+J)*(2J+1)+(j2+J) -> xi or -1
};

/// Enumerates offsets k in [-R, R]^d (flat, lexicographic); used for the
/// doubled phi-difference box of Toeplitz operators.
class PhiOffsetBox {
 public:
  PhiOffsetBox() = default;
  PhiOffsetBox(int d, int R);

  int size() const { return static_cast<int>(modes_.size()); }
  int radius() const { return R_; }
  const PhiMode& mode(int k) const { return modes_[k]; }
  double abs(int k) const { return abs_[k]; }
  int index(const PhiMode& l) const;  // -1 when outside
  int negate(int k) const { return size() - 1 - k; }

  /// Index of mode(a) - lattice_phi_mode(b); requires both length d.
  static PhiMode sub(const PhiMode& a, const PhiMode& b);

 private:
  int d_ = 1;
  int R_ = 0;
  std::vector<PhiMode> modes_;
  std::vector<double> abs_;
};

}  // namespace qpns
