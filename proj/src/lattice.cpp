#include "qpns/lattice.hpp"

namespace qpns {

namespace {

std::vector<PhiMode> enumerate_box(int d, int R) {
  std::vector<PhiMode> out;
  long total = 1;
  for (int k = 0; k < d; ++k) total *= (2L * R + 1);
  out.reserve(total);
  PhiMode l(d, -R);
  while (true) {
    out.push_back(l);
    int axis = d - 1;
    while (axis >= 0) {
      if (++l[axis] <= R) break;
      l[axis] = -R;
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

double norm2(const PhiMode& l) {
  double s = 0;
  for (int v : l) s += double(v) * v;
  return std::sqrt(s);
}

}  // namespace

Lattice::Lattice(int d, int L_max, int J_max, bool zero_average)
    : d_(d), L_max_(L_max), J_max_(J_max), zero_average_(zero_average) {
  if (d < 1 || L_max < 1 || J_max < 1)
    throw std::invalid_argument("Lattice: need d >= 1, L_max >= 1, J_max >= 1");
  phi_modes_ = enumerate_box(d, L_max);
  n_phi_ = static_cast<int>(phi_modes_.size());
  phi_abs_.resize(n_phi_);
  for (int i = 0; i < n_phi_; ++i) phi_abs_[i] = norm2(phi_modes_[i]);

  const int W = 2 * J_max + 1;
  x_lookup_.assign(W * W, -1);
  for (int j1 = -J_max; j1 <= J_max; ++j1)
    for (int j2 = -J_max; j2 <= J_max; ++j2) {
      if (zero_average_ && j1 == 0 && j2 == 0) continue;
      XMode j{j1, j2};
      x_lookup_[(j1 + J_max) * W + (j2 + J_max)] =
          static_cast<int>(x_modes_.size());
      x_modes_.push_back(j);
      x_abs2_.push_back(double(j1) * j1 + double(j2) * j2);
      x_abs_.push_back(std::sqrt(x_abs2_.back()));
    }
  n_x_ = static_cast<int>(x_modes_.size());
  x_neg_.resize(n_x_);
  for (int i = 0; i < n_x_; ++i) {
    XMode m{-x_modes_[i][0], -x_modes_[i][1]};
    x_neg_[i] = x_index(m);
  }
}

bool Lattice::phi_in_box(const PhiMode& l) const {
  for (int v : l)
    if (v < -L_max_ || v > L_max_) return false;
  return true;
}

int Lattice::phi_index(const PhiMode& l) const {
  if (!phi_in_box(l)) return -1;
  int idx = 0;
  for (int k = 0; k < d_; ++k) idx = idx * (2 * L_max_ + 1) + (l[k] + L_max_);
  return idx;
}

int Lattice::x_index(const XMode& j) const {
  if (j[0] < -J_max_ || j[0] > J_max_ || j[1] < -J_max_ || j[1] > J_max_)
    return -1;
  const int W = 2 * J_max_ + 1;
  return x_lookup_[(j[0] + J_max_) * W + (j[1] + J_max_)];
}

double Lattice::max_weight() const {
  double m = 1.0;
  for (int i = 0; i < n_phi_; ++i) m = std::max(m, phi_abs_[i]);
  for (int i = 0; i < n_x_; ++i) m = std::max(m, x_abs_[i]);
  return m;
}

PhiOffsetBox::PhiOffsetBox(int d, int R) : d_(d), R_(R) {
  modes_ = enumerate_box(d, R);
  abs_.resize(modes_.size());
  for (size_t i = 0; i < modes_.size(); ++i) abs_[i] = norm2(modes_[i]);
}

int PhiOffsetBox::index(const PhiMode& l) const {
  int idx = 0;
  for (int k = 0; k < d_; ++k) {
    if (l[k] < -R_ || l[k] > R_) return -1;
    idx = idx * (2 * R_ + 1) + (l[k] + R_);
  }
  return idx;
}

PhiMode PhiOffsetBox::sub(const PhiMode& a, const PhiMode& b) {
  PhiMode r(a.size());
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] - b[k];
  return r;
}

}  // namespace qpns
