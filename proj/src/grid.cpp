#include "qpns/grid.hpp"

namespace qpns {

TorusGrid::TorusGrid(int d, int phi_nodes_per_axis, int x_nodes_per_axis)
    : d_(d), n_phi_axis_(phi_nodes_per_axis), n_x_axis_(x_nodes_per_axis) {
  phi_count_ = 1;
  for (int k = 0; k < d; ++k) phi_count_ *= n_phi_axis_;
  step_phi_ = 2.0 * M_PI / n_phi_axis_;
  step_x_ = 2.0 * M_PI / n_x_axis_;
  phi_nodes_.resize(phi_count_);
  std::vector<int> idx(d, 0);
  for (long g = 0; g < phi_count_; ++g) {
    phi_nodes_[g] = idx;
    for (int axis = d - 1; axis >= 0; --axis) {
      if (++idx[axis] < n_phi_axis_) break;
      idx[axis] = 0;
    }
  }
}

MatC TorusGrid::phi_eval_matrix(const Lattice& lat) const {
  MatC E(phi_count_, lat.n_phi());
  for (long g = 0; g < phi_count_; ++g)
    for (int li = 0; li < lat.n_phi(); ++li) {
      double ph = 0;
      const PhiMode& l = lat.phi_mode(li);
      for (int k = 0; k < d_; ++k) ph += l[k] * phi_angle(phi_nodes_[g][k]);
      E(g, li) = std::polar(1.0, ph);
    }
  return E;
}

MatC TorusGrid::x_eval_matrix(const Lattice& lat) const {
  MatC E(x_count(), lat.n_x());
  for (int g1 = 0; g1 < n_x_axis_; ++g1)
    for (int g2 = 0; g2 < n_x_axis_; ++g2) {
      long g = static_cast<long>(g1) * n_x_axis_ + g2;
      for (int xi = 0; xi < lat.n_x(); ++xi) {
        const XMode& j = lat.x_mode(xi);
        E(g, xi) = std::polar(1.0, j[0] * x_angle(g1) + j[1] * x_angle(g2));
      }
    }
  return E;
}

MatC TorusGrid::eval(const Field& u) const {
  const Lattice& lat = u.lattice();
  MatC P = u.coeffs() * phi_eval_matrix(lat).transpose();  // n_x x phi_count
  return x_eval_matrix(lat) * P;                           // x_count x phi_count
}

MatC TorusGrid::eval_shifted(const Field& u, const MatC& s1,
                             const MatC& s2) const {
  const Lattice& lat = u.lattice();
  const int J = lat.J_max();
  const int W = 2 * J + 1;
  // Semi-transform in phi, then box-shaped x coefficients per phi node.
  MatC P = u.coeffs() * phi_eval_matrix(lat).transpose();  // n_x x phi_count
  MatC out(x_count(), phi_count_);
  std::vector<Cx> p1(W), p2(W), partial(W);
  for (long gp = 0; gp < phi_count_; ++gp) {
    // Coefficient box for this phi node.
    MatC box = MatC::Zero(W, W);
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      const XMode& j = lat.x_mode(xi);
      box(j[0] + J, j[1] + J) = P(xi, gp);
    }
    for (int g1 = 0; g1 < n_x_axis_; ++g1)
      for (int g2 = 0; g2 < n_x_axis_; ++g2) {
        long gx = static_cast<long>(g1) * n_x_axis_ + g2;
        double y1 = x_angle(g1) + s1(gx, gp).real();
        double y2 = x_angle(g2) + s2(gx, gp).real();
        Cx e1 = std::polar(1.0, y1), e2 = std::polar(1.0, y2);
        Cx b1 = std::polar(1.0, -J * y1), b2 = std::polar(1.0, -J * y2);
        for (int k = 0; k < W; ++k, b1 *= e1) p1[k] = b1;
        for (int k = 0; k < W; ++k, b2 *= e2) p2[k] = b2;
        for (int a = 0; a < W; ++a) {
          Cx acc(0, 0);
          for (int b = 0; b < W; ++b) acc += box(a, b) * p2[b];
          partial[a] = acc;
        }
        Cx val(0, 0);
        for (int a = 0; a < W; ++a) val += partial[a] * p1[a];
        out(gx, gp) = val;
      }
  }
  return out;
}

MatC TorusGrid::exp_mode_shifted(const XMode& j, const MatC& s1,
                                 const MatC& s2) const {
  MatC out(x_count(), phi_count_);
  for (long gp = 0; gp < phi_count_; ++gp)
    for (int g1 = 0; g1 < n_x_axis_; ++g1)
      for (int g2 = 0; g2 < n_x_axis_; ++g2) {
        long gx = static_cast<long>(g1) * n_x_axis_ + g2;
        double y1 = x_angle(g1) + s1(gx, gp).real();
        double y2 = x_angle(g2) + s2(gx, gp).real();
        out(gx, gp) = std::polar(1.0, j[0] * y1 + j[1] * y2);
      }
  return out;
}

Field TorusGrid::to_field(const MatC& values, const Lattice& target) const {
  // Inverse DFT, axis-exact for band-limited content.
  MatC Ex = x_eval_matrix(target);
  MatC P = Ex.adjoint() * values / double(x_count());  // n_x x phi_count
  MatC Ep = phi_eval_matrix(target);
  Field out(target);
  out.coeffs() = P * Ep.conjugate() / double(phi_count_);
  return out;
}

int nodes_for_band(int content_band) { return 2 * content_band + 2; }

int composed_band(int base_band, int shift_band, double shift_sup, double tol) {
  // n-th harmonic of exp(i j.shift) has amplitude <= (|j| shift_sup)^n / n!
  // and widens the band by n * shift_band.
  double eta = std::max(1.0, double(base_band)) * std::abs(shift_sup);
  double amp = 1.0;
  int n = 0;
  while (amp > tol && n < 12) {
    ++n;
    amp *= eta / n;
  }
  return base_band + n * shift_band;
}

}  // namespace qpns
