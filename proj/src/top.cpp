#include "qpns/top.hpp"

#include <sstream>

namespace qpns {

TOp::TOp(const Lattice& lat, double order)
    : lat_(lat), box_(lat.d(), 2 * lat.L_max()), order_(order) {
  blocks_.assign(box_.size(), MatC::Zero(lat.n_x(), lat.n_x()));
}

TOp TOp::identity(const Lattice& lat) {
  TOp r(lat, 0.0);
  PhiMode zero(lat.d(), 0);
  r.blocks_[r.box_.index(zero)] = MatC::Identity(lat.n_x(), lat.n_x());
  return r;
}

TOp TOp::x_diagonal(const Lattice& lat, const VecC& diag, double order) {
  TOp r(lat, order);
  PhiMode zero(lat.d(), 0);
  r.blocks_[r.box_.index(zero)] = diag.asDiagonal();
  return r;
}

TOp TOp::minus_laplacian(const Lattice& lat) {
  VecC d(lat.n_x());
  for (int xi = 0; xi < lat.n_x(); ++xi) d(xi) = lat.x_abs2(xi);
  return x_diagonal(lat, d, 2.0);
}

TOp TOp::inverse_laplacian(const Lattice& lat) {
  if (!lat.zero_average())
    throw std::invalid_argument("inverse_laplacian: lattice contains j = 0");
  VecC d(lat.n_x());
  for (int xi = 0; xi < lat.n_x(); ++xi) d(xi) = 1.0 / lat.x_abs2(xi);
  return x_diagonal(lat, d, -2.0);
}

TOp TOp::partial_x(const Lattice& lat, int axis) {
  VecC d(lat.n_x());
  for (int xi = 0; xi < lat.n_x(); ++xi) d(xi) = kI * double(lat.x_mode(xi)[axis]);
  return x_diagonal(lat, d, 1.0);
}

TOp TOp::partial_xx(const Lattice& lat, int a, int b) {
  VecC d(lat.n_x());
  for (int xi = 0; xi < lat.n_x(); ++xi)
    d(xi) = -double(lat.x_mode(xi)[a]) * double(lat.x_mode(xi)[b]);
  return x_diagonal(lat, d, 2.0);
}

Cx TOp::entry(const PhiMode& ld, const XMode& j, const XMode& jp) const {
  int k = box_.index(ld);
  int r = lat_.x_index(j);
  int c = lat_.x_index(jp);
  if (k < 0 || r < 0 || c < 0) return Cx(0, 0);
  return blocks_[k](r, c);
}

Field TOp::apply(const Field& u) const {
  const Lattice& ul = u.lattice();
  // A wider phi box with the same x-modes is admissible: the Toeplitz
  // blocks act on whatever phi-window the field carries.
  if (ul.d() != lat_.d() || ul.J_max() != lat_.J_max() ||
      ul.zero_average() != lat_.zero_average() || ul.L_max() < lat_.L_max())
    throw std::invalid_argument("TOp::apply: lattice mismatch");
  Field out(ul);
  for (int lo = 0; lo < ul.n_phi(); ++lo) {
    const PhiMode& l = ul.phi_mode(lo);
    VecC acc = VecC::Zero(lat_.n_x());
    for (int li = 0; li < ul.n_phi(); ++li) {
      int k = box_.index(PhiOffsetBox::sub(l, ul.phi_mode(li)));
      if (k < 0) continue;
      acc.noalias() += blocks_[k] * u.coeffs().col(li);
    }
    out.coeffs().col(lo) = acc;
  }
  return out;
}

double TOp::frobenius() const {
  double s = 0;
  for (const auto& b : blocks_) s += b.squaredNorm();
  return std::sqrt(s);
}

TOp& TOp::operator+=(const TOp& o) {
  if (lat_ != o.lat_) throw std::invalid_argument("TOp +: lattice mismatch");
  for (int k = 0; k < n_blocks(); ++k) blocks_[k] += o.blocks_[k];
  order_ = std::max(order_, o.order_);
  return *this;
}

TOp& TOp::operator-=(const TOp& o) {
  if (lat_ != o.lat_) throw std::invalid_argument("TOp -: lattice mismatch");
  for (int k = 0; k < n_blocks(); ++k) blocks_[k] -= o.blocks_[k];
  order_ = std::max(order_, o.order_);
  return *this;
}

TOp& TOp::operator*=(Cx s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

TOp operator+(TOp a, const TOp& b) { return a += b; }
TOp operator-(TOp a, const TOp& b) { return a -= b; }
TOp operator*(Cx s, TOp a) { return a *= s; }
TOp operator*(double s, TOp a) { return a *= Cx(s, 0); }

double decay_norm(const TOp& R, double m, double s) {
  const Lattice& lat = R.lattice();
  const PhiOffsetBox& box = R.offsets();
  double sup = 0;
  for (int jp = 0; jp < lat.n_x(); ++jp) {
    const XMode& xjp = lat.x_mode(jp);
    double col = 0;
    for (int k = 0; k < box.size(); ++k) {
      const MatC& b = R.block(k);
      double labs2 = box.abs(k) * box.abs(k);
      for (int j = 0; j < lat.n_x(); ++j) {
        Cx v = b(j, jp);
        if (v == Cx(0, 0)) continue;
        const XMode& xj = lat.x_mode(j);
        double d1 = xj[0] - xjp[0], d2 = xj[1] - xjp[1];
        double w = std::max(1.0, std::sqrt(std::max(labs2, d1 * d1 + d2 * d2)));
        col += std::pow(w, 2.0 * s) * std::norm(v);
      }
    }
    double jw = std::max(1.0, lat.x_abs(jp));
    sup = std::max(sup, std::sqrt(col) * std::pow(jw, -m));
  }
  return sup;
}

TOp compose(const TOp& R, const TOp& Q, double* defect) {
  const Lattice& lat = R.lattice();
  if (lat != Q.lattice()) throw std::invalid_argument("compose: lattice mismatch");
  TOp out(lat, R.order() + Q.order());
  const PhiOffsetBox& box = out.offsets();
  for (int ko = 0; ko < box.size(); ++ko) {
    const PhiMode& ld = box.mode(ko);
    MatC acc = MatC::Zero(lat.n_x(), lat.n_x());
    for (int k = 0; k < box.size(); ++k) {
      int kr = box.index(PhiOffsetBox::sub(ld, box.mode(k)));
      if (kr < 0) continue;
      if (Q.block(k).isZero(0) || R.block(kr).isZero(0)) continue;
      acc.noalias() += R.block(kr) * Q.block(k);
    }
    out.block(ko) = acc;
  }
  if (defect) {
    // Mass of offsets ld outside the doubled box: |ld| in (2L, 4L].
    double dropped = 0;
    PhiOffsetBox wide(lat.d(), 4 * lat.L_max());
    for (int ko = 0; ko < wide.size(); ++ko) {
      const PhiMode& ld = wide.mode(ko);
      if (box.index(ld) >= 0) continue;
      MatC acc = MatC::Zero(lat.n_x(), lat.n_x());
      for (int k = 0; k < box.size(); ++k) {
        int kr = box.index(PhiOffsetBox::sub(ld, box.mode(k)));
        if (kr < 0) continue;
        acc.noalias() += R.block(kr) * Q.block(k);
      }
      dropped += acc.squaredNorm();
    }
    *defect = std::sqrt(dropped);
  }
  return out;
}

TOp diag_part(const TOp& R) {
  const Lattice& lat = R.lattice();
  TOp out(lat, R.order());
  PhiMode zero(lat.d(), 0);
  int k0 = R.offsets().index(zero);
  out.block(k0) = R.block(k0).diagonal().asDiagonal();
  return out;
}

VecC diag_entries(const TOp& R) {
  PhiMode zero(R.lattice().d(), 0);
  return R.block(R.offsets().index(zero)).diagonal();
}

TOp op_project_N(const TOp& R, double N) {
  const Lattice& lat = R.lattice();
  TOp out(lat, R.order());
  const PhiOffsetBox& box = R.offsets();
  for (int k = 0; k < box.size(); ++k) {
    if (box.abs(k) > N) continue;
    MatC& b = out.block(k);
    const MatC& src = R.block(k);
    for (int j = 0; j < lat.n_x(); ++j)
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xj = lat.x_mode(j);
        const XMode& xjp = lat.x_mode(jp);
        double d1 = xj[0] - xjp[0], d2 = xj[1] - xjp[1];
        if (std::sqrt(d1 * d1 + d2 * d2) <= N) b(j, jp) = src(j, jp);
      }
  }
  return out;
}

TOp op_project_N_perp(const TOp& R, double N) {
  TOp out = R;
  TOp low = op_project_N(R, N);
  out -= low;
  out.set_order(R.order());
  return out;
}

TOp from_multiplication(const Field& a, const Lattice* base) {
  const Lattice& al = a.lattice();
  const Lattice& lat = base ? *base : al;
  if (al.d() != lat.d())
    throw std::invalid_argument("from_multiplication: dimension mismatch");
  TOp out(lat, 0.0);
  const PhiOffsetBox& box = out.offsets();
  for (int li = 0; li < al.n_phi(); ++li) {
    int k = box.index(al.phi_mode(li));
    if (k < 0) continue;  // phi-harmonics beyond the doubled box are dropped
    MatC& b = out.block(k);
    for (int xi = 0; xi < al.n_x(); ++xi) {
      Cx c = a.coeff(li, xi);
      if (c == Cx(0, 0)) continue;
      const XMode& diff = al.x_mode(xi);
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xjp = lat.x_mode(jp);
        XMode j{xjp[0] + diff[0], xjp[1] + diff[1]};
        int ji = lat.x_index(j);
        if (ji >= 0) b(ji, jp) += c;
      }
    }
  }
  return out;
}

TOp neumann_invert(const TOp& R, double m, double s0, double tol, int max_terms,
                   NeumannReport* report) {
  double r0 = decay_norm(R, std::min(m, 0.0), s0);
  if (r0 >= 1.0) {
    std::ostringstream os;
    os << "neumann_invert: non-contractive input, |R|_{" << std::min(m, 0.0)
       << "," << s0 << "} = " << r0;
    throw ConvergenceError(os.str());
  }
  TOp acc = -1.0 * R;
  TOp term = acc;
  NeumannReport rep;
  rep.terms = 1;
  rep.last_term_norm = decay_norm(term, m, s0);
  double prev = rep.last_term_norm;
  while (rep.last_term_norm >= tol && rep.terms < max_terms) {
    term = compose(-1.0 * R, term);
    acc += term;
    ++rep.terms;
    rep.last_term_norm = decay_norm(term, m, s0);
    if (rep.last_term_norm > 4.0 * prev)
      throw ConvergenceError("neumann_invert: series diverging");
    prev = rep.last_term_norm;
  }
  rep.converged = rep.last_term_norm < tol;
  if (report) *report = rep;
  if (!rep.converged)
    throw ConvergenceError("neumann_invert: term cap reached, residual " +
                           std::to_string(rep.last_term_norm));
  acc.set_order(m);
  return acc;
}

namespace {

template <class Rel>
PredicateReport symmetry_check(const TOp& R, double tol, Rel&& rel) {
  const Lattice& lat = R.lattice();
  const PhiOffsetBox& box = R.offsets();
  PredicateReport rep;
  for (int k = 0; k < box.size(); ++k) {
    int kn = box.negate(k);
    const MatC& b = R.block(k);
    const MatC& bn = R.block(kn);
    for (int j = 0; j < lat.n_x(); ++j)
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        Cx mirror = bn(lat.x_negate(j), lat.x_negate(jp));
        rep.max_violation =
            std::max(rep.max_violation, std::abs(b(j, jp) - rel(mirror)));
      }
  }
  rep.ok = rep.max_violation <= tol;
  return rep;
}

}  // namespace

PredicateReport is_real(const TOp& R, double tol) {
  return symmetry_check(R, tol, [](Cx m) { return std::conj(m); });
}

PredicateReport is_reversible(const TOp& R, double tol) {
  return symmetry_check(R, tol, [](Cx m) { return -m; });
}

PredicateReport is_reversibility_preserving(const TOp& R, double tol) {
  return symmetry_check(R, tol, [](Cx m) { return m; });
}

TOp solve_descent_homological(const TOp& R, const ParameterPoint& lambda,
                              double divisor_floor) {
  const Lattice& lat = R.lattice();
  const PhiOffsetBox& box = R.offsets();
  TOp psi(lat, R.order());
  for (int k = 0; k < box.size(); ++k) {
    const PhiMode& ld = box.mode(k);
    double wl = lambda.omega_dot(ld);
    bool l_zero = box.abs(k) == 0.0;
    const MatC& src = R.block(k);
    MatC& dst = psi.block(k);
    for (int j = 0; j < lat.n_x(); ++j)
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xj = lat.x_mode(j);
        const XMode& xjp = lat.x_mode(jp);
        int h1 = xj[0] - xjp[0], h2 = xj[1] - xjp[1];
        if (l_zero && h1 == 0 && h2 == 0) continue;
        Cx v = src(j, jp);
        if (v == Cx(0, 0)) continue;
        double div = wl + lambda.zeta[0] * h1 + lambda.zeta[1] * h2;
        if (std::abs(div) < divisor_floor) {
          std::ostringstream os;
          os << "descent homological equation: divisor " << div << " at l = (";
          for (size_t q = 0; q < ld.size(); ++q) os << (q ? "," : "") << ld[q];
          os << "), j-j' = (" << h1 << "," << h2 << ")";
          throw NonResonanceError(os.str());
        }
        dst(j, jp) = -v / (kI * div);
      }
  }
  return psi;
}

TOp descent_homological_lhs(const TOp& Psi, const ParameterPoint& lambda) {
  const Lattice& lat = Psi.lattice();
  const PhiOffsetBox& box = Psi.offsets();
  TOp out(lat, Psi.order());
  for (int k = 0; k < box.size(); ++k) {
    double wl = lambda.omega_dot(box.mode(k));
    const MatC& src = Psi.block(k);
    MatC& dst = out.block(k);
    for (int j = 0; j < lat.n_x(); ++j)
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xj = lat.x_mode(j);
        const XMode& xjp = lat.x_mode(jp);
        double div = wl + lambda.zeta[0] * (xj[0] - xjp[0]) +
                     lambda.zeta[1] * (xj[1] - xjp[1]);
        dst(j, jp) = kI * div * src(j, jp);
      }
  }
  return out;
}

TOp random_decay_top(const Lattice& lat, Rng& rng, double m, double s_decay,
                     double rho, bool real_reversible) {
  TOp out(lat, m);
  const PhiOffsetBox& box = out.offsets();
  for (int k = 0; k < box.size(); ++k) {
    MatC& b = out.block(k);
    double la = box.abs(k);
    for (int j = 0; j < lat.n_x(); ++j)
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xj = lat.x_mode(j);
        const XMode& xjp = lat.x_mode(jp);
        double d1 = xj[0] - xjp[0], d2 = xj[1] - xjp[1];
        double w = std::max(1.0, std::sqrt(std::max(la * la, d1 * d1 + d2 * d2)));
        double jw = std::max(1.0, lat.x_abs(jp));
        b(j, jp) = rho * rng.unit_complex() * std::pow(w, -s_decay) *
                   std::pow(jw, m);
      }
  }
  if (real_reversible) {
    // Enforce R^(l)_j^{j'} = conj(R^(-l)_{-j}^{-j'}) = -R^(-l)_{-j}^{-j'}:
    // entries become purely imaginary, antisymmetrized under reflection.
    TOp sym(lat, m);
    for (int k = 0; k < box.size(); ++k) {
      int kn = box.negate(k);
      for (int j = 0; j < lat.n_x(); ++j)
        for (int jp = 0; jp < lat.n_x(); ++jp) {
          Cx v = out.block(k)(j, jp);
          Cx w = out.block(kn)(lat.x_negate(j), lat.x_negate(jp));
          sym.block(k)(j, jp) =
              0.5 * (v - w) - 0.5 * std::conj(v - w);  // i * Im(v - w)
        }
    }
    // Halve to keep the requested scale.
    sym *= Cx(0.5, 0);
    return sym;
  }
  return out;
}

}  // namespace qpns
