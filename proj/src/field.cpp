#include "qpns/field.hpp"

namespace qpns {

Cx Field::coeff(const PhiMode& l, const XMode& j) const {
  int li = lat_.phi_index(l);
  int xi = lat_.x_index(j);
  if (li < 0 || xi < 0) return Cx(0, 0);
  return c_(xi, li);
}

void Field::set_coeff(const PhiMode& l, const XMode& j, Cx v) {
  int li = lat_.phi_index(l);
  int xi = lat_.x_index(j);
  if (li < 0 || xi < 0)
    throw std::invalid_argument("Field::set_coeff: mode outside lattice");
  c_(xi, li) = v;
}

Field Field::on_lattice(const Lattice& target) const {
  Field out(target, parity_);
  for (int li = 0; li < target.n_phi(); ++li) {
    int sli = lat_.phi_index(target.phi_mode(li));
    if (sli < 0) continue;
    for (int xi = 0; xi < target.n_x(); ++xi) {
      int sxi = lat_.x_index(target.x_mode(xi));
      if (sxi < 0) continue;
      out.coeffs()(xi, li) = c_(sxi, sli);
    }
  }
  return out;
}

double sobolev_norm(const Field& u, double s) {
  if (s < 0) throw std::invalid_argument("sobolev_norm: s < 0");
  const Lattice& lat = u.lattice();
  double acc = 0;
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      double w = lat.weight(li, xi);
      acc += std::pow(w, 2.0 * s) * std::norm(u.coeff(li, xi));
    }
  return std::sqrt(acc);
}

LipGammaNorm lip_gamma_norm(
    const std::vector<std::pair<ParameterPoint, Field>>& family, double s,
    double gamma) {
  LipGammaNorm out;
  if (family.empty()) throw std::invalid_argument("lip_gamma_norm: empty grid");
  for (auto& [lam, f] : family)
    out.sup_part = std::max(out.sup_part, sobolev_norm(f, s));
  if (family.size() < 2) {
    out.single_point = true;
  } else {
    for (size_t k = 0; k + 1 < family.size(); ++k) {
      double dl = family[k].first.dist(family[k + 1].first);
      if (dl <= 0) throw std::invalid_argument("lip_gamma_norm: repeated grid point");
      Field diff = family[k + 1].second - family[k].second;
      out.lip_part = std::max(out.lip_part, sobolev_norm(diff, s - 1.0) / dl);
    }
  }
  out.value = out.sup_part + gamma * out.lip_part;
  return out;
}

Field project_N(const Field& u, double N) {
  if (N <= 0) throw std::invalid_argument("project_N: need N > 0");
  const Lattice& lat = u.lattice();
  Field out(lat, u.parity());
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      if (lat.weight(li, xi) <= N) out.coeff(li, xi) = u.coeff(li, xi);
  return out;
}

Field project_N_perp(const Field& u, double N) {
  Field out = u;
  Field low = project_N(u, N);
  out.coeffs() -= low.coeffs();
  return out;
}

Field project_zero_average(const Field& u) {
  const Lattice& lat = u.lattice();
  Field out(lat, u.parity());
  int xi0 = lat.x_index(XMode{0, 0});
  if (xi0 >= 0) out.coeffs().row(xi0) = u.coeffs().row(xi0);
  return out;
}

Field project_zero_average_perp(const Field& u) {
  Field out = u;
  int xi0 = u.lattice().x_index(XMode{0, 0});
  if (xi0 >= 0) out.coeffs().row(xi0).setZero();
  return out;
}

Field parity_project(const Field& u, Parity p) {
  if (p == Parity::None) return u;
  const Lattice& lat = u.lattice();
  Field out(lat, p);
  double sign = (p == Parity::Even) ? 1.0 : -1.0;
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      out.coeff(li, xi) = 0.5 * (u.coeff(li, xi) +
                                 sign * u.coeff(lat.phi_negate(li), lat.x_negate(xi)));
  return out;
}

namespace {
Parity product_parity(Parity a, Parity b) {
  if (a == Parity::None || b == Parity::None) return Parity::None;
  return (a == b) ? Parity::Even : Parity::Odd;
}
}  // namespace

Field pointwise_product(const Field& u, const Field& v) {
  const Lattice& lat = u.lattice();
  if (lat != v.lattice())
    throw std::invalid_argument("pointwise_product: lattice mismatch");
  Field out(lat, product_parity(u.parity(), v.parity()));
  const int J = lat.J_max();
  for (int li = 0; li < lat.n_phi(); ++li) {
    const PhiMode& lu = lat.phi_mode(li);
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      Cx cu = u.coeff(li, xi);
      if (cu == Cx(0, 0)) continue;
      const XMode& ju = lat.x_mode(xi);
      for (int mi = 0; mi < lat.n_phi(); ++mi) {
        PhiMode lsum(lat.d());
        bool ok = true;
        const PhiMode& lv = lat.phi_mode(mi);
        for (int k = 0; k < lat.d(); ++k) {
          lsum[k] = lu[k] + lv[k];
          if (lsum[k] < -lat.L_max() || lsum[k] > lat.L_max()) { ok = false; break; }
        }
        if (!ok) continue;
        int lo = lat.phi_index(lsum);
        for (int yi = 0; yi < lat.n_x(); ++yi) {
          Cx cv = v.coeff(mi, yi);
          if (cv == Cx(0, 0)) continue;
          const XMode& jv = lat.x_mode(yi);
          XMode js{ju[0] + jv[0], ju[1] + jv[1]};
          if (js[0] < -J || js[0] > J || js[1] < -J || js[1] > J) continue;
          int xo = lat.x_index(js);
          if (xo < 0) continue;  // j = 0 dropped on zero-average lattices
          out.coeff(lo, xo) += cu * cv;
        }
      }
    }
  }
  return out;
}

namespace {
Parity flip(Parity p) {
  if (p == Parity::Even) return Parity::Odd;
  if (p == Parity::Odd) return Parity::Even;
  return Parity::None;
}

template <class Fn>
Field x_multiplier(const Field& u, Fn&& fn, Parity parity) {
  const Lattice& lat = u.lattice();
  Field out(lat, parity);
  for (int xi = 0; xi < lat.n_x(); ++xi) {
    Cx m = fn(xi);
    out.coeffs().row(xi) = m * u.coeffs().row(xi);
  }
  return out;
}
}  // namespace

Field omega_dphi(const Field& u, const ParameterPoint& lambda) {
  const Lattice& lat = u.lattice();
  Field out(lat, flip(u.parity()));
  for (int li = 0; li < lat.n_phi(); ++li)
    out.coeffs().col(li) =
        (kI * lambda.omega_dot(lat.phi_mode(li))) * u.coeffs().col(li);
  return out;
}

Field zeta_grad(const Field& u, const ParameterPoint& lambda) {
  const Lattice& lat = u.lattice();
  return x_multiplier(u, [&](int xi) { return kI * lambda.zeta_dot(lat.x_mode(xi)); },
                      flip(u.parity()));
}

Field transport_L0(const Field& u, const ParameterPoint& lambda) {
  const Lattice& lat = u.lattice();
  Field out(lat, flip(u.parity()));
  for (int li = 0; li < lat.n_phi(); ++li) {
    double wl = lambda.omega_dot(lat.phi_mode(li));
    for (int xi = 0; xi < lat.n_x(); ++xi)
      out.coeff(li, xi) = kI * (wl + lambda.zeta_dot(lat.x_mode(xi))) * u.coeff(li, xi);
  }
  return out;
}

Field laplacian(const Field& u) {
  const Lattice& lat = u.lattice();
  return x_multiplier(u, [&](int xi) { return Cx(-lat.x_abs2(xi), 0); }, u.parity());
}

Field inv_laplacian(const Field& u) {
  const Lattice& lat = u.lattice();
  if (!lat.zero_average())
    throw std::invalid_argument("inv_laplacian: lattice contains j = 0");
  return x_multiplier(u, [&](int xi) { return Cx(-1.0 / lat.x_abs2(xi), 0); },
                      u.parity());
}

Field bracket2(const Field& u) {
  const Lattice& lat = u.lattice();
  return x_multiplier(u, [&](int xi) { return Cx(1.0 + lat.x_abs2(xi), 0); },
                      u.parity());
}

Field inv_bracket2(const Field& u) {
  const Lattice& lat = u.lattice();
  return x_multiplier(u, [&](int xi) { return Cx(1.0 / (1.0 + lat.x_abs2(xi)), 0); },
                      u.parity());
}

Field dx(const Field& u, int axis) {
  const Lattice& lat = u.lattice();
  return x_multiplier(u, [&](int xi) { return kI * double(lat.x_mode(xi)[axis]); },
                      flip(u.parity()));
}

std::pair<Field, Field> grad_perp_inv_lap(const Field& u) {
  const Lattice& lat = u.lattice();
  if (!lat.zero_average())
    throw std::invalid_argument("grad_perp_inv_lap: lattice contains j = 0");
  Field a1 = x_multiplier(
      u, [&](int xi) { return kI * double(lat.x_mode(xi)[1]) / lat.x_abs2(xi); },
      flip(u.parity()));
  Field a2 = x_multiplier(
      u, [&](int xi) { return -kI * double(lat.x_mode(xi)[0]) / lat.x_abs2(xi); },
      flip(u.parity()));
  return {a1, a2};
}

double reality_violation(const Field& u) {
  const Lattice& lat = u.lattice();
  double worst = 0;
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      worst = std::max(worst,
                       std::abs(u.coeff(li, xi) -
                                std::conj(u.coeff(lat.phi_negate(li), lat.x_negate(xi)))));
  return worst;
}

double parity_violation(const Field& u, Parity p) {
  if (p == Parity::None) return 0.0;
  const Lattice& lat = u.lattice();
  double sign = (p == Parity::Even) ? 1.0 : -1.0;
  double worst = 0;
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      worst = std::max(worst,
                       std::abs(u.coeff(li, xi) -
                                sign * u.coeff(lat.phi_negate(li), lat.x_negate(xi))));
  return worst;
}

Field conj_reflect(const Field& u) {
  const Lattice& lat = u.lattice();
  Field out(lat, u.parity());
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      out.coeff(li, xi) =
          std::conj(u.coeff(lat.phi_negate(li), lat.x_negate(xi)));
  return out;
}

Field operator+(const Field& a, const Field& b) {
  if (a.lattice() != b.lattice())
    throw std::invalid_argument("Field +: lattice mismatch");
  Field out = a;
  out.coeffs() += b.coeffs();
  if (a.parity() != b.parity()) out.set_parity(Parity::None);
  return out;
}

Field operator-(const Field& a, const Field& b) {
  if (a.lattice() != b.lattice())
    throw std::invalid_argument("Field -: lattice mismatch");
  Field out = a;
  out.coeffs() -= b.coeffs();
  if (a.parity() != b.parity()) out.set_parity(Parity::None);
  return out;
}

Field operator*(Cx s, const Field& a) {
  Field out = a;
  out.coeffs() *= s;
  return out;
}

Field operator*(double s, const Field& a) { return Cx(s, 0) * a; }

Field random_field(const Lattice& lat, Rng& rng, double decay, Parity parity) {
  Field raw(lat);
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      raw.coeff(li, xi) =
          rng.unit_complex() * std::pow(lat.weight(li, xi), -decay);
  // Symmetrize to a real field, then project parity if requested.
  Field sym = 0.5 * (raw + conj_reflect(raw));
  if (parity != Parity::None) sym = parity_project(sym, parity);
  sym.set_parity(parity);
  return sym;
}

void SolverConfig::validate() const {
  if (d < 1) throw std::invalid_argument("config: d >= 1 required");
  if (L_max < 1 || J_max < 2)
    throw std::invalid_argument("config: L_max >= 1, J_max >= 2 required");
  if (eps <= 0) throw std::invalid_argument("config: eps > 0 required");
  if (nu < 0) throw std::invalid_argument("config: nu >= 0 required");
  if (ansatz_a <= 0 || ansatz_a >= 1)
    throw std::invalid_argument("config: ansatz_a in (0,1) required");
  if (gamma_eff() <= 0 || gamma_eff() > 1)
    throw std::invalid_argument("config: gamma in (0,1] required");
  if (tau_eff() <= 0) throw std::invalid_argument("config: tau > 0 required");
  if (s0_eff() < min_s0(d))
    throw std::invalid_argument("config: s0 >= floor((d+2)/2)+2 required");
  if (s_eff() < s0_eff())
    throw std::invalid_argument("config: s >= s0 required");
  if (static_cast<int>(lambda.omega.size()) != d)
    throw std::invalid_argument("config: omega must have d entries");
  for (const auto& f : forcing) {
    if (static_cast<int>(f.ell.size()) != d)
      throw std::invalid_argument("config: forcing ell must have d entries");
    if (f.j[0] == 0 && f.j[1] == 0)
      throw std::invalid_argument("config: forcing must have zero space average");
  }
}

}  // namespace qpns
