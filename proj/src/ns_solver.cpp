#include "qpns/ns_solver.hpp"

#include <future>

#include "qpns/spectral_invert.hpp"

namespace qpns {

namespace {
Parity flip(Parity p) {
  if (p == Parity::Even) return Parity::Odd;
  if (p == Parity::Odd) return Parity::Even;
  return Parity::None;
}
Parity product_parity(Parity a, Parity b) {
  if (a == Parity::None || b == Parity::None) return Parity::None;
  return (a == b) ? Parity::Even : Parity::Odd;
}
}  // namespace

double bilinear_kernel(const XMode& xi1, const XMode& xi2) {
  double cross = double(xi1[0]) * xi2[1] - double(xi1[1]) * xi2[0];
  return cross / (double(xi1[0]) * xi1[0] + double(xi1[1]) * xi1[1]);
}

Field bilinear_N(const Field& v1, const Field& v2) {
  const Lattice& lat = v1.lattice();
  if (lat != v2.lattice())
    throw std::invalid_argument("bilinear_N: lattice mismatch");
  if (!lat.zero_average())
    throw std::invalid_argument("bilinear_N: zero-average lattice required");
  Field out(lat, product_parity(flip(v1.parity()), flip(v2.parity())));
  const int J = lat.J_max();
  for (int li = 0; li < lat.n_phi(); ++li) {
    const PhiMode& l1 = lat.phi_mode(li);
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      Cx c1 = v1.coeff(li, xi);
      if (c1 == Cx(0, 0)) continue;
      const XMode& j1 = lat.x_mode(xi);
      for (int mi = 0; mi < lat.n_phi(); ++mi) {
        PhiMode lsum(lat.d());
        bool ok = true;
        const PhiMode& l2 = lat.phi_mode(mi);
        for (int k = 0; k < lat.d(); ++k) {
          lsum[k] = l1[k] + l2[k];
          if (lsum[k] < -lat.L_max() || lsum[k] > lat.L_max()) { ok = false; break; }
        }
        if (!ok) continue;
        int lo = lat.phi_index(lsum);
        for (int yi = 0; yi < lat.n_x(); ++yi) {
          Cx c2 = v2.coeff(mi, yi);
          if (c2 == Cx(0, 0)) continue;
          const XMode& j2 = lat.x_mode(yi);
          XMode js{j1[0] + j2[0], j1[1] + j2[1]};
          if (js[0] < -J || js[0] > J || js[1] < -J || js[1] > J) continue;
          int xo = lat.x_index(js);
          if (xo < 0) continue;  // xi1 + xi2 = 0 carries a zero kernel anyway
          double k12 = bilinear_kernel(j1, j2);
          if (k12 == 0.0) continue;
          out.coeff(lo, xo) += k12 * c1 * c2;
        }
      }
    }
  }
  return out;
}

TOp bilinear_left_top(const Field& v) {
  const Lattice& lat = v.lattice();
  if (!lat.zero_average())
    throw std::invalid_argument("bilinear_left_top: zero-average lattice required");
  TOp out(lat, 1.0);
  const PhiOffsetBox& box = out.offsets();
  for (int li = 0; li < lat.n_phi(); ++li) {
    int k = box.index(lat.phi_mode(li));
    MatC& b = out.block(k);
    for (int vi = 0; vi < lat.n_x(); ++vi) {
      Cx c = v.coeff(li, vi);
      if (c == Cx(0, 0)) continue;
      const XMode& xi1 = lat.x_mode(vi);  // j - j'
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xjp = lat.x_mode(jp);
        XMode j{xjp[0] + xi1[0], xjp[1] + xi1[1]};
        int ji = lat.x_index(j);
        if (ji < 0) continue;
        b(ji, jp) += bilinear_kernel(xi1, xjp) * c;
      }
    }
  }
  return out;
}

TOp bilinear_right_top(const Field& v) {
  const Lattice& lat = v.lattice();
  if (!lat.zero_average())
    throw std::invalid_argument("bilinear_right_top: zero-average lattice required");
  TOp out(lat, -1.0);
  const PhiOffsetBox& box = out.offsets();
  for (int li = 0; li < lat.n_phi(); ++li) {
    int k = box.index(lat.phi_mode(li));
    MatC& b = out.block(k);
    for (int vi = 0; vi < lat.n_x(); ++vi) {
      Cx c = v.coeff(li, vi);
      if (c == Cx(0, 0)) continue;
      const XMode& xi2 = lat.x_mode(vi);  // j - j'
      for (int jp = 0; jp < lat.n_x(); ++jp) {
        const XMode& xjp = lat.x_mode(jp);
        XMode j{xjp[0] + xi2[0], xjp[1] + xi2[1]};
        int ji = lat.x_index(j);
        if (ji < 0) continue;
        b(ji, jp) += bilinear_kernel(xjp, xi2) * c;
      }
    }
  }
  return out;
}

TOp dQ_top(const Field& v) {
  TOp out = bilinear_left_top(v) + bilinear_right_top(v);
  out.set_order(1.0);
  return out;
}

Field eval_F_nu(const Field& v, const Field& F, const ParameterPoint& lambda,
                double eps, double nu) {
  Field out = transport_L0(v, lambda);
  if (nu != 0.0) out = out - nu * laplacian(v);
  Field Q = bilinear_N(v, v);
  out = out + eps * (Q - F);
  return out;
}

Field build_forcing(const Lattice& lat, const std::vector<ForcingMode>& modes) {
  Field F(lat, Parity::Even);
  for (const auto& term : modes) {
    PhiMode l = term.ell;
    XMode j = term.j;
    PhiMode ln(l.size());
    for (size_t k = 0; k < l.size(); ++k) ln[k] = -l[k];
    XMode jn{-j[0], -j[1]};
    F.set_coeff(l, j, F.coeff(l, j) + Cx(term.amplitude / 2.0, 0));
    F.set_coeff(ln, jn, F.coeff(ln, jn) + Cx(term.amplitude / 2.0, 0));
  }
  return F;
}

Field solve_euler(const Field& F, const ParameterPoint& lambda,
                  const SolverConfig& cfg, EulerReport* report) {
  const Lattice& lat = F.lattice();
  Field v(lat, Parity::Odd);
  EulerReport rep;
  const double s0 = cfg.s0_eff();
  double prev_res = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (rep.iterations = 0; rep.iterations < cfg.newton_max_iter;
       ++rep.iterations) {
    Field r = eval_F_nu(v, F, lambda, cfg.eps, 0.0);
    rep.residual = sobolev_norm(r, s0);
    if (rep.residual <= cfg.newton_tol) {
      rep.converged = true;
      break;
    }
    if (rep.residual > 0.5 * prev_res) {
      if (++stall >= 3)
        throw ConvergenceError("solve_euler: Newton stagnation, residual " +
                               std::to_string(rep.residual));
    } else {
      stall = 0;
    }
    prev_res = rep.residual;
    TOp dq = cfg.eps * dQ_top(v);
    DenseSolver solver(lat, dense_linearized(lat, lambda, 0.0, &dq));
    Field delta = solver.solve(r);
    v = v - delta;
  }
  if (!rep.converged) {
    Field r = eval_F_nu(v, F, lambda, cfg.eps, 0.0);
    rep.residual = sobolev_norm(r, s0);
    rep.converged = rep.residual <= cfg.newton_tol;
    if (!rep.converged)
      throw ConvergenceError("solve_euler: no convergence, residual " +
                             std::to_string(rep.residual));
  }
  rep.odd_violation = parity_violation(v, Parity::Odd);
  rep.reality_violation = reality_violation(v);
  rep.v_norm_s0 = sobolev_norm(v, s0);
  rep.v_norm_over_eps_a = rep.v_norm_s0 / std::pow(cfg.eps, cfg.ansatz_a);
  v.set_parity(Parity::Odd);
  if (report) *report = rep;
  return v;
}

ApproximateSolution build_approximate(const Field& v_e, const ReducedForm& rf,
                                      double nu, const Field& F,
                                      const SolverConfig& cfg) {
  ApproximateSolution out;
  Field lap_ve = laplacian(v_e);
  out.v1 = invert_L_e(rf, lap_ve, cfg);
  // L_e v1 = L0 v1 + eps dQ(v_e)[v1]
  Field Le_v1 = transport_L0(out.v1, rf.lambda) +
                cfg.eps * (bilinear_N(v_e, out.v1) + bilinear_N(out.v1, v_e));
  double lap_norm = sobolev_norm(lap_ve, cfg.s0_eff());
  out.v1_residual =
      lap_norm > 0 ? sobolev_norm(Le_v1 - lap_ve, cfg.s0_eff()) / lap_norm : 0.0;
  out.v_app = v_e + nu * out.v1;
  Field defect = eval_F_nu(out.v_app, F, rf.lambda, cfg.eps, nu);
  out.defect_norm_s0 = sobolev_norm(defect, cfg.s0_eff());
  // F_nu(v_app) = F_0(v_e) + nu (L_e v1 - Lap v_e) + nu^2 (-Lap v1 + eps Q(v1))
  Field euler_res = eval_F_nu(v_e, F, rf.lambda, cfg.eps, 0.0);
  Field quad = -1.0 * laplacian(out.v1) + cfg.eps * bilinear_N(out.v1, out.v1);
  Field identity =
      euler_res + nu * (Le_v1 - lap_ve) + (nu * nu) * quad - defect;
  out.identity_error = sobolev_norm(identity, cfg.s0_eff());
  return out;
}

Field fixed_point_solve(const ApproximateSolution& approx, const Field& /*v_e*/,
                        const ReducedForm& rf, double nu, const Field& F,
                        const SolverConfig& cfg, FixedPointReport* report) {
  const Lattice& lat = approx.v_app.lattice();
  Field F_vapp = eval_F_nu(approx.v_app, F, rf.lambda, cfg.eps, nu);
  Field psi(lat);
  FixedPointReport rep;
  const double s0 = cfg.s0_eff();
  for (rep.iterations = 1; rep.iterations <= cfg.fixpoint_max_iter;
       ++rep.iterations) {
    Field rhs = F_vapp;
    if (sobolev_norm(psi, 0.0) > 0) {
      rhs = rhs + (cfg.eps * nu) *
                      (bilinear_N(approx.v1, psi) + bilinear_N(psi, approx.v1)) +
            cfg.eps * bilinear_N(psi, psi);
    }
    Field psi_next = -1.0 * invert_L_nu(rf, nu, rhs, cfg);
    rep.last_step = sobolev_norm(psi_next - psi, s0);
    psi = std::move(psi_next);
    double pn = sobolev_norm(psi, s0);
    rep.max_psi_norm = std::max(rep.max_psi_norm, pn);
    if (pn > nu) {
      rep.ball_escape = true;
      if (report) *report = rep;
      throw ConvergenceError(
          "fixed_point_solve: iterate left the ball ||psi|| <= nu (norm " +
          std::to_string(pn) + ")");
    }
    if (rep.last_step <= cfg.fixpoint_tol * nu) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw ConvergenceError("fixed_point_solve: no convergence in " +
                           std::to_string(cfg.fixpoint_max_iter) + " steps");
  Field v_nu = approx.v_app + psi;
  rep.residual = sobolev_norm(eval_F_nu(v_nu, F, rf.lambda, cfg.eps, nu), s0);
  if (report) *report = rep;
  return v_nu;
}

bool fit_loglog_slope(const std::vector<std::pair<double, double>>& xy,
                      double* slope) {
  if (xy.size() < 2) return false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto& [x, y] : xy) {
    if (x <= 0 || y <= 0) return false;
    double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double n = double(xy.size());
  double denom = n * sxx - sx * sx;
  if (denom == 0) return false;
  *slope = (n * sxy - sx * sy) / denom;
  return true;
}

SweepResult nu_sweep(const Field& v_e, const ReducedForm& rf,
                     const std::vector<double>& nu_grid, const Field& F,
                     const SolverConfig& cfg) {
  SweepResult out;
  const double s0 = cfg.s0_eff();
  auto solve_one = [&](double nu) {
    ApproximateSolution approx = build_approximate(v_e, rf, nu, F, cfg);
    FixedPointReport fp;
    Field v_nu = fixed_point_solve(approx, v_e, rf, nu, F, cfg, &fp);
    SweepRow row;
    row.eps = cfg.eps;
    row.nu = nu;
    row.s = s0;
    row.diff_norm = sobolev_norm(v_nu - v_e, s0);
    row.residual = fp.residual;
    auto sup = supnorm_diff(v_nu, v_e, {{0, {0, 0}}}, rf.lambda);
    row.sup_diff = sup[0].sup;
    return row;
  };
  // Grid points are independent solves; rows keep the grid order either way.
  if (cfg.threads > 1) {
    std::vector<std::future<SweepRow>> futs;
    for (double nu : nu_grid)
      futs.push_back(std::async(std::launch::async, solve_one, nu));
    for (auto& f : futs) out.rows.push_back(f.get());
  } else {
    for (double nu : nu_grid) out.rows.push_back(solve_one(nu));
  }
  std::vector<std::pair<double, double>> xy, xy_sup;
  for (auto& r : out.rows) {
    xy.push_back({r.nu, r.diff_norm});
    xy_sup.push_back({r.nu, r.sup_diff});
  }
  out.slope_defined = fit_loglog_slope(xy, &out.slope);
  if (out.slope_defined) fit_loglog_slope(xy_sup, &out.sup_slope);
  return out;
}

std::vector<SupNormRow> supnorm_diff(
    const Field& u, const Field& w,
    const std::vector<std::pair<int, std::array<int, 2>>>& derivatives,
    const ParameterPoint& lambda, int oversample) {
  const Lattice& lat = u.lattice();
  Field diff = u - w;
  double embed = 0;  // sqrt(sum <l,j>^{-2 s0}) at the minimal s0
  double s0 = min_s0(lat.d());
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi)
      embed += std::pow(lat.weight(li, xi), -2.0 * s0);
  embed = std::sqrt(embed);
  TorusGrid grid(lat.d(), oversample * (2 * lat.L_max() + 1),
                 oversample * (2 * lat.J_max() + 1));
  std::vector<SupNormRow> rows;
  for (auto& [t_ord, x_ord] : derivatives) {
    Field g = diff;
    for (int k = 0; k < t_ord; ++k) g = omega_dphi(g, lambda);
    for (int k = 0; k < x_ord[0]; ++k) g = dx(g, 0);
    for (int k = 0; k < x_ord[1]; ++k) g = dx(g, 1);
    SupNormRow row;
    row.t_order = t_ord;
    row.x_order = x_ord;
    row.sup = grid.eval(g).cwiseAbs().maxCoeff();
    row.sobolev_bound = embed * sobolev_norm(g, s0);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qpns
