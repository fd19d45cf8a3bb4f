#include "support.hpp"

#include "qpns/serialize.hpp"

using namespace qpns;
using test::lambda_generic;
using test::small_lattice;

namespace {

struct Fixture {
  SolverConfig cfg = test::small_config();
  Lattice lat = small_lattice();
  Field F, v_e;
  ReducedForm rf;

  Fixture() {
    cfg.M_override = 2;
    F = build_forcing(lat, cfg.forcing);
    v_e = solve_euler(F, cfg.lambda, cfg);
    rf = reduce_linearized(v_e, cfg);
  }
};

Fixture& fixture() {
  static Fixture fx;
  return fx;
}

}  // namespace

TEST_CASE("assemble_R_nu_unit") {
  Lattice lat = small_lattice();
  SUBCASE("identity transform with zero inner remainder gives zero") {
    TOp id = TOp::identity(lat);
    CHECK(assemble_R_nu_unit(id, id, TOp(lat, 2.0)).frobenius() == 0.0);
  }
  SUBCASE("linearity in nu is exact by construction") {
    // The assembled operator is the nu = 1 slice; scaling is external.
    Fixture& fx = fixture();
    Rng rng(3);
    Field u = random_field(fx.lat, rng, 2.0);
    Field one = fx.rf.R_nu_unit.apply(u);
    Field two = Cx(2.0, 0) * one;
    CHECK(test::rel_err(Cx(2.0, 0) * fx.rf.R_nu_unit.apply(u), two) == 0.0);
  }
}

TEST_CASE("invert_diag_viscous") {
  Lattice lat = small_lattice();
  ParameterPoint lam = lambda_generic();
  Spectrum spec{lat, lam, VecC::Zero(lat.n_x())};

  SUBCASE("single mode divides by its eigenvalue") {
    Field rhs(lat);
    rhs.set_coeff({2}, {1, -1}, Cx(1, 0));
    double nu = 0.05;
    Field out = invert_diag_viscous(spec, nu, rhs);
    Cx expect = Cx(1, 0) / (kI * (2 * lam.omega[0] + lam.zeta[0] - lam.zeta[1]) +
                            nu * 2.0);
    CHECK(std::abs(out.coeff({2}, {1, -1}) - expect) < 1e-16);
  }
  SUBCASE("forward then inverse is the identity") {
    Rng rng(5);
    Field u = random_field(lat, rng, 1.0);
    Field back = invert_diag_viscous(spec, 0.02, apply_diag_viscous(spec, 0.02, u));
    CHECK(test::rel_err(back, u) < 1e-14);
  }
  SUBCASE("divisor lower bound nu |j|^2 holds exhaustively") {
    double nu = 1e-3;
    for (int li = 0; li < lat.n_phi(); ++li) {
      double wl = lam.omega_dot(lat.phi_mode(li));
      for (int xi = 0; xi < lat.n_x(); ++xi) {
        Cx div = kI * (wl + lam.zeta_dot(lat.x_mode(xi))) + nu * lat.x_abs2(xi);
        CHECK(std::abs(div) >= nu * lat.x_abs2(xi));
      }
    }
  }
  SUBCASE("operator norm of the inverse against -Lap is below 1/nu") {
    Rng rng(7);
    double nu = 1e-2;
    Field u = random_field(lat, rng, 1.0);
    Field w = invert_diag_viscous(spec, nu, -1.0 * laplacian(u));
    CHECK(w.coeffs().norm() <= u.coeffs().norm() / nu * (1 + 1e-12));
  }
  SUBCASE("errors") {
    Field rhs(lat);
    CHECK_THROWS_AS(invert_diag_viscous(spec, 0.0, rhs), std::invalid_argument);
    Spectrum dirty = spec;
    dirty.q(0) = Cx(1e-6, 0);
    CHECK_THROWS_AS(invert_diag_viscous(dirty, 1e-2, rhs), ConvergenceError);
  }
}

TEST_CASE("invert_L_nu") {
  Fixture& fx = fixture();
  Rng rng(11);

  SUBCASE("forward-backward recovery through the direct operator") {
    double nu = 1e-2;
    Field u = random_field(fx.lat, rng, fx.cfg.s0_eff() + 2.0);
    Field rhs = apply_L_nu_direct(fx.v_e, fx.cfg.lambda, fx.cfg.eps, nu, u);
    Field back = invert_L_nu(fx.rf, nu, rhs, fx.cfg);
    CHECK(test::rel_err(back, u) < 1e-8);
  }
  SUBCASE("residual against the direct evaluation") {
    double nu = 1e-3;
    Field rhs = random_field(fx.lat, rng, fx.cfg.s0_eff() + 2.0);
    InvertReport rep;
    Field u = invert_L_nu(fx.rf, nu, rhs, fx.cfg, &rep);
    Field back = apply_L_nu_direct(fx.v_e, fx.cfg.lambda, fx.cfg.eps, nu, u);
    CHECK(sobolev_norm(back - rhs, fx.cfg.s0_eff()) <=
          1e-8 * sobolev_norm(rhs, fx.cfg.s0_eff()));
    CHECK(rep.converged);
    CHECK(rep.contraction < 1.0);
  }
  SUBCASE("agrees with the dense LU oracle on interior modes") {
    double nu = 1e-2;
    TOp dq = fx.cfg.eps * dQ_top(fx.v_e);
    DenseSolver dense(fx.lat, dense_linearized(fx.lat, fx.cfg.lambda, nu, &dq));
    double cut = 0.8 * fx.lat.max_weight();
    for (int k = 0; k < 3; ++k) {
      Field rhs = random_field(fx.lat, rng, fx.cfg.s0_eff() + 2.0);
      Field u1 = invert_L_nu(fx.rf, nu, rhs, fx.cfg);
      Field u2 = dense.solve(rhs);
      CHECK(project_N(u1 - u2, cut).coeffs().norm() /
                project_N(u2, cut).coeffs().norm() <
            1e-6);
    }
  }
  SUBCASE("reality of real right-hand sides is preserved") {
    Field rhs = random_field(fx.lat, rng, 3.0);
    Field u = invert_L_nu(fx.rf, 1e-2, rhs, fx.cfg);
    CHECK(reality_violation(u) < 1e-11 * u.coeffs().cwiseAbs().maxCoeff());
  }
  SUBCASE("nu <= 0 is rejected") {
    Field rhs(fx.lat);
    CHECK_THROWS_AS(invert_L_nu(fx.rf, 0.0, rhs, fx.cfg), std::invalid_argument);
  }
}

TEST_CASE("invert_L_e") {
  Fixture& fx = fixture();
  Rng rng(13);

  SUBCASE("forward-backward recovery") {
    Field u = random_field(fx.lat, rng, fx.cfg.s0_eff() + 2.0);
    Field rhs = apply_L_nu_direct(fx.v_e, fx.cfg.lambda, fx.cfg.eps, 0.0, u);
    Field back = invert_L_e(fx.rf, rhs, fx.cfg);
    CHECK(test::rel_err(back, u) < 1e-7);
  }
  SUBCASE("zero-average output is structural") {
    Field rhs = random_field(fx.lat, rng, 3.0);
    Field u = invert_L_e(fx.rf, rhs, fx.cfg);
    CHECK(u.lattice().zero_average());
  }
}

TEST_CASE("dense oracle") {
  Lattice lat = small_lattice();
  ParameterPoint lam = lambda_generic();
  Rng rng(17);

  SUBCASE("diagonal operator solves by division") {
    MatC D = dense_linearized(lat, lam, 0.0, nullptr);
    DenseSolver solver(lat, D);
    Field rhs = random_field(lat, rng, 1.0);
    Field u = solver.solve(rhs);
    Field expect(lat);
    for (int li = 0; li < lat.n_phi(); ++li) {
      double wl = lam.omega_dot(lat.phi_mode(li));
      for (int xi = 0; xi < lat.n_x(); ++xi)
        expect.coeff(li, xi) =
            rhs.coeff(li, xi) / (kI * (wl + lam.zeta_dot(lat.x_mode(xi))));
    }
    CHECK(test::rel_err(u, expect) < 1e-12);
  }
  SUBCASE("identity returns the right-hand side") {
    DenseSolver solver(lat, MatC::Identity(lat.n_modes(), lat.n_modes()));
    Field rhs = random_field(lat, rng, 1.0);
    CHECK(test::rel_err(solver.solve(rhs), rhs) == 0.0);
  }
  SUBCASE("residual of a random well-conditioned solve") {
    MatC A = MatC::Identity(lat.n_modes(), lat.n_modes());
    for (long i = 0; i < A.rows(); ++i)
      for (long j = 0; j < A.cols(); ++j)
        A(i, j) += 0.3 * rng.unit_complex() / double(A.rows());
    DenseSolver solver(lat, A);
    Field rhs = random_field(lat, rng, 0.5);
    Field u = solver.solve(rhs);
    CHECK(solver.residual(rhs, u) < 1e-11);
  }
  SUBCASE("flat index round trip") {
    Field u = random_field(lat, rng, 0.5);
    CHECK((field_from_flat(lat, flat_from_field(u)) - u).coeffs().norm() == 0.0);
  }
}

TEST_CASE("nu-uniformity of the contraction bound") {
  Fixture& fx = fixture();
  // The bound factor ||Dinv (-Lap)|| * || (-Lap)^{-1} R_nu^inf || is
  // measured per nu; spread stays well under unity scale changes.
  Rng rng(19);
  double c0 = 0;
  {
    Field y = random_field(fx.lat, rng, 2.0);
    for (int it = 0; it < 10; ++it) {
      Field z = inv_laplacian(fx.rf.R_nu_unit.apply(y));
      c0 = z.coeffs().norm() / y.coeffs().norm();
      y = (1.0 / z.coeffs().norm()) * z;
    }
  }
  std::vector<double> factors;
  for (double nu : {1e-1, 1e-2, 1e-3, 1e-4}) {
    double dmax = 0;
    for (int li = 0; li < fx.lat.n_phi(); ++li) {
      double wl = fx.cfg.lambda.omega_dot(fx.lat.phi_mode(li));
      for (int xi = 0; xi < fx.lat.n_x(); ++xi) {
        double im = wl + fx.cfg.lambda.zeta_dot(fx.lat.x_mode(xi)) +
                    fx.rf.spectrum.q(xi).imag();
        dmax = std::max(dmax, fx.lat.x_abs2(xi) /
                                  std::hypot(nu * fx.lat.x_abs2(xi), im));
      }
    }
    factors.push_back(dmax * nu * c0);
  }
  double lo = *std::min_element(factors.begin(), factors.end());
  double hi = *std::max_element(factors.begin(), factors.end());
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  // The generic small-scale point has no near-resonant divisor in range, so
  // the viscous floor is inactive at the smallest nu and the factor may
  // shrink there; the uniformity criterion proper runs at the demo point
  // (acceptance suite). Here we only pin boundedness.
  CHECK(hi / lo < 1e4);
}
