#include "support.hpp"

#include "qpns/spectral_invert.hpp"

using namespace qpns;
using test::lambda_generic;
using test::small_lattice;

TEST_CASE("apply") {
  Lattice lat = small_lattice();
  Rng rng(2);
  Field u = random_field(lat, rng, 1.0);

  SUBCASE("identity") {
    CHECK(test::rel_err(TOp::identity(lat).apply(u), u) < 1e-15);
  }
  SUBCASE("multiplication by exp(i x1) shifts a mode") {
    Lattice full(1, 3, 2, false);
    Field a(full);
    a.set_coeff({0}, {1, 0}, Cx(1, 0));
    TOp M = from_multiplication(a);
    Field e2(full);
    e2.set_coeff({0}, {0, 1}, Cx(1, 0));
    Field out = M.apply(e2);
    CHECK(std::abs(out.coeff({0}, {1, 1}) - Cx(1, 0)) < 1e-15);
    CHECK(out.coeffs().cwiseAbs().sum() == doctest::Approx(1.0));
  }
  SUBCASE("agrees with the dense flattened oracle") {
    TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.7);
    MatC dense = dense_assemble(lat, [&](const Field& f) { return R.apply(f); });
    VecC flat = dense * flat_from_field(u);
    Field direct = R.apply(u);
    CHECK((flat - flat_from_field(direct)).norm() / flat.norm() < 1e-13);
  }
  SUBCASE("lattice mismatch is rejected") {
    Field w(Lattice(1, 2, 2, true));
    CHECK_THROWS_AS(TOp::identity(lat).apply(w), std::invalid_argument);
  }
}

TEST_CASE("decay_norm pinned values") {
  Lattice lat = small_lattice();
  for (double s : {0.0, 3.0, 5.0}) {
    CHECK(decay_norm(TOp::identity(lat), 0.0, s) == doctest::Approx(1.0));
    // | -Delta |_{2,s} = 1 on the zero-average lattice (<j> = |j| there).
    CHECK(decay_norm(TOp::minus_laplacian(lat), 2.0, s) == doctest::Approx(1.0));
  }
  // M_a for a = 2 cos(x1): two unit entries per column at offsets +-e1.
  Lattice full(1, 3, 2, false);
  Field a(full);
  a.set_coeff({0}, {1, 0}, Cx(1, 0));
  a.set_coeff({0}, {-1, 0}, Cx(1, 0));
  TOp M = from_multiplication(a);
  // Interior columns see both entries; boundary columns only one, so the
  // sup is attained inside.
  for (double s : {0.0, 2.0, 4.0})
    CHECK(decay_norm(M, 0.0, s) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("decay_norm monotonicity") {
  Lattice lat = small_lattice();
  Rng rng(5);
  TOp R = random_decay_top(lat, rng, -1.0, 3.0, 1.0);
  CHECK(decay_norm(R, 0.0, 3.0) <= decay_norm(R, -1.0, 3.0));
  CHECK(decay_norm(R, -1.0, 3.0) <= decay_norm(R, -2.0, 3.0));
  CHECK(decay_norm(R, -1.0, 3.0) <= decay_norm(R, -1.0, 4.0));
}

TEST_CASE("compose") {
  Lattice lat = small_lattice();
  Rng rng(7);

  SUBCASE("identity is neutral") {
    TOp Q = random_decay_top(lat, rng, 0.0, 3.0, 0.5);
    TOp P = compose(TOp::identity(lat), Q);
    double diff = 0;
    for (int k = 0; k < Q.n_blocks(); ++k)
      diff = std::max(diff, (P.block(k) - Q.block(k)).cwiseAbs().maxCoeff());
    CHECK(diff < 1e-15);
  }
  SUBCASE("shift times unshift is the identity away from the boundary") {
    Lattice full(1, 3, 2, false);
    Field ap(full), am(full);
    ap.set_coeff({0}, {1, 0}, Cx(1, 0));
    am.set_coeff({0}, {-1, 0}, Cx(1, 0));
    TOp P = compose(from_multiplication(ap), from_multiplication(am));
    PhiMode zero{0};
    for (int jp = 0; jp < full.n_x(); ++jp) {
      XMode j = full.x_mode(jp);
      if (j[0] - 1 < -full.J_max()) continue;  // truncated column
      for (int r = 0; r < full.n_x(); ++r) {
        Cx want = (r == jp) ? Cx(1, 0) : Cx(0, 0);
        CHECK(std::abs(P.entry(zero, full.x_mode(r), j) - want) < 1e-15);
      }
    }
  }
  SUBCASE("order tags add") {
    TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.5);
    TOp Q = random_decay_top(lat, rng, 2.0, 3.0, 0.5);
    CHECK(compose(R, Q).order() == doctest::Approx(1.0));
  }
  SUBCASE("composition decay estimate stays bounded") {
    double worst = 0;
    for (int k = 0; k < 4; ++k) {
      TOp R = random_decay_top(lat, rng, -1.0, 4.0, 0.5);
      TOp Q = random_decay_top(lat, rng, 0.0, 4.0, 0.5);
      double lhs = decay_norm(compose(R, Q), -1.0, 3.0);
      double rhs = decay_norm(R, -1.0, 3.0) * decay_norm(Q, 0.0, 4.0) +
                   decay_norm(R, -1.0, 3.0) * decay_norm(Q, 0.0, 3.0);
      worst = std::max(worst, lhs / rhs);
    }
    CHECK(worst < 20.0);
  }
  SUBCASE("associative on interior-supported operators") {
    // Operators with offsets inside |l| <= 1 compose associatively with no
    // truncation loss at the doubled box.
    auto narrow = [&](Rng& r) {
      TOp t = random_decay_top(lat, r, 0.0, 3.0, 0.5);
      return op_project_N(t, 1.0);
    };
    TOp R = narrow(rng), Q = narrow(rng), S = narrow(rng);
    TOp lhs = compose(compose(R, Q), S);
    TOp rhs = compose(R, compose(Q, S));
    double diff = 0, scale = 0;
    for (int k = 0; k < lhs.n_blocks(); ++k) {
      diff = std::max(diff, (lhs.block(k) - rhs.block(k)).cwiseAbs().maxCoeff());
      scale = std::max(scale, lhs.block(k).cwiseAbs().maxCoeff());
    }
    CHECK(diff < 1e-14 * std::max(1.0, scale));
  }
  SUBCASE("composition defect is reported") {
    TOp R = random_decay_top(lat, rng, 0.0, 2.0, 0.5);
    double defect = -1;
    compose(R, R, &defect);
    CHECK(defect >= 0.0);
  }
}

TEST_CASE("neumann_invert") {
  Lattice lat = small_lattice();
  SUBCASE("zero input") {
    TOp H = neumann_invert(TOp(lat, 0.0), 0.0, 3.0);
    CHECK(H.frobenius() == 0.0);
  }
  SUBCASE("scalar geometric series") {
    TOp R = 0.5 * TOp::identity(lat);
    TOp H = neumann_invert(R, 0.0, 3.0);
    // (Id + c)^{-1} - Id = -(1/3) Id at c = 0.5.
    VecC d = diag_entries(H);
    for (int i = 0; i < d.size(); ++i)
      CHECK(std::abs(d(i) - Cx(-1.0 / 3.0, 0)) < 1e-13);
  }
  SUBCASE("residual check on a random contraction") {
    // In-box offset support keeps the Neumann powers representable on the
    // doubled box, as for the pipeline transforms.
    Rng rng(11);
    TOp R = op_project_N(random_decay_top(lat, rng, 0.0, 3.0, 1e-3),
                         lat.L_max());
    NeumannReport rep;
    TOp H = neumann_invert(R, 0.0, 3.0, 1e-15, 60, &rep);
    CHECK(rep.converged);
    // (Id + R) o (Id + H) = Id in the Toeplitz algebra
    TOp prod = compose(TOp::identity(lat) + R, TOp::identity(lat) + H);
    Field u = random_field(lat, rng, 1.0);
    Field w = prod.apply(u);
    CHECK(test::rel_err(w, u) < 1e-10);
  }
  SUBCASE("non-contractive input is refused") {
    TOp R = 2.0 * TOp::identity(lat);
    CHECK_THROWS_AS(neumann_invert(R, 0.0, 3.0), ConvergenceError);
  }
  SUBCASE("series cap reports the achieved residual") {
    TOp R = 0.5 * TOp::identity(lat);
    CHECK_THROWS_WITH_AS(neumann_invert(R, 0.0, 3.0, 1e-15, 3),
                         doctest::Contains("residual"), ConvergenceError);
  }
}

TEST_CASE("diag_part") {
  Lattice lat = small_lattice();
  Rng rng(13);
  SUBCASE("diagonal input unchanged") {
    VecC d(lat.n_x());
    for (int i = 0; i < d.size(); ++i) d(i) = rng.unit_complex();
    TOp D = TOp::x_diagonal(lat, d, -1.0);
    TOp P = diag_part(D);
    CHECK((diag_entries(P) - d).norm() == 0.0);
    CHECK(P.frobenius() == doctest::Approx(D.frobenius()));
  }
  SUBCASE("multiplication by cos(x1) has no diagonal") {
    Lattice full(1, 3, 2, false);
    Field a(full);
    a.set_coeff({0}, {1, 0}, Cx(0.5, 0));
    a.set_coeff({0}, {-1, 0}, Cx(0.5, 0));
    CHECK(diag_part(from_multiplication(a)).frobenius() == 0.0);
  }
  SUBCASE("diagonal entries obey the decay-norm bound") {
    TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.8);
    double bound = decay_norm(R, -1.0, 3.0);
    VecC d = diag_entries(R);
    for (int xi = 0; xi < lat.n_x(); ++xi)
      CHECK(std::abs(d(xi)) <=
            std::pow(std::max(1.0, lat.x_abs(xi)), -1.0) * bound * (1 + 1e-12));
  }
}

TEST_CASE("op_project_N") {
  Lattice lat = small_lattice();
  Rng rng(17);
  TOp R = random_decay_top(lat, rng, 0.0, 3.0, 1.0);

  SUBCASE("large N is the identity") {
    TOp P = op_project_N(R, 100.0);
    double diff = 0;
    for (int k = 0; k < R.n_blocks(); ++k)
      diff = std::max(diff, (P.block(k) - R.block(k)).cwiseAbs().maxCoeff());
    CHECK(diff == 0.0);
  }
  SUBCASE("pair sums to the input") {
    TOp S = op_project_N(R, 2.0) + op_project_N_perp(R, 2.0);
    double diff = 0;
    for (int k = 0; k < R.n_blocks(); ++k)
      diff = std::max(diff, (S.block(k) - R.block(k)).cwiseAbs().maxCoeff());
    CHECK(diff == 0.0);
  }
  SUBCASE("smoothing inequality") {
    for (double N : {2.0, 3.0})
      for (double a : {1.0, 2.0})
        CHECK(decay_norm(op_project_N_perp(R, N), 0.0, 3.0) <=
              std::pow(N, -a) * decay_norm(R, 0.0, 3.0 + a) * (1 + 1e-12));
  }
}

TEST_CASE("from_multiplication") {
  Lattice full(1, 3, 2, false);
  SUBCASE("constant one gives the identity") {
    Field one(full);
    one.set_coeff({0}, {0, 0}, Cx(1, 0));
    TOp M = from_multiplication(one);
    Rng rng(19);
    Field u = random_field(full, rng, 1.0);
    CHECK(test::rel_err(M.apply(u), u) < 1e-15);
  }
  SUBCASE("single harmonic gives a single superdiagonal") {
    Field a(full);
    a.set_coeff({1}, {1, 0}, Cx(1, 0));
    TOp M = from_multiplication(a);
    int nonzero = 0;
    for (int k = 0; k < M.n_blocks(); ++k)
      nonzero += (M.block(k).cwiseAbs().array() > 0).count();
    // one entry per admissible column
    CHECK(nonzero > 0);
    CHECK(std::abs(M.entry({1}, {1, 1}, {0, 1}) - Cx(1, 0)) < 1e-15);
    CHECK(std::abs(M.entry({1}, {1, 1}, {1, 1})) == 0.0);
  }
  SUBCASE("action equals the pointwise product") {
    Rng rng(23);
    Field a = random_field(full, rng, 1.5);
    Field u = random_field(full, rng, 1.0);
    CHECK(test::rel_err(from_multiplication(a).apply(u),
                        pointwise_product(a, u)) < 1e-13);
  }
  SUBCASE("norm bound |M_a|_{0,s} <= ||a||_s") {
    Rng rng(29);
    Field a = random_field(full, rng, 1.5);
    for (double s : {0.0, 3.0})
      CHECK(decay_norm(from_multiplication(a), 0.0, s) <=
            sobolev_norm(a, s) * (1 + 1e-12));
  }
}

TEST_CASE("structure predicates") {
  Lattice lat = small_lattice();
  SUBCASE("minus laplacian is real and reversibility preserving") {
    TOp mL = TOp::minus_laplacian(lat);
    CHECK(is_real(mL).ok);
    CHECK(is_reversibility_preserving(mL).ok);
    CHECK_FALSE(is_reversible(mL).ok);
  }
  SUBCASE("multiplication by an odd real function is real and reversible") {
    Lattice full(1, 3, 2, false);
    Rng rng(31);
    Field a = random_field(full, rng, 1.0, Parity::Odd);
    TOp M = from_multiplication(a);
    CHECK(is_real(M).ok);
    CHECK(is_reversible(M).ok);
  }
  SUBCASE("i Id fails reality") {
    TOp J = kI * TOp::identity(lat);
    auto rep = is_real(J);
    CHECK_FALSE(rep.ok);
    CHECK(rep.max_violation == doctest::Approx(2.0));
  }
  SUBCASE("reversibility bookkeeping under composition") {
    Lattice full(1, 3, 2, false);
    Rng rng(37);
    Field e1 = random_field(full, rng, 1.0, Parity::Even);
    Field e2 = random_field(full, rng, 1.0, Parity::Even);
    Field o = random_field(full, rng, 1.0, Parity::Odd);
    TOp P1 = from_multiplication(e1), P2 = from_multiplication(e2);
    TOp Rv = from_multiplication(o);
    CHECK(is_reversibility_preserving(P1).ok);
    CHECK(is_reversibility_preserving(compose(P1, P2)).ok);
    // conjugation of a reversible operator by a reversibility-preserving one
    CHECK(is_reversible(compose(P1, compose(Rv, P2))).ok);
  }
}

TEST_CASE("solve_descent_homological") {
  Lattice lat = small_lattice();
  ParameterPoint lam = lambda_generic();
  Rng rng(41);

  SUBCASE("diagonal input gives zero") {
    VecC d(lat.n_x());
    for (int i = 0; i < d.size(); ++i) d(i) = rng.unit_complex();
    TOp D = TOp::x_diagonal(lat, d, -1.0);
    CHECK(solve_descent_homological(D, lam).frobenius() == 0.0);
  }
  SUBCASE("single entry divides by its divisor") {
    TOp R(lat, -1.0);
    PhiMode l0{2};
    XMode j0{1, -1}, jp0{0, 1};
    int k = R.offsets().index(l0);
    R.block(k)(lat.x_index(j0), lat.x_index(jp0)) = Cx(0.3, -0.7);
    TOp psi = solve_descent_homological(R, lam);
    double div = lam.omega[0] * 2 + lam.zeta[0] * (1 - 0) + lam.zeta[1] * (-1 - 1);
    Cx want = -Cx(0.3, -0.7) / (kI * div);
    CHECK(std::abs(psi.block(k)(lat.x_index(j0), lat.x_index(jp0)) - want) <
          1e-15);
  }
  SUBCASE("residual of the operator equation vanishes") {
    TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.9);
    TOp psi = solve_descent_homological(R, lam);
    // w.d_phi Psi + [zeta.grad, Psi] + R - D_R = 0
    TOp res = descent_homological_lhs(psi, lam) + R - diag_part(R);
    Field u = random_field(lat, rng, 1.0);
    double rel = res.apply(u).coeffs().norm() /
                 (decay_norm(R, -1.0, 3.0) * u.coeffs().norm());
    CHECK(rel < 1e-12);
  }
  SUBCASE("support follows the input support") {
    TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.9);
    TOp psi = solve_descent_homological(R, lam);
    for (int k = 0; k < R.n_blocks(); ++k)
      for (int r = 0; r < lat.n_x(); ++r)
        for (int c = 0; c < lat.n_x(); ++c)
          if (R.block(k)(r, c) == Cx(0, 0)) CHECK(psi.block(k)(r, c) == Cx(0, 0));
  }
  SUBCASE("vanishing divisor names the offending index") {
    ParameterPoint bad;
    bad.omega = {1.0};
    bad.zeta = {1.0, 0.5};  // w - zeta_1 = 0 at l = 1, h = (-1, 0)
    TOp R(lat, -1.0);
    int k = R.offsets().index({1});
    R.block(k)(lat.x_index({0, 1}), lat.x_index({1, 1})) = Cx(1, 0);
    CHECK_THROWS_AS(solve_descent_homological(R, bad), NonResonanceError);
  }
}
