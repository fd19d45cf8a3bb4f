#include "support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qpns/serialize.hpp"

using namespace qpns;
using test::lambda_generic;
using test::small_lattice;

TEST_CASE("field binary round trip") {
  Lattice lat = small_lattice();
  Rng rng(3);
  Field u = random_field(lat, rng, 1.0, Parity::Odd);
  std::stringstream ss;
  write_field(ss, u);
  Field v = read_field(ss);
  CHECK(v.lattice() == lat);
  CHECK(v.parity() == Parity::Odd);
  CHECK((u - v).coeffs().norm() == 0.0);
}

TEST_CASE("field json round trip") {
  Lattice lat(1, 2, 2, false);
  Rng rng(5);
  Field u = random_field(lat, rng, 1.0);
  Field v = field_from_json(field_to_json(u));
  CHECK((u - v).coeffs().norm() == 0.0);
}

TEST_CASE("operator binary round trip") {
  Lattice lat = small_lattice();
  Rng rng(7);
  TOp R = random_decay_top(lat, rng, -1.0, 3.0, 0.4);
  std::stringstream ss;
  write_top(ss, R);
  TOp Q = read_top(ss);
  CHECK(Q.order() == R.order());
  double diff = 0;
  for (int k = 0; k < R.n_blocks(); ++k)
    diff = std::max(diff, (R.block(k) - Q.block(k)).cwiseAbs().maxCoeff());
  CHECK(diff == 0.0);
}

TEST_CASE("loading a mismatched artifact fails loudly") {
  Lattice lat = small_lattice();
  Field u(lat);
  std::stringstream ss;
  write_field(ss, u);
  std::string bytes = ss.str();

  SUBCASE("wrong magic") {
    bytes[0] = 'X';
    std::stringstream bad(bytes);
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
  }
  SUBCASE("wrong version") {
    bytes[4] = char(0x7f);
    std::stringstream bad(bytes);
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
  }
  SUBCASE("truncated payload") {
    std::stringstream bad(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_field(bad), std::runtime_error);
  }
}

TEST_CASE("reduced form round trip through a file") {
  SolverConfig cfg = test::small_config();
  cfg.M_override = 2;
  Lattice lat = small_lattice();
  Field F = build_forcing(lat, cfg.forcing);
  Field v_e = solve_euler(F, cfg.lambda, cfg);
  ReducedForm rf = reduce_linearized(v_e, cfg);

  auto path = std::filesystem::temp_directory_path() / "qpns_test_rf.red";
  save_reduced_form(path.string(), rf);
  ReducedForm back = load_reduced_form(path.string());
  std::filesystem::remove(path);

  CHECK(back.lat == rf.lat);
  CHECK(back.eps == rf.eps);
  CHECK((back.spectrum.q - rf.spectrum.q).norm() == 0.0);
  CHECK(back.psi_stack.size() == rf.psi_stack.size());
  Rng rng(11);
  Field u = random_field(lat, rng, 2.0);
  CHECK((back.apply_W(u) - rf.apply_W(u)).coeffs().norm() == 0.0);
  CHECK((back.R_nu_unit.apply(u) - rf.R_nu_unit.apply(u)).coeffs().norm() ==
        0.0);
}

TEST_CASE("spectrum csv") {
  Lattice lat(1, 1, 2, true);
  Spectrum s{lat, lambda_generic(), VecC::Zero(lat.n_x())};
  s.q(0) = Cx(0, 0.25);
  std::string csv = spectrum_to_csv(s);
  CHECK(csv.find("j1,j2,re_q,im_q") == 0);
  CHECK(csv.find("0.25") != std::string::npos);
}

TEST_CASE("fnv1a is stable") {
  CHECK(fnv1a("") == 14695981039346656037ULL);
  CHECK(fnv1a("a") != fnv1a("b"));
}
