#include "qpns/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qpns {

static_assert(std::endian::native == std::endian::little,
              "binary artifacts are little-endian");

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_i32(std::ostream& os, std::int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::int32_t get_i32(std::istream& is) {
  std::int32_t v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::istream& is) {
  double v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void put_magic(std::ostream& os, const char m[4]) { os.write(m, 4); }
void expect_magic(std::istream& is, const char m[4], const char* what) {
  char buf[4];
  is.read(buf, 4);
  if (!is || std::memcmp(buf, m, 4) != 0)
    throw std::runtime_error(std::string("artifact magic mismatch for ") + what);
  std::uint32_t version = get_u32(is);
  if (version != kFormatVersion)
    throw std::runtime_error(std::string(what) + ": format version " +
                             std::to_string(version) + " != " +
                             std::to_string(kFormatVersion));
}

void put_lattice(std::ostream& os, const Lattice& lat) {
  put_i32(os, lat.d());
  put_i32(os, lat.L_max());
  put_i32(os, lat.J_max());
  put_i32(os, lat.zero_average() ? 1 : 0);
}
Lattice get_lattice(std::istream& is) {
  int d = get_i32(is);
  int L = get_i32(is);
  int J = get_i32(is);
  int za = get_i32(is);
  return Lattice(d, L, J, za != 0);
}

void put_lambda(std::ostream& os, const ParameterPoint& p) {
  put_i32(os, p.d());
  for (double w : p.omega) put_f64(os, w);
  put_f64(os, p.zeta[0]);
  put_f64(os, p.zeta[1]);
}
ParameterPoint get_lambda(std::istream& is) {
  ParameterPoint p;
  int d = get_i32(is);
  p.omega.resize(d);
  for (int k = 0; k < d; ++k) p.omega[k] = get_f64(is);
  p.zeta[0] = get_f64(is);
  p.zeta[1] = get_f64(is);
  return p;
}

void put_vec(std::ostream& os, const VecC& v) {
  put_i32(os, static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i) {
    put_f64(os, v(i).real());
    put_f64(os, v(i).imag());
  }
}
VecC get_vec(std::istream& is) {
  int n = get_i32(is);
  VecC v(n);
  for (int i = 0; i < n; ++i) {
    double re = get_f64(is);
    double im = get_f64(is);
    v(i) = Cx(re, im);
  }
  return v;
}

}  // namespace

void write_field(std::ostream& os, const Field& f) {
  put_magic(os, "QPNF");
  put_u32(os, kFormatVersion);
  put_lattice(os, f.lattice());
  put_i32(os, static_cast<int>(f.parity()));
  // Lexicographic (l, j): l major, x-mode minor.
  const Lattice& lat = f.lattice();
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      put_f64(os, f.coeff(li, xi).real());
      put_f64(os, f.coeff(li, xi).imag());
    }
}

Field read_field(std::istream& is) {
  expect_magic(is, "QPNF", "field");
  Lattice lat = get_lattice(is);
  Parity p = static_cast<Parity>(get_i32(is));
  Field f(lat, p);
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      double re = get_f64(is);
      double im = get_f64(is);
      f.coeff(li, xi) = Cx(re, im);
    }
  if (!is) throw std::runtime_error("field artifact truncated");
  return f;
}

void save_field(const std::string& path, const Field& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_field(os, f);
}

Field load_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field(is);
}

void write_top(std::ostream& os, const TOp& t) {
  put_magic(os, "QPNT");
  put_u32(os, kFormatVersion);
  put_lattice(os, t.lattice());
  put_f64(os, t.order());
  put_i32(os, t.n_blocks());
  const int nx = t.lattice().n_x();
  for (int k = 0; k < t.n_blocks(); ++k)
    for (int r = 0; r < nx; ++r)
      for (int c = 0; c < nx; ++c) {
        put_f64(os, t.block(k)(r, c).real());
        put_f64(os, t.block(k)(r, c).imag());
      }
}

TOp read_top(std::istream& is) {
  expect_magic(is, "QPNT", "operator");
  Lattice lat = get_lattice(is);
  double order = get_f64(is);
  int nb = get_i32(is);
  TOp t(lat, order);
  if (nb != t.n_blocks())
    throw std::runtime_error("operator artifact: block count mismatch");
  const int nx = lat.n_x();
  for (int k = 0; k < nb; ++k)
    for (int r = 0; r < nx; ++r)
      for (int c = 0; c < nx; ++c) {
        double re = get_f64(is);
        double im = get_f64(is);
        t.block(k)(r, c) = Cx(re, im);
      }
  if (!is) throw std::runtime_error("operator artifact truncated");
  return t;
}

void write_reduced_form(std::ostream& os, const ReducedForm& rf) {
  put_magic(os, "QPNR");
  put_u32(os, kFormatVersion);
  put_lattice(os, rf.lat);
  put_lambda(os, rf.lambda);
  put_f64(os, rf.eps);
  put_f64(os, rf.gamma);
  put_f64(os, rf.tau);
  write_field(os, rf.alpha.c1);
  write_field(os, rf.alpha.c2);
  write_field(os, rf.breve.c1);
  write_field(os, rf.breve.c2);
  write_top(os, rf.A);
  write_top(os, rf.A_inv);
  put_i32(os, static_cast<int>(rf.T_stack.size()));
  for (const auto& t : rf.T_stack) write_top(os, t);
  write_top(os, rf.B);
  write_top(os, rf.B_inv);
  put_i32(os, static_cast<int>(rf.psi_stack.size()));
  for (const auto& t : rf.psi_stack) write_top(os, t);
  write_top(os, rf.Phi);
  write_top(os, rf.Phi_inv);
  write_top(os, rf.W);
  write_top(os, rf.W_inv);
  put_vec(os, rf.spectrum.q);
  put_vec(os, rf.Q);
  write_top(os, rf.R2);
  write_top(os, rf.R_nu_unit);
  put_f64(os, rf.kam_final_R_norm);
}

ReducedForm read_reduced_form(std::istream& is) {
  expect_magic(is, "QPNR", "reduced form");
  ReducedForm rf;
  rf.lat = get_lattice(is);
  rf.lambda = get_lambda(is);
  rf.eps = get_f64(is);
  rf.gamma = get_f64(is);
  rf.tau = get_f64(is);
  rf.alpha.c1 = read_field(is);
  rf.alpha.c2 = read_field(is);
  rf.breve.c1 = read_field(is);
  rf.breve.c2 = read_field(is);
  rf.A = read_top(is);
  rf.A_inv = read_top(is);
  int nt = get_i32(is);
  for (int k = 0; k < nt; ++k) rf.T_stack.push_back(read_top(is));
  rf.B = read_top(is);
  rf.B_inv = read_top(is);
  int np = get_i32(is);
  for (int k = 0; k < np; ++k) rf.psi_stack.push_back(read_top(is));
  rf.Phi = read_top(is);
  rf.Phi_inv = read_top(is);
  rf.W = read_top(is);
  rf.W_inv = read_top(is);
  rf.spectrum.lat = rf.lat;
  rf.spectrum.lambda = rf.lambda;
  rf.spectrum.q = get_vec(is);
  rf.Q = get_vec(is);
  rf.R2 = read_top(is);
  rf.R_nu_unit = read_top(is);
  rf.kam_final_R_norm = get_f64(is);
  if (!is) throw std::runtime_error("reduced form artifact truncated");
  return rf;
}

void save_reduced_form(const std::string& path, const ReducedForm& rf) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_reduced_form(os, rf);
}

ReducedForm load_reduced_form(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_reduced_form(is);
}

std::string field_to_json(const Field& f) {
  nlohmann::ordered_json j;
  const Lattice& lat = f.lattice();
  j["format_version"] = kFormatVersion;
  j["d"] = lat.d();
  j["L_max"] = lat.L_max();
  j["J_max"] = lat.J_max();
  j["zero_average"] = lat.zero_average();
  j["parity"] = static_cast<int>(f.parity());
  auto modes = nlohmann::ordered_json::array();
  for (int li = 0; li < lat.n_phi(); ++li)
    for (int xi = 0; xi < lat.n_x(); ++xi) {
      Cx c = f.coeff(li, xi);
      if (c == Cx(0, 0)) continue;
      auto row = nlohmann::ordered_json::array();
      for (int v : lat.phi_mode(li)) row.push_back(v);
      row.push_back(lat.x_mode(xi)[0]);
      row.push_back(lat.x_mode(xi)[1]);
      row.push_back(c.real());
      row.push_back(c.imag());
      modes.push_back(row);
    }
  j["modes"] = modes;
  return j.dump(2);
}

Field field_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  if (j.at("format_version").get<std::uint32_t>() != kFormatVersion)
    throw std::runtime_error("field json: format version mismatch");
  Lattice lat(j.at("d").get<int>(), j.at("L_max").get<int>(),
              j.at("J_max").get<int>(), j.at("zero_average").get<bool>());
  Field f(lat, static_cast<Parity>(j.at("parity").get<int>()));
  int d = lat.d();
  for (const auto& row : j.at("modes")) {
    PhiMode l(d);
    for (int k = 0; k < d; ++k) l[k] = row.at(k).get<int>();
    XMode x{row.at(d).get<int>(), row.at(d + 1).get<int>()};
    f.set_coeff(l, x,
                Cx(row.at(d + 2).get<double>(), row.at(d + 3).get<double>()));
  }
  return f;
}

std::string spectrum_to_csv(const Spectrum& s) {
  std::ostringstream os;
  os.precision(17);
  os << "j1,j2,re_q,im_q\n";
  for (int xi = 0; xi < s.lat.n_x(); ++xi) {
    const XMode& j = s.lat.x_mode(xi);
    os << j[0] << "," << j[1] << "," << s.q(xi).real() << "," << s.q(xi).imag()
       << "\n";
  }
  return os.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace qpns
