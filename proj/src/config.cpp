#include "qpns/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qpns {

using nlohmann::json;
using nlohmann::ordered_json;

SolverConfig default_config() {
  SolverConfig cfg;
  cfg.d = 1;
  cfg.L_max = 6;
  cfg.J_max = 4;
  cfg.eps = 1e-3;
  cfg.nu = 1e-2;
  cfg.ansatz_a = 0.7;
  // Fixed demo parameter point: passes the Diophantine scan over the
  // doubled offset range and both Melnikov scans (final 2 gamma threshold
  // included) at gamma = eps^{a/2}, tau = 3, with margin 1.98, while
  // carrying one deliberately small divisor w.l* + zeta.j* = 1e-3 at the
  // primitive index l* = 5, j* = (-4,-4). Deterministic seeded scan; see
  // find_parameter_with_resonance.
  cfg.lambda.omega = {1.4979234523103386};
  cfg.lambda.zeta = {0.55057151996002873, 1.3215827954278945};
  // Two non-parallel x-modes so the bilinear term is active at first order.
  cfg.forcing = {{std::vector<int>{1}, {1, 1}, 1.0},
                 {std::vector<int>{1}, {1, 0}, 0.8}};
  cfg.nu_grid = {1e-1, 3.1622776601683794e-2, 1e-2, 3.1622776601683791e-3,
                 1e-3, 3.1622776601683794e-4, 1e-4};
  cfg.gamma_list = {0.05, 0.1, 0.2};
  cfg.n_samples = 4000;
  cfg.seed = 1;
  return cfg;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "d",           "L_max",        "J_max",
      "eps",         "nu",           "ansatz_a",
      "gamma",       "tau",          "s0",
      "s",           "newton_tol",   "newton_max_iter",
      "kam_tol",     "kam_n_max",    "fixpoint_tol",
      "fixpoint_max_iter",           "alpha_tol",
      "alpha_max_iter",              "neumann_tol",
      "neumann_max_terms",           "vector_neumann_tol",
      "vector_neumann_max_iter",     "N0",
      "M",           "omega",        "zeta",
      "forcing",     "nu_grid",      "gamma_list",
      "n_samples",   "seed",         "threads"};
  return keys;
}

}  // namespace

SolverConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse: ") + e.what());
  }
  SolverConfig cfg = default_config();
  try {
    for (auto& [key, value] : j.items()) {
      if (!known_keys().count(key))
        throw std::invalid_argument("config: unknown key '" + key + "'");
      if (key == "d") cfg.d = value.get<int>();
      else if (key == "L_max") cfg.L_max = value.get<int>();
      else if (key == "J_max") cfg.J_max = value.get<int>();
      else if (key == "eps") cfg.eps = value.get<double>();
      else if (key == "nu") cfg.nu = value.get<double>();
      else if (key == "ansatz_a") cfg.ansatz_a = value.get<double>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "tau") cfg.tau = value.get<double>();
      else if (key == "s0") cfg.s0 = value.get<int>();
      else if (key == "s") cfg.s = value.get<double>();
      else if (key == "newton_tol") cfg.newton_tol = value.get<double>();
      else if (key == "newton_max_iter") cfg.newton_max_iter = value.get<int>();
      else if (key == "kam_tol") cfg.kam_tol = value.get<double>();
      else if (key == "kam_n_max") cfg.kam_n_max = value.get<int>();
      else if (key == "fixpoint_tol") cfg.fixpoint_tol = value.get<double>();
      else if (key == "fixpoint_max_iter")
        cfg.fixpoint_max_iter = value.get<int>();
      else if (key == "alpha_tol") cfg.alpha_tol = value.get<double>();
      else if (key == "alpha_max_iter") cfg.alpha_max_iter = value.get<int>();
      else if (key == "neumann_tol") cfg.neumann_tol = value.get<double>();
      else if (key == "neumann_max_terms")
        cfg.neumann_max_terms = value.get<int>();
      else if (key == "vector_neumann_tol")
        cfg.vector_neumann_tol = value.get<double>();
      else if (key == "vector_neumann_max_iter")
        cfg.vector_neumann_max_iter = value.get<int>();
      else if (key == "N0") cfg.N0 = value.get<double>();
      else if (key == "M") cfg.M_override = value.get<int>();
      else if (key == "omega") cfg.lambda.omega = value.get<std::vector<double>>();
      else if (key == "zeta") {
        auto z = value.get<std::vector<double>>();
        if (z.size() != 2)
          throw std::invalid_argument("config: zeta needs 2 entries");
        cfg.lambda.zeta = {z[0], z[1]};
      } else if (key == "forcing") {
        cfg.forcing.clear();
        for (auto& t : value) {
          ForcingMode m;
          m.ell = t.at("ell").get<std::vector<int>>();
          auto jj = t.at("j").get<std::vector<int>>();
          if (jj.size() != 2)
            throw std::invalid_argument("config: forcing j needs 2 entries");
          m.j = {jj[0], jj[1]};
          m.amplitude = t.value("amplitude", 1.0);
          cfg.forcing.push_back(m);
        }
      } else if (key == "nu_grid")
        cfg.nu_grid = value.get<std::vector<double>>();
      else if (key == "gamma_list")
        cfg.gamma_list = value.get<std::vector<double>>();
      else if (key == "n_samples") cfg.n_samples = value.get<int>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "threads") cfg.threads = value.get<int>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SolverConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config " + path);
  std::ostringstream text;
  text << is.rdbuf();
  return config_from_json(text.str());
}

std::string config_to_json(const SolverConfig& cfg) {
  ordered_json j;
  j["d"] = cfg.d;
  j["L_max"] = cfg.L_max;
  j["J_max"] = cfg.J_max;
  j["eps"] = cfg.eps;
  j["nu"] = cfg.nu;
  j["ansatz_a"] = cfg.ansatz_a;
  j["gamma"] = cfg.gamma_eff();
  j["tau"] = cfg.tau_eff();
  j["s0"] = cfg.s0_eff();
  j["s"] = cfg.s_eff();
  j["newton_tol"] = cfg.newton_tol;
  j["newton_max_iter"] = cfg.newton_max_iter;
  j["kam_tol"] = cfg.kam_tol;
  j["kam_n_max"] = cfg.kam_n_max;
  j["fixpoint_tol"] = cfg.fixpoint_tol;
  j["fixpoint_max_iter"] = cfg.fixpoint_max_iter;
  j["alpha_tol"] = cfg.alpha_tol;
  j["alpha_max_iter"] = cfg.alpha_max_iter;
  j["neumann_tol"] = cfg.neumann_tol;
  j["neumann_max_terms"] = cfg.neumann_max_terms;
  j["vector_neumann_tol"] = cfg.vector_neumann_tol;
  j["vector_neumann_max_iter"] = cfg.vector_neumann_max_iter;
  j["N0"] = cfg.N0;
  j["M"] = cfg.M_eff();
  j["omega"] = cfg.lambda.omega;
  j["zeta"] = std::vector<double>{cfg.lambda.zeta[0], cfg.lambda.zeta[1]};
  auto forcing = ordered_json::array();
  for (const auto& m : cfg.forcing) {
    ordered_json t;
    t["ell"] = m.ell;
    t["j"] = std::vector<int>{m.j[0], m.j[1]};
    t["amplitude"] = m.amplitude;
    forcing.push_back(t);
  }
  j["forcing"] = forcing;
  j["nu_grid"] = cfg.nu_grid;
  j["gamma_list"] = cfg.gamma_list;
  j["n_samples"] = cfg.n_samples;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

}  // namespace qpns
