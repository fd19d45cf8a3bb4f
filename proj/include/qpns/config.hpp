#pragma once

#include <string>

#include "qpns/params.hpp"

namespace qpns {

/// Flat JSON key-value config. Unknown keys are rejected; all physical
/// defaults live in default_config().
SolverConfig config_from_json(const std::string& text);
SolverConfig load_config(const std::string& path);
std::string config_to_json(const SolverConfig& cfg);

/// Desk-scale defaults: d = 1, L_max = 6, J_max = 4, eps = 1e-3, N0 = 2,
/// tau = max{d,2}+1, gamma = eps^{a/2}, and a fixed Diophantine parameter
/// point carrying one small in-range divisor (found by the deterministic
/// parameter scan).
SolverConfig default_config();

}  // namespace qpns
