#pragma once

#include <string>
#include <vector>

namespace qpns::cli {

// Exit codes: 0 ok, 2 config/parse error, 3 non-resonance failure,
// 4 non-convergence.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNonResonance = 3;
inline constexpr int kNoConvergence = 4;

int run_solve_euler(const std::string& config_path, const std::string& out_dir,
                    std::uint64_t seed_override, int threads);
int run_reduce(const std::string& config_path, const std::string& ve_path,
               const std::string& out_dir, int threads);
int run_solve_ns(const std::string& config_path, const std::string& red_path,
                 double nu, const std::string& out_dir, int threads);
int run_sweep_nu(const std::string& config_path, const std::string& out_dir,
                 int threads);
int run_measure(const std::string& config_path, const std::string& out_dir,
                const std::vector<double>& gamma_list, std::uint64_t seed,
                int threads);

int main(int argc, char** argv);

}  // namespace qpns::cli
