#pragma once

#include <ostream>
#include <string>

#include "mcflow/config.hpp"

namespace mcflow {

/// Exit codes: 0 ok, 1 invalid config, 2 newton_failure, 3 extremal_blowup
/// (diagnostics are still written on 3).
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitNewtonFailure = 2;
inline constexpr int kExitExtremalBlowup = 3;

int run_solve(const ProblemConfig& cfg, std::ostream& log);
int run_check(const ProblemConfig& cfg, std::ostream& log);
int run_oracle(const ProblemConfig& cfg, std::ostream& log);
int run_sweep(const ProblemConfig& cfg, std::ostream& log);
int run_verify(const std::string& profile_path, const std::string& out_dir, std::ostream& log);

}  // namespace mcflow
