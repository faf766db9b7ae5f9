#pragma once

#include <optional>
#include <string>

namespace vsheet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerificationFailure = 1;
inline constexpr int kExitSolverFailure = 2;
inline constexpr int kExitConfigError = 3;

struct RunConfig {
  std::string command;  // verify | solve | continue | export
  std::optional<double> fix_r1;
  std::optional<double> fix_b;
  double step = 0.001;
  int steps = 100;
  long n_modes = 160;
  long n_theta = 1024;
  double tol = 1e-10;
  std::string seed = "linear+";  // linear+ | linear- | file:<path>
  std::string in_path;
  std::string out_path;
  std::string format = "csv";  // csv | json
  bool inject_fault = false;   // verify test hook
};

/// Dispatch one command; returns the process exit code.
int run_command(const RunConfig& config);

}  // namespace vsheet::cli
