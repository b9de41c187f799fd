#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace fraflow::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_blowup = 2,
  exit_usage = 64,
  exit_no_input = 66,
};

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 0;  // 0: hardware concurrency
};

int cmd_solve(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg, unsigned jobs);
int cmd_certify(const RunConfig& cfg);
int cmd_kernels(const RunConfig& cfg);

// args[0] is the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace fraflow::cli
