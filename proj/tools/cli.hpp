#pragma once

#include "genrestore/genrestore.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace genrestore::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailure = 1,
  kValidation = 2,
  kNumerical = 3,
  kStage = 4,
};

struct RestoreE2EOptions {
  std::string prior;
  std::string observations;
  std::string outdir;
  std::string schedule;
  int T = 1000;
  int K = 200;
  int album_K = 600;
  int album_size = 16;
  int skip_n = 20;
  double lambda = 0.1;
  std::string jacobian = "identity";
  std::string sampler = "ddpm";
  double blend = 0.0;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// Runs one command line (without the program name). Returns the exit code.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Parses a restore-e2e command line without executing it.
RestoreE2EOptions parse_restore_e2e(const std::vector<std::string> &args);

} // namespace genrestore::cli
