#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "esbench/experiment.hpp"

namespace esbench {

// Seed fallback when --seed is absent.
inline constexpr const char* kSeedEnvVar = "ESTSEQ_SEED";

struct CliParse {
  std::optional<ExperimentSpec> spec;  // empty on --help or error
  int exit_code = 0;
};

// "n=1000,p=50,seed=1,flip=0.05"; missing keys keep their defaults.
DataSource parse_synthetic(const std::string& text);

// Parses argv into a validated spec. Usage and errors go to out/err.
CliParse parse_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Parse, run and write the CSV to --out or to out. Returns the exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace esbench
