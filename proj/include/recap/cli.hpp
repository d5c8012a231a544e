#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "recap/config.hpp"

namespace recap {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

struct TrainOptions {
  RunConfig config;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::filesystem::path model_out;
};

struct EvalOptions {
  std::filesystem::path model;
  std::filesystem::path images;
  std::filesystem::path labels;
  std::optional<std::filesystem::path> report_out;  // default: stdout
  int threads = 0;
};

struct CorruptOptions {
  std::optional<std::string> kind;  // absent = format conversion only
  int severity = 1;
  std::uint64_t seed = 1;
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> labels_in;
  std::optional<std::filesystem::path> labels_out;
};

struct BenchmarkOptions {
  std::filesystem::path model;
  std::filesystem::path directory;
  std::optional<std::filesystem::path> reference;
  std::optional<std::filesystem::path> report_out;  // default: stdout
  std::optional<std::filesystem::path> csv_out;
  int threads = 0;
};

struct InspectOptions {
  std::filesystem::path model;
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> labels;
  int threads = 0;
};

// Commands return an exit code and write human/machine-readable output to the
// stream; errors surface as the typed exceptions in errors.hpp.
int cmd_train(const TrainOptions& options, std::ostream& out);
int cmd_eval(const EvalOptions& options, std::ostream& out);
int cmd_corrupt(const CorruptOptions& options, std::ostream& out);
int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out);
int cmd_inspect(const InspectOptions& options, std::ostream& out);

// Full argv driver: parses flags/subcommands, dispatches, maps exceptions to
// exit codes.
int run_cli(int argc, const char* const* argv);

}  // namespace recap
