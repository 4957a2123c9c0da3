#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace layoutfuse::cli {

enum class Format { kCsv, kJson, kBoth };

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = ".";
  Format format = Format::kBoth;

  std::optional<std::filesystem::path> dataset;
  std::optional<std::filesystem::path> gate;
  std::optional<std::filesystem::path> a;
  std::optional<std::filesystem::path> b;
  double margin = 0.5;
  double alpha = 0.05;
  bool calibrate = false;
  bool experiment = false;
  std::optional<double> n;
  std::optional<std::size_t> pages;
  std::size_t samples = 4000;
  std::string stream = "teacher";
  int epochs = 10;
};

struct CommandResult {
  std::vector<std::string> outputs;  // file names relative to Options::out
  std::uint64_t seed = 0;
  std::string summary;
};

[[nodiscard]] const std::vector<std::string>& command_names();

/// Runs one command and writes its data files into options.out. Throws
/// ConfigError for invalid configuration and Error for everything else.
CommandResult run_command(std::string_view command, const Options& options);

/// run_command plus manifest.json; prints the summary to `out` and errors to
/// `err`. Returns the process exit status: 0 ok, 2 configuration error,
/// 1 any other error.
int execute(std::string_view command, const Options& options, std::ostream& out, std::ostream& err);

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// Parses per-seed metric values: a JSON array, or numbers separated by
/// commas, whitespace or newlines.
[[nodiscard]] std::vector<double> parse_metric_list(std::string_view text);

}  // namespace layoutfuse::cli
