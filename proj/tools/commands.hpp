/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fastrss/metrics.hpp"

namespace fastrss::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitParse = 2,
  kExitNoData = 3,
};

enum class OutputFormat { csv, json };

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::string> warnings;
  std::vector<std::filesystem::path> outputs;
};

/// Reproducibility record written next to every command's outputs.
struct RunManifest {
  std::string command_line;
  std::string config_digest;  // hex SHA-256 over config text and input bytes
  std::optional<std::uint64_t> seed;
  std::string tool_version = kToolVersion;
  std::vector<std::string> output_paths;

  std::string to_json() const;
};

struct AnalyzeOptions {
  std::filesystem::path pcap_path;
  CaptureMode mode = CaptureMode::monitor;
  /// Defaults to the capture span rounded up to whole seconds.
  std::optional<double> duration_s;
  double window_s = 1.0;
  double bin_width_ms = 100.0;
  OutputFormat format = OutputFormat::csv;
  std::filesystem::path out_dir = ".";
  /// Defaults to the first record's timestamp floored to a whole window.
  std::optional<std::int64_t> start_us;
  std::string scenario = "capture";
  std::vector<std::string> invocation;
};

struct FilterOptions {
  std::filesystem::path pcap_path;
  std::optional<std::string> ssid;
  std::optional<int> channel;
  std::uint32_t interval_tu = 1000;
  /// When given, report windows past the session end never fire.
  std::optional<double> duration_s;
  std::optional<std::int64_t> start_us;
  std::filesystem::path out_path;
  std::vector<std::string> invocation;
};

struct SimulateOptions {
  std::optional<std::string> preset;
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_sessions;
  double window_s = 1.0;
  double bin_width_ms = 100.0;
  OutputFormat format = OutputFormat::csv;
  std::filesystem::path out_dir = ".";
  std::vector<std::string> invocation;
};

struct CompareOptions {
  std::filesystem::path normal_report;
  std::filesystem::path monitor_report;
  std::filesystem::path out_path;
  std::optional<OutputFormat> format;  // inferred from out_path when absent
  std::vector<std::string> invocation;
};

CommandResult cmd_analyze(const AnalyzeOptions& options, std::ostream& log);
CommandResult cmd_filter(const FilterOptions& options, std::ostream& log);
CommandResult cmd_simulate(const SimulateOptions& options, std::ostream& log);
CommandResult cmd_compare(const CompareOptions& options, std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Writes via a temporary sibling and rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string sha256_hex(std::string_view data);

}  // namespace fastrss::cli
