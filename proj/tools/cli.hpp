#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mem2seq/corpus.hpp"

namespace m2s::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Runs one `m2s` invocation; `args` excludes the program name. Returns the
/// process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

/// Everything needed to repeat a command: its argv, the resolved config,
/// input checksums and the artifacts it wrote.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::vector<std::pair<std::string, std::string>> config;
  std::uint64_t seed = 0;
  std::string task;
  /// (path, FNV-1a 64 of the file bytes).
  std::vector<std::pair<std::string, std::uint64_t>> inputs;
  /// (role, path).
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::string started;
  std::string finished;

  nlohmann::ordered_json to_json() const;
};

/// FNV-1a 64 of a file's bytes. Throws DataError if it cannot be read.
std::uint64_t file_checksum(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file, then renames it over
/// `path`; the parent directory is created if missing.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Published corpus statistics for one task.
struct ReferenceStats {
  double avg_user_turns = 0.0;
  double avg_system_turns = 0.0;
  double avg_kb_results = 0.0;
  double avg_system_words = 0.0;
  std::size_t max_system_words = 0;
  double pointer_ratio = 0.0;
  std::size_t vocab = 0;
  std::size_t train_dialogs = 0;
  std::size_t val_dialogs = 0;
  std::size_t test_dialogs = 0;
  /// bAbI only.
  std::size_t oov_dialogs = 0;
};

ReferenceStats reference_stats(const TaskSpec& task);

struct StatsCheck {
  std::string name;
  double measured = 0.0;
  double expected = 0.0;
  /// Absent for rows reported without a pass/fail check.
  std::optional<double> tolerance;

  bool ok() const;
};

struct StatsReport {
  std::vector<StatsCheck> checks;
  std::vector<std::filesystem::path> files;

  bool ok() const;
  std::string text() const;
};

/// Loads `task` below `root` and compares its statistics with the published
/// values: dialog counts and vocabulary exactly, pointer ratio within 0.02.
/// The bAbI vocabulary spans every bAbI task file found below `root`.
StatsReport stats_report(const TaskSpec& task, const std::filesystem::path& root);

}  // namespace m2s::cli
