#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mem2seq/memory.hpp"
#include "mem2seq/text.hpp"
#include "mem2seq/vocab.hpp"

namespace m2s {

/// Malformed or missing dataset input. Messages name the file and the
/// line or record number.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DatasetKind { Babi, Dstc2, Kvr };

/// Parsed `--task` value: "babi:N" (N in 1..5), "dstc2" or "kvr".
struct TaskSpec {
  DatasetKind kind = DatasetKind::Babi;
  int babi_task = 1;

  static TaskSpec parse(std::string_view text);
  std::string name() const;
  bool operator==(const TaskSpec&) const = default;
};

struct DatasetSplit {
  std::string name;
  /// "babi", "dstc2", "kvr" or "canonical".
  std::string format;
  std::vector<DialogSample> samples;

  /// Number of distinct dialog ids.
  std::size_t dialog_count() const;
};

/// Line format shared by bAbI dialog and DSTC2:
///   `<k> <user>\t<system>` for an exchange, `<k> <s> <r> <o>` for a KB
///   result. A dialog ends at a blank line or when k returns to 1.
/// One sample per exchange; its KB holds the result lines seen so far in
/// the dialog. Both turns of exchange i carry turn index i.
DatasetSplit parse_babi(std::istream& in, const std::string& source, const std::string& split_name = "");
DatasetSplit parse_babi(const std::filesystem::path& path, const std::string& split_name = "");
DatasetSplit parse_dstc2(std::istream& in, const std::string& source, const std::string& split_name = "");
DatasetSplit parse_dstc2(const std::filesystem::path& path, const std::string& split_name = "");

/// In-Car Assistant JSON: a list of dialogs with `dialogue` turns and a
/// `scenario` holding `task.intent` and `kb.items`. KB rows expand to
/// (row subject, column, value); the subject column is `poi` for navigate,
/// `location` for weather and `event` for schedule. Empty and "-" values
/// are skipped. Multi-word entities in utterances are joined with '_'.
DatasetSplit parse_kvr(std::string_view json_text, const std::string& source, const EntityMatcher& entities,
                       const std::string& split_name = "");
DatasetSplit parse_kvr(const std::filesystem::path& path, const EntityMatcher& entities,
                       const std::string& split_name = "");
/// Flattened lowercase values of an In-Car entity file.
std::set<std::string> parse_kvr_entities(std::string_view json_text, const std::string& source);

/// KB object values across the given splits.
std::set<std::string> kb_entities(std::span<const DatasetSplit* const> splits);

/// Fills each sample's gold entity list from its response.
void annotate_entities(DatasetSplit& split, const EntityMatcher& entities);

/// Reserved ids, tags, then every history, KB and response symbol in
/// order of first occurrence.
Vocab build_vocab(const DatasetSplit& train);

/// Distinct symbols (history, KB and response) across splits, excluding
/// reserved ids and tags.
std::size_t count_words(std::span<const DatasetSplit* const> splits);

struct CorpusStats {
  std::size_t dialogs = 0;
  std::size_t samples = 0;
  /// Per dialog; a user turn of "<silence>" is not counted.
  double avg_user_turns = 0.0;
  double avg_system_turns = 0.0;
  /// KB triples per dialog (those available at its last turn).
  double avg_kb_results = 0.0;
  double avg_system_words = 0.0;
  std::size_t max_system_words = 0;
  /// Response tokens whose pointer target is a real cell, over all tokens.
  double pointer_ratio = 0.0;
  std::size_t vocab_size = 0;
};

CorpusStats compute_stats(const DatasetSplit& split, const Vocab& vocab);

/// Newline-delimited JSON, one record per sample, fields in the order
/// dialog_id, domain, history, kb, response, entities.
void write_canonical(std::ostream& out, const DatasetSplit& split);
DatasetSplit read_canonical(std::istream& in, const std::string& source, const std::string& split_name = "");

/// All splits of one task. `test_oov` is set for bAbI only.
struct Dataset {
  TaskSpec task;
  DatasetSplit train;
  DatasetSplit val;
  DatasetSplit test;
  std::optional<DatasetSplit> test_oov;
  std::set<std::string> entities;
  std::vector<std::filesystem::path> files;

  const DatasetSplit& split(std::string_view name) const;
};

/// Dataset root from the flag value, else the M2S_DATA variable. Throws
/// DataError when neither names an existing directory.
std::filesystem::path resolve_data_root(const std::string& flag_value);

/// Finds the standard file names for `task` anywhere below `root`.
Dataset load_dataset(const TaskSpec& task, const std::filesystem::path& root);

}  // namespace m2s
