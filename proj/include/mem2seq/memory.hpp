#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mem2seq/tensor.hpp"
#include "mem2seq/vocab.hpp"

namespace m2s {

enum class Speaker { User, System };

/// Accepts "user"/"driver"/"$u" and "system"/"assistant"/"$s".
Speaker parse_speaker(std::string_view label);
std::string_view speaker_name(Speaker s);

struct Turn {
  Speaker speaker = Speaker::User;
  /// Exchange index, starting at 1. A user utterance and the system reply
  /// that follows it share an index.
  std::size_t turn = 1;
  std::vector<std::string> tokens;

  bool operator==(const Turn&) const = default;
};

struct KbTriple {
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const KbTriple&) const = default;
};

/// One system turn to be predicted: everything said before it plus the KB
/// results available at that point.
struct DialogSample {
  std::string dialog_id;
  std::string domain;
  std::vector<Turn> history;
  std::vector<KbTriple> kb;
  /// Gold response tokens, without EOS.
  std::vector<std::string> response;
  /// Entity surface keys occurring in the gold response.
  std::vector<std::string> entities;

  bool operator==(const DialogSample&) const = default;
};

enum class CellKind { Dialog, Kb, Sentinel, Pad };

struct MemoryCell {
  CellKind kind = CellKind::Dialog;
  std::vector<std::size_t> symbols;
  /// Surface token emitted when this cell is pointed at; empty for sentinel
  /// and padding cells.
  std::string copy_word;

  bool operator==(const MemoryCell&) const = default;
};

/// Ordered memory [KB cells; dialog cells; sentinel], optionally followed by
/// padding cells that never receive attention.
struct MemorySequence {
  std::vector<MemoryCell> cells;
  std::size_t kb_count = 0;
  std::size_t dialog_count = 0;

  std::size_t sentinel_index() const { return kb_count + dialog_count; }
  /// Cells that take part in attention (everything up to the sentinel).
  std::size_t valid_length() const { return sentinel_index() + 1; }
  std::size_t size() const { return cells.size(); }

  std::vector<std::vector<std::size_t>> symbol_lists() const;
  /// Extends the memory with PAD cells up to `length` cells.
  MemorySequence padded(std::size_t length) const;
};

/// One DIALOG cell per token: {word, time tag, speaker tag}.
std::vector<MemoryCell> annotate_history(std::span<const Turn> turns, const Vocab& vocab);

/// One KB cell per triple: {subject, relation, object}, copying the object.
std::vector<MemoryCell> kb_to_cells(std::span<const KbTriple> triples, const Vocab& vocab);

MemorySequence assemble_memory(std::vector<MemoryCell> kb, std::vector<MemoryCell> dialog);

/// Memory for a sample: kb_to_cells(kb) ++ annotate_history(history) ++ $.
MemorySequence build_memory(const DialogSample& sample, const Vocab& vocab);

/// For each response token, the largest memory index whose copy word equals
/// the token (compared as surface keys), or the sentinel index if none.
/// Indices are 0-based; the sentinel sits at kb_count + dialog_count.
std::vector<std::size_t> pointer_targets(const MemorySequence& memory,
                                         std::span<const std::string> response);

std::vector<double> cell_embedding(const MemoryCell& cell, const Tensor& table);

/// Human-readable cell label, e.g. "hello t1 $u".
std::string cell_label(const MemoryCell& cell, const Vocab& vocab);

}  // namespace m2s
