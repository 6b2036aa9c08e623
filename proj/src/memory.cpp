#include "mem2seq/memory.hpp"

#include <stdexcept>

#include "mem2seq/ops.hpp"
#include "mem2seq/text.hpp"

namespace m2s {

Speaker parse_speaker(std::string_view label) {
  const std::string l = to_lower(label);
  if (l == "user" || l == "driver" || l == "$u") return Speaker::User;
  if (l == "system" || l == "assistant" || l == "$s") return Speaker::System;
  throw std::invalid_argument("unknown speaker label '" + std::string(label) + "'");
}

std::string_view speaker_name(Speaker s) { return s == Speaker::User ? "user" : "system"; }

std::vector<std::vector<std::size_t>> MemorySequence::symbol_lists() const {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(cells.size());
  for (const auto& c : cells) out.push_back(c.symbols);
  return out;
}

MemorySequence MemorySequence::padded(std::size_t length) const {
  MemorySequence out = *this;
  while (out.cells.size() < length) out.cells.push_back(MemoryCell{CellKind::Pad, {Vocab::kPad}, ""});
  return out;
}

std::vector<MemoryCell> annotate_history(std::span<const Turn> turns, const Vocab& vocab) {
  std::vector<MemoryCell> cells;
  for (const Turn& t : turns) {
    const std::size_t speaker =
        vocab.id(t.speaker == Speaker::User ? Vocab::kUserTag : Vocab::kSystemTag);
    const std::size_t time = vocab.id(time_tag(t.turn));
    for (const auto& token : t.tokens) {
      cells.push_back(MemoryCell{CellKind::Dialog, {vocab.id(symbol_form(token)), time, speaker}, token});
    }
  }
  return cells;
}

std::vector<MemoryCell> kb_to_cells(std::span<const KbTriple> triples, const Vocab& vocab) {
  std::vector<MemoryCell> cells;
  cells.reserve(triples.size());
  for (const KbTriple& t : triples) {
    if (trim(t.subject).empty() || trim(t.relation).empty() || trim(t.object).empty()) {
      throw std::invalid_argument("KB triple with empty field: (" + t.subject + ", " + t.relation + ", " +
                                  t.object + ")");
    }
    cells.push_back(MemoryCell{CellKind::Kb,
                               {vocab.id(symbol_form(t.subject)), vocab.id(symbol_form(t.relation)),
                                vocab.id(symbol_form(t.object))},
                               trim(t.object)});
  }
  return cells;
}

MemorySequence assemble_memory(std::vector<MemoryCell> kb, std::vector<MemoryCell> dialog) {
  MemorySequence m;
  m.kb_count = kb.size();
  m.dialog_count = dialog.size();
  m.cells = std::move(kb);
  m.cells.insert(m.cells.end(), std::make_move_iterator(dialog.begin()),
                 std::make_move_iterator(dialog.end()));
  m.cells.push_back(MemoryCell{CellKind::Sentinel, {Vocab::kSentinel}, ""});
  return m;
}

MemorySequence build_memory(const DialogSample& sample, const Vocab& vocab) {
  return assemble_memory(kb_to_cells(sample.kb, vocab), annotate_history(sample.history, vocab));
}

std::vector<std::size_t> pointer_targets(const MemorySequence& memory,
                                         std::span<const std::string> response) {
  const std::size_t sentinel = memory.sentinel_index();
  std::vector<std::string> keys(sentinel);
  for (std::size_t z = 0; z < sentinel; ++z) keys[z] = surface_key(memory.cells[z].copy_word);

  std::vector<std::size_t> targets;
  targets.reserve(response.size());
  for (const auto& y : response) {
    const std::string key = surface_key(y);
    std::size_t ptr = sentinel;
    for (std::size_t z = sentinel; z-- > 0;) {
      if (!key.empty() && keys[z] == key) {
        ptr = z;
        break;
      }
    }
    targets.push_back(ptr);
  }
  return targets;
}

std::vector<double> cell_embedding(const MemoryCell& cell, const Tensor& table) {
  return sum_embeddings(cell.symbols, table);
}

std::string cell_label(const MemoryCell& cell, const Vocab& vocab) {
  if (cell.kind == CellKind::Dialog && !cell.symbols.empty()) {
    std::string label = cell.copy_word;
    for (std::size_t i = 1; i < cell.symbols.size(); ++i) label += " " + vocab.word(cell.symbols[i]);
    return label;
  }
  std::string label;
  for (std::size_t i = 0; i < cell.symbols.size(); ++i) {
    if (i) label += ' ';
    label += vocab.word(cell.symbols[i]);
  }
  return label;
}

}  // namespace m2s
