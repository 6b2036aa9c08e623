#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mem2seq/analysis.hpp"
#include "mem2seq/memory.hpp"
#include "mem2seq/model.hpp"
#include "mem2seq/text.hpp"

namespace m2s {

/// KB triples from tab-separated `subject relation object` lines. Blank
/// lines and lines starting with '#' are skipped; any other line without
/// exactly three non-empty fields throws DataError.
std::vector<KbTriple> load_kb_tsv(std::istream& in, const std::string& source);

/// Multi-turn conversation against a fixed model and KB. Both sides of each
/// exchange enter the history with the exchange's time tag.
class ChatSession {
 public:
  ChatSession(const Mem2Seq& model, std::vector<KbTriple> kb);

  /// Decodes a reply to `user_text`, appends the exchange to the history
  /// and returns the reply as space-joined surface words.
  std::string respond(std::string_view user_text);

  /// Handles `/kb`, `/trace`, `/reset` and `/help`; anything else is a
  /// user turn. Returns the text to print, without a trailing newline.
  std::string handle(std::string_view line);

  void reset();

  const std::vector<Turn>& history() const { return history_; }
  const std::vector<KbTriple>& kb() const { return kb_; }
  /// Memory the next reply would be decoded from, before the user turn.
  MemorySequence memory() const;
  const std::optional<AttentionTrace>& last_trace() const { return last_trace_; }

 private:
  std::string kb_listing() const;
  std::string trace_summary() const;

  const Mem2Seq& model_;
  std::vector<KbTriple> kb_;
  EntityMatcher entities_;
  std::vector<Turn> history_;
  std::size_t exchanges_ = 0;
  std::optional<AttentionTrace> last_trace_;
};

/// Reads lines until EOF or `/quit`. With `echo`, each input line is
/// written back as `user: ...` so piped sessions produce a transcript.
void run_chat(ChatSession& session, std::istream& in, std::ostream& out, bool echo);

}  // namespace m2s
