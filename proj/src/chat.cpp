#include "mem2seq/chat.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "mem2seq/corpus.hpp"

namespace m2s {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(trim(std::string_view(line).substr(start, tab == std::string::npos ? tab : tab - start)));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

std::set<std::string> kb_values(const std::vector<KbTriple>& kb) {
  std::set<std::string> out;
  for (const KbTriple& t : kb) {
    out.insert(t.subject);
    out.insert(t.object);
  }
  return out;
}

constexpr const char* kHelp =
    "commands: /kb lists the KB, /trace shows the last reply's attention, /reset clears the history, /quit exits";

}  // namespace

std::vector<KbTriple> load_kb_tsv(std::istream& in, const std::string& source) {
  std::vector<KbTriple> kb;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const std::vector<std::string> f = split_tabs(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
      throw DataError(source + ":" + std::to_string(line_no) +
                      ": expected 3 tab-separated fields (subject, relation, object)");
    }
    kb.push_back(KbTriple{to_lower(f[0]), to_lower(f[1]), to_lower(f[2])});
  }
  return kb;
}

ChatSession::ChatSession(const Mem2Seq& model, std::vector<KbTriple> kb)
    : model_(model), kb_(std::move(kb)), entities_(kb_values(kb_)) {}

MemorySequence ChatSession::memory() const {
  return assemble_memory(kb_to_cells(kb_, model_.vocab()), annotate_history(history_, model_.vocab()));
}

std::string ChatSession::respond(std::string_view user_text) {
  const std::size_t turn = exchanges_ + 1;
  history_.push_back(Turn{Speaker::User, turn, entities_.merge(tokenize(user_text))});
  last_trace_ = trace_attention(model_, memory());
  std::vector<std::string> words;
  std::vector<std::string> symbols;
  for (const TraceStep& s : last_trace_->steps) {
    // Copied multi-word entities print spaced; generated words print as-is.
    words.push_back(s.from_vocab ? s.word : surface_key(s.word));
    symbols.push_back(symbol_form(s.word));
  }
  history_.push_back(Turn{Speaker::System, turn, std::move(symbols)});
  exchanges_ = turn;
  return join(words);
}

void ChatSession::reset() {
  history_.clear();
  exchanges_ = 0;
  last_trace_.reset();
}

std::string ChatSession::kb_listing() const {
  if (kb_.empty()) return "(no KB loaded)";
  std::string out;
  for (std::size_t i = 0; i < kb_.size(); ++i) {
    if (i) out += '\n';
    out += kb_[i].subject + " | " + kb_[i].relation + " | " + kb_[i].object;
  }
  return out;
}

std::string ChatSession::trace_summary() const {
  if (!last_trace_) return "(no reply yet)";
  if (last_trace_->steps.empty()) return "(empty reply)";
  std::string out;
  for (std::size_t t = 0; t < last_trace_->steps.size(); ++t) {
    const TraceStep& s = last_trace_->steps[t];
    char weight[32];
    std::snprintf(weight, sizeof weight, "%.3f", s.attention.back().at(s.pointer_index));
    if (t) out += '\n';
    out += std::to_string(t + 1) + ". " + s.word + (s.from_vocab ? "  [vocab]" : "  [copy]") + "  <- " +
           last_trace_->cell_labels.at(s.pointer_index) + " (" + weight + ")";
  }
  return out;
}

std::string ChatSession::handle(std::string_view line) {
  const std::string cmd = trim(line);
  if (cmd == "/kb") return kb_listing();
  if (cmd == "/trace") return trace_summary();
  if (cmd == "/help") return kHelp;
  if (cmd == "/reset") {
    reset();
    return "(history cleared)";
  }
  if (!cmd.empty() && cmd.front() == '/') return "unknown command " + cmd + "; " + kHelp;
  return "system: " + respond(cmd);
}

void run_chat(ChatSession& session, std::istream& in, std::ostream& out, bool echo) {
  std::string line;
  while (true) {
    if (!echo) out << "> " << std::flush;
    if (!std::getline(in, line)) break;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string cmd = trim(line);
    if (cmd.empty()) continue;
    if (cmd == "/quit") break;
    if (echo) out << "user: " << cmd << '\n';
    out << session.handle(cmd) << '\n';
  }
  if (!echo) out << '\n';
}

}  // namespace m2s
