#include "mem2seq/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace m2s {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line) + ": "; }

bool is_silence(const Turn& t) { return t.tokens.size() == 1 && t.tokens[0] == "<silence>"; }

DatasetSplit parse_line_format(std::istream& in, const std::string& source, const std::string& split_name,
                               const std::string& format, const std::string& domain) {
  DatasetSplit split;
  split.name = split_name;
  split.format = format;

  std::vector<Turn> history;
  std::vector<KbTriple> kb;
  std::size_t exchange = 0;
  std::size_t dialog = 0;
  bool open = false;
  auto close = [&] {
    history.clear();
    kb.clear();
    exchange = 0;
    open = false;
  };

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      close();
      continue;
    }
    std::size_t pos = 0;
    while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
    if (pos == 0 || pos >= line.size() || line[pos] != ' ') {
      throw DataError(where(source, lineno) + "expected a leading line number");
    }
    const std::size_t k = std::stoul(line.substr(0, pos));
    const std::string body = line.substr(pos + 1);
    const auto tabs = std::count(body.begin(), body.end(), '\t');
    if (tabs > 1) throw DataError(where(source, lineno) + "more than one tab");

    if (k == 1) close();
    if (!open) {
      open = true;
      ++dialog;
    }

    if (tabs == 0) {
      auto fields = tokenize(body);
      if (fields.size() < 3) throw DataError(where(source, lineno) + "KB line needs subject, relation and object");
      std::vector<std::string> rest(fields.begin() + 2, fields.end());
      kb.push_back(KbTriple{fields[0], fields[1], join(rest, " ")});
      continue;
    }

    const std::size_t tab = body.find('\t');
    Turn user{Speaker::User, ++exchange, tokenize(body.substr(0, tab))};
    Turn system{Speaker::System, exchange, tokenize(body.substr(tab + 1))};
    if (system.tokens.empty()) throw DataError(where(source, lineno) + "empty system response");

    history.push_back(user);
    DialogSample sample;
    sample.dialog_id = source + "#" + std::to_string(dialog);
    sample.domain = domain;
    sample.history = history;
    sample.kb = kb;
    sample.response = system.tokens;
    split.samples.push_back(std::move(sample));
    history.push_back(std::move(system));
  }
  return split;
}

std::string file_stem(const std::filesystem::path& path) { return path.filename().string(); }

std::string json_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    std::ostringstream s;
    s << v.get<double>();
    return s.str();
  }
  return {};
}

void collect_strings(const json& v, std::set<std::string>& out) {
  if (v.is_string()) {
    std::string key = surface_key(v.get<std::string>());
    if (!key.empty()) out.insert(std::move(key));
  } else if (v.is_array() || v.is_object()) {
    for (const auto& child : v) collect_strings(child, out);
  }
}

std::vector<std::string> require_tokens(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw DataError(ctx + "expected a token list");
  std::vector<std::string> out;
  for (const auto& t : v) {
    if (!t.is_string()) throw DataError(ctx + "token is not a string");
    out.push_back(t.get<std::string>());
  }
  return out;
}

void require_fields(const json& obj, std::initializer_list<const char*> allowed, const std::string& ctx) {
  if (!obj.is_object()) throw DataError(ctx + "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw DataError(ctx + "unknown field '" + key + "'");
    }
  }
  for (const char* a : allowed) {
    if (!obj.contains(a)) throw DataError(ctx + "missing field '" + a + "'");
  }
}

}  // namespace

TaskSpec TaskSpec::parse(std::string_view text) {
  const std::string t = to_lower(text);
  if (t == "dstc2") return TaskSpec{DatasetKind::Dstc2, 0};
  if (t == "kvr" || t == "incar") return TaskSpec{DatasetKind::Kvr, 0};
  if (t.rfind("babi:", 0) == 0 && t.size() == 6 && t[5] >= '1' && t[5] <= '5') {
    return TaskSpec{DatasetKind::Babi, t[5] - '0'};
  }
  throw std::invalid_argument("unknown task '" + std::string(text) + "' (expected babi:1..5, dstc2 or kvr)");
}

std::string TaskSpec::name() const {
  switch (kind) {
    case DatasetKind::Babi:
      return "babi:" + std::to_string(babi_task);
    case DatasetKind::Dstc2:
      return "dstc2";
    case DatasetKind::Kvr:
      return "kvr";
  }
  return "?";
}

std::size_t DatasetSplit::dialog_count() const {
  std::set<std::string_view> ids;
  for (const auto& s : samples) ids.insert(s.dialog_id);
  return ids.size();
}

DatasetSplit parse_babi(std::istream& in, const std::string& source, const std::string& split_name) {
  return parse_line_format(in, source, split_name, "babi", "babi");
}

DatasetSplit parse_babi(const std::filesystem::path& path, const std::string& split_name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_babi(in, file_stem(path), split_name);
}

DatasetSplit parse_dstc2(std::istream& in, const std::string& source, const std::string& split_name) {
  return parse_line_format(in, source, split_name, "dstc2", "dstc2");
}

DatasetSplit parse_dstc2(const std::filesystem::path& path, const std::string& split_name) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_dstc2(in, file_stem(path), split_name);
}

DatasetSplit parse_kvr(std::string_view json_text, const std::string& source, const EntityMatcher& entities,
                       const std::string& split_name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": " + e.what());
  }
  if (!doc.is_array()) throw DataError(source + ": expected a list of dialogs");

  static const std::map<std::string, std::string> kSubjectColumn{
      {"navigate", "poi"}, {"weather", "location"}, {"schedule", "event"}};

  DatasetSplit split;
  split.name = split_name;
  split.format = "kvr";
  for (std::size_t d = 0; d < doc.size(); ++d) {
    const std::string ctx = source + ": record " + std::to_string(d + 1) + ": ";
    const json& rec = doc[d];
    if (!rec.is_object() || !rec.contains("scenario") || !rec.contains("dialogue")) {
      throw DataError(ctx + "missing scenario or dialogue");
    }
    const json& scenario = rec["scenario"];
    if (!scenario.contains("kb")) throw DataError(ctx + "missing kb section");
    const std::string domain =
        scenario.contains("task") ? to_lower(json_string(scenario["task"].value("intent", json()))) : "";
    auto subject_col = kSubjectColumn.find(domain);
    if (subject_col == kSubjectColumn.end()) throw DataError(ctx + "unknown domain '" + domain + "'");

    std::vector<KbTriple> kb;
    const json& items = scenario["kb"].value("items", json());
    if (items.is_array()) {
      for (const auto& row : items) {
        if (!row.is_object()) throw DataError(ctx + "kb row is not an object");
        const std::string subject = trim(json_string(row.value(subject_col->second, json())));
        if (subject.empty() || subject == "-") continue;
        for (const auto& [column, value] : row.items()) {
          if (column == subject_col->second) continue;
          const std::string object = trim(json_string(value));
          if (object.empty() || object == "-") continue;
          kb.push_back(KbTriple{to_lower(subject), to_lower(column), to_lower(object)});
        }
      }
    }

    std::vector<Turn> history;
    std::size_t exchange = 0;
    const std::string dialog_id = source + "#" + std::to_string(d + 1);
    for (const auto& turn : rec["dialogue"]) {
      const std::string role = to_lower(json_string(turn.value("turn", json())));
      Speaker speaker;
      try {
        speaker = parse_speaker(role);
      } catch (const std::invalid_argument& e) {
        throw DataError(ctx + e.what());
      }
      const json& data = turn.value("data", json::object());
      auto tokens = entities.merge(tokenize(json_string(data.value("utterance", json()))));
      if (speaker == Speaker::User) {
        ++exchange;
        history.push_back(Turn{speaker, exchange, std::move(tokens)});
        continue;
      }
      if (exchange == 0) exchange = 1;
      if (tokens.empty()) continue;
      DialogSample sample;
      sample.dialog_id = dialog_id;
      sample.domain = domain;
      sample.history = history;
      sample.kb = kb;
      sample.response = tokens;
      sample.entities = entities.find(tokens);
      split.samples.push_back(std::move(sample));
      history.push_back(Turn{speaker, exchange, std::move(tokens)});
    }
  }
  return split;
}

DatasetSplit parse_kvr(const std::filesystem::path& path, const EntityMatcher& entities,
                       const std::string& split_name) {
  return parse_kvr(read_file(path), file_stem(path), entities, split_name);
}

std::set<std::string> parse_kvr_entities(std::string_view json_text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(source + ": " + e.what());
  }
  std::set<std::string> out;
  collect_strings(doc, out);
  if (out.empty()) throw DataError(source + ": entity file holds no entities");
  return out;
}

std::set<std::string> kb_entities(std::span<const DatasetSplit* const> splits) {
  std::set<std::string> out;
  for (const DatasetSplit* split : splits) {
    for (const auto& s : split->samples) {
      for (const auto& t : s.kb) out.insert(surface_key(t.object));
    }
  }
  return out;
}

void annotate_entities(DatasetSplit& split, const EntityMatcher& entities) {
  for (auto& s : split.samples) s.entities = entities.find(s.response);
}

Vocab build_vocab(const DatasetSplit& train) {
  Vocab vocab;
  vocab.add_tags();
  for (const auto& s : train.samples) {
    for (const auto& turn : s.history) {
      for (const auto& t : turn.tokens) vocab.add(symbol_form(t));
    }
    for (const auto& t : s.kb) {
      vocab.add(symbol_form(t.subject));
      vocab.add(symbol_form(t.relation));
      vocab.add(symbol_form(t.object));
    }
    for (const auto& t : s.response) vocab.add(symbol_form(t));
  }
  return vocab;
}

std::size_t count_words(std::span<const DatasetSplit* const> splits) {
  Vocab tags;
  tags.add_tags();
  std::set<std::string> words;
  auto add = [&](const std::string& w) {
    std::string s = symbol_form(w);
    if (!tags.contains(s)) words.insert(std::move(s));
  };
  for (const DatasetSplit* split : splits) {
    for (const auto& s : split->samples) {
      for (const auto& turn : s.history) {
        for (const auto& t : turn.tokens) add(t);
      }
      for (const auto& t : s.kb) {
        add(t.subject);
        add(t.relation);
        add(t.object);
      }
      for (const auto& t : s.response) add(t);
    }
  }
  return words.size();
}

CorpusStats compute_stats(const DatasetSplit& split, const Vocab& vocab) {
  CorpusStats st;
  st.samples = split.samples.size();
  st.vocab_size = vocab.size();

  // The last sample of a dialog carries its complete history and KB.
  std::map<std::string, const DialogSample*> last;
  std::map<std::string, std::size_t> system_turns;
  std::size_t words = 0, tokens = 0, pointed = 0;
  for (const auto& s : split.samples) {
    last[s.dialog_id] = &s;
    ++system_turns[s.dialog_id];
    words += s.response.size();
    st.max_system_words = std::max(st.max_system_words, s.response.size());
    MemorySequence memory = build_memory(s, vocab);
    for (std::size_t p : pointer_targets(memory, s.response)) {
      ++tokens;
      if (p != memory.sentinel_index()) ++pointed;
    }
  }
  st.dialogs = last.size();
  if (st.dialogs == 0) return st;

  std::size_t user_turns = 0, sys_turns = 0, kb = 0;
  for (const auto& [id, s] : last) {
    for (const auto& t : s->history) {
      if (t.speaker == Speaker::User && !is_silence(t)) ++user_turns;
    }
    sys_turns += system_turns[id];
    kb += s->kb.size();
  }
  const double n = static_cast<double>(st.dialogs);
  st.avg_user_turns = static_cast<double>(user_turns) / n;
  st.avg_system_turns = static_cast<double>(sys_turns) / n;
  st.avg_kb_results = static_cast<double>(kb) / n;
  st.avg_system_words = st.samples ? static_cast<double>(words) / static_cast<double>(st.samples) : 0.0;
  st.pointer_ratio = tokens ? static_cast<double>(pointed) / static_cast<double>(tokens) : 0.0;
  return st;
}

void write_canonical(std::ostream& out, const DatasetSplit& split) {
  for (const auto& s : split.samples) {
    ordered_json rec;
    rec["dialog_id"] = s.dialog_id;
    rec["domain"] = s.domain;
    ordered_json history = ordered_json::array();
    for (const auto& t : s.history) {
      ordered_json turn;
      turn["speaker"] = std::string(speaker_name(t.speaker));
      turn["turn"] = t.turn;
      turn["tokens"] = t.tokens;
      history.push_back(std::move(turn));
    }
    rec["history"] = std::move(history);
    ordered_json kb = ordered_json::array();
    for (const auto& t : s.kb) kb.push_back({t.subject, t.relation, t.object});
    rec["kb"] = std::move(kb);
    rec["response"] = s.response;
    rec["entities"] = s.entities;
    out << rec.dump() << '\n';
  }
}

DatasetSplit read_canonical(std::istream& in, const std::string& source, const std::string& split_name) {
  DatasetSplit split;
  split.name = split_name;
  split.format = "canonical";
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string ctx = where(source, lineno);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DataError(ctx + e.what());
    }
    require_fields(rec, {"dialog_id", "domain", "history", "kb", "response", "entities"}, ctx);
    DialogSample s;
    if (!rec["dialog_id"].is_string() || !rec["domain"].is_string()) throw DataError(ctx + "ids must be strings");
    s.dialog_id = rec["dialog_id"].get<std::string>();
    s.domain = rec["domain"].get<std::string>();
    if (!rec["history"].is_array()) throw DataError(ctx + "history must be a list");
    for (const auto& t : rec["history"]) {
      require_fields(t, {"speaker", "turn", "tokens"}, ctx);
      if (!t["turn"].is_number_unsigned() || t["turn"].get<std::size_t>() == 0) {
        throw DataError(ctx + "turn must be a positive integer");
      }
      Turn turn;
      try {
        turn.speaker = parse_speaker(t["speaker"].get<std::string>());
      } catch (const std::exception& e) {
        throw DataError(ctx + e.what());
      }
      turn.turn = t["turn"].get<std::size_t>();
      turn.tokens = require_tokens(t["tokens"], ctx);
      s.history.push_back(std::move(turn));
    }
    if (!rec["kb"].is_array()) throw DataError(ctx + "kb must be a list");
    for (const auto& t : rec["kb"]) {
      auto f = require_tokens(t, ctx);
      if (f.size() != 3) throw DataError(ctx + "kb entries are [subject, relation, object]");
      s.kb.push_back(KbTriple{f[0], f[1], f[2]});
    }
    s.response = require_tokens(rec["response"], ctx);
    s.entities = require_tokens(rec["entities"], ctx);
    split.samples.push_back(std::move(s));
  }
  return split;
}

const DatasetSplit& Dataset::split(std::string_view name) const {
  if (name == "train") return train;
  if (name == "val" || name == "dev") return val;
  if (name == "test") return test;
  if ((name == "test-oov" || name == "oov") && test_oov) return *test_oov;
  throw std::invalid_argument("unknown split '" + std::string(name) + "' for task " + task.name());
}

std::filesystem::path resolve_data_root(const std::string& flag_value) {
  std::string root = flag_value;
  if (root.empty()) {
    if (const char* env = std::getenv("M2S_DATA")) root = env;
  }
  if (root.empty()) throw DataError("no dataset path: pass --data or set M2S_DATA");
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) throw DataError("dataset path " + root + " is not a directory");
  return root;
}

namespace {

std::optional<std::filesystem::path> try_find_file(const std::filesystem::path& root, const std::string& prefix,
                                                   const std::string& suffix) {
  std::vector<std::filesystem::path> hits;
  std::error_code ec;
  for (auto it = std::filesystem::recursive_directory_iterator(root, ec);
       it != std::filesystem::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file()) continue;
    const std::string name = it->path().filename().string();
    if (name.rfind(prefix, 0) == 0 && name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      hits.push_back(it->path());
    }
  }
  if (hits.empty()) return std::nullopt;
  std::sort(hits.begin(), hits.end());
  return hits.front();
}

std::filesystem::path find_file(const std::filesystem::path& root, const std::string& prefix,
                                const std::string& suffix) {
  auto hit = try_find_file(root, prefix, suffix);
  if (!hit) throw DataError("no file " + prefix + "*" + suffix + " below " + root.string());
  return *hit;
}

}  // namespace

Dataset load_dataset(const TaskSpec& task, const std::filesystem::path& root) {
  Dataset ds;
  ds.task = task;
  if (task.kind == DatasetKind::Kvr) {
    auto entity_file = find_file(root, "kvret_entities", ".json");
    ds.files.push_back(entity_file);
    ds.entities = parse_kvr_entities(read_file(entity_file), file_stem(entity_file));
    EntityMatcher matcher(ds.entities);
    const std::pair<const char*, DatasetSplit*> parts[] = {
        {"kvret_train", &ds.train}, {"kvret_dev", &ds.val}, {"kvret_test", &ds.test}};
    for (const auto& [prefix, split] : parts) {
      auto path = find_file(root, prefix, ".json");
      ds.files.push_back(path);
      *split = parse_kvr(path, matcher);
    }
    ds.train.name = "train";
    ds.val.name = "val";
    ds.test.name = "test";
    return ds;
  }

  const std::string prefix = task.kind == DatasetKind::Dstc2
                                 ? std::string("dialog-babi-task6-dstc2-")
                                 : "dialog-babi-task" + std::to_string(task.babi_task) + "-";
  auto load = [&](const char* suffix, const char* name) {
    auto path = find_file(root, prefix, suffix);
    ds.files.push_back(path);
    return task.kind == DatasetKind::Dstc2 ? parse_dstc2(path, name) : parse_babi(path, name);
  };
  ds.train = load("-trn.txt", "train");
  ds.val = load("-dev.txt", "val");
  ds.test = load("-tst.txt", "test");
  std::vector<const DatasetSplit*> pool{&ds.train, &ds.val, &ds.test};
  std::vector<DatasetSplit> other_tasks;
  if (task.kind == DatasetKind::Babi) {
    ds.test_oov = load("-tst-OOV.txt", "test-oov");
    pool.push_back(&*ds.test_oov);
    // Entity list spans every bAbI task found under the root.
    other_tasks.reserve(5 * 4);
    for (int t = 1; t <= 5; ++t) {
      if (t == task.babi_task) continue;
      for (const char* suffix : {"-trn.txt", "-dev.txt", "-tst.txt", "-tst-OOV.txt"}) {
        if (auto path = try_find_file(root, "dialog-babi-task" + std::to_string(t) + "-", suffix)) {
          ds.files.push_back(*path);
          other_tasks.push_back(parse_babi(*path));
        }
      }
    }
    for (const auto& s : other_tasks) pool.push_back(&s);
  }
  ds.entities = kb_entities(pool);
  EntityMatcher matcher(ds.entities);
  annotate_entities(ds.train, matcher);
  annotate_entities(ds.val, matcher);
  annotate_entities(ds.test, matcher);
  if (ds.test_oov) annotate_entities(*ds.test_oov, matcher);
  return ds;
}

}  // namespace m2s
