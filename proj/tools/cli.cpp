#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "mem2seq/analysis.hpp"
#include "mem2seq/chat.hpp"
#include "mem2seq/checkpoint.hpp"
#include "mem2seq/metrics.hpp"
#include "mem2seq/trainer.hpp"

namespace m2s::cli {

namespace {

namespace fs = std::filesystem;

/// Bad or missing command-line input; reported with the command's usage.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text(const fs::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + std::string(what) + " " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::pair<std::string, std::string>> config_pairs(const TrainConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(config.to_text());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

// Flags shared by the subcommands; each subcommand registers the subset it
// accepts.
struct Flags {
  std::string task;
  std::string data;
  std::string train_file;
  std::string val_file;
  std::string test_file;
  std::string split = "test";
  std::string config_file;
  std::string grid_file;
  std::string ckpt;
  std::string out = ".";
  std::string kb;
  bool echo = false;
  std::size_t samples = 1;
  bool timing = false;
  std::string timing_hops = "1,3,6";
  std::size_t timing_epochs = 1;
  // config key -> flag value, for the hyper-parameter flags given
  std::map<std::string, std::string> hyper;
  std::vector<std::pair<std::string, CLI::Option*>> hyper_opts;
};

void add_data_flags(CLI::App* app, Flags& f) {
  app->add_option("--task", f.task, "Task: babi:1..5, dstc2 or kvr");
  app->add_option("--data", f.data, "Dataset root directory (default: $M2S_DATA)");
  app->add_option("--train-file", f.train_file, "Canonical training split (instead of --task)");
  app->add_option("--val-file", f.val_file, "Canonical validation split");
  app->add_option("--test-file", f.test_file, "Canonical test split");
}

void add_hyper_flags(CLI::App* app, Flags& f) {
  const std::pair<const char*, const char*> keys[] = {
      {"hops", "Memory hops K"},
      {"dim", "Embedding and hidden size"},
      {"lr", "Adam learning rate"},
      {"lr_decay", "Learning-rate factor after a non-improving epoch"},
      {"dropout", "Dropout rate"},
      {"mask", "Word-mask rate for dialog memory"},
      {"batch", "Batch size"},
      {"max_epochs", "Maximum epochs"},
      {"patience", "Non-improving epochs before stopping"},
      {"seed", "Random seed"},
      {"metric", "Validation metric: per_response or bleu"},
      {"target_score", "Stop once the validation score reaches this (0: off)"},
  };
  for (const auto& [key, help] : keys) {
    std::string flag = std::string("--") + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    f.hyper_opts.emplace_back(key, app->add_option(flag, f.hyper[key], help));
  }
  app->add_option("--config", f.config_file, "Config file of key=value lines (flags override it)");
}

TrainConfig resolve_config(const Flags& f) {
  TrainConfig config;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file, std::ios::binary);
    if (!in) throw UsageError("cannot read config file " + f.config_file);
    std::ostringstream s;
    s << in.rdbuf();
    config.apply_text(s.str());
  }
  for (const auto& [key, opt] : f.hyper_opts) {
    if (opt->count() > 0) config.set(key, f.hyper.at(key));
  }
  config.validate();
  return config;
}

// Splits and entity list for a command, from a dataset root or from
// canonical files.
struct Inputs {
  std::string task;
  std::map<std::string, DatasetSplit> splits;
  std::set<std::string> entities;
  std::vector<fs::path> files;

  const DatasetSplit& split(const std::string& name) const {
    auto it = splits.find(name == "dev" ? "val" : name == "oov" ? "test-oov" : name);
    if (it == splits.end()) throw UsageError("split '" + name + "' is not available");
    return it->second;
  }
};

fs::path data_root(const Flags& f) {
  std::string root = f.data;
  if (root.empty()) {
    if (const char* env = std::getenv("M2S_DATA")) root = env;
  }
  if (root.empty()) throw UsageError("missing dataset path: pass --data or set M2S_DATA");
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw UsageError("dataset path " + root + " is not a directory");
  return root;
}

Inputs load_inputs(const Flags& f, const std::vector<std::string>& required) {
  Inputs in;
  const bool canonical = !f.train_file.empty() || !f.val_file.empty() || !f.test_file.empty();
  if (canonical) {
    in.task = "canonical";
    const std::pair<const char*, const std::string*> files[] = {
        {"train", &f.train_file}, {"val", &f.val_file}, {"test", &f.test_file}};
    for (const auto& [name, path] : files) {
      if (path->empty()) continue;
      std::ifstream file(*path, std::ios::binary);
      if (!file) throw DataError("cannot read " + *path);
      in.splits[name] = read_canonical(file, *path, name);
      in.files.emplace_back(*path);
    }
    std::vector<const DatasetSplit*> pool;
    for (const auto& [name, split] : in.splits) pool.push_back(&split);
    in.entities = kb_entities(pool);
    for (const DatasetSplit* s : pool) {
      for (const DialogSample& sample : s->samples) in.entities.insert(sample.entities.begin(), sample.entities.end());
    }
    for (const std::string& name : required) {
      if (!in.splits.count(name)) throw UsageError("--" + name + "-file is required with canonical inputs");
    }
    return in;
  }
  if (f.task.empty()) throw UsageError("pass --task (with --data or M2S_DATA) or canonical --train-file/--val-file");
  const TaskSpec task = TaskSpec::parse(f.task);
  Dataset ds = load_dataset(task, data_root(f));
  in.task = task.name();
  in.entities = std::move(ds.entities);
  in.files = std::move(ds.files);
  in.splits["train"] = std::move(ds.train);
  in.splits["val"] = std::move(ds.val);
  in.splits["test"] = std::move(ds.test);
  if (ds.test_oov) in.splits["test-oov"] = std::move(*ds.test_oov);
  return in;
}

// Split picked by --split: a named dataset split, or in canonical mode the
// file given for it.
const DatasetSplit& selected_split(const Flags& f, const Inputs& in) { return in.split(f.split); }

/// Rejects a checkpoint whose vocabulary covers under half of the split's
/// response tokens: the model was trained on a different dataset.
void check_vocab_overlap(const Vocab& vocab, const DatasetSplit& split) {
  std::size_t known = 0;
  std::size_t total = 0;
  for (const DialogSample& s : split.samples) {
    for (const std::string& w : s.response) {
      ++total;
      known += vocab.contains(symbol_form(w)) ? 1 : 0;
    }
  }
  if (total > 0 && 2 * known < total) {
    throw DataError("checkpoint vocabulary covers " + std::to_string(known) + " of " + std::to_string(total) +
                    " response tokens in split '" + split.name + "'; it was trained on a different dataset");
  }
}

struct Context {
  const std::vector<std::string>& args;
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  std::string started;
};

void finish(const Context& ctx, RunManifest m, const Flags& f, const std::vector<fs::path>& inputs) {
  m.argv = ctx.args;
  m.started = ctx.started;
  for (const fs::path& p : inputs) m.inputs.emplace_back(p.string(), file_checksum(p));
  m.finished = utc_now();
  const fs::path path = fs::path(f.out) / (m.command + ".manifest.json");
  write_file_atomic(path, m.to_json().dump(2) + "\n");
}

int cmd_train(const Context& ctx, const Flags& f) {
  TrainConfig config = resolve_config(f);
  const Inputs in = load_inputs(f, {"train", "val"});
  const DatasetSplit& train_split = in.split("train");
  const DatasetSplit& val_split = in.split("val");
  RunManifest m;
  m.command = "train";
  m.task = in.task;
  std::vector<fs::path> inputs = in.files;

  if (!f.grid_file.empty()) {
    inputs.emplace_back(f.grid_file);
    const GridSpace space = GridSpace::parse(read_text(f.grid_file, "grid file"));
    const GridResult grid = grid_search(config, space, train_split, val_split);
    std::string table = "hops\tdim\tlr\tdropout\tmask\tscore\n";
    for (const GridPoint& p : grid.points) {
      char row[160];
      std::snprintf(row, sizeof row, "%zu\t%zu\t%.9g\t%.9g\t%.9g\t", p.config.model.hops, p.config.model.dim,
                    p.config.lr, p.config.dropout, p.config.word_mask);
      table += row;
      if (p.score) {
        std::snprintf(row, sizeof row, "%.9f\n", *p.score);
        table += row;
      } else {
        table += "failed: " + p.failure + "\n";
      }
    }
    const fs::path grid_path = fs::path(f.out) / "grid.tsv";
    write_file_atomic(grid_path, table);
    m.artifacts.emplace_back("grid", grid_path.string());
    config = grid.best;
    ctx.err << "grid: best of " << grid.points.size() << " points is hops=" << config.model.hops
            << " dim=" << config.model.dim << " lr=" << config.lr << "\n";
  }

  std::string log;
  TrainHooks hooks;
  hooks.on_epoch = [&](const EpochRecord& r) {
    log += r.stable_line() + "\n";
    ctx.err << r.log_line() << '\n';
  };
  const TrainResult result = train(config, train_split, val_split, hooks);
  if (const fs::path parent = fs::path(f.ckpt).parent_path(); !parent.empty()) fs::create_directories(parent);
  save_checkpoint(result.best, f.ckpt);
  const fs::path log_path = fs::path(f.out) / "train.log";
  write_file_atomic(log_path, log);

  m.config = config_pairs(config);
  m.seed = config.seed;
  m.artifacts.emplace_back("checkpoint", f.ckpt);
  m.artifacts.emplace_back("log", log_path.string());
  finish(ctx, std::move(m), f, inputs);
  char line[160];
  std::snprintf(line, sizeof line, "best epoch=%zu val=%.6f steps=%llu", result.best.epoch, result.best.best_score,
                static_cast<unsigned long long>(result.steps));
  ctx.out << line << " checkpoint=" << f.ckpt << '\n';
  return kExitOk;
}

int cmd_eval(const Context& ctx, const Flags& f) {
  const Checkpoint ckpt = load_checkpoint(f.ckpt);
  const Inputs in = load_inputs(f, {});
  const DatasetSplit& split = selected_split(f, in);
  check_vocab_overlap(ckpt.model.vocab(), split);
  const Evaluation ev = evaluate(ckpt.model, split, EntityMatcher(in.entities));
  ctx.out << ev.report.text();

  std::string predictions = "dialog_id\tprediction\tgold\n";
  for (std::size_t i = 0; i < split.samples.size(); ++i) {
    predictions += split.samples[i].dialog_id + '\t' + join(ev.predictions[i]) + '\t' +
                   join(split.samples[i].response) + '\n';
  }
  const fs::path report_path = fs::path(f.out) / ("eval-" + split.name + ".txt");
  const fs::path pred_path = fs::path(f.out) / ("predictions-" + split.name + ".tsv");
  write_file_atomic(report_path, ev.report.key_values());
  write_file_atomic(pred_path, predictions);

  RunManifest m;
  m.command = "eval";
  m.task = in.task;
  m.config = config_pairs(ckpt.config);
  m.seed = ckpt.config.seed;
  m.artifacts = {{"report", report_path.string()}, {"predictions", pred_path.string()}};
  std::vector<fs::path> inputs = in.files;
  inputs.emplace_back(f.ckpt);
  finish(ctx, std::move(m), f, inputs);
  return kExitOk;
}

int cmd_chat(const Context& ctx, const Flags& f) {
  const Checkpoint ckpt = load_checkpoint(f.ckpt);
  std::vector<KbTriple> kb;
  std::vector<fs::path> inputs{f.ckpt};
  if (!f.kb.empty()) {
    std::ifstream file(f.kb, std::ios::binary);
    if (!file) throw DataError("cannot read KB file " + f.kb);
    kb = load_kb_tsv(file, f.kb);
    inputs.emplace_back(f.kb);
  }
  ChatSession session(ckpt.model, std::move(kb));
  run_chat(session, ctx.in, ctx.out, f.echo);

  RunManifest m;
  m.command = "chat";
  m.config = config_pairs(ckpt.config);
  m.seed = ckpt.config.seed;
  finish(ctx, std::move(m), f, inputs);
  return kExitOk;
}

std::vector<std::size_t> parse_hops_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw UsageError("--timing-hops expects a comma-separated list of positive integers, got '" + text + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--timing-hops is empty");
  return out;
}

int cmd_inspect(const Context& ctx, const Flags& f) {
  const std::vector<std::size_t> timing_hops = f.timing ? parse_hops_list(f.timing_hops) : std::vector<std::size_t>{};
  const Checkpoint ckpt = load_checkpoint(f.ckpt);
  const Inputs in = load_inputs(f, {});
  const DatasetSplit& split = selected_split(f, in);
  check_vocab_overlap(ckpt.model.vocab(), split);

  RunManifest m;
  m.command = "inspect";
  m.task = in.task;
  m.config = config_pairs(ckpt.config);
  m.seed = ckpt.config.seed;

  const std::size_t n = std::min(f.samples, split.samples.size());
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream tsv;
    write_attention_tsv(tsv, trace_attention(ckpt.model, split.samples[i]));
    char name[32];
    std::snprintf(name, sizeof name, "trace-%04zu.tsv", i + 1);
    const fs::path path = fs::path(f.out) / name;
    write_file_atomic(path, tsv.str());
    m.artifacts.emplace_back("trace", path.string());
    ctx.out << "wrote " << path.string() << '\n';
  }

  std::vector<std::vector<double>> vectors;
  std::vector<std::string> labels;
  collect_queries(ckpt.model, split, vectors, labels);
  try {
    const PcaResult pca = pca_project(vectors, labels);
    std::ostringstream json;
    write_pca(json, pca);
    const fs::path path = fs::path(f.out) / "pca.json";
    write_file_atomic(path, json.str());
    m.artifacts.emplace_back("pca", path.string());
    ctx.out << "wrote " << path.string() << '\n';
  } catch (const std::invalid_argument& e) {
    ctx.err << "pca skipped: " << e.what() << '\n';
  }

  if (f.timing) {
    std::vector<TrainConfig> configs;
    for (std::size_t hops : timing_hops) {
      TrainConfig c = ckpt.config;
      c.model.hops = hops;
      configs.push_back(c);
    }
    const TimingReport report = timing_report(configs, split, f.timing_epochs);
    const fs::path text_path = fs::path(f.out) / "timing.txt";
    const fs::path tsv_path = fs::path(f.out) / "timing.tsv";
    write_file_atomic(text_path, report.text());
    write_file_atomic(tsv_path, report.records());
    m.artifacts.emplace_back("timing", text_path.string());
    m.artifacts.emplace_back("timing_records", tsv_path.string());
    ctx.out << report.text();
  }

  std::vector<fs::path> inputs = in.files;
  inputs.emplace_back(f.ckpt);
  finish(ctx, std::move(m), f, inputs);
  return kExitOk;
}

int cmd_stats(const Context& ctx, const Flags& f) {
  if (f.task.empty()) throw UsageError("--task is required");
  const TaskSpec task = TaskSpec::parse(f.task);
  const StatsReport report = stats_report(task, data_root(f));
  ctx.out << report.text();
  RunManifest m;
  m.command = "stats";
  m.task = task.name();
  finish(ctx, std::move(m), f, report.files);
  if (!report.ok()) {
    ctx.err << "statistics differ from the published values\n";
    return kExitData;
  }
  return kExitOk;
}

std::string fmt_value(double v) {
  char buf[32];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.3f", v);
  }
  return buf;
}

}  // namespace

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["argv"] = argv;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  j["config"] = std::move(cfg);
  j["seed"] = seed;
  j["task"] = task;
  nlohmann::ordered_json in = nlohmann::ordered_json::array();
  for (const auto& [path, sum] : inputs) in.push_back({{"path", path}, {"fnv1a64", hex64(sum)}});
  j["inputs"] = std::move(in);
  nlohmann::ordered_json art = nlohmann::ordered_json::object();
  for (const auto& [role, path] : artifacts) {
    art[role] = {{"path", path}, {"fnv1a64", hex64(file_checksum(path))}};
  }
  j["artifacts"] = std::move(art);
  j["started"] = started;
  j["finished"] = finished;
  return j;
}

std::uint64_t file_checksum(const fs::path& path) { return fnv1a64(read_text(path, "file")); }

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

ReferenceStats reference_stats(const TaskSpec& task) {
  switch (task.kind) {
    case DatasetKind::Dstc2:
      return {6.7, 9.3, 39.5, 10.2, 29, 0.46, 1229, 1618, 500, 1117, 0};
    case DatasetKind::Kvr:
      return {2.6, 2.6, 66.1, 8.6, 87, 0.42, 1601, 2425, 302, 304, 0};
    case DatasetKind::Babi:
      break;
  }
  static const ReferenceStats kBabi[5] = {
      {4.0, 6.0, 0.0, 6.3, 9, 0.23, 3747, 1000, 1000, 1000, 1000},
      {6.5, 9.5, 0.0, 6.2, 9, 0.53, 3747, 1000, 1000, 1000, 1000},
      {6.4, 9.9, 24.0, 7.2, 9, 0.46, 3747, 1000, 1000, 1000, 1000},
      {3.5, 3.5, 7.0, 5.7, 8, 0.19, 3747, 1000, 1000, 1000, 1000},
      {12.9, 18.4, 23.7, 6.5, 9, 0.60, 3747, 1000, 1000, 1000, 1000},
  };
  return kBabi[task.babi_task - 1];
}

bool StatsCheck::ok() const { return !tolerance || std::abs(measured - expected) <= *tolerance + 1e-12; }

bool StatsReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const StatsCheck& c) { return c.ok(); });
}

std::string StatsReport::text() const {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-22s %10s %10s %10s  %s\n", "statistic", "measured", "published", "tolerance",
                "status");
  out += line;
  for (const StatsCheck& c : checks) {
    const std::string tol = c.tolerance ? fmt_value(*c.tolerance) : "-";
    const char* status = !c.tolerance ? "info" : c.ok() ? "ok" : "MISMATCH";
    std::snprintf(line, sizeof line, "%-22s %10s %10s %10s  %s\n", c.name.c_str(), fmt_value(c.measured).c_str(),
                  fmt_value(c.expected).c_str(), tol.c_str(), status);
    out += line;
  }
  return out;
}

StatsReport stats_report(const TaskSpec& task, const fs::path& root) {
  const Dataset ds = load_dataset(task, root);
  const ReferenceStats ref = reference_stats(task);
  StatsReport report;
  report.files = ds.files;

  const Vocab vocab = build_vocab(ds.train);
  const CorpusStats st = compute_stats(ds.train, vocab);
  auto info = [&](const char* name, double measured, double expected) {
    report.checks.push_back({name, measured, expected, std::nullopt});
  };
  auto exact = [&](const char* name, double measured, double expected) {
    report.checks.push_back({name, measured, expected, 0.0});
  };
  if (task.kind == DatasetKind::Babi && task.babi_task == 5) {
    report.checks.push_back({"avg_user_turns", st.avg_user_turns, ref.avg_user_turns, 0.1});
  } else {
    info("avg_user_turns", st.avg_user_turns, ref.avg_user_turns);
  }
  info("avg_system_turns", st.avg_system_turns, ref.avg_system_turns);
  info("avg_kb_results", st.avg_kb_results, ref.avg_kb_results);
  info("avg_system_words", st.avg_system_words, ref.avg_system_words);
  info("max_system_words", static_cast<double>(st.max_system_words), static_cast<double>(ref.max_system_words));
  report.checks.push_back({"pointer_ratio", st.pointer_ratio, ref.pointer_ratio, 0.02});

  // The published bAbI vocabulary is shared by all five tasks.
  std::vector<DatasetSplit> family;
  std::vector<const DatasetSplit*> pool{&ds.train, &ds.val, &ds.test};
  if (ds.test_oov) pool.push_back(&*ds.test_oov);
  if (task.kind == DatasetKind::Babi) {
    for (int t = 1; t <= 5; ++t) {
      if (t == task.babi_task) continue;
      const Dataset other = load_dataset(TaskSpec{DatasetKind::Babi, t}, root);
      for (const DatasetSplit* s : {&other.train, &other.val, &other.test}) family.push_back(*s);
      if (other.test_oov) family.push_back(*other.test_oov);
      report.files.insert(report.files.end(), other.files.begin(), other.files.end());
    }
    for (const DatasetSplit& s : family) pool.push_back(&s);
  }
  exact("vocabulary", static_cast<double>(count_words(pool)), static_cast<double>(ref.vocab));
  exact("train_dialogs", static_cast<double>(ds.train.dialog_count()), static_cast<double>(ref.train_dialogs));
  exact("val_dialogs", static_cast<double>(ds.val.dialog_count()), static_cast<double>(ref.val_dialogs));
  exact("test_dialogs", static_cast<double>(ds.test.dialog_count()), static_cast<double>(ref.test_dialogs));
  if (ds.test_oov) {
    exact("test_oov_dialogs", static_cast<double>(ds.test_oov->dialog_count()),
          static_cast<double>(ref.oov_dialogs));
  }
  std::sort(report.files.begin(), report.files.end());
  report.files.erase(std::unique(report.files.begin(), report.files.end()), report.files.end());
  return report;
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory-to-sequence task-oriented dialog model", "m2s"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  add_data_flags(train, f);
  add_hyper_flags(train, f);
  train->add_option("--grid", f.grid_file, "Grid file of key=v1,v2 lines; trains the best point");
  train->add_option("--ckpt", f.ckpt, "Checkpoint path to write")->required();
  train->add_option("--out", f.out, "Directory for the log and manifest");

  CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint on a split");
  add_data_flags(eval, f);
  eval->add_option("--split", f.split, "Split: train, val, test or test-oov");
  eval->add_option("--ckpt", f.ckpt, "Checkpoint to evaluate")->required();
  eval->add_option("--out", f.out, "Directory for the report, predictions and manifest");

  CLI::App* chat = app.add_subcommand("chat", "Interactive session with a checkpoint");
  chat->add_option("--ckpt", f.ckpt, "Checkpoint to chat with")->required();
  chat->add_option("--kb", f.kb, "KB file of tab-separated subject, relation, object lines");
  chat->add_flag("--echo", f.echo, "Echo input lines as 'user: ...' for transcripts");
  chat->add_option("--out", f.out, "Directory for the manifest");

  CLI::App* inspect = app.add_subcommand("inspect", "Write attention traces, PCA and timing data");
  add_data_flags(inspect, f);
  inspect->add_option("--split", f.split, "Split: train, val, test or test-oov");
  inspect->add_option("--ckpt", f.ckpt, "Checkpoint to inspect")->required();
  inspect->add_option("--samples", f.samples, "Number of samples to trace");
  inspect->add_flag("--timing", f.timing, "Also time training epochs per hop count");
  inspect->add_option("--timing-hops", f.timing_hops, "Hop counts to time, comma-separated");
  inspect->add_option("--timing-epochs", f.timing_epochs, "Epochs per timed configuration");
  inspect->add_option("--out", f.out, "Directory for the artifacts and manifest");

  CLI::App* stats = app.add_subcommand("stats", "Validate corpus statistics against the published values");
  stats->add_option("--task", f.task, "Task: babi:1..5, dstc2 or kvr");
  stats->add_option("--data", f.data, "Dataset root directory (default: $M2S_DATA)");
  stats->add_option("--out", f.out, "Directory for the manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const Context ctx{args, in, out, err, utc_now()};
  try {
    if (sub == train) return cmd_train(ctx, f);
    if (sub == eval) return cmd_eval(ctx, f);
    if (sub == chat) return cmd_chat(ctx, f);
    if (sub == inspect) return cmd_inspect(ctx, f);
    return cmd_stats(ctx, f);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace m2s::cli
