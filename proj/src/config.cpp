#include "mem2seq/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mem2seq/text.hpp"

namespace m2s {

namespace {

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T out{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("invalid value '" + std::string(text) + "' for " + std::string(key));
  }
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

std::string_view metric_name(ValMetric m) { return m == ValMetric::Bleu ? "bleu" : "per_response"; }

ValMetric parse_metric(std::string_view name) {
  if (name == "per_response" || name == "accuracy") return ValMetric::PerResponse;
  if (name == "bleu") return ValMetric::Bleu;
  throw std::invalid_argument("unknown validation metric '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  require(model.hops >= 1, "hops must be at least 1");
  require(model.dim >= 1, "dim must be at least 1");
  require(std::isfinite(lr) && lr > 0.0, "lr must be positive");
  require(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must lie in (0, 1]");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(word_mask >= 0.0 && word_mask <= 1.0, "word_mask must lie in [0, 1]");
  require(batch_size >= 1, "batch must be at least 1");
  require(max_epochs >= 1, "max_epochs must be at least 1");
  require(clip_norm > 0.0, "clip_norm must be positive");
  require(target_score >= 0.0, "target_score must be non-negative");
}

std::string TrainConfig::to_text() const {
  std::string out;
  out += "hops=" + std::to_string(model.hops) + "\n";
  out += "dim=" + std::to_string(model.dim) + "\n";
  out += "lr=" + g17(lr) + "\n";
  out += "lr_decay=" + g17(lr_decay) + "\n";
  out += "dropout=" + g17(dropout) + "\n";
  out += "mask=" + g17(word_mask) + "\n";
  out += "batch=" + std::to_string(batch_size) + "\n";
  out += "max_epochs=" + std::to_string(max_epochs) + "\n";
  out += "patience=" + std::to_string(patience) + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  out += "metric=" + std::string(metric_name(metric)) + "\n";
  out += "clip_norm=" + g17(clip_norm) + "\n";
  out += "target_score=" + g17(target_score) + "\n";
  return out;
}

void TrainConfig::set(std::string_view key, std::string_view value) {
  if (key == "hops") {
    model.hops = parse_number<std::size_t>(key, value);
  } else if (key == "dim") {
    model.dim = parse_number<std::size_t>(key, value);
  } else if (key == "lr") {
    lr = parse_number<double>(key, value);
  } else if (key == "lr_decay") {
    lr_decay = parse_number<double>(key, value);
  } else if (key == "dropout") {
    dropout = parse_number<double>(key, value);
  } else if (key == "mask") {
    word_mask = parse_number<double>(key, value);
  } else if (key == "batch") {
    batch_size = parse_number<std::size_t>(key, value);
  } else if (key == "max_epochs") {
    max_epochs = parse_number<std::size_t>(key, value);
  } else if (key == "patience") {
    patience = parse_number<std::size_t>(key, value);
  } else if (key == "seed") {
    seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "metric") {
    metric = parse_metric(value);
  } else if (key == "clip_norm") {
    clip_norm = parse_number<double>(key, value);
  } else if (key == "target_score") {
    target_score = parse_number<double>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

void TrainConfig::apply_text(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    const std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + " is not key=value");
    }
    set(trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)));
  }
}

}  // namespace m2s
