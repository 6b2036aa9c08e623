#include "mem2seq/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace m2s {

namespace {

void check_aligned(std::size_t pred, std::size_t gold) {
  if (pred != gold) {
    throw std::invalid_argument("prediction count " + std::to_string(pred) + " differs from gold count " +
                                std::to_string(gold));
  }
}

std::vector<std::string> words_of(std::span<const std::string> tokens) {
  return split_whitespace(normalize_response(tokens));
}

std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& words, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (words.size() < n) return counts;
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string key = words[i];
    for (std::size_t k = 1; k < n; ++k) {
      key += ' ';
      key += words[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::string fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

}  // namespace

std::string normalize_response(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& token : tokens) {
    std::string key = surface_key(token);
    if (key.empty()) continue;
    if (!out.empty()) out += ' ';
    out += key;
  }
  return out;
}

double per_response_accuracy(std::span<const Response> pred, std::span<const Response> gold) {
  check_aligned(pred.size(), gold.size());
  if (pred.empty()) throw std::invalid_argument("accuracy of an empty corpus");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (normalize_response(pred[i]) == normalize_response(gold[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

double per_dialog_accuracy(std::span<const Response> pred, std::span<const Response> gold,
                           std::span<const std::string> dialog_ids) {
  check_aligned(pred.size(), gold.size());
  if (dialog_ids.size() != pred.size()) {
    throw std::invalid_argument("dialog id count " + std::to_string(dialog_ids.size()) +
                                " differs from response count " + std::to_string(pred.size()));
  }
  if (pred.empty()) throw std::invalid_argument("accuracy of an empty corpus");
  std::unordered_map<std::string, bool> all_correct;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (dialog_ids[i].empty()) throw std::invalid_argument("response " + std::to_string(i) + " has no dialog id");
    const bool ok = normalize_response(pred[i]) == normalize_response(gold[i]);
    auto [it, inserted] = all_correct.try_emplace(dialog_ids[i], ok);
    if (!inserted) it->second = it->second && ok;
  }
  std::size_t good = 0;
  for (const auto& [id, ok] : all_correct) good += ok ? 1 : 0;
  return static_cast<double>(good) / static_cast<double>(all_correct.size());
}

void BleuStats::add(std::span<const std::string> hyp_words, std::span<const std::string> ref_words) {
  const std::vector<std::string> hyp(hyp_words.begin(), hyp_words.end());
  const std::vector<std::string> ref(ref_words.begin(), ref_words.end());
  hyp_length += hyp.size();
  ref_length += ref.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto hyp_counts = ngram_counts(hyp, n);
    const auto ref_counts = ngram_counts(ref, n);
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches[n - 1] += std::min(count, it->second);
    }
    if (hyp.size() >= n) totals[n - 1] += hyp.size() - n + 1;
  }
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  for (std::size_t n = 0; n < 4; ++n) {
    matches[n] += other.matches[n];
    totals[n] += other.totals[n];
  }
  hyp_length += other.hyp_length;
  ref_length += other.ref_length;
  return *this;
}

double BleuStats::score() const {
  if (hyp_length == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (matches[n] == 0 || totals[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
  }
  double bp = 1.0;
  if (hyp_length < ref_length) {
    bp = std::exp(1.0 - static_cast<double>(ref_length) / static_cast<double>(hyp_length));
  }
  return 100.0 * bp * std::exp(log_sum / 4.0);
}

double bleu(std::span<const Response> pred, std::span<const Response> gold) {
  check_aligned(pred.size(), gold.size());
  if (pred.empty()) throw std::invalid_argument("BLEU of an empty corpus");
  BleuStats stats;
  for (std::size_t i = 0; i < pred.size(); ++i) stats.add(words_of(pred[i]), words_of(gold[i]));
  return stats.score();
}

EntityCounts& EntityCounts::operator+=(const EntityCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

double EntityCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double EntityCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double EntityCounts::f1() const {
  if (tp == 0) return 0.0;
  const double p = precision();
  const double r = recall();
  return 2.0 * p * r / (p + r);
}

EntityCounts entity_counts(std::span<const std::string> pred, std::span<const std::string> gold,
                           const EntityMatcher& entities) {
  std::map<std::string, std::size_t> gold_left;
  for (auto& e : entities.find(gold)) ++gold_left[e];
  EntityCounts counts;
  std::size_t gold_total = 0;
  for (const auto& [e, n] : gold_left) gold_total += n;
  for (const auto& e : entities.find(pred)) {
    auto it = gold_left.find(e);
    if (it != gold_left.end() && it->second > 0) {
      --it->second;
      ++counts.tp;
    } else {
      ++counts.fp;
    }
  }
  counts.fn = gold_total - counts.tp;
  return counts;
}

EntityCounts entity_counts(std::span<const Response> pred, std::span<const Response> gold,
                           const EntityMatcher& entities) {
  check_aligned(pred.size(), gold.size());
  EntityCounts total;
  for (std::size_t i = 0; i < pred.size(); ++i) total += entity_counts(pred[i], gold[i], entities);
  return total;
}

double entity_f1(std::span<const Response> pred, std::span<const Response> gold, const EntityMatcher& entities) {
  if (entities.empty()) throw std::invalid_argument("entity F1 needs a non-empty entity list");
  return entity_counts(pred, gold, entities).f1();
}

std::string EvalReport::text() const {
  std::string out;
  out += "split              " + split + "\n";
  out += "samples            " + std::to_string(samples) + "\n";
  out += "per_response_acc   " + fixed(per_response, 4) + "\n";
  out += "per_dialog_acc     " + fixed(per_dialog, 4) + "\n";
  out += "bleu               " + fixed(bleu, 2) + "\n";
  out += "entity_f1          " + fixed(entity_f1, 4) + "\n";
  for (const auto& [domain, f1] : domain_f1) {
    std::string label = "entity_f1." + domain;
    if (label.size() < 19) label.resize(19, ' ');
    out += label + fixed(f1, 4) + "\n";
  }
  return out;
}

std::string EvalReport::key_values() const {
  std::string out;
  out += "split=" + split + "\n";
  out += "samples=" + std::to_string(samples) + "\n";
  out += "per_response_acc=" + fixed(per_response, 6) + "\n";
  out += "per_dialog_acc=" + fixed(per_dialog, 6) + "\n";
  out += "bleu=" + fixed(bleu, 4) + "\n";
  out += "entity_f1=" + fixed(entity_f1, 6) + "\n";
  for (const auto& [domain, f1] : domain_f1) out += "entity_f1." + domain + "=" + fixed(f1, 6) + "\n";
  return out;
}

EvalReport score_split(const DatasetSplit& split, std::span<const Response> predictions,
                       const EntityMatcher& entities) {
  check_aligned(predictions.size(), split.samples.size());
  std::vector<Response> gold;
  std::vector<std::string> ids;
  gold.reserve(split.samples.size());
  ids.reserve(split.samples.size());
  for (const auto& s : split.samples) {
    gold.push_back(s.response);
    ids.push_back(s.dialog_id);
  }
  EvalReport report;
  report.split = split.name;
  report.samples = split.samples.size();
  if (split.samples.empty()) return report;
  report.per_response = per_response_accuracy(predictions, gold);
  report.per_dialog = per_dialog_accuracy(predictions, gold, ids);
  report.bleu = bleu(predictions, gold);
  if (!entities.empty()) {
    report.entity_f1 = entity_f1(predictions, gold, entities);
    std::map<std::string, EntityCounts> by_domain;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const std::string& domain = split.samples[i].domain;
      if (domain.empty()) continue;
      by_domain[domain] += entity_counts(predictions[i], gold[i], entities);
    }
    for (const auto& [domain, counts] : by_domain) report.domain_f1[domain] = counts.f1();
  }
  return report;
}

Evaluation evaluate(const Mem2Seq& model, const DatasetSplit& split, const EntityMatcher& entities) {
  Evaluation result;
  result.predictions.reserve(split.samples.size());
  for (const auto& sample : split.samples) {
    result.predictions.push_back(model.decode(build_memory(sample, model.vocab())).words);
  }
  result.report = score_split(split, result.predictions, entities);
  return result;
}

}  // namespace m2s
