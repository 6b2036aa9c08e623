#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mem2seq/corpus.hpp"
#include "mem2seq/model.hpp"
#include "mem2seq/text.hpp"

namespace m2s {

using Response = std::vector<std::string>;

/// Comparison form of a response: lowercase, '_' read as a space,
/// single-space joined.
std::string normalize_response(std::span<const std::string> tokens);

/// Fraction of predictions whose normalized form equals the gold one.
double per_response_accuracy(std::span<const Response> pred, std::span<const Response> gold);

/// Fraction of dialogs whose every response is correct. `dialog_ids[i]`
/// names the dialog of response i.
double per_dialog_accuracy(std::span<const Response> pred, std::span<const Response> gold,
                           std::span<const std::string> dialog_ids);

/// Sufficient statistics of corpus BLEU-4; merging shards is addition.
struct BleuStats {
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  void add(std::span<const std::string> hyp_words, std::span<const std::string> ref_words);
  BleuStats& operator+=(const BleuStats& other);
  /// 100 × BP × geometric mean of the four precisions; 0 when any is 0.
  double score() const;
};

/// Corpus BLEU-4 on normalized words, single reference, no smoothing.
double bleu(std::span<const Response> pred, std::span<const Response> gold);

struct EntityCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  EntityCounts& operator+=(const EntityCounts& other);
  double precision() const;
  double recall() const;
  /// 0 when tp is 0.
  double f1() const;
};

/// Multiset overlap of entity mentions in one predicted and one gold response.
EntityCounts entity_counts(std::span<const std::string> pred, std::span<const std::string> gold,
                           const EntityMatcher& entities);
EntityCounts entity_counts(std::span<const Response> pred, std::span<const Response> gold,
                           const EntityMatcher& entities);
/// Micro-averaged entity F1 over the corpus.
double entity_f1(std::span<const Response> pred, std::span<const Response> gold, const EntityMatcher& entities);

struct EvalReport {
  std::string split;
  std::size_t samples = 0;
  double per_response = 0.0;
  double per_dialog = 0.0;
  double bleu = 0.0;
  double entity_f1 = 0.0;
  /// Entity F1 by domain; filled when samples carry a domain.
  std::map<std::string, double> domain_f1;

  /// Aligned, human-readable record.
  std::string text() const;
  /// One `key=value` line per field.
  std::string key_values() const;
};

struct Evaluation {
  EvalReport report;
  std::vector<Response> predictions;
};

/// Greedy-decodes every sample of `split` and scores it.
Evaluation evaluate(const Mem2Seq& model, const DatasetSplit& split, const EntityMatcher& entities);

/// Scores given predictions against the gold responses of `split`.
EvalReport score_split(const DatasetSplit& split, std::span<const Response> predictions,
                       const EntityMatcher& entities);

}  // namespace m2s
