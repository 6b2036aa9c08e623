#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "mem2seq/model.hpp"

namespace m2s {

/// Validation score that drives lr decay, early stopping and selection.
enum class ValMetric { PerResponse, Bleu };

std::string_view metric_name(ValMetric m);
ValMetric parse_metric(std::string_view name);

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  /// Factor applied to lr after an epoch without improvement.
  double lr_decay = 0.5;
  double dropout = 0.2;
  double word_mask = 0.1;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 100;
  /// Training stops once this many consecutive epochs fail to improve.
  std::size_t patience = 8;
  std::uint64_t seed = 42;
  ValMetric metric = ValMetric::PerResponse;
  double clip_norm = 10.0;
  /// Stops early once the validation score reaches this value; 0 disables.
  double target_score = 0.0;

  /// Throws std::invalid_argument naming the first out-of-range field.
  void validate() const;

  /// `key=value` lines; doubles are written with 17 significant digits.
  std::string to_text() const;
  /// Sets one field from its `key=value` spelling. Unknown keys throw.
  void set(std::string_view key, std::string_view value);
  /// Applies every non-blank, non-'#' line of `text` via set().
  void apply_text(std::string_view text);

  bool operator==(const TrainConfig&) const = default;
};

}  // namespace m2s
