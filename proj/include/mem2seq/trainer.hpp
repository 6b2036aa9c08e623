#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mem2seq/checkpoint.hpp"
#include "mem2seq/config.hpp"
#include "mem2seq/corpus.hpp"
#include "mem2seq/decoder.hpp"
#include "mem2seq/model.hpp"
#include "mem2seq/optim.hpp"
#include "mem2seq/rng.hpp"

namespace m2s {

/// Copy of `memory` in which each dialog cell's word symbol is replaced by
/// UNK with probability `rate`. Time and speaker tags, KB cells, the
/// sentinel and copy words are untouched.
MemorySequence word_mask(const MemorySequence& memory, double rate, Rng& rng);

/// Examples for every sample of a split under `vocab`.
std::vector<Example> make_examples(const DatasetSplit& split, const Vocab& vocab);

/// Owns the optimizer state for one model. Each step runs every example on
/// its own graph, averages the accumulated gradients over the batch, clips
/// them to the global norm and applies one Adam update.
class Trainer {
 public:
  Trainer(Mem2Seq& model, const TrainConfig& config, Rng rng);

  /// One optimizer step on `batch`; returns the mean sequence loss before
  /// the update. Throws NumericError (with the offending example) on a
  /// non-finite loss or gradient.
  double step(std::span<const Example> batch);

  double lr() const { return adam_.lr; }
  void set_lr(double lr) { adam_.lr = lr; }
  std::uint64_t steps() const { return adam_.t; }
  const Rng& rng() const { return rng_; }

 private:
  Mem2Seq& model_;
  TrainConfig config_;
  AdamState adam_;
  Rng rng_;
};

/// Mean loss over examples without dropout or masking.
double mean_loss(const Mem2Seq& model, std::span<const Example> examples);

/// Validation score of `model` on `split` under `metric`.
double validation_score(const Mem2Seq& model, const DatasetSplit& split, ValMetric metric);

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double val = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
  bool improved = false;

  /// `epoch=<n> loss=<.6f> val=<.6f> lr=<g> seconds=<.3f>`.
  std::string log_line() const;
  /// `epoch=<n> loss=<.9f> val=<.9f> lr=<.9g> improved=<0|1>`; no wall
  /// clock, so reruns with the same seed reproduce it byte for byte.
  std::string stable_line() const;
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochRecord> epochs;
  std::uint64_t steps = 0;
};

struct TrainHooks {
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Builds the vocabulary from `train_split`, then trains epoch by epoch
/// until `patience` consecutive epochs fail to improve the validation
/// score, `max_epochs` is reached or the score hits `target_score`. The lr
/// is multiplied by `lr_decay` after every non-improving epoch.
TrainResult train(const TrainConfig& config, const DatasetSplit& train_split, const DatasetSplit& val_split,
                  const TrainHooks& hooks = {});

/// Cartesian hyper-parameter space; an empty axis keeps the base value.
struct GridSpace {
  std::vector<std::size_t> hops;
  std::vector<std::size_t> dims;
  std::vector<double> lrs;
  std::vector<double> dropouts;
  std::vector<double> masks;

  std::vector<TrainConfig> expand(const TrainConfig& base) const;
  /// Parses `key=v1,v2,...` lines (keys hops, dim, lr, dropout, mask).
  static GridSpace parse(std::string_view text);
};

struct GridPoint {
  TrainConfig config;
  /// Validation score; unset when training diverged.
  std::optional<double> score;
  std::string failure;
};

struct GridResult {
  TrainConfig best;
  double best_score = 0.0;
  std::vector<GridPoint> points;
};

/// Scores a configuration; throws NumericError when training diverges.
using GridScorer = std::function<double(const TrainConfig&)>;

/// Highest score wins; ties go to the smaller dim, then the lower lr.
/// Throws std::invalid_argument for an empty space and NumericError when
/// every point diverged.
GridResult grid_search(const std::vector<TrainConfig>& points, const GridScorer& scorer);
GridResult grid_search(const TrainConfig& base, const GridSpace& space, const DatasetSplit& train_split,
                       const DatasetSplit& val_split);

}  // namespace m2s
