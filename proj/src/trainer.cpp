#include "mem2seq/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mem2seq/metrics.hpp"
#include "mem2seq/text.hpp"

namespace m2s {

namespace {

void scale_grads(ParameterStore& params, double factor) {
  for (Parameter& p : params) {
    for (double& g : p.grad.values()) g *= factor;
  }
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    const std::string part = trim(text.substr(start, comma - start));
    start = comma + 1;
    if (part.empty()) continue;
    TrainConfig probe;
    probe.set(key, part);
    if (key == "hops") {
      out.push_back(static_cast<double>(probe.model.hops));
    } else if (key == "dim") {
      out.push_back(static_cast<double>(probe.model.dim));
    } else if (key == "lr") {
      out.push_back(probe.lr);
    } else if (key == "dropout") {
      out.push_back(probe.dropout);
    } else {
      out.push_back(probe.word_mask);
    }
  }
  if (out.empty()) throw std::invalid_argument("grid axis '" + std::string(key) + "' has no values");
  return out;
}

}  // namespace

MemorySequence word_mask(const MemorySequence& memory, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("word mask rate must lie in [0, 1]");
  MemorySequence out = memory;
  if (rate == 0.0) return out;
  for (MemoryCell& cell : out.cells) {
    if (cell.kind != CellKind::Dialog || cell.symbols.empty()) continue;
    if (rng.bernoulli(rate)) cell.symbols.front() = Vocab::kUnk;
  }
  return out;
}

std::vector<Example> make_examples(const DatasetSplit& split, const Vocab& vocab) {
  std::vector<Example> out;
  out.reserve(split.samples.size());
  for (const auto& s : split.samples) out.push_back(make_example(s, vocab));
  return out;
}

Trainer::Trainer(Mem2Seq& model, const TrainConfig& config, Rng rng)
    : model_(model), config_(config), rng_(rng) {
  config_.validate();
  adam_.lr = config_.lr;
}

double Trainer::step(std::span<const Example> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  ParameterStore& params = model_.params();
  params.zero_grad();
  const DropoutConfig dropout{config_.dropout, &rng_};
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Example masked{word_mask(batch[i].memory, config_.word_mask, rng_), batch[i].targets, batch[i].pointers};
    try {
      Graph g(Graph::Mode::Train);
      Var loss = model_.loss(g, masked, dropout);
      total += g.value(loss)[0];
      g.backward(loss);
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(adam_.t + 1) + ", batch item " + std::to_string(i) + " (" +
                         std::to_string(masked.memory.size()) + " cells, " + std::to_string(masked.targets.size()) +
                         " targets): " + e.what());
    }
  }
  scale_grads(params, 1.0 / static_cast<double>(batch.size()));
  const double norm = clip_grad_norm(params, config_.clip_norm);
  if (!std::isfinite(norm)) {
    throw NumericError("step " + std::to_string(adam_.t + 1) + ": non-finite gradient norm");
  }
  adam_step(params, adam_);
  return total / static_cast<double>(batch.size());
}

double mean_loss(const Mem2Seq& model, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("mean loss of no examples");
  double total = 0.0;
  for (const auto& ex : examples) total += model.evaluate_loss(ex);
  return total / static_cast<double>(examples.size());
}

double validation_score(const Mem2Seq& model, const DatasetSplit& split, ValMetric metric) {
  if (split.samples.empty()) throw std::invalid_argument("validation split '" + split.name + "' is empty");
  std::vector<Response> pred, gold;
  pred.reserve(split.samples.size());
  gold.reserve(split.samples.size());
  for (const auto& s : split.samples) {
    pred.push_back(model.decode(build_memory(s, model.vocab())).words);
    gold.push_back(s.response);
  }
  return metric == ValMetric::Bleu ? bleu(pred, gold) : per_response_accuracy(pred, gold);
}

std::string EpochRecord::log_line() const {
  char buf[192];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.6f val=%.6f lr=%.6g seconds=%.3f", epoch, loss, val, lr, seconds);
  return buf;
}

std::string EpochRecord::stable_line() const {
  char buf[192];
  std::snprintf(buf, sizeof buf, "epoch=%zu loss=%.9f val=%.9f lr=%.9g improved=%d", epoch, loss, val, lr,
                improved ? 1 : 0);
  return buf;
}

TrainResult train(const TrainConfig& config, const DatasetSplit& train_split, const DatasetSplit& val_split,
                  const TrainHooks& hooks) {
  config.validate();
  if (train_split.samples.empty()) throw std::invalid_argument("training split is empty");
  if (val_split.samples.empty()) throw std::invalid_argument("validation split is empty");

  Mem2Seq model(build_vocab(train_split), config.model, config.seed);
  const std::vector<Example> examples = make_examples(train_split, model.vocab());
  const Rng root(config.seed);
  Trainer trainer(model, config, root.fork(1));
  Rng order_rng = root.fork(2);

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochRecord> epochs;
  std::optional<Checkpoint> best;
  double best_score = -std::numeric_limits<double>::infinity();
  std::size_t stale = 0;
  std::vector<Example> batch;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    order_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      batch.clear();
      for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) batch.push_back(examples[order[i]]);
      loss_sum += trainer.step(batch) * static_cast<double>(batch.size());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss = loss_sum / static_cast<double>(examples.size());
    rec.val = validation_score(model, val_split, config.metric);
    rec.lr = trainer.lr();
    rec.seconds = seconds;
    rec.improved = rec.val > best_score;
    if (rec.improved) {
      best_score = rec.val;
      stale = 0;
      best.emplace(Checkpoint{model, config, epoch, rec.val, trainer.rng().state()});
    } else {
      ++stale;
      trainer.set_lr(trainer.lr() * config.lr_decay);
    }
    epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (stale >= config.patience) break;
    if (config.target_score > 0.0 && rec.val >= config.target_score) break;
  }
  return TrainResult{std::move(*best), std::move(epochs), trainer.steps()};
}

std::vector<TrainConfig> GridSpace::expand(const TrainConfig& base) const {
  auto axis = [](const auto& values, auto fallback) {
    using T = decltype(fallback);
    return values.empty() ? std::vector<T>{fallback} : std::vector<T>(values.begin(), values.end());
  };
  std::vector<TrainConfig> out;
  for (std::size_t k : axis(hops, base.model.hops)) {
    for (std::size_t d : axis(dims, base.model.dim)) {
      for (double lr : axis(lrs, base.lr)) {
        for (double dr : axis(dropouts, base.dropout)) {
          for (double m : axis(masks, base.word_mask)) {
            TrainConfig c = base;
            c.model.hops = k;
            c.model.dim = d;
            c.lr = lr;
            c.dropout = dr;
            c.word_mask = m;
            out.push_back(c);
          }
        }
      }
    }
  }
  return out;
}

GridSpace GridSpace::parse(std::string_view text) {
  GridSpace space;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    ++line_no;
    const std::string line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("grid line " + std::to_string(line_no) + " is not key=v1,v2,...");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::vector<double> values = parse_list(key, std::string_view(line).substr(eq + 1));
    auto to_sizes = [](const std::vector<double>& v) { return std::vector<std::size_t>(v.begin(), v.end()); };
    if (key == "hops") {
      space.hops = to_sizes(values);
    } else if (key == "dim") {
      space.dims = to_sizes(values);
    } else if (key == "lr") {
      space.lrs = values;
    } else if (key == "dropout") {
      space.dropouts = values;
    } else if (key == "mask") {
      space.masks = values;
    } else {
      throw std::invalid_argument("unknown grid key '" + key + "'");
    }
  }
  return space;
}

GridResult grid_search(const std::vector<TrainConfig>& points, const GridScorer& scorer) {
  if (points.empty()) throw std::invalid_argument("empty hyper-parameter space");
  GridResult result;
  std::optional<std::size_t> best;
  for (const TrainConfig& c : points) {
    GridPoint point{c, std::nullopt, ""};
    try {
      const double s = scorer(c);
      if (std::isfinite(s)) {
        point.score = s;
      } else {
        point.failure = "non-finite validation score";
      }
    } catch (const NumericError& e) {
      point.failure = e.what();
    }
    result.points.push_back(point);
    if (!point.score) continue;
    if (!best) {
      best = result.points.size() - 1;
      continue;
    }
    const GridPoint& incumbent = result.points[*best];
    const bool better = *point.score > *incumbent.score ||
                        (*point.score == *incumbent.score &&
                         (c.model.dim < incumbent.config.model.dim ||
                          (c.model.dim == incumbent.config.model.dim && c.lr < incumbent.config.lr)));
    if (better) best = result.points.size() - 1;
  }
  if (!best) throw NumericError("every grid point diverged");
  result.best = result.points[*best].config;
  result.best_score = *result.points[*best].score;
  return result;
}

GridResult grid_search(const TrainConfig& base, const GridSpace& space, const DatasetSplit& train_split,
                       const DatasetSplit& val_split) {
  return grid_search(space.expand(base), [&](const TrainConfig& c) {
    return train(c, train_split, val_split).best.best_score;
  });
}

}  // namespace m2s
