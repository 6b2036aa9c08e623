#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mem2seq/encoder.hpp"
#include "mem2seq/gru.hpp"
#include "mem2seq/memory.hpp"
#include "mem2seq/rng.hpp"
#include "mem2seq/vocab.hpp"

namespace m2s {

inline constexpr std::size_t kDefaultMaxDecodeLength = 100;

struct DecoderParams {
  std::size_t hops = 0;
  /// Separate from the encoder bank. C1 also embeds the GRU input.
  EmbeddingBank bank;
  GruParams gru;
  /// |V| × 2d projection of [h_t; o^1].
  Parameter* w1 = nullptr;

  std::size_t dim() const { return bank.dim(); }

  static DecoderParams create(ParameterStore& store, std::size_t hops, std::size_t vocab_size,
                              std::size_t dim, Rng& rng);
  static DecoderParams bind(ParameterStore& store, std::size_t hops);
};

/// Memory embedded once per sample under every decoder bank matrix.
struct DecoderMemory {
  std::vector<Var> embedded;
  std::size_t valid = 0;
};

DecoderMemory embed_memory(Graph& g, const MemorySequence& memory, const DecoderParams& params);

/// Dropout applied on the GRU input embedding and on h_t before W1.
struct DropoutConfig {
  double rate = 0.0;
  Rng* rng = nullptr;

  bool active() const { return rate > 0.0 && rng != nullptr; }
};

struct StepOutput {
  Var h;
  Var p_vocab;
  /// Identical node to attention.back().
  Var p_ptr;
  std::vector<Var> attention;
};

/// h_t = GRU(C1(prev_token), h_prev); K hops from query h_t;
/// P_vocab = softmax(W1 [h_t; o^1]); P_ptr = p^K.
StepOutput decode_step(Graph& g, std::size_t prev_token, Var h_prev, const DecoderMemory& memory,
                       const DecoderParams& params, const DropoutConfig& dropout = {});

struct DualDistribution {
  Tensor p_vocab;
  Tensor p_ptr;
  std::vector<Tensor> attention;
};

DualDistribution read_distribution(const Graph& g, const StepOutput& step);

struct SelectedToken {
  std::string word;
  /// True when the word was copied from memory (the sentinel was not chosen).
  bool copied = false;
  std::size_t pointer_index = 0;
  std::size_t vocab_index = 0;
};

/// Hard sentinel gate: argmax P_ptr on the sentinel emits argmax P_vocab,
/// otherwise the copy word of the pointed cell. Ties go to the lowest index.
SelectedToken select_token(const DualDistribution& dd, const MemorySequence& memory, const Vocab& vocab);

struct StepSupervision {
  std::size_t vocab_target = 0;
  std::size_t pointer_target = 0;
};

double step_loss(const DualDistribution& dd, const StepSupervision& sup);
Var step_loss(Graph& g, const StepOutput& step, const StepSupervision& sup);

/// Everything the decoder needs to be trained on one sample.
struct Example {
  MemorySequence memory;
  /// Vocab ids of the gold response followed by EOS; PAD entries are masked.
  std::vector<std::size_t> targets;
  /// Pointer target per entry of `targets`.
  std::vector<std::size_t> pointers;
};

Example make_example(const DialogSample& sample, const Vocab& vocab);

/// Mean over non-PAD steps of the step losses under teacher forcing, with
/// h0 = encoder_out and first input SOS.
Var sequence_loss(Graph& g, const Example& example, Var encoder_out, const DecoderMemory& memory,
                  const DecoderParams& params, const DropoutConfig& dropout = {});

struct DecodeStep {
  SelectedToken token;
  /// p^1..p^K for this step.
  std::vector<std::vector<double>> attention;
  /// The GRU query h_t.
  std::vector<double> query;
};

struct DecodeResult {
  std::vector<std::string> words;
  std::vector<DecodeStep> steps;
};

/// Greedy generation until EOS or `max_len` words. The emitted word is fed
/// back by its vocabulary id; copied words outside the vocabulary become UNK.
DecodeResult greedy_decode(Graph& g, const MemorySequence& memory, Var encoder_out,
                           const DecoderParams& params, const Vocab& vocab,
                           std::size_t max_len = kDefaultMaxDecodeLength);

}  // namespace m2s
