#pragma once

#include <cstddef>
#include <cstdint>

#include "mem2seq/decoder.hpp"
#include "mem2seq/encoder.hpp"
#include "mem2seq/graph.hpp"
#include "mem2seq/vocab.hpp"

namespace m2s {

struct ModelConfig {
  std::size_t hops = 3;
  /// Embedding size, memory size and GRU hidden size.
  std::size_t dim = 128;

  bool operator==(const ModelConfig&) const = default;
};

/// Encoder + decoder parameters over a fixed vocabulary.
class Mem2Seq {
 public:
  /// Fresh model; parameters drawn from a generator seeded with `seed`.
  Mem2Seq(Vocab vocab, ModelConfig config, std::uint64_t seed);
  /// Model around existing parameters (e.g. from a checkpoint); validates
  /// every expected parameter and shape.
  Mem2Seq(Vocab vocab, ModelConfig config, ParameterStore params);

  Mem2Seq(const Mem2Seq& other);
  Mem2Seq& operator=(const Mem2Seq& other);
  Mem2Seq(Mem2Seq&&) noexcept = default;
  Mem2Seq& operator=(Mem2Seq&&) noexcept = default;

  const Vocab& vocab() const { return vocab_; }
  const ModelConfig& config() const { return config_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  EncoderParams encoder() { return EncoderParams::bind(params_, config_.hops); }
  DecoderParams decoder() { return DecoderParams::bind(params_, config_.hops); }

  /// Training loss of one example on a Train-mode graph.
  Var loss(Graph& g, const Example& example, const DropoutConfig& dropout = {});
  /// Loss value without dropout or gradient tracking.
  double evaluate_loss(const Example& example) const;

  DecodeResult decode(const MemorySequence& memory, std::size_t max_len = kDefaultMaxDecodeLength) const;

 private:
  // Inference binds parameters read-only; the store itself is never mutated.
  EncoderParams encoder_view() const;
  DecoderParams decoder_view() const;
  void validate() const;

  Vocab vocab_;
  ModelConfig config_;
  ParameterStore params_;
};

}  // namespace m2s
