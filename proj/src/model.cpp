#include "mem2seq/model.hpp"

#include <stdexcept>

namespace m2s {

Mem2Seq::Mem2Seq(Vocab vocab, ModelConfig config, std::uint64_t seed)
    : vocab_(std::move(vocab)), config_(config) {
  if (config_.hops == 0) throw std::invalid_argument("hop count must be positive");
  if (config_.dim == 0) throw std::invalid_argument("model dimension must be positive");
  Rng rng(seed);
  EncoderParams::create(params_, config_.hops, vocab_.size(), config_.dim, rng);
  DecoderParams::create(params_, config_.hops, vocab_.size(), config_.dim, rng);
}

Mem2Seq::Mem2Seq(Vocab vocab, ModelConfig config, ParameterStore params)
    : vocab_(std::move(vocab)), config_(config), params_(std::move(params)) {
  validate();
}

Mem2Seq::Mem2Seq(const Mem2Seq& other) = default;
Mem2Seq& Mem2Seq::operator=(const Mem2Seq& other) = default;

void Mem2Seq::validate() const {
  auto expect = [&](const std::string& name, std::vector<std::size_t> shape) {
    if (!params_.contains(name)) throw std::invalid_argument("missing parameter " + name);
    const Tensor& t = params_.get(name).value;
    if (t.shape() != shape) {
      throw ShapeError("parameter " + name + " has shape " + t.shape_string());
    }
  };
  const std::size_t v = vocab_.size();
  const std::size_t d = config_.dim;
  for (const char* side : {"enc", "dec"}) {
    for (std::size_t k = 1; k <= config_.hops + 1; ++k) expect(std::string(side) + ".C" + std::to_string(k), {v, d});
  }
  expect("enc.q1", {d});
  for (const char* gate : {"z", "r", "h"}) {
    expect(std::string("dec.gru.W_") + gate, {d, d});
    expect(std::string("dec.gru.U_") + gate, {d, d});
    expect(std::string("dec.gru.b_") + gate, {d});
  }
  expect("dec.W1", {v, 2 * d});
  const std::size_t expected = 2 * (config_.hops + 1) + 1 + 9 + 1;
  if (params_.size() != expected) {
    throw std::invalid_argument("parameter store holds " + std::to_string(params_.size()) +
                                " tensors, expected " + std::to_string(expected));
  }
}

EncoderParams Mem2Seq::encoder_view() const {
  return EncoderParams::bind(const_cast<ParameterStore&>(params_), config_.hops);
}

DecoderParams Mem2Seq::decoder_view() const {
  return DecoderParams::bind(const_cast<ParameterStore&>(params_), config_.hops);
}

Var Mem2Seq::loss(Graph& g, const Example& example, const DropoutConfig& dropout) {
  EncoderParams enc = encoder();
  DecoderParams dec = decoder();
  EncodeResult encoded = encode(g, example.memory, enc);
  DecoderMemory memory = embed_memory(g, example.memory, dec);
  return sequence_loss(g, example, encoded.output, memory, dec, dropout);
}

double Mem2Seq::evaluate_loss(const Example& example) const {
  Graph g(Graph::Mode::Inference);
  EncoderParams enc = encoder_view();
  DecoderParams dec = decoder_view();
  EncodeResult encoded = encode(g, example.memory, enc);
  DecoderMemory memory = embed_memory(g, example.memory, dec);
  return g.value(sequence_loss(g, example, encoded.output, memory, dec))[0];
}

DecodeResult Mem2Seq::decode(const MemorySequence& memory, std::size_t max_len) const {
  Graph g(Graph::Mode::Inference);
  EncoderParams enc = encoder_view();
  DecoderParams dec = decoder_view();
  EncodeResult encoded = encode(g, memory, enc);
  return greedy_decode(g, memory, encoded.output, dec, vocab_, max_len);
}

}  // namespace m2s
