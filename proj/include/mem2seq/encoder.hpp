#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mem2seq/graph.hpp"
#include "mem2seq/memory.hpp"
#include "mem2seq/rng.hpp"

namespace m2s {

/// Adjacent-tied embedding bank C1..C(K+1). Hop k attends with C(k) and
/// reads out with C(k+1).
struct EmbeddingBank {
  std::vector<Parameter*> matrices;

  std::size_t hops() const { return matrices.empty() ? 0 : matrices.size() - 1; }
  std::size_t dim() const { return matrices.front()->value.cols(); }

  /// Registers `<prefix>.C1` .. `<prefix>.C<hops+1>`, each vocab×dim.
  static EmbeddingBank create(ParameterStore& store, const std::string& prefix, std::size_t hops,
                              std::size_t vocab_size, std::size_t dim, Rng& rng);
  static EmbeddingBank bind(ParameterStore& store, const std::string& prefix, std::size_t hops);
};

struct EncoderParams {
  std::size_t hops = 0;
  EmbeddingBank bank;
  /// Initial query q1; trainable, starts at zero.
  Parameter* query = nullptr;

  static EncoderParams create(ParameterStore& store, std::size_t hops, std::size_t vocab_size,
                              std::size_t dim, Rng& rng);
  static EncoderParams bind(ParameterStore& store, std::size_t hops);
};

struct EncodeResult {
  /// o^K, handed to the decoder as h0.
  Var output;
  /// p^1..p^K over memory positions.
  std::vector<Var> attention;
  /// q^1..q^(K+1).
  std::vector<Var> queries;
};

/// Multi-hop read:
///   p^k = softmax_i(q^k · C^k(cell_i)),  o^k = Σ_i p^k_i C^(k+1)(cell_i),
///   q^(k+1) = q^k + o^k.
EncodeResult encode(Graph& g, const MemorySequence& memory, const EncoderParams& params);

struct EncodeValues {
  Tensor output;
  std::vector<Tensor> attention;
  std::vector<Tensor> queries;
};

/// Forward-only evaluation of encode().
EncodeValues encode(const MemorySequence& memory, const EncoderParams& params);

/// True iff the bank holds exactly hops+1 distinct, equally shaped matrices.
bool tie_check(const EncoderParams& params);
bool tie_check(const EmbeddingBank& bank, std::size_t hops);

}  // namespace m2s
