#include "mem2seq/encoder.hpp"

#include <set>
#include <stdexcept>

#include "mem2seq/init.hpp"
#include "mem2seq/ops.hpp"

namespace m2s {

EmbeddingBank EmbeddingBank::create(ParameterStore& store, const std::string& prefix, std::size_t hops,
                                    std::size_t vocab_size, std::size_t dim, Rng& rng) {
  if (hops == 0) throw std::invalid_argument("hop count must be positive");
  for (std::size_t k = 1; k <= hops + 1; ++k) {
    store.add(prefix + ".C" + std::to_string(k), uniform_init({vocab_size, dim}, dim, rng));
  }
  return bind(store, prefix, hops);
}

EmbeddingBank EmbeddingBank::bind(ParameterStore& store, const std::string& prefix, std::size_t hops) {
  EmbeddingBank bank;
  for (std::size_t k = 1; k <= hops + 1; ++k) bank.matrices.push_back(&store.get(prefix + ".C" + std::to_string(k)));
  return bank;
}

EncoderParams EncoderParams::create(ParameterStore& store, std::size_t hops, std::size_t vocab_size,
                                    std::size_t dim, Rng& rng) {
  EmbeddingBank::create(store, "enc", hops, vocab_size, dim, rng);
  store.add("enc.q1", Tensor({dim}));
  return bind(store, hops);
}

EncoderParams EncoderParams::bind(ParameterStore& store, std::size_t hops) {
  return EncoderParams{hops, EmbeddingBank::bind(store, "enc", hops), &store.get("enc.q1")};
}

EncodeResult encode(Graph& g, const MemorySequence& memory, const EncoderParams& params) {
  if (memory.cells.empty()) throw std::invalid_argument("encode: empty memory");
  if (!tie_check(params)) throw ShapeError("encode: embedding bank does not hold hops+1 matrices");
  if (params.query->value.size() != params.bank.dim()) {
    throw ShapeError("encode: query dimension does not match embedding dimension");
  }

  const auto symbols = memory.symbol_lists();
  std::vector<Var> embedded;
  embedded.reserve(params.hops + 1);
  for (Parameter* c : params.bank.matrices) embedded.push_back(ops::embed_cells(g, g.param(*c), symbols));

  EncodeResult result;
  Var q = g.param(*params.query);
  result.queries.push_back(q);
  Var o;
  for (std::size_t k = 0; k < params.hops; ++k) {
    Var logits = ops::matvec(g, embedded[k], q);
    Var p = ops::softmax(g, logits, memory.valid_length());
    o = ops::matvec_t(g, embedded[k + 1], p);
    q = ops::add(g, q, o);
    result.attention.push_back(p);
    result.queries.push_back(q);
  }
  result.output = o;
  return result;
}

EncodeValues encode(const MemorySequence& memory, const EncoderParams& params) {
  Graph g(Graph::Mode::Inference);
  EncodeResult r = encode(g, memory, params);
  EncodeValues out;
  out.output = g.value(r.output);
  for (Var p : r.attention) out.attention.push_back(g.value(p));
  for (Var q : r.queries) out.queries.push_back(g.value(q));
  return out;
}

bool tie_check(const EmbeddingBank& bank, std::size_t hops) {
  if (hops == 0 || bank.matrices.size() != hops + 1) return false;
  std::set<const Parameter*> distinct;
  for (const Parameter* c : bank.matrices) {
    if (c == nullptr || c->value.rank() != 2) return false;
    if (!c->value.same_shape(bank.matrices.front()->value)) return false;
    distinct.insert(c);
  }
  return distinct.size() == hops + 1;
}

bool tie_check(const EncoderParams& params) { return tie_check(params.bank, params.hops); }

}  // namespace m2s
