#include "mem2seq/decoder.hpp"

#include <stdexcept>

#include "mem2seq/init.hpp"
#include "mem2seq/ops.hpp"
#include "mem2seq/text.hpp"

namespace m2s {

DecoderParams DecoderParams::create(ParameterStore& store, std::size_t hops, std::size_t vocab_size,
                                    std::size_t dim, Rng& rng) {
  EmbeddingBank::create(store, "dec", hops, vocab_size, dim, rng);
  GruParams::create(store, "dec.gru", dim, dim, rng);
  store.add("dec.W1", uniform_init({vocab_size, 2 * dim}, 2 * dim, rng));
  return bind(store, hops);
}

DecoderParams DecoderParams::bind(ParameterStore& store, std::size_t hops) {
  return DecoderParams{hops, EmbeddingBank::bind(store, "dec", hops), GruParams::bind(store, "dec.gru"),
                       &store.get("dec.W1")};
}

DecoderMemory embed_memory(Graph& g, const MemorySequence& memory, const DecoderParams& params) {
  if (memory.cells.empty()) throw std::invalid_argument("decoder memory is empty");
  if (!tie_check(params.bank, params.hops)) throw ShapeError("decoder bank does not hold hops+1 matrices");
  DecoderMemory out;
  const auto symbols = memory.symbol_lists();
  for (Parameter* c : params.bank.matrices) out.embedded.push_back(ops::embed_cells(g, g.param(*c), symbols));
  out.valid = memory.valid_length();
  return out;
}

StepOutput decode_step(Graph& g, std::size_t prev_token, Var h_prev, const DecoderMemory& memory,
                       const DecoderParams& params, const DropoutConfig& dropout) {
  const std::size_t d = params.dim();
  if (g.value(h_prev).size() != d) {
    throw ShapeError("decode_step: state " + g.value(h_prev).shape_string() + " but model dimension " +
                     std::to_string(d));
  }
  if (memory.embedded.size() != params.hops + 1) throw ShapeError("decode_step: memory not embedded per hop");

  Var input = ops::sum_embeddings(g, g.param(*params.bank.matrices.front()), {prev_token});
  if (dropout.active()) input = ops::mul_const(g, input, dropout_mask(d, dropout.rate, *dropout.rng));

  StepOutput out;
  out.h = gru_cell(g, input, h_prev, params.gru);

  Var q = out.h;
  Var first_readout;
  for (std::size_t k = 0; k < params.hops; ++k) {
    Var logits = ops::matvec(g, memory.embedded[k], q);
    Var p = ops::softmax(g, logits, memory.valid);
    Var o = ops::matvec_t(g, memory.embedded[k + 1], p);
    if (k == 0) first_readout = o;
    q = ops::add(g, q, o);
    out.attention.push_back(p);
  }
  out.p_ptr = out.attention.back();

  Var h_proj = out.h;
  if (dropout.active()) h_proj = ops::mul_const(g, h_proj, dropout_mask(d, dropout.rate, *dropout.rng));
  Var features = ops::concat(g, h_proj, first_readout);
  out.p_vocab = ops::softmax(g, ops::matvec(g, g.param(*params.w1), features));
  return out;
}

DualDistribution read_distribution(const Graph& g, const StepOutput& step) {
  DualDistribution dd;
  dd.p_vocab = g.value(step.p_vocab);
  dd.p_ptr = g.value(step.p_ptr);
  for (Var p : step.attention) dd.attention.push_back(g.value(p));
  return dd;
}

SelectedToken select_token(const DualDistribution& dd, const MemorySequence& memory, const Vocab& vocab) {
  if (dd.p_ptr.size() != memory.size()) {
    throw ShapeError("select_token: pointer distribution over " + std::to_string(dd.p_ptr.size()) +
                     " positions, memory has " + std::to_string(memory.size()));
  }
  SelectedToken out;
  out.pointer_index = argmax(dd.p_ptr.values());
  out.vocab_index = argmax(dd.p_vocab.values());
  const MemoryCell& cell = memory.cells[out.pointer_index];
  if (out.pointer_index == memory.sentinel_index()) {
    out.word = vocab.word(out.vocab_index);
    return out;
  }
  if (cell.kind == CellKind::Sentinel || cell.kind == CellKind::Pad) {
    throw std::logic_error("select_token: pointer chose a " +
                           std::string(cell.kind == CellKind::Pad ? "padding" : "sentinel") +
                           " cell at index " + std::to_string(out.pointer_index) +
                           " but the sentinel is at " + std::to_string(memory.sentinel_index()));
  }
  out.word = cell.copy_word;
  out.copied = true;
  return out;
}

double step_loss(const DualDistribution& dd, const StepSupervision& sup) {
  return cross_entropy(dd.p_vocab.values(), sup.vocab_target) + cross_entropy(dd.p_ptr.values(), sup.pointer_target);
}

Var step_loss(Graph& g, const StepOutput& step, const StepSupervision& sup) {
  if (sup.pointer_target >= g.value(step.p_ptr).size()) {
    throw std::out_of_range("pointer target " + std::to_string(sup.pointer_target) + " outside memory");
  }
  return ops::add(g, ops::cross_entropy(g, step.p_vocab, sup.vocab_target),
                  ops::cross_entropy(g, step.p_ptr, sup.pointer_target));
}

Example make_example(const DialogSample& sample, const Vocab& vocab) {
  Example ex;
  ex.memory = build_memory(sample, vocab);
  ex.pointers = pointer_targets(ex.memory, sample.response);
  for (const auto& token : sample.response) ex.targets.push_back(vocab.id(symbol_form(token)));
  ex.targets.push_back(Vocab::kEos);
  ex.pointers.push_back(ex.memory.sentinel_index());
  return ex;
}

Var sequence_loss(Graph& g, const Example& example, Var encoder_out, const DecoderMemory& memory,
                  const DecoderParams& params, const DropoutConfig& dropout) {
  if (example.targets.empty()) throw std::invalid_argument("sequence_loss: empty response");
  if (example.pointers.size() != example.targets.size()) {
    throw std::invalid_argument("sequence_loss: pointer and vocabulary targets differ in length");
  }
  std::vector<Var> losses;
  Var h = encoder_out;
  std::size_t prev = Vocab::kSos;
  for (std::size_t t = 0; t < example.targets.size(); ++t) {
    if (example.targets[t] == Vocab::kPad) break;
    StepOutput step = decode_step(g, prev, h, memory, params, dropout);
    losses.push_back(step_loss(g, step, {example.targets[t], example.pointers[t]}));
    h = step.h;
    prev = example.targets[t];
  }
  if (losses.empty()) throw std::invalid_argument("sequence_loss: response is entirely padding");
  return ops::mean(g, losses);
}

DecodeResult greedy_decode(Graph& g, const MemorySequence& memory, Var encoder_out,
                           const DecoderParams& params, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("greedy_decode: max_len must be at least 1");
  const DecoderMemory embedded = embed_memory(g, memory, params);
  DecodeResult result;
  Var h = encoder_out;
  std::size_t prev = Vocab::kSos;
  for (std::size_t t = 0; t < max_len; ++t) {
    StepOutput step = decode_step(g, prev, h, embedded, params);
    DualDistribution dd = read_distribution(g, step);
    SelectedToken token = select_token(dd, memory, vocab);
    if (!token.copied && token.vocab_index == Vocab::kEos) break;

    DecodeStep record;
    record.token = token;
    for (const Tensor& p : dd.attention) record.attention.emplace_back(p.values().begin(), p.values().end());
    const Tensor& hv = g.value(step.h);
    record.query.assign(hv.values().begin(), hv.values().end());

    prev = token.copied ? vocab.id(symbol_form(token.word)) : token.vocab_index;
    h = step.h;
    result.words.push_back(token.word);
    result.steps.push_back(std::move(record));
  }
  return result;
}

}  // namespace m2s
